import sys

from extremix.cli import main

sys.exit(main())
