"""Regenerate docs/report.schema.json, the JSON schema of `report.json`.

The schema is committed. Rerun after changing a report model:

    python docs/gen_schema.py

tests/test_model.py fails while the committed schema and the models disagree.
"""

from __future__ import annotations

import json
from pathlib import Path

from extremix.model import ExperimentReport

SCHEMA_PATH = Path(__file__).parent / "report.schema.json"


def main() -> None:
    schema = ExperimentReport.model_json_schema(mode="serialization")
    text = json.dumps(schema, indent=2, ensure_ascii=False, sort_keys=True)
    SCHEMA_PATH.write_text(text + "\n", encoding="utf-8")
    print(f"Wrote {SCHEMA_PATH}")


if __name__ == "__main__":
    main()
