"""Configuration-driven experiment runner and CSV ingestion.

Run ``extremix COMMAND --config experiment.toml``; see ``docs/cli.md``.
"""

from ._config import (
    EstimateSection,
    ExperimentConfig,
    ModelSection,
    OutputSection,
    RunSection,
    TailSection,
    load_config,
    resolve_seed,
)
from ._io import dumps_report, ingest_csv, write_series_csv
from ._main import main
from ._runner import COMMANDS, ExperimentRunner

__all__ = [
    "COMMANDS",
    "EstimateSection",
    "ExperimentConfig",
    "ExperimentRunner",
    "ModelSection",
    "OutputSection",
    "RunSection",
    "TailSection",
    "dumps_report",
    "ingest_csv",
    "load_config",
    "main",
    "resolve_seed",
    "write_series_csv",
]
