"""CSV ingestion and the report writers used by the runner."""

from __future__ import annotations

import json
import logging
import math
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd

from extremix.model import SeriesMatrix

if TYPE_CHECKING:
    import os
    from collections.abc import Iterable, Mapping
    from pathlib import Path

    from extremix.model import ExperimentReport, MeiReport, TailReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def ingest_csv(path: str | os.PathLike[str]) -> SeriesMatrix:
    """Read a comma-separated file (header row, numeric body) into a series.

    Rows are taken in file order. The result is tagged ``empirical``.

    Raises
    ------
    ValueError
        For an empty file, a header without rows, ragged rows or a non-numeric
        cell (reported by data row and column name).

    Examples
    --------
    >>> import io
    >>> ingest_csv(io.StringIO("a,b\\n1,2\\n3,4\\n5,6\\n")).data.shape
    (3, 2)
    """
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ValueError(f"Empty file: {path}") from None
    except pd.errors.ParserError as e:
        raise ValueError(f"Ragged rows in {path}: {e}") from None
    if raw.shape[0] == 0:
        raise ValueError(f"empty series: {path} has a header but no data rows")
    if raw.isna().any().any():
        row = int(np.flatnonzero(raw.isna().any(axis=1).to_numpy())[0]) + 1
        raise ValueError(f"Ragged rows in {path}: data row {row} has too few fields")

    for col in raw.columns:
        parsed = pd.to_numeric(raw[col], errors="coerce")
        if bad := np.flatnonzero(parsed.isna().to_numpy()).tolist():
            cell = raw[col].iloc[bad[0]]
            raise ValueError(
                f"Non-numeric cell {cell!r} at data row {bad[0] + 1}, column {col!r}"
            )

    if hasattr(path, "seek"):
        path.seek(0)  # type: ignore[union-attr]
    frame = pd.read_csv(
        path, dtype=float, float_precision="round_trip", skipinitialspace=True
    )
    logger.debug("Read %d x %d series from %s", *frame.shape, path)
    return SeriesMatrix(data=frame.to_numpy(dtype=float), margin_tag="empirical")


def write_series_csv(series: SeriesMatrix, path: Path) -> Path:
    """Write a series with columns ``x1..xd``, exactly re-readable by `ingest_csv`."""
    cols = [f"x{j}" for j in range(1, series.d + 1)]
    pd.DataFrame(series.data, columns=cols).to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return path


def _json(obj: Any, indent: int, level: int) -> str:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, bool | np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, int | np.integer):
        return str(int(obj))
    if isinstance(obj, float | np.floating):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return _json_str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{_json_str(str(k))}: {_json(v, indent, level + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, list | tuple | np.ndarray):
        if len(obj) == 0:
            return "[]"
        items = [f"{inner}{_json(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"Cannot serialize {type(obj).__name__} to JSON")


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def dumps_report(data: Any, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits.

    Non-finite floats become ``null``. The output depends only on `data`.

    >>> print(dumps_report({"x": 0.1, "y": [1, None]}))
    {
      "x": 0.10000000000000001,
      "y": [
        1,
        null
      ]
    }
    """
    return _json(data, indent, 0) + "\n"


def write_report_json(report: ExperimentReport, path: Path) -> Path:
    path.write_text(dumps_report(report.model_dump(mode="python")), encoding="utf-8")
    return path


def theta_surface_frame(reports: Iterable[tuple[int, MeiReport]]) -> pd.DataFrame:
    """One row per (replicate, τ) with the three θ̂ and their rates."""
    rows: list[Mapping[str, Any]] = []
    for rep, m in reports:
        row: dict[str, Any] = {"replicate": rep}
        row.update({f"tau{j}": t for j, t in enumerate(m.tau.values, 1)})
        row.update(
            J=str(m.J),
            theta=m.theta_hat,
            theta_star=m.theta_star_hat,
            theta_star2=m.theta_star2_hat,
            gamma=m.gamma_hat,
            gamma_star=m.gamma_star_hat,
            tau_star2=m.tau_star2_hat,
            se_theta=m.standard_errors.get("theta_hat"),
            se_gamma=m.standard_errors.get("gamma_hat"),
            chain_ok=m.chain_ok,
        )
        rows.append(row)
    return pd.DataFrame(rows)


def tail_curves_frame(reports: Iterable[TailReport]) -> pd.DataFrame:
    """Long format: pair, measure, u, value, joint exceedances."""
    rows = [
        {
            "pair": f"{t.pair[0]},{t.pair[1]}",
            "measure": curve.measure,
            "u": u,
            "value": v,
            "joint_exceedances": nj,
        }
        for t in reports
        for curve in (t.chi, t.chibar)
        for u, v, nj in zip(curve.u, curve.values, curve.joint_exceedances)
    ]
    return pd.DataFrame(
        rows, columns=["pair", "measure", "u", "value", "joint_exceedances"]
    )


def write_frame_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path
