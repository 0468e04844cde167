"""Experiment configuration: TOML sections validated by pydantic."""

from __future__ import annotations

import logging
import os
import tomllib
from pathlib import Path
from typing import Annotated, Any, ClassVar, Literal

from annotated_types import Ge, Gt, Lt
from pydantic import ConfigDict, Field, model_validator

from extremix.estimate import DEFAULT_BOOTSTRAP, DEFAULT_U_GRID
from extremix.model import (
    FrozenModel,
    GaussFrechetSpec,
    LevelPolicy,
    M4Spec,
    Signature,
)
from extremix.model._base import ExtendedConfig
from extremix.model._seed import U64_MAX

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "EXTREMIX_SEED"
"""Overrides the configured RNG seed (but not --seed)."""

ModelKind = Literal["m4", "gauss_frechet", "iid", "csv"]

_REQUIRED: dict[str, set[str]] = {
    "m4": {"d", "signatures"},
    "gauss_frechet": {"rho"},
    "iid": {"d"},
    "csv": {"path"},
}
_PARAMS = {"d", "signatures", "unit_frechet_margins", "rho", "path"}
_ALLOWED: dict[str, set[str]] = {
    "m4": {"d", "signatures", "unit_frechet_margins"},
    "gauss_frechet": {"rho"},
    "iid": {"d"},
    "csv": {"path"},
}


class _Section(FrozenModel):
    model_config: ClassVar[ConfigDict] = ExtendedConfig(
        frozen=True,
        validate_default=True,
        repr_exclude_defaults=True,
        extra="forbid",
    )


class ModelSection(_Section):
    """``[model]``: exactly one data source and its parameters."""

    kind: ModelKind
    d: Annotated[int, Ge(1)] | None = None
    signatures: list[tuple[int, int, int, float]] | None = Field(
        default=None, description="[[l, k, j, a], ...] with 1-based l and j."
    )
    unit_frechet_margins: bool = False
    rho: Annotated[float, Gt(-1), Lt(1)] | None = None
    path: Path | None = None

    @model_validator(mode="before")
    @classmethod
    def _check_params(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "kind" not in data:
            return data
        kind = data["kind"]
        if kind not in _REQUIRED:
            return data  # the Literal reports it
        given = {k for k in data if k in _PARAMS}
        if missing := _REQUIRED[kind] - given:
            raise ValueError(f"model kind {kind!r} needs {sorted(missing)}")
        if extra := given - _ALLOWED[kind]:
            raise ValueError(f"model kind {kind!r} does not take {sorted(extra)}")
        return data

    @property
    def dim(self) -> int:
        if self.kind == "gauss_frechet":
            return 2
        return self.d or 0

    def m4_spec(self) -> M4Spec:
        if self.kind != "m4":
            raise ValueError(f"model kind {self.kind!r} has no M4 spec")
        return M4Spec(
            d=self.d,
            signatures=tuple(map(Signature.model_validate, self.signatures or ())),
            unit_frechet_margins=self.unit_frechet_margins,
        )

    def gauss_spec(self) -> GaussFrechetSpec:
        if self.kind != "gauss_frechet":
            raise ValueError(f"model kind {self.kind!r} has no Gaussian spec")
        return GaussFrechetSpec(rho=self.rho)


class RunSection(_Section):
    """``[run]``"""

    n: Annotated[int, Ge(1)] = 100_000
    seed: Annotated[int, Ge(0), Field(le=U64_MAX)] | None = None
    k_n: Annotated[int, Ge(1)] | None = None
    replicates: Annotated[int, Ge(1)] = 1
    bootstrap: Annotated[int, Ge(0)] = DEFAULT_BOOTSTRAP


class EstimateSection(_Section):
    """``[estimate]``"""

    tau_grid: list[list[Annotated[float, Gt(0)]]] | None = None
    level_policy: LevelPolicy | None = None
    J: list[Annotated[int, Ge(1)]] | None = None


class TailSection(_Section):
    """``[tail]``"""

    pairs: list[tuple[int, int]] = Field(default_factory=lambda: [(1, 2)])
    u_grid: list[Annotated[float, Gt(0), Lt(1)]] = Field(
        default_factory=lambda: list(DEFAULT_U_GRID)
    )
    block_size: Annotated[int, Ge(1)] | None = Field(
        default=None,
        description="Analyse block maxima of this size instead of raw rows.",
    )
    eta_k: Annotated[int, Ge(10)] | None = None
    extrapolate: bool = False


class OutputSection(_Section):
    """``[output]``: file names, relative to the output directory."""

    json_file: str = Field(default="report.json", alias="json")
    theta_csv: str = "theta_surface.csv"
    curves_csv: str = "tail_curves.csv"
    series_csv: str = "series.csv"


class ExperimentConfig(_Section):
    """A complete experiment description.

    Examples
    --------
    >>> cfg = ExperimentConfig.model_validate({"model": {"kind": "iid", "d": 2}})
    >>> cfg.run.n, cfg.taus()
    (100000, [(1.0, 1.0)])
    """

    model: ModelSection
    run: RunSection = Field(default_factory=RunSection)
    estimate: EstimateSection = Field(default_factory=EstimateSection)
    tail: TailSection = Field(default_factory=TailSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _check(self) -> ExperimentConfig:
        d = self.model.dim
        if self.model.kind == "csv":
            return self
        for tau in self.estimate.tau_grid or ():
            if len(tau) != d:
                raise ValueError(f"tau_grid entry {tau!r} does not have d={d} values")
        for pair in self.tail.pairs:
            if d < 2 or not all(1 <= j <= d for j in pair) or pair[0] == pair[1]:
                raise ValueError(f"Invalid tail pair {pair!r} for d={d}")
        if self.run.k_n is not None and self.run.k_n > self.run.n:
            raise ValueError(f"k_n={self.run.k_n} exceeds n={self.run.n}")
        return self

    def taus(self, d: int | None = None) -> list[tuple[float, ...]]:
        """The τ grid; all ones when not configured."""
        if self.estimate.tau_grid:
            return [tuple(float(x) for x in t) for t in self.estimate.tau_grid]
        return [(1.0,) * (d or self.model.dim)]


def load_config(path: str | os.PathLike[str]) -> ExperimentConfig:
    """Parse and validate a TOML experiment file.

    Relative ``[model] path`` entries are resolved against the file's directory.
    """
    path = Path(path)
    with path.open("rb") as f:
        data = tomllib.load(f)
    model = data.get("model")
    if isinstance(model, dict) and isinstance(model.get("path"), str):
        p = Path(model["path"])
        if not p.is_absolute():
            model["path"] = str(path.parent / p)
    cfg = ExperimentConfig.model_validate(data)
    logger.debug("Loaded config %s: %r", path, cfg)
    return cfg


def resolve_seed(flag: int | None, config: ExperimentConfig | None) -> int:
    """The RNG seed, in order of priority.

    1. The --seed flag.
    2. The EXTREMIX_SEED environment variable.
    3. ``[run] seed`` in the config file.
    4. 0.
    """
    if flag is not None:
        seed = flag
    elif env := os.getenv(SEED_ENV_VAR, "").strip():
        try:
            seed = int(env)
        except ValueError:
            msg = f"Invalid {SEED_ENV_VAR} {env!r}: not an integer"
            raise ValueError(msg) from None
    elif config is not None and config.run.seed is not None:
        seed = config.run.seed
    else:
        seed = 0
    if not 0 <= seed <= U64_MAX:
        raise ValueError(f"Invalid seed {seed!r}: must be an unsigned 64-bit integer")
    return seed
