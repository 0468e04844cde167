"""Immutable domain models shared by every extremix module.

All models derive from `FrozenModel`, a frozen pydantic model whose repr hides
default-valued fields.

Inputs
------
- TauVector: rates τ ∈ (0, ∞)^d
- IndexSet: nonempty 1-based subset J of {1..d}
- M4Spec / Signature: maxima-of-moving-maxima coefficients a_{l,k,j}
- GaussFrechetSpec: Gaussian copula with unit-Fréchet margins
- SeriesMatrix: an n×d sample
- Seed: reproducible random stream

Derived
-------
- LevelVector: thresholds u_j under a level policy
- BlockScheme: k_n blocks of length r_n

Reports
-------
BlockCounts, ThetaEstimate, MeiReport, InvarianceTable, TailCurve, TailReport,
MevDiag, BoundsReport, DecompReport, ExperimentReport.

Examples
--------
>>> from extremix.model import M4Spec
>>> spec = M4Spec(d=1, signatures=[(1, 0, 1, 1.0)])
>>> spec.max_lag, spec.scales
(0, (1.0,))
"""

from ._array import CountVector, Matrix2D
from ._base import FrozenModel
from ._core import (
    BlockScheme,
    CountKind,
    IndexSet,
    LevelPolicy,
    LevelVector,
    MarginTag,
    SeriesMatrix,
    TauVector,
)
from ._m4 import GaussFrechetSpec, M4Spec, Signature
from ._reports import (
    BlockCounts,
    BoundsReport,
    DecompReport,
    ExperimentReport,
    InvarianceRow,
    InvarianceTable,
    MeiReport,
    MevDiag,
    TailCurve,
    TailReport,
    ThetaEstimate,
)
from ._seed import Seed

__all__ = [
    "BlockCounts",
    "BlockScheme",
    "BoundsReport",
    "CountKind",
    "CountVector",
    "DecompReport",
    "ExperimentReport",
    "FrozenModel",
    "GaussFrechetSpec",
    "IndexSet",
    "InvarianceRow",
    "InvarianceTable",
    "LevelPolicy",
    "LevelVector",
    "M4Spec",
    "MarginTag",
    "Matrix2D",
    "MeiReport",
    "MevDiag",
    "Seed",
    "SeriesMatrix",
    "Signature",
    "TailCurve",
    "TailReport",
    "TauVector",
    "ThetaEstimate",
]
