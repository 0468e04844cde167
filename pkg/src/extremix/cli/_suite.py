"""The reference M4 processes used by ``extremix reproduce-paper``.

- `SHIFTED_LAGS`: one factor reaching X1 at lags 0, 2 and X2 at lags 1, 2, 3.
  Margin sums are (1, 1.3), so X2 is Fréchet with scale 1.3.
- `SINGLE_FACTOR`: one factor over lags 0..2 with unit margins; χ^Ĥ = 7/8, χ^H = 1.
- `TWO_FACTOR`: two factors, the second acting at lag 0 only; χ^H = 6/7.
"""

from __future__ import annotations

from extremix.model import M4Spec

SHIFTED_LAGS = M4Spec(
    d=2,
    signatures=[
        (1, 0, 1, 0.7),
        (1, 2, 1, 0.3),
        (1, 1, 2, 0.7),
        (1, 2, 2, 0.1),
        (1, 3, 2, 0.5),
    ],
)

SINGLE_FACTOR = M4Spec(
    d=2,
    signatures=[
        (1, 0, 1, 6 / 8),
        (1, 0, 2, 5 / 8),
        (1, 1, 1, 1 / 8),
        (1, 1, 2, 1 / 8),
        (1, 2, 1, 1 / 8),
        (1, 2, 2, 2 / 8),
    ],
    unit_frechet_margins=True,
)

TWO_FACTOR = M4Spec(
    d=2,
    signatures=[
        (1, 0, 1, 6 / 8),
        (1, 0, 2, 5 / 8),
        (1, 1, 1, 1 / 8),
        (1, 1, 2, 1 / 8),
        (2, 0, 1, 1 / 8),
        (2, 0, 2, 2 / 8),
    ],
    unit_frechet_margins=True,
)

REFERENCE_SPECS = {
    "shifted_lags": SHIFTED_LAGS,
    "single_factor": SINGLE_FACTOR,
    "two_factor": TWO_FACTOR,
}

# Published inputs for SHIFTED_LAGS, kept beside the exact values they differ from
STATED_THETAS = (0.7, 0.5)
STATED_STAR2_TERM = 0.1

# θ(cτ) = θ(τ); Monte-Carlo checks run at MC_TAU_SCALE·τ
MC_TAU_SCALE = 100.0
INVARIANCE_TAUS = ((1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (3.0, 2.0))
GAUSS_RHO = 0.5
BLOCK_SIZE = 1000
