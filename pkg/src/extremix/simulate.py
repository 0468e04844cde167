"""Generators for M4 processes, the Gaussian-copula η-model and i.i.d. baselines."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np
from scipy import stats

from extremix.core import validate_m4_spec
from extremix.model import GaussFrechetSpec, M4Spec, Seed, SeriesMatrix

if TYPE_CHECKING:
    from typing import Any

logger = logging.getLogger(__name__)

_TINY = np.nextafter(0.0, 1.0)


def unit_frechet(rng: np.random.Generator, size: Any) -> np.ndarray:
    """Unit Fréchet draws by inversion, Z = −1/log(U) with U in (0, 1)."""
    u = rng.uniform(_TINY, 1.0, size=size)
    return -1.0 / np.log(u)


def simulate_m4(spec: M4Spec, n: int, seed: Seed | int | None = None) -> SeriesMatrix:
    """Simulate X_{i,j} = max_{l,k} a_{l,k,j}·Z_{l,i−k} for i = 1..n.

    K = max lag extra latent variables precede index 1, so the first row already
    has its full moving-maxima representation. Margin j is Fréchet with scale s_j.

    Examples
    --------
    >>> from extremix.model import M4Spec
    >>> spec = M4Spec(d=1, signatures=[(1, 0, 1, 1.0)])
    >>> simulate_m4(spec, 5, seed=1).margin_tag
    'unit_frechet'
    """
    if n < 1:
        raise ValueError(f"Invalid n {n!r}: must be >= 1")
    spec = validate_m4_spec(spec)
    a = spec.coefficients()
    L, K1, d = a.shape
    z = unit_frechet(Seed.coerce(seed).rng(), (L, n + K1 - 1))
    x = np.zeros((n, d))
    for li, k, j in zip(*np.nonzero(a)):
        # Z_{l, i-k} for i = 1..n sits at column K + i - k - 1
        start = K1 - 1 - k
        np.maximum(x[:, j], a[li, k, j] * z[li, start : start + n], out=x[:, j])

    sums = spec.margin_sums
    if spec.unit_frechet_margins or all(s == 1.0 for s in sums):
        return SeriesMatrix(data=x, margin_tag="unit_frechet")
    logger.debug("M4 margins are Fréchet with scales %s", sums)
    return SeriesMatrix(data=x, margin_tag="frechet", scales=sums)


def simulate_gauss_frechet(
    spec: GaussFrechetSpec, n: int, seed: Seed | int | None = None
) -> SeriesMatrix:
    """I.i.d. rows from a Gaussian copula with correlation ρ and unit-Fréchet margins.

    The joint survivor on the diagonal is regularly varying with index
    −1/η, η = (1+ρ)/2.
    """
    if n < 1:
        raise ValueError(f"Invalid n {n!r}: must be >= 1")
    rng = Seed.coerce(seed).rng()
    cov = np.array([[1.0, spec.rho], [spec.rho, 1.0]])
    g = rng.standard_normal((n, 2)) @ np.linalg.cholesky(cov).T
    # log Φ keeps the far upper tail finite
    x = -1.0 / stats.norm.logcdf(g)
    return SeriesMatrix(data=x, margin_tag="unit_frechet")


def simulate_iid_frechet(
    n: int, d: int, seed: Seed | int | None = None
) -> SeriesMatrix:
    """n×d independent unit Fréchet entries.

    >>> a = simulate_iid_frechet(10, 3, seed=4)
    >>> a == simulate_iid_frechet(10, 3, seed=4)
    True
    """
    if n < 1 or d < 1:
        raise ValueError(f"Invalid shape ({n!r}, {d!r}): n and d must be >= 1")
    x = unit_frechet(Seed.coerce(seed).rng(), (n, d))
    return SeriesMatrix(data=x, margin_tag="unit_frechet")


def block_maxima(series: SeriesMatrix, m: int) -> SeriesMatrix:
    """Componentwise maxima over consecutive blocks of length m.

    Returns floor(n/m) rows; the trailing remainder is discarded.

    >>> import numpy as np
    >>> s = SeriesMatrix(data=np.arange(10.0).reshape(10, 1))
    >>> block_maxima(s, 5).data.ravel().tolist()
    [4.0, 9.0]
    """
    if not 1 <= m <= series.n:
        raise ValueError(f"Invalid block size {m!r}: must lie in 1..n={series.n}")
    k = series.n // m
    maxima = series.data[: k * m].reshape(k, m, series.d).max(axis=1)
    return SeriesMatrix(data=maxima, margin_tag="unknown")
