"""Block-level counts of the three exceedance processes N, N* and N**.

For a set of margins J and thresholds u:

- ``union``: index i counts if X_{ij} > u_j for some j ∈ J
- ``star``:  index i counts if X_{ij} > u_j for every j ∈ J
- ``star2``: index i counts if every margin in J exceeds its own level at the
  common rate ⋀_{j∈J} τ_j. With unit-Fréchet analytic levels this is
  ⋀_{j∈J} X_{ij} > ⋁_{j∈J} u_j.

Exceedance is strict; ties with a threshold are non-exceedances.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from extremix._errors import UndefinedEstimateError
from extremix.core import as_index_set, common_levels
from extremix.model import BlockCounts, IndexSet

if TYPE_CHECKING:
    from extremix.core import IndexLike
    from extremix.model import BlockScheme, CountKind, LevelVector, SeriesMatrix

logger = logging.getLogger(__name__)

MAX_SUBSET_DIM = 16


def _check_dims(series: SeriesMatrix, levels: LevelVector, blocks: BlockScheme) -> None:
    if levels.d != series.d:
        raise ValueError(f"levels have dimension {levels.d}, series has {series.d}")
    if blocks.n != series.n:
        raise ValueError(f"block scheme is for n={blocks.n}, series has n={series.n}")


def exceedances(series: SeriesMatrix, levels: LevelVector) -> np.ndarray:
    """Boolean (n, d) array of strict exceedances X_{ij} > u_j."""
    return series.data > levels.as_array()


def event_indicator(
    series: SeriesMatrix, levels: LevelVector, J: IndexSet, kind: CountKind
) -> np.ndarray:
    """Per-index indicator (length n) of the kind-event for margins J."""
    cols = list(J.indices)
    if kind == "union":
        return exceedances(series, levels)[:, cols].any(axis=1)
    if kind == "star":
        return exceedances(series, levels)[:, cols].all(axis=1)
    if kind == "star2":
        common = common_levels(series, levels, J)
        return exceedances(series, common)[:, cols].all(axis=1)
    raise ValueError(f"Invalid count kind {kind!r}")


def count_blocks(
    series: SeriesMatrix,
    levels: LevelVector,
    J: IndexLike | None,
    kind: CountKind,
    blocks: BlockScheme,
) -> BlockCounts:
    """Count kind-events of margins J within each block.

    Examples
    --------
    >>> import numpy as np
    >>> from extremix.core import analytic_levels, make_blocks
    >>> from extremix.model import SeriesMatrix
    >>> s = SeriesMatrix(data=np.array([[3.0, 1], [1, 3], [3, 3]]))
    >>> u = analytic_levels(3, (1.5, 1.5))  # u = (2, 2)
    >>> [count_blocks(s, u, None, k, make_blocks(3, 1)).total
    ...  for k in ("union", "star", "star2")]
    [3, 1, 1]
    """
    _check_dims(series, levels, blocks)
    J = as_index_set(J, series.d)
    events = event_indicator(series, levels, J, kind)
    per_block = blocks.reshape(events).sum(axis=1)
    return BlockCounts(kind=kind, J=J, per_block=per_block)


def count_all_subsets(
    series: SeriesMatrix, levels: LevelVector, blocks: BlockScheme
) -> dict[IndexSet, dict[CountKind, BlockCounts]]:
    """Union and star block counts of every nonempty J ⊆ {1..d} in one pass.

    Each covered index is classified by the bitmask of margins above their own
    level; only indices with a nonzero mask are kept.
    """
    _check_dims(series, levels, blocks)
    d = series.d
    if d > MAX_SUBSET_DIM:
        raise ValueError(f"count_all_subsets supports d <= {MAX_SUBSET_DIM}, got {d}")
    exc = exceedances(series, levels)[: blocks.used]
    bits = exc.astype(np.int64) @ (np.int64(1) << np.arange(d, dtype=np.int64))
    rows = np.flatnonzero(bits)
    block_of = rows // blocks.r_n
    if rows.size:
        # collapse to distinct (block, mask) pairs with multiplicities
        pairs, mult = np.unique(
            np.stack([block_of, bits[rows]], axis=1), axis=0, return_counts=True
        )
    else:
        pairs, mult = np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64)
    pblock, pmask = pairs[:, 0], pairs[:, 1]

    out: dict[IndexSet, dict[CountKind, BlockCounts]] = {}
    for mask in range(1, 1 << d):
        J = IndexSet.from_mask(mask)
        hit = pmask & mask
        union = np.bincount(pblock, weights=mult * (hit != 0), minlength=blocks.k_n)
        star = np.bincount(pblock, weights=mult * (hit == mask), minlength=blocks.k_n)
        out[J] = {
            "union": BlockCounts(kind="union", J=J, per_block=union.astype(np.int64)),
            "star": BlockCounts(kind="star", J=J, per_block=star.astype(np.int64)),
        }
    logger.debug("Counted %d index sets over %d blocks", len(out), blocks.k_n)
    return out


def nonzero_block_fraction(
    counts: BlockCounts, blocks: BlockScheme | None = None
) -> int:
    """Number of blocks with at least one event, the k_n·P̂(N_{r_n} > 0) estimate.

    >>> from extremix.model import BlockCounts
    >>> nonzero_block_fraction(BlockCounts(kind="union", J=[1], per_block=[0, 2, 0, 1]))
    2
    """
    if blocks is not None and blocks.k_n != counts.k_n:
        raise ValueError(f"counts have {counts.k_n} blocks, scheme has {blocks.k_n}")
    return int(np.count_nonzero(counts.per_block))


def mean_cluster_size(counts: BlockCounts) -> float:
    """Mean block count among blocks with at least one event.

    >>> from extremix.model import BlockCounts
    >>> mean_cluster_size(BlockCounts(kind="union", J=[1], per_block=[0, 2, 0, 1]))
    1.5
    """
    nonzero = nonzero_block_fraction(counts)
    if nonzero == 0:
        raise UndefinedEstimateError(
            f"Mean cluster size undefined: no {counts.kind} events for J={counts.J}"
        )
    return counts.total / nonzero
