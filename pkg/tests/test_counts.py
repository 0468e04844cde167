import numpy as np
import pytest

import extremix as xm
from extremix.core import make_blocks, make_levels
from extremix.counts import (
    count_all_subsets,
    event_indicator,
    exceedances,
    nonzero_block_fraction,
)
from extremix.model import BlockCounts


def test_hand_counts(small_series: xm.SeriesMatrix) -> None:
    levels = make_levels(small_series, (1, 1))
    assert levels.u == (8.0, 8.0)
    blocks = make_blocks(8)
    assert (blocks.k_n, blocks.r_n) == (2, 4)

    union = xm.count_blocks(small_series, levels, None, "union", blocks)
    star = xm.count_blocks(small_series, levels, None, "star", blocks)
    star2 = xm.count_blocks(small_series, levels, None, "star2", blocks)
    assert union.per_block.tolist() == [3, 1]
    assert star.per_block.tolist() == [1, 0]
    assert star2.per_block.tolist() == [1, 0]
    assert xm.count_blocks(small_series, levels, [2], "union", blocks).total == 2


def test_strict_exceedance() -> None:
    s = xm.SeriesMatrix(data=[[2.0], [2.0000001]], margin_tag="unit_frechet")
    levels = make_levels(s, (1,))
    assert exceedances(s, levels).ravel().tolist() == [False, True]


def test_star2_uses_common_level() -> None:
    # at τ = (1, 4) the levels are (4, 1) but N** compares both margins to 4
    data = [[5.0, 3.0], [5.0, 5.0], [1, 1], [1, 1]]
    s = xm.SeriesMatrix(data=data, margin_tag="unit_frechet")
    levels = make_levels(s, (1, 4))
    J = xm.IndexSet.full(2)
    assert event_indicator(s, levels, J, "star").tolist() == [True, True, False, False]
    star2 = event_indicator(s, levels, J, "star2")
    assert star2.tolist() == [False, True, False, False]


def test_count_ordering_random(shifted_series: xm.SeriesMatrix) -> None:
    blocks = make_blocks(shifted_series.n)
    for tau in [(1, 1), (2, 1), (1, 3), (0.5, 2)]:
        levels = make_levels(shifted_series, tau)
        u = xm.count_blocks(shifted_series, levels, None, "union", blocks).per_block
        s = xm.count_blocks(shifted_series, levels, None, "star", blocks).per_block
        s2 = xm.count_blocks(shifted_series, levels, None, "star2", blocks).per_block
        assert (s2 <= s).all()
        assert (s <= u).all()


def test_count_all_subsets_matches_count_blocks(
    shifted_series: xm.SeriesMatrix,
) -> None:
    blocks = make_blocks(shifted_series.n, 50)
    levels = make_levels(shifted_series, (2, 1))
    table = count_all_subsets(shifted_series, levels, blocks)
    assert len(table) == 3
    for J, kinds in table.items():
        for kind in ("union", "star"):
            expected = xm.count_blocks(shifted_series, levels, J, kind, blocks)
            assert kinds[kind] == expected


def test_count_all_subsets_without_events() -> None:
    s = xm.SeriesMatrix(data=np.ones((10, 2)), margin_tag="unit_frechet")
    table = count_all_subsets(s, make_levels(s, (1, 1)), make_blocks(10, 2))
    assert all(c["union"].total == 0 for c in table.values())


def test_mismatched_inputs(small_series: xm.SeriesMatrix) -> None:
    levels = make_levels(small_series, (1, 1))
    with pytest.raises(ValueError, match="block scheme"):
        xm.count_blocks(small_series, levels, None, "union", make_blocks(9))
    with pytest.raises(ValueError, match="count kind"):
        xm.count_blocks(
            small_series, levels, None, "both", make_blocks(8)  # type: ignore[arg-type]
        )


def test_cluster_size() -> None:
    c = BlockCounts(kind="union", J=[1], per_block=[3, 0, 1, 0])
    assert nonzero_block_fraction(c) == 2
    assert xm.mean_cluster_size(c) == 2.0
    empty = BlockCounts(kind="star", J=[1, 2], per_block=[0, 0])
    with pytest.raises(xm.UndefinedEstimateError):
        xm.mean_cluster_size(empty)
    with pytest.raises(ValueError, match="blocks"):
        nonzero_block_fraction(c, make_blocks(9, 3))
