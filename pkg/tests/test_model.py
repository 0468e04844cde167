import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest
from pydantic import ValidationError

import extremix as xm
from extremix.model import (
    BlockCounts,
    BoundsReport,
    DecompReport,
    ExperimentReport,
    MeiReport,
    MevDiag,
    Signature,
    TailReport,
)

REPORTS = [
    BlockCounts,
    BoundsReport,
    DecompReport,
    ExperimentReport,
    MeiReport,
    MevDiag,
    TailReport,
]

SCHEMA_PATH = Path(__file__).parents[1] / "docs" / "report.schema.json"


def _collect(node: Any, key: str) -> set[str]:
    if isinstance(node, dict):
        found = {node[key]} if isinstance(node.get(key), str) else set()
        return found.union(*(_collect(v, key) for v in node.values()))
    if isinstance(node, list):
        return set().union(*(_collect(v, key) for v in node))
    return set()


def _shape(schema: dict[str, Any]) -> dict[str, Any]:
    """Field names, required fields, references and JSON types of a model schema."""
    props = schema.get("properties", {})
    return {
        "properties": sorted(props),
        "required": schema.get("required", []),
        "refs": {k: sorted(_collect(v, "$ref")) for k, v in props.items()},
        "types": {k: sorted(_collect(v, "type")) for k, v in props.items()},
    }


def test_committed_report_schema() -> None:
    committed = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    live = ExperimentReport.model_json_schema(mode="serialization")
    assert sorted(committed["$defs"]) == sorted(live["$defs"])
    assert _shape(committed) == _shape(live)
    for name, schema in live["$defs"].items():
        assert _shape(committed["$defs"][name]) == _shape(schema), name


@pytest.mark.parametrize("cls", REPORTS)
def test_schema(cls: type) -> None:
    assert cls.model_json_schema(mode="serialization")
    assert cls.model_json_schema(mode="validation")


def test_models_are_frozen() -> None:
    tau = xm.TauVector(values=(1.0, 2.0))
    with pytest.raises(ValidationError):
        tau.values = (3.0,)  # type: ignore[misc]
    series = xm.SeriesMatrix(data=np.ones((3, 2)))
    with pytest.raises(ValueError):
        series.data[0, 0] = 5.0


def test_repr_hides_defaults() -> None:
    assert repr(xm.SeriesMatrix(data=[[1.0]])).count("margin_tag") == 0
    assert "margin_tag='empirical'" in repr(
        xm.SeriesMatrix(data=[[1.0]], margin_tag="empirical")
    )


def test_tau_vector() -> None:
    assert xm.TauVector.model_validate(2).values == (2.0,)
    assert xm.TauVector.model_validate(np.array([1, 3])).values == (1.0, 3.0)
    assert xm.TauVector.model_validate((1, 3)).min_over(xm.IndexSet.full(2)) == 1.0
    for bad in [(0, 1), (-1.0,), (float("inf"),), ()]:
        with pytest.raises(ValidationError):
            xm.TauVector.model_validate(bad)


def test_index_set() -> None:
    J = xm.IndexSet.model_validate({3, 1})
    assert J.members == (1, 3)
    assert J.mask == 0b101
    assert xm.IndexSet.from_mask(0b101) == J
    assert str(J) == "{1,3}"
    assert len(J) == 2
    with pytest.raises(ValidationError, match="duplicate"):
        xm.IndexSet(members=(1, 1))
    with pytest.raises(ValidationError):
        xm.IndexSet(members=())
    with pytest.raises(ValidationError):
        xm.IndexSet(members=(0, 1))
    with pytest.raises(ValueError, match="1..2"):
        J.check_within(2)


def test_level_vector_analytic_is_exact() -> None:
    tau = xm.TauVector(values=(3.0,))
    xm.LevelVector(u=(1000 / 3,), tau=tau, policy="analytic_frechet", n=1000)
    with pytest.raises(ValidationError, match="expected"):
        xm.LevelVector(u=(333.0,), tau=tau, policy="analytic_frechet", n=1000)
    with pytest.raises(ValidationError, match="tau < n"):
        xm.LevelVector(u=(1.0,), tau=(1000.0,), policy="empirical_quantile", n=1000)


def test_block_scheme() -> None:
    b = xm.BlockScheme(n=10, k_n=3)
    assert b.r_n == 3
    assert b.block_ids().tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2]
    assert b.reshape(np.arange(10)).shape == (3, 3)
    with pytest.raises(ValidationError):
        xm.BlockScheme(n=10, k_n=11)
    with pytest.raises(ValidationError, match="floor"):
        xm.BlockScheme(n=10, k_n=3, r_n=4)
    with pytest.raises(ValueError):
        b.bounds(4)


def test_series_matrix() -> None:
    s = xm.SeriesMatrix(data=[1.0, 2.0, 3.0])
    assert (s.n, s.d) == (3, 1)
    assert s.model_dump()["data"] == [[1.0], [2.0], [3.0]]
    assert s == xm.SeriesMatrix(data=np.array([[1.0], [2.0], [3.0]]))
    with pytest.raises(ValidationError, match="Non-finite value at row 2"):
        xm.SeriesMatrix(data=[[1.0], [np.nan]])
    with pytest.raises(ValidationError, match="strictly positive"):
        xm.SeriesMatrix(data=[[0.0]], margin_tag="unit_frechet")
    with pytest.raises(ValidationError, match="non-unit"):
        xm.SeriesMatrix(data=[[1.0]], margin_tag="unit_frechet", scales=(2.0,))
    assert xm.SeriesMatrix(data=[[1.0, 1.0]]).frechet_scales == (1.0, 1.0)


def test_m4_spec_validation() -> None:
    spec = xm.M4Spec(d=2, signatures=[(1, 0, 1, 0.5), (1, 1, 1, 0.5), (2, 0, 2, 2.0)])
    assert spec.computed_sums() == (1.0, 2.0)
    assert spec.coefficients().shape == (2, 2, 2)
    assert spec.scaled_coefficients()[1, 0, 1] == 1.0
    assert xm.M4Spec.from_array(spec.coefficients()).computed_sums() == (1.0, 2.0)

    with pytest.raises(ValidationError, match="Duplicate"):
        xm.M4Spec(d=1, signatures=[(1, 0, 1, 0.5), (1, 0, 1, 0.5)])
    with pytest.raises(ValidationError, match="Invalid margin"):
        xm.M4Spec(d=1, signatures=[(1, 0, 2, 1.0)])
    with pytest.raises(ValidationError, match="Empty margin 2"):
        xm.M4Spec(d=2, signatures=[(1, 0, 1, 1.0)])
    with pytest.raises(ValidationError, match="do not match"):
        xm.M4Spec(d=1, signatures=[(1, 0, 1, 1.0)], margin_sums=(2.0,))
    with pytest.raises(ValidationError, match="unit_frechet_margins"):
        xm.M4Spec(d=1, signatures=[(1, 0, 1, 0.5)], unit_frechet_margins=True)
    with pytest.raises(ValidationError):
        Signature(l=0, k=0, j=1, a=1.0)


def test_seed_streams() -> None:
    a = xm.Seed(master=1, stream=0).rng().random(4)
    b = xm.Seed(master=1, stream=1).rng().random(4)
    c = xm.Seed(master=1, stream=0).child(0).rng().random(4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert xm.Seed.coerce(5) == xm.Seed(master=5)
    assert xm.Seed.coerce(None) == xm.Seed()
    with pytest.raises(ValidationError):
        xm.Seed(master=2**64)


def test_block_counts_total() -> None:
    c = BlockCounts(kind="union", J=[1], per_block=[0, 2, 1])
    assert c.total == 3
    assert c.k_n == 3
    with pytest.raises(ValidationError, match="total"):
        BlockCounts(kind="union", J=[1], per_block=[0, 2, 1], total=4)
    with pytest.raises(ValidationError, match="nonnegative"):
        BlockCounts(kind="union", J=[1], per_block=[-1])


def test_mev_diag_lookup() -> None:
    diag = MevDiag(source="H", pairs=((1, 2),), eps=(1.25,))
    assert diag.eps_for((2, 1)) == 1.25
    assert diag.chi_for((1, 2)) == 0.75
    with pytest.raises(KeyError):
        diag.eps_for((1, 3))
    with pytest.raises(ValidationError, match=r"outside \[1, 2\]"):
        MevDiag(source="H", pairs=((1, 2),), eps=(2.5,))
