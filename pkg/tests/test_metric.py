import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatdist.errors import MetricError
from flatdist.metric import (
    DistanceMatrix,
    FiniteMetricSpace,
    PointSet,
    euclidean_matrix,
    truncated_distance,
    validate_metric,
)


def triangle_violations(d):
    """Exhaustive triple scan, 0-based (i, j, k) with d[i,k] > d[i,j] + d[j,k], i < k."""
    n = len(d)
    out = set()
    for i, j, k in itertools.permutations(range(n), 3):
        if i < k and d[i][k] > d[i][j] + d[j][k] + 1e-12:
            out.add((i, j, k))
    return out


def test_two_point_metric_ok():
    assert validate_metric([[0, 1], [1, 0]]).ok


def test_example_metric_ok():
    rep = validate_metric([[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    assert rep.ok
    assert rep.to_dict() == {"ok": True}


def test_triangle_violation_reported():
    d = [[0, 1, 5], [1, 0, 3], [5, 3, 0]]
    rep = validate_metric(d)
    assert not rep.ok
    found = {v.indices for v in rep.violations if v.kind == "triangle"}
    assert found == triangle_violations(d) == {(0, 1, 2)}


@pytest.mark.parametrize("d, kind", [
    ([[0, 1], [2, 0]], "asymmetric"),
    ([[1, 1], [1, 0]], "diagonal"),
    ([[0, 0], [0, 0]], "nonpositive"),
    ([[0, -1], [-1, 0]], "nonpositive"),
    ([[0, np.inf], [np.inf, 0]], "nonfinite"),
    ([[0, 1, 2], [1, 0, 1]], "shape"),
])
def test_invariant_violations(d, kind):
    rep = validate_metric(d)
    assert not rep.ok
    assert kind in {v.kind for v in rep.violations}


def test_validate_never_raises_on_garbage():
    assert not validate_metric([["a", 1], [1, 0]]).ok
    assert not validate_metric(3.0).ok


def test_distance_matrix_rejects_invalid_with_report():
    with pytest.raises(MetricError) as info:
        DistanceMatrix([[0, 1, 5], [1, 0, 3], [5, 3, 0]])
    assert info.value.report is not None and not info.value.report.ok


def test_distance_matrix_read_only():
    m = DistanceMatrix([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        m.d[0, 1] = 3.0


def test_euclidean_line_example():
    pts = PointSet((0, 1, 2, 3), np.array([0, 1 / 3, 1 / 2, 3]))
    d = euclidean_matrix(pts).d
    assert d[0, 3] == 3.0
    assert d[1, 2] == pytest.approx(1 / 6, abs=1e-15)


def test_euclidean_single_point():
    d = euclidean_matrix(PointSet(("p",), np.array([[1.0, 2.0]]))).d
    assert d.shape == (1, 1) and d[0, 0] == 0.0


def test_euclidean_345():
    d = FiniteMetricSpace.euclidean([[0, 0], [3, 4]]).d
    assert d[0, 1] == 5.0


def test_euclidean_rejects_duplicates():
    with pytest.raises(MetricError):
        FiniteMetricSpace.euclidean([[0.0], [1.0], [0.0]])


def test_point_set_labels_distinct():
    with pytest.raises(ValueError):
        PointSet(("a", "a"))


@pytest.mark.parametrize("x, expected", [(3.0, 2.0), (0.5, 0.5), (2.0, 2.0), (0.0, 0.0)])
def test_truncated_distance(x, expected):
    assert truncated_distance(x) == expected


def test_space_json_roundtrip():
    space = FiniteMetricSpace.from_json(
        {"points": {"labels": ["a", "b", "c"]}, "metric": {"type": "matrix", "d": [[0, 1, 2], [1, 0, 3], [2, 3, 0]]}})
    again = FiniteMetricSpace.from_json(space.to_json())
    assert np.array_equal(space.d, again.d)
    assert again.index("c") == 2
    assert space.index(1) == 1


def test_space_json_euclidean():
    space = FiniteMetricSpace.from_json({"points": {"coords": [[0], [2]]}, "metric": {"type": "euclidean"}})
    assert space.d[0, 1] == 2.0
    assert np.array_equal(space.line_coords, [0.0, 2.0])


def test_unknown_label():
    space = FiniteMetricSpace.from_matrix([[0, 1], [1, 0]], labels=["a", "b"])
    with pytest.raises(MetricError):
        space.index("z")


coords = st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=2, max_size=7, unique=True)


@given(coords)
def test_truncation_preserves_metric(pts):
    d = FiniteMetricSpace.euclidean(np.array(pts, dtype=float) / 7).d
    assert validate_metric(truncated_distance(d)).ok


@given(coords, st.randoms(use_true_random=False))
def test_euclidean_permutation_equivariant(pts, rnd):
    p = np.array(pts, dtype=float)
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    d = FiniteMetricSpace.euclidean(p).d
    dp = FiniteMetricSpace.euclidean(p[perm]).d
    assert np.array_equal(dp, d[np.ix_(perm, perm)])


@given(st.lists(st.lists(st.integers(0, 6), min_size=4, max_size=4), min_size=4, max_size=4))
def test_report_matches_triple_scan(rows):
    d = np.array(rows, dtype=float)
    d = np.triu(d, 1) + np.triu(d, 1).T
    rep = validate_metric(d)
    off = d[~np.eye(4, dtype=bool)]
    expected_ok = bool(np.all(off > 0)) and not triangle_violations(d)
    assert rep.ok == expected_ok
    if np.all(off > 0):
        assert {v.indices for v in rep.violations if v.kind == "triangle"} == triangle_violations(d)
