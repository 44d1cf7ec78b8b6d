import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatdist.errors import MeasureError
from flatdist.measures import (
    DensityMeasure1D,
    MolecularMeasure,
    ball_mass,
    density_from_json,
    exponential_density,
    gaussian_density,
    jordan_decompose,
    mass_radius,
    merge_and_normalize,
    molecular_from_json,
    molecular_on_line,
    molecular_to_json,
    polynomial_density,
    total_variation,
    uniform_density,
)
from flatdist.metric import FiniteMetricSpace


@pytest.fixture
def line4():
    return FiniteMetricSpace.euclidean([0.0, 1 / 3, 1 / 2, 3.0], labels=["a", "b", "c", "d"])


def test_merge_cancels_to_zero(line4):
    assert merge_and_normalize(line4, ["a", "a"], [1.0, -1.0]).is_zero


def test_merge_sums_coincident(line4):
    m = merge_and_normalize(line4, ["a", "b", "a"], [1.0, 2.0, 3.0])
    assert m.indices.tolist() == [0, 1]
    assert m.weights.tolist() == [4.0, 2.0]


def test_merge_keeps_distinct_atoms(line4):
    m = merge_and_normalize(line4, [0, 1, 2, 3], [0.5, 2.0, 0.2, 1 / 3])
    assert len(m) == 4
    assert m.weights.tolist() == [0.5, 2.0, 0.2, 1 / 3]


def test_constructor_rejects_repeats_and_zeros(line4):
    with pytest.raises(MeasureError):
        MolecularMeasure(line4, [0, 0], [1.0, 1.0])
    with pytest.raises(MeasureError):
        MolecularMeasure(line4, [0], [0.0])
    with pytest.raises(MeasureError):
        MolecularMeasure(line4, [7], [1.0])


def test_jordan_example(example5_tau):
    jp = jordan_decompose(example5_tau)
    assert jp.positive.indices.tolist() == [0] and jp.positive.weights.tolist() == [1.0]
    assert jp.negative.indices.tolist() == [1, 2]
    assert np.allclose(jp.negative.weights, [1 / 3, 2 / 3], rtol=0, atol=1e-16)


def test_jordan_positive_and_zero(line4):
    m = MolecularMeasure(line4, [0, 2], [1.0, 2.0])
    assert jordan_decompose(m).negative.is_zero
    z = MolecularMeasure.zero(line4)
    jp = jordan_decompose(z)
    assert jp.positive.is_zero and jp.negative.is_zero


def test_total_variation(example5_tau, line4):
    assert total_variation(example5_tau) == 2.0
    assert total_variation(MolecularMeasure.zero(line4)) == 0.0
    m = MolecularMeasure(line4, [0, 1, 2, 3], [0.5, 2.0, 0.2, 1 / 3])
    assert total_variation(m) == pytest.approx(91 / 30, abs=1e-15)


def test_ball_mass_open_ball(line4):
    dirac = MolecularMeasure.dirac(line4, "d")
    r = line4.d[0, 3]
    assert ball_mass(dirac, "a", r) == 0.0
    assert ball_mass(dirac, "a", r + 1e-9) == 1.0
    with pytest.raises(MeasureError):
        ball_mass(dirac, "a", -1.0)


def test_ball_mass_lebesgue():
    leb = uniform_density((0.0, 1.0))
    assert ball_mass(leb, 0.5, 0.25) == pytest.approx(0.5, abs=1e-12)


def test_mass_radius_dirac(line4):
    dy = MolecularMeasure.dirac(line4, "c", 2.0)
    assert mass_radius(dy, "a", 1.5) == 0.5
    assert mass_radius(dy, "a", 2.0) == 0.5
    assert mass_radius(dy, "a", 2.5) == math.inf
    with pytest.raises(MeasureError):
        mass_radius(dy, "a", 0.0)


def test_mass_radius_lebesgue():
    leb = uniform_density((0.0, 1.0))
    assert mass_radius(leb, 0.0, 0.5) == pytest.approx(0.5, abs=1e-9)
    assert mass_radius(leb, 0.0, 1.5) == math.inf


def test_density_validation():
    with pytest.raises(MeasureError):
        DensityMeasure1D(lambda y: -1.0, (0.0, 1.0))
    with pytest.raises(MeasureError):
        DensityMeasure1D(lambda y: 1.0, (0.0, 1.0), total_mass=2.0)
    with pytest.raises(MeasureError):
        DensityMeasure1D(lambda y: 1.0, (-np.inf, 1.0))
    ok = DensityMeasure1D(lambda y: 1.0, (0.0, 2.0), total_mass=2.0)
    assert ok.total_mass == 2.0


def test_density_tail_and_total():
    g = gaussian_density((0.0, np.inf))
    assert g.total_mass == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-9)
    tail = g.tail_mass(5.0)
    assert tail == pytest.approx(math.sqrt(math.pi) / 2 * math.erfc(5.0), abs=1e-9)


def test_density_families_from_json():
    e = density_from_json({"family": "exponential", "params": {"rate": 2.0}, "domain": [0, "inf"]})
    assert e.total_mass == pytest.approx(1.0, abs=1e-9)
    p = density_from_json({"family": "polynomial", "params": {"coefficients": [0, 2]}, "domain": [0, 1]})
    assert p.total_mass == pytest.approx(1.0, abs=1e-12)
    u = density_from_json({"family": "uniform", "domain": [2, 4]})
    assert u.mass(2.5, 3.0) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(MeasureError):
        density_from_json({"family": "cauchy", "domain": [0, 1]})
    with pytest.raises(MeasureError):
        density_from_json({"family": "gaussian", "params": {"bogus": 1}, "domain": [0, 1]})


def test_density_integrate_tail_rule():
    e = exponential_density((0.0, np.inf), rate=1.0)
    # ∫ min(1, y) e^{-y} dy = 1 - e^{-1}
    val = e.integrate(lambda y: min(1.0, y), breakpoints=(1.0,), tail_from=1.0, tail_value=1.0)
    assert val == pytest.approx(1 - math.exp(-1), abs=1e-9)


def test_molecular_on_line_merges():
    m = molecular_on_line([0.0, 1.0, 0.0], [1.0, 2.0, 3.0])
    assert len(m.space) == 2
    assert m.weights.tolist() == [4.0, 2.0]


def test_molecular_json_roundtrip(example5_tau):
    obj = molecular_to_json(example5_tau)
    again = molecular_from_json(obj)
    assert np.array_equal(again.weights, example5_tau.weights)
    assert np.array_equal(again.space.d, example5_tau.space.d)
    with pytest.raises(MeasureError):
        molecular_from_json({"atoms": [{"point": "zz", "weight": 1}]}, example5_tau.space)
    with pytest.raises(MeasureError):
        molecular_from_json({"atoms": [{"point": 0}]}, example5_tau.space)


def test_arithmetic(line4):
    a = MolecularMeasure(line4, [0, 1], [1.0, 2.0])
    b = MolecularMeasure(line4, [1, 2], [2.0, 3.0])
    assert (a - b).as_dense().tolist() == [1.0, 0.0, -3.0, 0.0]
    assert (2 * a).weights.tolist() == [2.0, 4.0]
    assert (0 * a).is_zero


weights = st.lists(st.floats(-5, 5, allow_nan=False).filter(lambda w: abs(w) > 1e-3), min_size=1, max_size=8)


@given(weights)
def test_jordan_reconstructs(ws):
    space = FiniteMetricSpace.euclidean(np.arange(len(ws), dtype=float))
    tau = MolecularMeasure(space, np.arange(len(ws)), ws)
    jp = jordan_decompose(tau)
    assert not set(jp.positive.indices) & set(jp.negative.indices)
    back = jp.positive - jp.negative
    assert np.array_equal(back.as_dense(), tau.as_dense())


@given(weights, st.floats(-4, 4, allow_nan=False))
def test_total_variation_homogeneous(ws, c):
    space = FiniteMetricSpace.euclidean(np.arange(len(ws), dtype=float))
    tau = MolecularMeasure(space, np.arange(len(ws)), ws)
    assert total_variation(c * tau) == pytest.approx(abs(c) * total_variation(tau), rel=1e-12, abs=1e-12)


@given(st.lists(st.floats(0.01, 3), min_size=1, max_size=6), st.floats(0.01, 8))
def test_mass_radius_generalized_inverse(ws, m):
    coords = np.arange(len(ws), dtype=float) * 0.7 + 0.3
    space = FiniteMetricSpace.euclidean(np.concatenate([[0.0], coords]))
    mu = MolecularMeasure(space, np.arange(1, len(ws) + 1), ws)
    r = mass_radius(mu, 0, m)
    jumps = np.unique(mu.distances_from(0))
    if math.isinf(r):
        assert mu.total_mass < m
        return
    gaps = np.diff(np.append(jumps, jumps[-1] + 1.0))
    eps = 0.5 * gaps.min()
    assert ball_mass(mu, 0, r + eps) >= m
    assert ball_mass(mu, 0, r) < m


@given(st.lists(st.floats(0.01, 3), min_size=1, max_size=6), st.floats(0, 5), st.floats(0, 5))
def test_ball_mass_monotone(ws, r1, r2):
    space = FiniteMetricSpace.euclidean(np.arange(len(ws) + 1, dtype=float))
    mu = MolecularMeasure(space, np.arange(1, len(ws) + 1), ws)
    lo, hi = sorted((r1, r2))
    assert ball_mass(mu, 0, lo) <= ball_mass(mu, 0, hi)
