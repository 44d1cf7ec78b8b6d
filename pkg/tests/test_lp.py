import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fm_norm_highs, linprog_max, random_mixed, random_signed, random_space
from flatdist.errors import MeasureError
from flatdist.lp import (
    bl_norm_molecular,
    fm_norm_molecular,
    fm_norm_molecular_reduced,
    fm_norm_pinned,
    reduced_polytope,
    solve_reduced,
)
from flatdist.measures import MolecularMeasure, total_variation
from flatdist.metric import FiniteMetricSpace
from flatdist.polytope import Polytope, bl_ball_polytope, fm_ball_polytope
from flatdist.simplex import solve_lp


def test_fm_polytope_two_points():
    p = fm_ball_polytope([[0, 1], [1, 0]])
    assert p.n_rows == 6
    for f in ([1, 1], [1, 0], [-1, 0], [0.5, -0.5]):
        assert p.contains(f)
    assert not p.contains([1, -0.5])


def test_fm_polytope_three_points(example5_space):
    p = fm_ball_polytope(example5_space.metric)
    assert p.n_rows == 12 and p.kind == "FM"
    assert p.contains([1, 1, 1]) and p.contains([-1, -1, -1])
    q = fm_ball_polytope([[0, 0.75, 1], [0.75, 0, 1.25], [1, 1.25, 0]])
    assert q.n_rows == 12


def test_bl_polytope_two_points():
    p = bl_ball_polytope([[0, 2], [2, 0]])
    # with n = 2 only the pair rows remain
    assert p.n_rows == 4
    expected = {(1.5, -0.5), (-1.5, 0.5), (-0.5, 1.5), (0.5, -1.5)}
    assert {tuple(r) for r in p.A.tolist()} == expected
    assert np.all(p.b == 1.0)


def test_bl_polytope_single_point():
    p = bl_ball_polytope([[0.0]])
    assert p.contains([1.0]) and not p.contains([1.1])


def test_bl_polytope_matches_definition(rng):
    # membership agrees with ||f||_inf + |f|_L <= 1 on random vectors
    s = random_space(rng, 4)
    p = bl_ball_polytope(s.metric)
    d = s.d
    iu = np.triu_indices(4, 1)
    for _ in range(2000):
        f = rng.uniform(-1, 1, 4) * rng.uniform(0, 1)
        lip = np.max(np.abs(f[iu[0]] - f[iu[1]]) / d[iu])
        inside = np.max(np.abs(f)) + lip <= 1.0
        if abs(np.max(np.abs(f)) + lip - 1.0) > 1e-9:
            assert p.contains(f) == inside


def test_polytope_validation():
    with pytest.raises(ValueError):
        Polytope(np.eye(2), np.ones(3), (("a",), ("b",)))


def test_solve_lp_examples(example5_space):
    p = fm_ball_polytope(example5_space.metric)
    sol = solve_lp([1, -1 / 3, -2 / 3], p)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(5 / 3, abs=1e-12)
    assert np.allclose(sol.f, [1, 0, -1], atol=1e-12)
    assert solve_lp([0, 0, 0], p).value == 0.0
    ones = solve_lp([1, 1, 1], p)
    assert ones.value == pytest.approx(3.0, abs=1e-12)
    assert np.allclose(ones.f, 1.0)


def test_solve_lp_status():
    unb = Polytope(np.array([[-1.0, 0.0], [0.0, -1.0]]), np.zeros(2), (("a",), ("b",)))
    assert solve_lp([1.0, 1.0], unb).status == "unbounded"
    infeas = Polytope(np.array([[1.0], [-1.0]]), np.array([-1.0, -1.0]), (("a",), ("b",)))
    assert solve_lp([1.0], infeas).status == "infeasible"
    shifted = Polytope(np.array([[1.0], [-1.0]]), np.array([3.0, -2.0]), (("a",), ("b",)))
    sol = solve_lp([-1.0], shifted)
    assert sol.status == "optimal" and sol.value == pytest.approx(-2.0, abs=1e-12)
    with pytest.raises(ValueError):
        solve_lp([1.0], shifted, warm_start=[5.0])


@given(st.integers(0, 10_000), st.integers(2, 7))
def test_solve_lp_matches_highs(seed, n):
    rng = np.random.default_rng(seed)
    s = random_space(rng, n)
    c = rng.normal(size=n)
    for p in (fm_ball_polytope(s.metric), bl_ball_polytope(s.metric)):
        sol = solve_lp(c, p)
        ref, _ = linprog_max(c, p.A, p.b)
        assert sol.value == pytest.approx(ref, abs=1e-9)
        assert p.contains(sol.f, 1e-9)


def test_solve_lp_deterministic(rng):
    s = random_space(rng, 6)
    c = rng.normal(size=6)
    p = fm_ball_polytope(s.metric)
    a, b = solve_lp(c, p), solve_lp(c, p)
    assert a.value == b.value and np.array_equal(a.f, b.f) and a.active == b.active


def test_fm_norm_example(example5_tau):
    r = fm_norm_molecular(example5_tau)
    assert r.value == pytest.approx(5 / 3, abs=1e-12)
    assert np.allclose(r.maximizer, [1, 0, -1], atol=1e-12)
    red = fm_norm_molecular_reduced(example5_tau)
    assert red.value == pytest.approx(5 / 3, abs=1e-12)
    assert np.allclose(red.theta, [1.0])


def test_fm_norm_positive_is_tv(rng):
    s = random_space(rng, 5)
    tau = MolecularMeasure(s, np.arange(5), rng.uniform(0.1, 2, 5))
    r = fm_norm_molecular(tau)
    assert r.value == pytest.approx(total_variation(tau), abs=1e-12)
    assert np.allclose(r.maximizer, 1.0)


def test_fm_norm_zero(example5_space):
    assert fm_norm_molecular(MolecularMeasure.zero(example5_space)).value == 0.0
    assert bl_norm_molecular(MolecularMeasure.zero(example5_space)).value == 0.0


def test_reduced_two_diracs():
    for d in (0.5, 1.7, 3.0):
        s = FiniteMetricSpace.euclidean([0.0, d])
        tau = MolecularMeasure(s, [0, 1], [1.0, -1.0])
        assert fm_norm_molecular_reduced(tau).value == pytest.approx(min(2.0, d), abs=1e-12)


def test_reduced_rejects_one_signed(example5_space):
    with pytest.raises(MeasureError):
        fm_norm_molecular_reduced(MolecularMeasure(example5_space, [0, 1], [1.0, 2.0]))


def test_bl_examples(example5_tau):
    s = FiniteMetricSpace.euclidean([0.0])
    assert bl_norm_molecular(MolecularMeasure(s, [0], [2.5])).value == pytest.approx(2.5)
    r = bl_norm_molecular(example5_tau)
    p = bl_ball_polytope(example5_tau.space.metric)
    ref, _ = linprog_max(example5_tau.weights, p.A, p.b)
    assert r.value == pytest.approx(ref, abs=1e-12)
    assert p.contains(r.maximizer)


@given(st.integers(0, 10_000))
def test_reduced_matches_full(seed):
    rng = np.random.default_rng(seed)
    tau = random_mixed(rng, int(rng.integers(1, 4)), int(rng.integers(1, 5)))
    full = fm_norm_molecular(tau).value
    assert full == pytest.approx(fm_norm_highs(tau), abs=1e-9)
    for solver in ("dense", "cutting_plane"):
        red = fm_norm_molecular_reduced(tau, solver=solver)
        assert red.value == pytest.approx(full, abs=1e-9)
        # the returned test function lies in the ball and attains the value
        assert fm_ball_polytope(tau.space.metric.submatrix(tau.indices)).contains(red.maximizer, 1e-9)
        assert tau.weights @ red.maximizer == pytest.approx(full, abs=1e-9)


def test_reduced_polytope_shape():
    dist = np.array([[1.0, 2.0, 0.5]])
    p = reduced_polytope(dist)
    assert p.dim == 4 and p.n_rows == 2 + 3 * 2


def test_solve_reduced_large_agrees(rng):
    alpha = rng.uniform(0.1, 1, 30)
    beta = rng.uniform(0.1, 1, 120)
    x, y = rng.uniform(0, 4, 30), rng.uniform(0, 4, 120)
    dist = np.abs(x[:, None] - y[None, :])
    a = solve_reduced(alpha, beta, dist, "cutting_plane")
    b = solve_reduced(alpha, beta, dist, "dense")
    assert a.value == pytest.approx(b.value, abs=1e-9)
    assert a.upper_bound >= a.value
    with pytest.raises(ValueError):
        solve_reduced(alpha, beta, dist, "magic")


def test_solve_reduced_empty_negative():
    r = solve_reduced([0.5, 1.0], [], np.zeros((2, 0)))
    assert r.value == 1.5 and np.all(r.theta == 1.0)


def test_pinned_matches_unconstrained(rng):
    # with nonnegative total mass some optimal test function reaches 1 on a positive atom
    for _ in range(20):
        s = random_space(rng, 5)
        tau = MolecularMeasure(s, np.arange(5), np.concatenate([rng.uniform(0.1, 1, 2), -rng.uniform(0.1, 1, 3)]))
        if tau.total_mass < 0:
            continue
        assert fm_norm_pinned(tau).value == pytest.approx(fm_norm_molecular(tau).value, abs=1e-9)


@given(st.integers(0, 10_000))
def test_bl_sandwich(seed):
    rng = np.random.default_rng(seed)
    tau = random_signed(rng, random_space(rng, int(rng.integers(1, 6))))
    fm, bl = fm_norm_molecular(tau).value, bl_norm_molecular(tau).value
    assert bl <= fm + 1e-9 and fm <= 2 * bl + 1e-9


def test_zero_iff_zero(rng):
    for _ in range(20):
        tau = random_signed(rng, random_space(rng, int(rng.integers(1, 5))))
        assert fm_norm_molecular(tau).value > 0 and bl_norm_molecular(tau).value > 0
        assert fm_norm_molecular(tau - tau).value == 0.0


def test_dirac_vs_probability_cross_check(rng):
    for _ in range(30):
        m = int(rng.integers(1, 6))
        s = random_space(rng, m + 1)
        w = rng.uniform(0.05, 1, m)
        w /= w.sum()
        tau = MolecularMeasure(s, np.arange(m + 1), np.concatenate([[1.0], -w]))
        expected = float(w @ np.minimum(2.0, s.d[0, 1:]))
        assert fm_norm_molecular_reduced(tau).value == pytest.approx(expected, abs=1e-9)


def test_reduced_matches_full_up_to_ten(rng):
    for n in range(2, 11):
        tau = random_mixed(rng, n // 2, n - n // 2)
        assert fm_norm_molecular_reduced(tau).value == pytest.approx(fm_norm_molecular(tau).value, abs=1e-9)
