import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.optimize import linprog

from flatdist.measures import MolecularMeasure
from flatdist.metric import FiniteMetricSpace

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_space(rng, n, dim=2, scale=3.0):
    """Random Euclidean points; redrawn until pairwise distinct."""
    while True:
        pts = rng.uniform(0.0, scale, size=(n, dim))
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt((diff ** 2).sum(-1))
        if n == 1 or d[np.triu_indices(n, 1)].min() > 1e-3:
            return FiniteMetricSpace.euclidean(pts)


def random_signed(rng, space, low=0.05, high=2.0):
    n = len(space)
    w = rng.uniform(low, high, size=n) * rng.choice([-1.0, 1.0], size=n)
    return MolecularMeasure(space, np.arange(n), w)


def random_mixed(rng, n_pos, n_neg, space=None, dim=2):
    """Measure with exactly ``n_pos`` positive and ``n_neg`` negative atoms."""
    space = space or random_space(rng, n_pos + n_neg, dim)
    w = np.concatenate([rng.uniform(0.05, 2.0, n_pos), -rng.uniform(0.05, 2.0, n_neg)])
    return MolecularMeasure(space, np.arange(n_pos + n_neg), w)


def linprog_max(c, A, b):
    """Independent LP optimum via HiGHS."""
    res = linprog(-np.asarray(c), A_ub=A, b_ub=b, bounds=[(None, None)] * len(c), method="highs")
    assert res.status == 0, res.message
    return -res.fun, res.x


def fm_norm_highs(tau):
    """FM norm of a molecular measure from the half-space description, solved by HiGHS."""
    d = tau.space.d[np.ix_(tau.indices, tau.indices)]
    n = len(tau)
    rows, b = [], []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        rows += [e, -e]
        b += [1.0, 1.0]
    for i in range(n):
        for j in range(n):
            if i != j:
                r = np.zeros(n)
                r[i], r[j] = 1.0, -1.0
                rows.append(r)
                b.append(d[i, j])
    return linprog_max(tau.weights, np.array(rows), np.array(b))[0]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def example5_space():
    return FiniteMetricSpace.from_matrix([[0, 1, 2], [1, 0, 3], [2, 3, 0]], labels=["x1", "x2", "x3"])


@pytest.fixture
def example5_tau(example5_space):
    return MolecularMeasure(example5_space, [0, 1, 2], [1.0, -1.0 / 3.0, -2.0 / 3.0])
