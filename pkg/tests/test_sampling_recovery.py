import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from hypcross.exceptions import MissingSamplesError, RankDeficientError, ResourceCapError
from hypcross.index_sets import compositions, hyperbolic_cross, parallelepiped
from hypcross.sampling_recovery import (
    Dyadic,
    PointSet,
    SmolyakRecovery,
    WeightedLeastSquaresRecovery,
    christoffel_weights,
    cubature_chain,
    induced_cubature,
    is_nl_net,
    random_points,
    recovery_error,
    smolyak_recover,
    smolyak_reproduction_set,
    sparse_grid,
    web_contains,
    wls_recover,
)
from hypcross.trigpoly import GridSpec, TrigPoly, norm

from conftest import random_poly


def brute_sparse_grid(n, d):
    """Dedup all tensor-grid points by exact rational value."""
    pts = set()
    for nv in compositions(n, d):
        for k in itertools.product(*[range(2**v) for v in nv]):
            pts.add(tuple((kj * 2 ** (n - v)) for kj, v in zip(k, nv)))
    return pts


def test_sparse_grid_examples():
    sg = sparse_grid(1, 2)
    assert sorted(map(tuple, sg.values.tolist())) == [(0.0, 0.0), (0.0, math.pi), (math.pi, 0.0)]
    assert len(sparse_grid(2, 2)) == 8
    assert np.allclose(np.sort(sparse_grid(3, 1).values[:, 0]), 2 * np.pi * np.arange(8) / 8)


@pytest.mark.parametrize("n,d", [(0, 2), (3, 2), (5, 2), (4, 3), (3, 4)])
def test_sparse_grid_matches_brute_force(n, d):
    sg = sparse_grid(n, d)
    assert len(sg) == len(brute_sparse_grid(n, d))
    assert np.all(sg.levels >= 0) and np.all(sg.numerators < 2**sg.levels)


def test_sparse_grid_nested():
    for n in range(1, 6):
        small, big = sparse_grid(n - 1, 2), sparse_grid(n, 2)
        assert len(big.union(small)) == len(big)


def test_sparse_grid_cap():
    with pytest.raises(ResourceCapError):
        sparse_grid(20, 4, cap=10**6)


def test_web_examples():
    assert web_contains((2 * math.pi / 3,), (0,)) is False
    assert web_contains((Dyadic(1, 1), 0.123), (0, 5))
    assert web_contains((math.pi, 0.123), (0, 5))
    assert web_contains((Dyadic(1, 3),), (2,))
    assert not web_contains((Dyadic(1, 3),), (1,))
    assert web_contains((Dyadic(2, 3),), (1,))


def test_sparse_grid_on_every_web():
    for d in (2, 3):
        for n in range(7):
            sg = sparse_grid(n, d)
            for s in compositions(n, d):
                assert np.all(sg.web_mask(s))


def test_dyadic_web_agrees_with_float_test():
    sg = sparse_grid(5, 2)
    floats = PointSet.from_floats(sg.values)
    for s in compositions(4, 2) + compositions(6, 2):
        assert sorted(map(tuple, sg.values[sg.web_mask(s)].tolist())) == sorted(
            map(tuple, floats.values[floats.web_mask(s)].tolist()))


def test_net_examples():
    assert is_nl_net(sparse_grid(4, 2), 4, 0).ok
    extra = random_points(2**3, 2, seed=7)
    res = is_nl_net(sparse_grid(4, 2).union(extra), 4, 3)
    assert res.ok and res.worst_outside == 8
    assert not is_nl_net(sparse_grid(4, 2).union(extra), 4, 2).ok
    assert is_nl_net(PointSet.from_floats([[0.123, 0.456]]), 3, 0).ok


def test_pointset_normalizes_dyadics():
    ps = PointSet.from_dyadic([[2, 4], [1, 2]], [[2, 3], [1, 2]])
    assert len(ps) == 1
    assert ps.to_rows() == ["1/2^1,1/2^1"]


def test_smolyak_reproduction_set_matches_union_definition():
    # union over |s|_1 <= n of prod_j (D_{s_j} \ D_{s_j - 1})
    def band(l):
        return set(range(-(2 ** (l - 1)) + 1, 2 ** (l - 1) + 1)) if l else {0}

    for n, d in [(3, 2), (4, 2), (3, 3)]:
        ref = set()
        for s in compositions(n, d, up_to=True):
            parts = [band(v) - (band(v - 1) if v else set()) for v in s]
            ref.update(itertools.product(*parts))
        assert set(smolyak_reproduction_set(n, d)) == ref


def test_smolyak_constant_and_reproduction(rng):
    op = SmolyakRecovery(3, 2)
    one = TrigPoly.monomial((0, 0))
    assert norm(op.recover(one) - one, 2) < 1e-14
    for n in range(1, 7):
        f = random_poly(smolyak_reproduction_set(n, 2), rng)
        assert norm(SmolyakRecovery(n, 2).recover(f) - f, 2) < 1e-10


def test_smolyak_idempotent(rng):
    op = SmolyakRecovery(4, 2)
    f = random_poly(hyperbolic_cross(6, 2), rng)
    g = op.recover(f)
    assert norm(op.recover(g) - g, 2) < 1e-10


def test_smolyak_accepts_shuffled_and_extra_points(rng):
    op = SmolyakRecovery(3, 2)
    f = random_poly(smolyak_reproduction_set(3, 2), rng)
    X = np.vstack([op.sample_points().values, rng.uniform(0, 6, size=(5, 2))])
    X = X[rng.permutation(len(X))]
    g = op.fit(X, f(X)).polynomial_
    assert norm(g - f, 2) < 1e-10
    assert np.allclose(op.predict(X), f(X))
    with pytest.raises(MissingSamplesError):
        op.fit(X[:5], f(X[:5]))


def test_smolyak_recover_function_form(rng):
    f = random_poly(smolyak_reproduction_set(2, 3), rng)
    pts = sparse_grid(2, 3)
    g = smolyak_recover(f(pts.values), 2, 3)
    assert norm(g - f, 2) < 1e-10
    assert norm(smolyak_recover(f, 2) - f, 2) < 1e-10


def test_christoffel_weights_uniform(rng):
    Q = hyperbolic_cross(3, 2)
    X = rng.uniform(0, 2 * np.pi, size=(37, 2))
    w = christoffel_weights(Q, X)
    assert np.allclose(w, 1 / 37, rtol=0, atol=1e-15)
    assert abs(w.sum() - 1) < 1e-12
    assert christoffel_weights(Q, X[:1])[0] == pytest.approx(1.0)


def test_wls_reproduces_on_exact_grid(rng):
    Q = parallelepiped((3, 2))
    X = GridSpec((7, 5)).points()
    f = random_poly(Q, rng)
    g = wls_recover(f(X), X, Q, weights=np.full(len(X), 1 / len(X)))
    assert np.max(np.abs(g.coeffs - f.coeffs)) < 1e-10


def test_wls_orthogonal_character_maps_to_zero():
    Q = parallelepiped((2,))
    X = GridSpec((8,)).points()
    f = TrigPoly.monomial((3,))
    g = wls_recover(f(X), X, Q)
    assert np.max(np.abs(g.coeffs)) < 1e-12


def test_wls_weight_scaling_invariance(rng):
    Q = hyperbolic_cross(3, 2)
    X = rng.uniform(0, 2 * np.pi, size=(200, 2))
    y = np.sin(X[:, 0]) * np.cos(2 * X[:, 1]) + X[:, 0] ** 2
    w = rng.uniform(0.5, 2.0, size=200)
    a = wls_recover(y, X, Q, weights=w)
    b = wls_recover(y, X, Q, weights=17.5 * w)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-10


def test_wls_rejects_underdetermined_and_singular():
    Q = hyperbolic_cross(2, 2)
    op = WeightedLeastSquaresRecovery(Q)
    with pytest.raises(RankDeficientError):
        op.fit(np.zeros((3, 2)), np.ones(3))
    with pytest.raises(RankDeficientError) as info:
        op.fit(np.zeros((40, 2)), np.ones(40))
    assert info.value.smallest_singular_value is not None


def test_estimators_follow_sklearn_conventions():
    op = WeightedLeastSquaresRecovery(hyperbolic_cross(2, 2), weights="uniform")
    assert op.get_params()["weights"] == "uniform"
    twin = clone(op)
    assert twin.get_params()["frequencies"] == op.get_params()["frequencies"]
    assert SmolyakRecovery(4, 3).get_params() == {"n": 4, "d": 3, "tol": 1e-9}


def test_induced_cubature_examples(rng):
    op = SmolyakRecovery(4, 2)
    rule = induced_cubature(op)
    assert abs(rule(lambda x: np.ones(len(x))) - 1) < 1e-12
    Q = parallelepiped((2, 2))
    X = GridSpec((6, 5)).points()
    wls = WeightedLeastSquaresRecovery(Q).fit(X, np.zeros(len(X)))
    assert np.allclose(induced_cubature(wls).weights, 1 / len(X), atol=1e-12)


def test_induced_cubature_matches_mean_of_recovery(rng):
    op = SmolyakRecovery(3, 2)
    rule = induced_cubature(op)
    f = random_poly(hyperbolic_cross(5, 2), rng)
    g = op.recover(f)
    assert abs(rule(f) - g.mean()) < 1e-12


def test_recovery_error_examples(rng):
    op = SmolyakRecovery(3, 2)
    f = random_poly(smolyak_reproduction_set(3, 2), rng)
    assert recovery_error(f, op, 2) < 1e-10
    h = random_poly(hyperbolic_cross(5, 2), rng)
    g = op.recover(h)
    assert recovery_error(h, op, 2) == pytest.approx(norm(h - g, 2), rel=1e-12)
    with pytest.raises(ValueError):
        recovery_error(h, op, 0.5)


def test_cubature_chain_orders(rng):
    op = SmolyakRecovery(3, 2)
    f = random_poly(hyperbolic_cross(5, 2), rng)
    ch = cubature_chain(f, op)
    assert ch["cubature_identity_gap"] < 1e-12
    assert ch["cubature_error"] <= ch["l1"] + 1e-8 <= ch["lq"] + 2e-8
    assert ch["cubature_error"] <= 2 * ch["sup"]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_smolyak_reproduction_property(seed, n):
    rng = np.random.default_rng(seed)
    f = random_poly(smolyak_reproduction_set(n, 2), rng)
    assert norm(SmolyakRecovery(n, 2).recover(f) - f, 2) < 1e-10
