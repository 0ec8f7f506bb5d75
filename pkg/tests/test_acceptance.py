"""Acceptance suite: one test per criterion, summarized by the hook in conftest."""
import itertools
import math

import numpy as np
import pytest

from hypcross.classes import _random_real_coeffs, a_exponent
from hypcross.cutoff import (
    balance_residual,
    balancing_threshold,
    block_decompose,
    bound_value,
    budget_schedule,
    cutoff_split,
    grid_lp_norm,
    largest_full_level,
)
from hypcross.discretization import dt1_budget, dt1_point_search, marcinkiewicz_q2
from hypcross.index_sets import compositions, hyperbolic_cross, hyperbolic_cross_size, parallelepiped
from hypcross.lab import SweepConfig, fit_exponents, run_sweep
from hypcross.sampling_recovery import (
    SmolyakRecovery,
    WeightedLeastSquaresRecovery,
    christoffel_weights,
    cubature_chain,
    is_nl_net,
    random_points,
    smolyak_reproduction_set,
    sparse_grid,
    wls_recover,
)
from hypcross.trigpoly import (
    GridSpec,
    TrigPoly,
    analyze_grid,
    block_projection,
    convolve,
    delta_vdlp,
    evaluate_grid,
    norm,
)

from conftest import direct_sum, random_poly

# frozen regression values, measured once with seed 0 (see the decisions ledger)
FROZEN_C_SUP = 0.6934
FROZEN_C_L2 = 0.03418
FROZEN_DT1_SUCCESS = 1.0


def _brute_count(n, d):
    """Count box points ``|k_j| < 2^n`` whose block labels sum to at most ``n``."""
    k = np.arange(-(2**n) + 1, 2**n)
    labels = np.array([abs(int(v)).bit_length() for v in k], dtype=np.int16)
    rest = labels
    for _ in range(d - 2):
        rest = (rest[:, None] + labels[None, :]).ravel()
    if d == 1:
        return int(np.count_nonzero(labels <= n))
    return int(sum(np.count_nonzero(rest + a <= n) for a in labels))


def test_criterion_01_index_sets():
    for d in (1, 2, 3):
        for n in range(9):
            assert hyperbolic_cross_size(n, d) == _brute_count(n, d) == len(hyperbolic_cross(n, d))
    for n in range(1, 13):
        assert hyperbolic_cross_size(n, 2, shell_only=True) == 2**n * (n + 1)
    assert len(hyperbolic_cross(8, 2)) == 4097


def test_criterion_02_transform_fidelity():
    rng = np.random.default_rng(2)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(0, 7))
        Q = hyperbolic_cross(n, d)
        f = random_poly(Q, rng)
        grid = GridSpec.for_support(Q)
        v = evaluate_grid(f, grid)
        X = grid.points()
        idx = rng.choice(len(X), size=min(len(X), 256), replace=False)
        ref = direct_sum(f, X[idx])
        assert np.max(np.abs(v.values.ravel()[idx] - ref)) <= 1e-12 * np.max(np.abs(ref))
        back = analyze_grid(v, Q)
        assert np.max(np.abs(back.coeffs - f.coeffs)) <= 1e-12 * np.max(np.abs(f.coeffs))


def test_criterion_03_cutoff_exact_parts():
    rng = np.random.default_rng(3)
    for n, d in [(2, 2), (4, 2), (3, 3)]:
        f = random_poly(hyperbolic_cross(n, d, shell_only=True), rng)
        for s in compositions(n, d):
            delta = block_projection(f, s)
            smooth = convolve(delta, delta_vdlp(s))
            assert np.max(np.abs((smooth - delta).coeffs)) <= 1e-12
        dec = block_decompose(f, 1.1, 4)
        assert dec.reconstruction_error(f) <= 1e-10
    Q = hyperbolic_cross(3, 2, shell_only=True)
    grid = GridSpec((32, 32))
    for p in (2.5, 3.0, 4.0, 8.0):
        for _ in range(200):
            v = evaluate_grid(random_poly(Q, rng), grid)
            T = float(rng.uniform(0.1, 4.0))
            split = cutoff_split(v, T, p)
            base = grid_lp_norm(v.values, p)
            assert grid_lp_norm(split.low.values, math.inf) <= T * base * (1 + 1e-12)
            assert grid_lp_norm(split.high.values, 2) <= T ** (1 - p / 2) * base * (1 + 1e-12)


def test_criterion_04_cutoff_constants():
    c_sup, c_l2 = [], []
    for n in range(3, 9):
        Q = hyperbolic_cross(n, 2, shell_only=True)
        f = TrigPoly(Q, _random_real_coeffs(Q, np.random.default_rng(0)))
        dec = block_decompose(f, balancing_threshold(n, 2 ** (n - 2), 4), 4)
        assert dec.reconstruction_error(f) <= 1e-10
        c = dec.realized_constants()
        c_sup.append(c["C_sup"])
        c_l2.append(c["C_l2"])
    assert max(c_sup) == pytest.approx(FROZEN_C_SUP, rel=0.2)
    assert max(c_l2) == pytest.approx(FROZEN_C_L2, rel=0.2)


def test_criterion_05_schedules():
    for variant, family, d, p, r, m in itertools.product(
            ("AT0",), ("w", "h"), (2, 3), (4.0, 8.0), (0.3, 0.4, 0.45), (256, 4096, 65536)):
        if r <= 1 / p:
            continue
        sch = budget_schedule(m, d, p, r, a_exponent(family, 2, d), a_exponent(family, p, d), variant)
        assert sch.realized_constant <= 16
    for d, m in itertools.product((2, 3), (1024, 4096, 65536)):
        sch = budget_schedule(m, d, 8.0, 0.5, a_exponent("w", 2, d), a_exponent("w", 8, d), "ATcond")
        assert sch.realized_constant <= 16
    for r, m in itertools.product((0.3, 0.4), (1024, 4096, 65536)):
        assert budget_schedule(m, 2, 8.0, r, variant="BP1").realized_constant <= 16
    assert largest_full_level(4096, 2) == 7
    assert budget_schedule(4096, 2, 8.0, 0.4, variant="BP1").n0 == 7
    assert abs(balancing_threshold(10, 32, 4) - 320**0.25) <= 1e-12
    for n, m, p, d in itertools.product((1, 5, 12), (10, 4096), (2.0, 4.0, 9.5), (1, 2, 4)):
        rhs = (2.0**n / (m * n ** (d - 2))) ** (1 / p) * n ** (d - 1)
        assert abs(bound_value("I1", n=n, m=m, p=p, d=d) - rhs) <= 1e-12 * rhs
        if p > 2:
            assert balance_residual(n, m, p, d) <= 1e-12


def test_criterion_06_sparse_grids_and_nets():
    for d in (1, 2, 3, 4):
        for n in range(11):
            sg = sparse_grid(n, d)
            for s in compositions(n, d):
                assert np.all(sg.web_mask(s, tol=0.0))
    assert len(sparse_grid(2, 2)) == 8
    rng = np.random.default_rng(6)
    for trial in range(50):
        n = 2 + trial % 5
        extra = random_points(2 ** (n - 1), 2, seed=rng)
        assert is_nl_net(sparse_grid(n, 2).union(extra), n, n - 1).ok


def test_criterion_07_recovery_operators():
    rng = np.random.default_rng(7)
    for n, d in [(1, 2), (3, 2), (5, 2), (3, 3)]:
        op = SmolyakRecovery(n, d)
        f = random_poly(smolyak_reproduction_set(n, d), rng)
        assert norm(op.recover(f) - f, 2) <= 1e-10
        h = random_poly(hyperbolic_cross(n + 2, d), rng)
        g = op.recover(h)
        assert norm(op.recover(g) - g, 2) <= 1e-10
    for N, sizes in [((3,), (7,)), ((2, 3), (5, 7)), ((1, 1, 2), (3, 3, 5))]:
        Q = parallelepiped(N)
        X = GridSpec(sizes).points()
        f = random_poly(Q, rng)
        g = wls_recover(f(X), X, Q, weights=np.full(len(X), 1 / len(X)))
        assert np.max(np.abs(g.coeffs - f.coeffs)) <= 1e-10
    Q = hyperbolic_cross(3, 2)
    X = rng.uniform(0, 2 * np.pi, size=(150, 2))
    y = np.cos(X[:, 0] * X[:, 1])
    w = rng.uniform(0.2, 3.0, size=len(X))
    a = WeightedLeastSquaresRecovery(Q).fit(X, y, sample_weight=w).polynomial_
    b = WeightedLeastSquaresRecovery(Q).fit(X, y, sample_weight=1e3 * w).polynomial_
    assert np.max(np.abs(a.coeffs - b.coeffs)) <= 1e-10
    assert np.max(np.abs(christoffel_weights(Q, X) - 1 / len(X))) <= 1e-15


def test_criterion_08_cubature_chain():
    rng = np.random.default_rng(8)
    tol = 1e-8
    for i in range(100):
        if i % 2 == 0:
            n = 2 + i % 3
            op = SmolyakRecovery(n, 2)
            f = random_poly(hyperbolic_cross(n + 2, 2), rng)
            X = None
        else:
            Q = hyperbolic_cross(2 + i % 3, 2)
            X = random_points(4 * len(Q), 2, seed=rng).values
            op = WeightedLeastSquaresRecovery(Q)
            f = random_poly(hyperbolic_cross(5, 2), rng)
        ch = cubature_chain(f, op, X)
        assert ch["cubature_identity_gap"] <= tol
        assert ch["cubature_error"] <= ch["l1"] + tol
        assert ch["l1"] <= ch["lq"] + tol
        assert ch["cubature_error"] <= 2 * ch["sup"] + tol


def test_criterion_09_discretization():
    for N, sizes in [((2,), (5,)), ((2, 3), (5, 7))]:
        rep = marcinkiewicz_q2(parallelepiped(N), GridSpec(sizes).points())
        assert abs(rep.C1 - 1) <= 1e-10 and abs(rep.C2 - 1) <= 1e-10
    Q = hyperbolic_cross(4, 2)
    assert marcinkiewicz_q2(Q, random_points(len(Q) - 1, 2, seed=9)).C1 == 0.0
    assert dt1_budget(10, 1, 2, 1) == 187
    res = dt1_point_search(Q, 2, B=1, c_factor=2, trials=20, seed=0)
    assert res.success_rate >= 0.9
    assert res.success_rate == pytest.approx(FROZEN_DT1_SUCCESS, abs=0.1)


def _sweep_fit(method, n):
    cfg = SweepConfig(experiment="recovery", d=[2], n=n, p=[4.0], r=[0.4], q=[2.0], family=["w"],
                      method=[method], seeds=[0, 1, 2])
    rep = run_sweep(cfg)
    (pts,) = rep.series().values()
    return pts, fit_exponents(pts)


def test_criterion_10_exponent_fits():
    ms = np.geomspace(50, 1e6, 12)
    fit = fit_exponents(list(zip(ms, ms**-0.4 * np.log(ms) ** 2)))
    assert abs(fit.power + 0.4) <= 1e-4 and abs(fit.log_power - 2) <= 1e-4
    for method, n in (("smolyak", [3, 4, 5, 6, 7]), ("wls", [2, 3, 4, 5, 6])):
        pts, fit = _sweep_fit(method, n)
        errs = [v for _, v in pts]
        assert all(a > b for a, b in zip(errs, errs[1:])), (method, pts)
        assert fit.power < 0
