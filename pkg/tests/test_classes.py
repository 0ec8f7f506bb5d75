import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypcross.classes import (
    DifferenceSpec,
    WClassSpec,
    a_exponent,
    bernoulli_coeff,
    difference_order,
    h_class_sample,
    h_sample,
    h_seminorm_estimate,
    in_h_class,
    mixed_difference,
    w_sample,
)
from hypcross.index_sets import compositions, hyperbolic_cross
from hypcross.trigpoly import TrigPoly, block_projection, hp_norm, norm

from conftest import random_poly


def test_bernoulli_examples():
    assert bernoulli_coeff((0,), 0.7) == 1
    assert abs(bernoulli_coeff((2,), 1.0) - (-0.5j)) < 1e-15
    assert abs(bernoulli_coeff((1, -1), 1.0) - 1) < 1e-15


def test_bernoulli_matches_cosine_series():
    # F_r(x) = 1 + 2 sum_k k^{-r} cos(kx - r pi/2), truncated at |k| <= K
    r, K = 0.6, 40
    x = np.linspace(0, 2 * np.pi, 13)
    series = 1 + 2 * sum(k ** (-r) * np.cos(k * x - r * np.pi / 2) for k in range(1, K + 1))
    ks = np.arange(-K, K + 1)
    coeffs = bernoulli_coeff(ks.reshape(-1, 1), r)
    vals = np.exp(1j * np.outer(x, ks)) @ coeffs
    assert np.max(np.abs(vals - series)) < 1e-12


def test_w_sample_monomial():
    phi = TrigPoly.monomial((1, 0))
    f = w_sample(WClassSpec(1.0, 2.0, 1), 2, phi)
    assert abs(f.coeff((1, 0)) - (-1j)) < 1e-14


def test_w_sample_normalization_and_determinism():
    spec = WClassSpec(0.4, 4.0, 3)
    a, b = w_sample(spec, 2, 5), w_sample(spec, 2, 5)
    assert np.array_equal(a.coeffs, b.coeffs)
    phi = TrigPoly(a.support, a.coeffs / bernoulli_coeff(a.frequencies, 0.4))
    assert abs(norm(phi, 4) - 1) < 1e-12
    assert a.is_real()


def test_w_sample_extremal_and_guards():
    f = w_sample(WClassSpec(0.5, 4, 3), 2, "dirichlet_shell")
    assert len(f) == 2**3 * 4
    with pytest.raises(ValueError):
        w_sample(WClassSpec(0.5, 4, 3), 2, "nope")
    with pytest.raises(ValueError):
        WClassSpec(0.0, 4, 3)
    with pytest.raises(ValueError):
        WClassSpec(0.5, 1, 3)


def test_h_sample_properties():
    f = h_sample(0, 2, 4, seed=1)
    assert len(f) == 1 and abs(f.coeffs[0]) <= 1
    g = h_sample(4, 2, 4, seed=3)
    assert hp_norm(g, compositions(4, 2, up_to=True), 4) <= 1 + 1e-9
    assert np.array_equal(g.coeffs, h_sample(4, 2, 4, seed=3).coeffs)


def test_h_class_sample_block_decay():
    r, p = 0.4, 4.0
    f = h_class_sample(r, 4, 2, p, seed=2)
    for s in compositions(4, 2, up_to=True):
        assert 2 ** (r * sum(s)) * norm(block_projection(f, s), p) <= 1 + 1e-9


def test_mixed_difference_examples():
    f = TrigPoly.monomial((1,))
    assert np.array_equal(mixed_difference(f, DifferenceSpec(1, (), (1.0,))).coeffs, f.coeffs)
    g = mixed_difference(f, DifferenceSpec(1, (1,), (math.pi,)))
    assert abs(g.coeff((1,)) + 2) < 1e-15


def test_mixed_difference_order_two_is_composition(rng):
    f = random_poly(hyperbolic_cross(3, 2), rng)
    t = (0.3, -1.1)
    once = mixed_difference(f, DifferenceSpec(1, (1, 2), t))
    twice = mixed_difference(once, DifferenceSpec(1, (1, 2), t))
    direct = mixed_difference(f, DifferenceSpec(2, (1, 2), t))
    assert np.max(np.abs(twice.coeffs - direct.coeffs)) < 1e-12


def test_mixed_difference_matches_physical_shift(rng):
    f = random_poly(hyperbolic_cross(3, 2), rng)
    t = np.array([0.37, 1.9])
    x = rng.uniform(0, 2 * np.pi, size=(50, 2))
    e1, e2 = np.array([t[0], 0]), np.array([0, t[1]])
    phys = f(x + e1 + e2) - f(x + e1) - f(x + e2) + f(x)
    coef = mixed_difference(f, DifferenceSpec(1, (1, 2), tuple(t)))(x)
    assert np.max(np.abs(phys - coef)) < 1e-10
    phys1 = f(x + 2 * e1) - 2 * f(x + e1) + f(x)
    coef1 = mixed_difference(f, DifferenceSpec(2, (1,), tuple(t)))(x)
    assert np.max(np.abs(phys1 - coef1)) < 1e-10


def test_difference_spec_validation():
    with pytest.raises(ValueError):
        DifferenceSpec(0, (1,), (0.1,))
    with pytest.raises(ValueError):
        DifferenceSpec(1, (2,), (0.1,))
    assert DifferenceSpec(1, (2, 1, 2), (0.1, 0.2)).e == (1, 2)


def test_h_seminorm_closed_form():
    f = TrigPoly.monomial((1,))
    steps = [(0.1,), (0.5,), (2.0,)]
    expected = max(2 * abs(math.sin(t / 2)) / abs(t) ** 0.5 for (t,) in steps)
    assert abs(h_seminorm_estimate(f, 0.5, 3, steps) - expected) < 1e-10
    assert difference_order(0.5) == 1 and difference_order(1.0) == 2


def test_h_seminorm_constant_and_homogeneity(rng):
    one = TrigPoly.monomial((0, 0), 3.0)
    assert h_seminorm_estimate(one, 0.5, 4, [(0.2, 0.3)]) == 0
    f = random_poly(hyperbolic_cross(2, 2), rng)
    steps = [(0.2, 0.3), (1.0, -0.4)]
    assert math.isclose(h_seminorm_estimate(2.5 * f, 0.5, 4, steps), 2.5 * h_seminorm_estimate(f, 0.5, 4, steps),
                        rel_tol=1e-12)
    with pytest.raises(ValueError):
        h_seminorm_estimate(f, 0.5, 4, [(0.0, 1.0)])


def test_in_h_class_predicate():
    f = TrigPoly.monomial((1,), 0.1)
    assert in_h_class(f, 0.5, 2, 1.0, [(0.5,), (1.0,)])
    assert not in_h_class(f * 100, 0.5, 2, 1.0, [(0.5,)])


def test_a_exponent():
    assert a_exponent("w", 2, 2) == 1.0
    assert math.isclose(a_exponent("H", 4, 3), 2.25)
    with pytest.raises(ValueError):
        a_exponent("x", 2, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.1, 2.0))
def test_w_sample_deterministic(seed, r):
    spec = WClassSpec(r, 3.0, 2)
    assert np.array_equal(w_sample(spec, 2, seed).coeffs, w_sample(spec, 2, seed).coeffs)
