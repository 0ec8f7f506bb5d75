"""Cutoff splitting of dyadic blocks, the f = f1 + f2 decomposition,
threshold balancing and per-level approximation budgets.

All bound evaluators return the displayed shape with constant 1; every
inequality check elsewhere reports a realized constant instead of asserting
an unknown one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import InsufficientGridError
from .index_sets import FrequencySet, compositions, hyperbolic_cross_size
from .trigpoly import (
    GridSpec,
    GridValues,
    TrigPoly,
    _parse_p,
    analyze_grid,
    block_labels,
    block_projection,
    convolve,
    delta_vdlp,
    evaluate_grid,
    norm,
)


@dataclass
class CutoffSplit:
    """``g = low + high`` with ``low = g`` where ``|g| <= T ||g||_p`` and 0 elsewhere."""

    low: GridValues
    high: GridValues
    T: float
    p: float
    base_norm: float

    @property
    def level(self) -> float:
        return self.T * self.base_norm


def grid_lp_norm(values: np.ndarray, p: float) -> float:
    """Riemann-sum ``L_p`` norm (grid max for ``p = inf``)."""
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max())
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * np.mean((a / top) ** p) ** (1 / p))


def cutoff_split(g: GridValues, T: float, p) -> CutoffSplit:
    if not T > 0:
        raise ValueError("threshold T must be positive")
    p = _parse_p(p)
    base = grid_lp_norm(g.values, p)
    if base == 0:
        raise ValueError("cannot cut off an identically zero function")
    keep = np.abs(g.values) <= T * base
    low = np.where(keep, g.values, 0)
    return CutoffSplit(GridValues(g.spec, low), GridValues(g.spec, g.values - low), T, p, base)


def block_grid(s, oversampling: int = 2) -> GridSpec:
    """Grid resolving the ``Delta V_s`` support ``|k_j| < 2^{s_j+1}``."""
    return GridSpec(tuple(oversampling * 2 ** (int(v) + 2) for v in s))


@dataclass
class BlockDecomposition:
    n: int
    T: float
    p: float
    t1: dict[tuple[int, ...], TrigPoly]
    t2: dict[tuple[int, ...], TrigPoly]
    block_norms: dict[tuple[int, ...], float]
    f1: TrigPoly
    f2: TrigPoly

    def reconstruction_error(self, f: TrigPoly) -> float:
        diff = self.f1 + self.f2 - f
        return float(np.max(np.abs(diff.coeffs), initial=0.0))

    def sum_block_norms(self, power: float = 1.0) -> float:
        return float(sum(v**power for v in self.block_norms.values()))

    def realized_constants(self, oversampling: int = 4) -> dict[str, float]:
        """Ratios ``||f2||_inf / (T sum ||delta_s f||_p)`` and
        ``||f1||_2^2 / (T^{2-p} sum ||delta_s f||_p^2)``."""
        sup2 = norm(self.f2, math.inf, oversampling=oversampling)
        l2 = norm(self.f1, 2)
        return {
            "sup_f2": sup2,
            "l2_f1": l2,
            "C_sup": sup2 / (self.T * self.sum_block_norms()),
            "C_l2": l2**2 / (self.T ** (2 - self.p) * self.sum_block_norms(2)),
        }


def shell_level(f: TrigPoly) -> int:
    """The ``n`` with ``f in T(Delta Q_n)``; raises if ``f`` spans several shells."""
    active = np.abs(f.coeffs) > 0
    if not np.any(active):
        raise ValueError("f is identically zero")
    levels = set(block_labels(f.frequencies[active]).sum(axis=1).tolist())
    if len(levels) != 1:
        raise ValueError(f"f is not supported on a single shell (levels {sorted(levels)})")
    return levels.pop()


def block_decompose(f: TrigPoly, T: float, p, grid: GridSpec | None = None, oversampling: int = 2) -> BlockDecomposition:
    """Split each ``delta_s(f)`` at level ``T ||delta_s(f)||_p`` and smooth both parts
    with ``Delta V_s``:  ``t1_s = delta_s(f)^T * Delta V_s``, ``t2_s = delta_s(f)_T * Delta V_s``.

    Cutoffs act on grid values; each piece is re-analysed onto the ``Delta V_s``
    support before the convolution. Per-block grids are used unless ``grid``
    is given.
    """
    p = _parse_p(p)
    n = shell_level(f)
    d = f.dim
    t1, t2, norms = {}, {}, {}
    for s in compositions(n, d):
        K = delta_vdlp(s)
        delta = block_projection(f, s)
        if not np.any(delta.coeffs):
            continue
        spec = grid or block_grid(s, oversampling)
        if np.any(np.asarray(spec.sizes) < 2 * K.support.max_abs + 1):
            raise InsufficientGridError(f"grid {spec.sizes} cannot resolve the Delta V_{s} support")
        split = cutoff_split(evaluate_grid(delta, spec), T, p)
        norms[s] = split.base_norm
        t1[s] = convolve(analyze_grid(split.high, K.support), K)
        t2[s] = convolve(analyze_grid(split.low, K.support), K)
    Q = FrequencySet(np.zeros((0, d), dtype=np.int64), dim=d)
    for piece in t1.values():
        Q = Q.union(piece.support)
    c1 = np.zeros(len(Q), dtype=complex)
    c2 = np.zeros(len(Q), dtype=complex)
    for s in t1:
        pos = Q.positions(t1[s].support)
        c1[pos] += t1[s].coeffs
        c2[pos] += t2[s].coeffs
    return BlockDecomposition(n, T, p, t1, t2, norms, TrigPoly(Q, c1), TrigPoly(Q, c2))


def threshold_formula(n: int, m: int, p: float) -> float:
    """``(2^n / m)^{1/p} n^{1/p}`` without parameter checks."""
    return (2.0**n / m) ** (1 / p) * n ** (1 / p)


def balancing_threshold(n: int, m: int, p: float) -> float:
    """Threshold equalising the two error terms of the cutoff argument."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    p = _parse_p(p)
    if not (2 < p < math.inf):
        raise ValueError("balancing needs 2 < p < inf")
    return threshold_formula(n, m, p)


def balance_residual(n: int, m: int, p: float, d: int) -> float:
    """``|T^{1-p/2} n^{(d-1)(1/2-1/p)} (2^n/m)^{1/2} n^{d/2} - T n^{(d-1)(1-1/p)}|``
    at the balancing threshold, relative to the second term."""
    T = balancing_threshold(n, m, p)
    lhs = T ** (1 - p / 2) * n ** ((d - 1) * (0.5 - 1 / p)) * (2.0**n / m) ** 0.5 * n ** (d / 2)
    rhs = T * n ** ((d - 1) * (1 - 1 / p))
    return abs(lhs - rhs) / rhs


# --------------------------------------------------------------------------
# budget schedules

VARIANTS = ("AT0", "ATcond", "BP1")


@dataclass
class Schedule:
    variant: str
    m: int
    d: int
    p: float
    r: float
    a2: float | None
    ap: float | None
    n0: int
    n1: int | None
    S: float | None
    t: float | None
    kappa: float
    budgets: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return int(sum(self.budgets.values()))

    @property
    def realized_constant(self) -> float:
        """``C`` in ``sum_n m_n <= C m``."""
        return self.total / self.m

    def width_bound_sum(self) -> float:
        """``sum_n 2^{-rn} (2^n / max(m_n,1))^{1/q} n^{a(q)}`` with ``q = 2`` on
        ``[n0, n1]`` and ``q = p`` beyond; zero below ``n0``."""
        total = 0.0
        for n, mn in self.budgets.items():
            if n < self.n0 or n == 0:
                continue
            if self.variant == "BP1":
                dq = 2**n * (n + 1)
                x = dq / max(mn, 1)
                total += 2.0 ** (-self.r * n) * x ** (1 / self.p) * math.log(max(x, math.e)) ** (1 / self.p) * n
                continue
            middle = n <= self.n1
            q, a = (2.0, self.a2) if middle else (self.p, self.ap)
            total += 2.0 ** (-self.r * n) * (2.0**n / max(mn, 1)) ** (1 / q) * n**a
        return total


def largest_full_level(m: int, d: int) -> int:
    """``n0 = max{n : |Q_n| <= m}``."""
    if m < 1:
        raise ValueError("m must be at least |Q_0| = 1")
    n = 0
    while hyperbolic_cross_size(n + 1, d) <= m:
        n += 1
    return n


def _largest_level(ok: Callable[[int], bool], n0: int, span: int = 64) -> int:
    """Largest ``n`` in ``[n0, n0 + span]`` with ``ok(n)``; ``n0`` when none qualifies."""
    best = n0
    for n in range(n0, n0 + span + 1):
        if ok(n):
            best = n
    return best


def budget_schedule(m: int, d: int, p: float, r: float, a2: float | None = None, ap: float | None = None,
                    variant: str = "AT0", t: float | None = None, kappa: float | None = None) -> Schedule:
    """Per-level budgets ``m_n`` for the three- (AT0, ATcond) or two-interval (BP1) splits."""
    p = _parse_p(p)
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    n0 = largest_full_level(m, d)

    if variant == "BP1":
        if d != 2:
            raise ValueError("BP1 schedule is for d = 2")
        if kappa is None:
            kappa = (1 + r * p) / 2 if math.isfinite(p) else 2.0
        if not (kappa > 1 and r > kappa / p):
            raise ValueError("BP1 needs kappa > 1 and r > kappa / p")
        budgets = {}
        for n in range(n0 + 1):
            budgets[n] = 2**n * (n + 1) if n else 1
        n = n0 + 1
        while True:
            mn = int(math.floor(2**n * (n + 1) * 2.0 ** (-kappa * (n - n0))))
            decreasing = (n + 2) / (n + 1) * 2.0 ** (1 - kappa) < 1
            if mn == 0 and decreasing:
                break
            budgets[n] = mn
            n += 1
        return Schedule("BP1", m, d, p, r, a2, ap, n0, None, None, None, kappa, budgets)

    if a2 is None or ap is None:
        raise ValueError(f"{variant} needs the exponents a2 and ap")
    if d < 2 or not (2 < p < math.inf):
        raise ValueError(f"{variant} needs d >= 2 and 2 < p < inf")
    if ap - a2 < 1 / p - 0.5 - 1e-15:
        raise ValueError("exponents violate a(p) - a(2) >= 1/p - 1/2")
    gap = 0.5 - 1 / p

    if variant == "AT0":
        if not (1 / p < r < 0.5):
            raise ValueError("AT0 needs 1/p < r < 1/2")
        if t is None:
            t = 2 * r + (1 - 2 * r) / 4
        if not (2 * r < t < 1):
            raise ValueError("AT0 needs 2r < t < 1")
        if kappa is None:
            kappa = 2 * (r * p - 1) / 3
        if not (kappa > 0 and r > (1 + kappa) / p):
            raise ValueError("AT0 needs kappa > 0 and r > (1 + kappa) / p")
        expo = (ap - a2) / gap

        def S_of(n1):
            return max(n1, 1) ** expo

        n1 = _largest_level(lambda k: 2.0**k / S_of(k) <= m, n0)
        S = S_of(n1)
        middle = {n: int(math.floor(2.0**n * 2.0 ** ((n1 - n) * t) / S)) for n in range(n0, n1 + 1)}
    else:
        if r != 0.5:
            raise ValueError("ATcond needs r = 1/2")
        if kappa is None:
            kappa = 2 * (p / 2 - 1) / 3
        if not (kappa > 0 and r > (1 + kappa) / p):
            raise ValueError("ATcond needs kappa > 0 and 1/2 > (1 + kappa) / p")

        def S_of(n1):
            span = n1 - n0 + 1
            return (max(n1, 1) ** (ap - a2) * span ** (-(1 + 1 / p))) ** (1 / gap)

        n1 = _largest_level(lambda k: 2.0**k * (k - n0 + 1) / S_of(k) <= m, n0)
        S = S_of(n1)
        middle = {n: int(math.floor(2.0**n1 / S)) for n in range(n0, n1 + 1)}

    budgets = {n: hyperbolic_cross_size(n, d) for n in range(n0)}
    budgets.update(middle)
    n = n1 + 1
    while True:
        mn = int(math.floor(m * 2.0 ** (-kappa * (n - n1))))
        if mn == 0:
            break
        budgets[n] = mn
        n += 1
    return Schedule(variant, m, d, p, r, a2, ap, n0, n1, S, t, kappa, budgets)


# --------------------------------------------------------------------------
# bound shapes (constant 1)

def _mbar(m):
    return max(m, 1)


def _log(x):
    return math.log(x)


def _need(cond: bool, what: str):
    if not cond:
        raise ValueError(f"argument out of range: {what}")


def _at0_exponent(r, p, a2, ap):
    return a2 + (0.5 - r) / (0.5 - 1 / p) * (ap - a2)


def _check_small_r(r, p, d, closed=False):
    _need(d >= 2, "d >= 2")
    _need(p > 2, "p > 2")
    if closed:
        _need(r == 0.5, "r = 1/2")
    else:
        _need(1 / p < r < 0.5, "1/p < r < 1/2")


def _f_I1(n, m, p, d):
    _need(2 <= p < math.inf and n >= 1, "2 <= p < inf, n >= 1")
    return (2.0**n / _mbar(m)) ** (1 / p) * n ** ((d - 1) * (1 - 1 / p) + 1 / p)


def _f_A2h(n, m, p, d):
    _need(2 <= p < math.inf and n >= 1, "2 <= p < inf, n >= 1")
    return (2.0**n / _mbar(m)) ** (1 / p) * n ** (d - 1 + 1 / p)


def _f_AT0(m, r, p, a2, ap):
    _need(m > 1 and 1 / p < r < 0.5 and ap - a2 >= 1 / p - 0.5, "AT0 parameter range")
    return m ** (-r) * _log(m) ** _at0_exponent(r, p, a2, ap)


def _f_ATcond(m, p, a2):
    _need(m > math.e and p > 2, "m > e, p > 2")
    return m ** (-0.5) * _log(m) ** a2 * _log(_log(m)) ** 1.5


def _f_AT1(m, r, p, d):
    _check_small_r(r, p, d)
    return m ** (-r) * _log(m) ** ((d - 2) * (1 - r) + 1)


def _f_AT1h(m, r, p, d):
    _check_small_r(r, p, d)
    return m ** (-r) * _log(m) ** (d - 1 + r)


def _f_AT2(m, p, d):
    _check_small_r(0.5, p, d, closed=True)
    return m ** (-0.5) * _log(m) ** (d / 2) * _log(_log(m)) ** 1.5


def _f_AT2h(m, p, d):
    _check_small_r(0.5, p, d, closed=True)
    return m ** (-0.5) * _log(m) ** (d - 0.5) * _log(_log(m)) ** 1.5


def _f_B2(theta, m, p):
    _need(m >= 1 and 2 <= p < math.inf, "m >= 1, 2 <= p < inf")
    return (theta / m) ** (1 / p) * _log(math.e * theta / m) ** (1 / p)


def _f_B3(n, m, p):
    _need(m >= 1 and n >= 1 and 2 <= p < math.inf, "m >= 1, n >= 1, 2 <= p < inf")
    dq = 2**n * (n + 1)
    return (dq / m) ** (1 / p) * _log(max(dq / m, math.e)) ** (1 / p) * n


def _f_BP1(m, r, p):
    _need(r > 1 / p and m > 1, "r > 1/p, m > 1")
    return m ** (-r) * _log(m) ** (r + 1)


def _f_C5(m, r, p, d):
    _need(r > 1 / p and m > 1, "r > 1/p, m > 1")
    return m ** (-r) * _log(m) ** ((d - 1) * (1 + r))


def _f_CWl(m, r, d):
    _need(m > 1, "m > 1")
    return m ** (-r) * _log(m) ** ((d - 1) * (0.5 + r))


def _f_C2(m, r, d):
    _need(m > 1, "m > 1")
    return m ** (-r) * _log(m) ** ((d - 1) / 2)


def _f_C2h(m, r, d):
    _need(m > 1, "m > 1")
    return m ** (-r) * _log(m) ** (d - 1)


def _f_N(n, p, d):
    _need(1 <= p < math.inf, "1 <= p < inf")
    return 2.0 ** (n / p) * n ** ((d - 1) * (1 - 1 / p))


def _f_Nd(s_norm, p):
    return 2.0 ** (s_norm / p)


def _f_Nh(n, p, d):
    return 2.0 ** (n / p) * n ** (d - 1)


def _f_B2prime(theta, p):
    return theta ** (1 / p)


BOUNDS: dict[str, Callable[..., float]] = {
    "I1": _f_I1,
    "A2": _f_I1,
    "A2'": _f_I1,
    "A2h": _f_A2h,
    "A2'h": _f_A2h,
    "AT0": _f_AT0,
    "ATcond": _f_ATcond,
    "I3": _f_AT1,
    "AT1": _f_AT1,
    "C3": _f_AT1,
    "AT1h": _f_AT1h,
    "C3h": _f_AT1h,
    "I4": _f_AT2,
    "AT2": _f_AT2,
    "C4": _f_AT2,
    "AT2h": _f_AT2h,
    "C4h": _f_AT2h,
    "B2": _f_B2,
    "B3": _f_B3,
    "BP1": _f_BP1,
    "C5": _f_C5,
    "C5l": _f_C5,
    "CWl": _f_CWl,
    "C2": _f_C2,
    "C2h": _f_C2h,
    "N": _f_N,
    "Nd": _f_Nd,
    "Nh": _f_Nh,
    "B2'": _f_B2prime,
}


def bound_value(formula: str, **args) -> float:
    """Evaluate the right-hand side ``formula`` with constant 1.

    Logarithms are natural. Unknown ids raise ``KeyError``; arguments outside
    the formula's stated range raise ``ValueError``.
    """
    try:
        fn = BOUNDS[formula]
    except KeyError:
        raise KeyError(f"unknown bound {formula!r}; known: {sorted(BOUNDS)}") from None
    if "p" in args:
        args["p"] = _parse_p(args["p"])
    return float(fn(**args))
