"""Representatives of the mixed-smoothness classes W^r_p and H^r_p.

Class members are infinite-dimensional; every generator here returns a
truncation to ``T(Q_n)``, which under-approximates worst-case behaviour.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .index_sets import compositions, dyadic_block, hyperbolic_cross
from .trigpoly import GridSpec, TrigPoly, _parse_p, block_labels, hp_norm, norm

EXTREMAL_CANDIDATES = ("dirichlet_shell", "dirichlet_cross")


@dataclass(frozen=True)
class WClassSpec:
    r: float
    p: float
    n: int

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("smoothness r must be positive")
        p = _parse_p(self.p)
        if not p > 1:
            raise ValueError("p must lie in (1, inf]")
        if self.n < 0:
            raise ValueError("truncation level must be nonnegative")
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class DifferenceSpec:
    l: int
    e: tuple[int, ...]
    t: tuple[float, ...]
    B: float = 1.0

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("difference order must be >= 1")
        if any(j < 1 or j > len(self.t) for j in self.e):
            raise ValueError(f"e={self.e} is not a subset of 1..{len(self.t)}")
        object.__setattr__(self, "e", tuple(sorted(set(self.e))))


def bernoulli_coeff(k, r: float) -> np.ndarray:
    """Fourier coefficients of the tensorized Bernoulli kernel ``F_r``.

    Univariate factor: ``1`` at ``k = 0`` and ``|k|^{-r} exp(-i sign(k) r pi / 2)``
    otherwise. ``k`` may be one frequency or an ``(N, d)`` array.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    k = np.asarray(k, dtype=float)
    scalar = k.ndim == 1
    k = np.atleast_2d(k)
    a = np.abs(k)
    with np.errstate(divide="ignore"):
        mag = np.where(a > 0, a ** (-r), 1.0)
    fac = mag * np.exp(-1j * np.sign(k) * r * math.pi / 2)
    out = np.prod(fac, axis=1)
    return out[0] if scalar else out


def apply_bernoulli(phi: TrigPoly, r: float) -> TrigPoly:
    """``phi * F_r`` in coefficient space."""
    return TrigPoly(phi.support, phi.coeffs * bernoulli_coeff(phi.frequencies, r))


def _random_real_coeffs(Q, rng) -> np.ndarray:
    """Gaussian coefficients with ``c_{-k} = conj(c_k)``."""
    c = rng.standard_normal(len(Q)) + 1j * rng.standard_normal(len(Q))
    mirror = Q.positions(-Q.frequencies)
    c = 0.5 * (c + np.conj(c[mirror]))
    return c


def dirichlet_candidate(name: str, n: int, d: int) -> TrigPoly:
    """All-ones coefficients on ``Delta Q_n`` or on ``Q_n``."""
    if name == "dirichlet_shell":
        Q = hyperbolic_cross(n, d, shell_only=True)
    elif name == "dirichlet_cross":
        Q = hyperbolic_cross(n, d)
    else:
        raise ValueError(f"unknown extremal candidate {name!r}; choose from {EXTREMAL_CANDIDATES}")
    return TrigPoly(Q, np.ones(len(Q)))


def w_sample(spec: WClassSpec, d: int, source=0, grid: GridSpec | None = None) -> TrigPoly:
    """A truncated member of the unit ball of ``W^r_p``.

    ``source`` is an integer seed (random real-valued ``phi`` on ``Q_n``), the
    name of an extremal candidate, or ``phi`` itself. ``phi`` is rescaled to
    ``||phi||_p = 1`` and the result is ``phi * F_r``.
    """
    if isinstance(source, TrigPoly):
        phi = source
        if not np.any(phi.coeffs):
            raise ValueError("phi is identically zero")
    elif isinstance(source, str):
        phi = dirichlet_candidate(source, spec.n, d)
    else:
        rng = np.random.default_rng(source)
        Q = hyperbolic_cross(spec.n, d)
        for _ in range(8):
            phi = TrigPoly(Q, _random_real_coeffs(Q, rng))
            if np.any(phi.coeffs):
                break
        else:  # pragma: no cover - probability zero
            raise RuntimeError("could not draw a nonzero phi")
    phi = phi / norm(phi, spec.p, grid)
    return apply_bernoulli(phi, spec.r)


def h_sample(n: int, d: int, p, seed=0, grid: GridSpec | None = None, low: float = 0.5) -> TrigPoly:
    """A random member of ``T(Q_n)_{H_p}``.

    Each block ``rho(s)``, ``|s|_1 <= n``, gets random real-valued coefficients
    rescaled to an ``L_p`` norm drawn uniformly from ``[low, 1]``.
    """
    rng = np.random.default_rng(seed)
    blocks = compositions(n, d, up_to=True)
    pieces = []
    for s in blocks:
        Q = dyadic_block(s)
        piece = TrigPoly(Q, _random_real_coeffs(Q, rng))
        size = norm(piece, p, grid)
        if size == 0:
            continue
        pieces.append(piece * (rng.uniform(low, 1.0) / size))
    Q = hyperbolic_cross(n, d)
    c = np.zeros(len(Q), dtype=complex)
    for piece in pieces:
        c[Q.positions(piece.support)] = piece.coeffs
    f = TrigPoly(Q, c)
    assert hp_norm(f, blocks, p, grid) <= 1 + 1e-9
    return f


def h_class_sample(r: float, n: int, d: int, p, seed=0, grid: GridSpec | None = None) -> TrigPoly:
    """A truncated representative of ``H^r_p``: :func:`h_sample` with block ``rho(s)``
    damped by ``2^{-r |s|_1}``, so ``sup_s 2^{r |s|_1} ||delta_s f||_p <= 1``."""
    if not r > 0:
        raise ValueError("r must be positive")
    f = h_sample(n, d, p, seed, grid)
    level = block_labels(f.frequencies).sum(axis=1)
    return TrigPoly(f.support, f.coeffs * 2.0 ** (-r * level))


def mixed_difference(f: TrigPoly, spec: DifferenceSpec) -> TrigPoly:
    """``Delta_t^l(e) f``: multiply ``hat f(k)`` by ``prod_{j in e} (e^{i k_j t_j} - 1)^l``."""
    if len(spec.t) != f.dim:
        raise ValueError("step vector dimension mismatch")
    mult = np.ones(len(f), dtype=complex)
    for j in spec.e:
        mult *= (np.exp(1j * f.frequencies[:, j - 1] * spec.t[j - 1]) - 1) ** spec.l
    return TrigPoly(f.support, f.coeffs * mult)


def difference_order(r: float) -> int:
    """``l = [r] + 1``."""
    return int(math.floor(r)) + 1


def _nonempty_subsets(d: int):
    for size in range(1, d + 1):
        yield from itertools.combinations(range(1, d + 1), size)


def h_seminorm_estimate(f: TrigPoly, r: float, p, step_grid: Sequence[Sequence[float]], grid: GridSpec | None = None) -> float:
    """Largest ``||Delta_t^l(e) f||_p / prod_{j in e} |t_j|^r`` over nonempty ``e``
    and ``t`` in ``step_grid``; a lower estimate of the smallest admissible ``B``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    steps = [tuple(float(v) for v in t) for t in step_grid]
    if not steps:
        raise ValueError("step grid is empty")
    if any(len(t) != f.dim or any(v == 0 for v in t) for t in steps):
        raise ValueError("steps must be nonzero and match the dimension")
    l = difference_order(r)
    best = 0.0
    for e in _nonempty_subsets(f.dim):
        for t in steps:
            g = mixed_difference(f, DifferenceSpec(l, e, t))
            denom = math.prod(abs(t[j - 1]) ** r for j in e)
            best = max(best, norm(g, p, grid) / denom)
    return best


def in_h_class(f: TrigPoly, r: float, p, B: float, step_grid, grid: GridSpec | None = None) -> bool:
    """Empirical membership test for ``H^r_p B`` on the given steps, including ``e = {}``."""
    return norm(f, p, grid) <= B and h_seminorm_estimate(f, r, p, step_grid, grid) <= B


def a_exponent(family: str, p: float, d: int) -> float:
    """Log exponent of the block width bound: ``W``: ``(d-1)(1-1/p)+1/p``; ``H``: ``d-1+1/p``."""
    p = _parse_p(p)
    if family.lower() == "w":
        return (d - 1) * (1 - 1 / p) + 1 / p
    if family.lower() == "h":
        return d - 1 + 1 / p
    raise ValueError(f"unknown family {family!r}")
