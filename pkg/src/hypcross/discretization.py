"""Marcinkiewicz-type discretization constants for subspaces ``T(Q)``.

Only ``q = 2`` constants are certified (extremal eigenvalues of the normalized
Gram matrix). Other ``q`` give empirical windows from random polynomials.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from ._validation import check_points
from .index_sets import FrequencySet
from .sampling_recovery import PointSet, design_matrix, random_points
from .trigpoly import GridSpec, TrigPoly, _parse_p, norm


@dataclass(frozen=True)
class MarcinkiewiczReport:
    q: float
    C1: float
    C2: float
    m: int
    N: int
    points: str
    trials: int
    certified: bool

    def __post_init__(self):
        if self.C1 > self.C2 + 1e-12:
            raise ValueError(f"C1={self.C1} exceeds C2={self.C2}")

    def in_window(self, low: float = 0.5, high: float = 1.5) -> bool:
        return self.C1 >= low and self.C2 <= high

    def to_dict(self) -> dict:
        out = asdict(self)
        if math.isinf(self.q):
            out["q"] = "inf"
        return out


def _tag(points) -> str:
    return points.tag if isinstance(points, PointSet) else "explicit"


def gram_eigenvalues(Q: FrequencySet, points) -> np.ndarray:
    """Eigenvalues (ascending) of ``(1/m) Phi^* Phi``."""
    X = check_points(points, Q.dim)
    Phi = design_matrix(Q, X)
    G = Phi.conj().T @ Phi / X.shape[0]
    return np.linalg.eigvalsh(G)


def marcinkiewicz_q2(Q: FrequencySet, points) -> MarcinkiewiczReport:
    """Certified ``C1, C2`` for ``q = 2``."""
    X = check_points(points, Q.dim)
    m, N = X.shape[0], len(Q)
    if m < N:
        # Phi has a nontrivial kernel; numerically the eigenvalue is only ~1e-16
        C1 = 0.0
        C2 = float(gram_eigenvalues(Q, X)[-1])
    else:
        ev = gram_eigenvalues(Q, X)
        C1, C2 = float(max(ev[0], 0.0)), float(ev[-1])
    return MarcinkiewiczReport(2.0, C1, C2, m, N, _tag(points), 0, True)


def _random_unit(Q: FrequencySet, rng) -> TrigPoly:
    c = rng.standard_normal(len(Q)) + 1j * rng.standard_normal(len(Q))
    return TrigPoly(Q, c)


def sample_ratio(f: TrigPoly, X: np.ndarray, q: float, grid: GridSpec | None = None) -> float:
    """``(1/m) sum |f(xi_j)|^q / ||f||_q^q``, or ``max_j |f(xi_j)| / ||f||_inf`` for ``q = inf``.

    For ``q = inf`` the sup norm is the larger of the grid maximum and the
    sampled maximum, so the ratio never exceeds 1.
    """
    vals = np.abs(f(X))
    if math.isinf(q):
        return float(vals.max() / max(norm(f, math.inf, grid), vals.max()))
    return float(np.mean(vals**q) / norm(f, q, grid) ** q)


def marcinkiewicz_estimate(Q: FrequencySet, points, q=2, trials: int = 100, seed=0,
                           grid: GridSpec | None = None) -> MarcinkiewiczReport:
    """Empirical window from ``trials`` random polynomials in ``T(Q)``.

    ``C1`` is the smallest observed ratio (an upper bound for the best lower
    constant) and ``C2`` the largest (a lower bound for the best upper
    constant). For ``q = inf`` the upper constant is reported as exactly 1.
    """
    q = _parse_p(q)
    if trials < 1:
        raise ValueError("trials must be positive")
    X = check_points(points, Q.dim)
    rng = np.random.default_rng(seed)
    ratios = [sample_ratio(_random_unit(Q, rng), X, q, grid) for _ in range(trials)]
    C2 = 1.0 if math.isinf(q) else max(ratios)
    return MarcinkiewiczReport(q, min(ratios), C2, X.shape[0], len(Q), _tag(points), trials, False)


def dt1_budget(N: int, B: float, q: float, c: float) -> int:
    """``m = ceil(c N B^q (log2(2 B N))^2)``."""
    if N < 1 or B < 1 or c <= 0:
        raise ValueError("need N >= 1, B >= 1 and c > 0")
    return math.ceil(c * N * B**q * math.log2(2 * B * N) ** 2)


class SearchResult(NamedTuple):
    points: PointSet
    success_rate: float
    report: MarcinkiewiczReport
    success: bool
    m: int


def dt1_point_search(Q: FrequencySet, q=2, B: float = 1.0, c_factor: float = 1.0, trials: int = 20, seed=0,
                     m: int | None = None, estimate_trials: int = 50) -> SearchResult:
    """Draw ``trials`` uniform point sets of the budgeted size and test the window ``[1/2, 3/2]``.

    Returns the first successful set (or, when none succeeds, the attempt
    closest to the window) with the empirical success rate.
    """
    q = _parse_p(q)
    if math.isinf(q):
        raise ValueError("q must be finite")
    if trials < 1:
        raise ValueError("trials must be positive")
    m = dt1_budget(len(Q), B, q, c_factor) if m is None else int(m)
    seeds = np.random.SeedSequence(seed).spawn(trials)
    first = best = None
    best_gap, wins = math.inf, 0
    for i, ss in enumerate(seeds):
        pts = random_points(m, Q.dim, np.random.default_rng(ss), tag=f"random({seed}:{i})")
        if q == 2:
            rep = marcinkiewicz_q2(Q, pts)
        else:
            rep = marcinkiewicz_estimate(Q, pts, q, estimate_trials, seed=ss.generate_state(1)[0])
        ok = rep.in_window()
        wins += ok
        if ok and first is None:
            first = (pts, rep)
        gap = max(0.5 - rep.C1, rep.C2 - 1.5)
        if gap < best_gap:
            best_gap, best = gap, (pts, rep)
    pts, rep = first if first is not None else best
    return SearchResult(pts, wins / trials, rep, first is not None, m)
