"""Point sets, webs and (n, l)-nets, and linear sampling recovery operators.

The two recovery operators are scikit-learn estimators: ``fit(X, y)`` takes
sample points ``X`` (shape ``(m, d)``, coordinates in ``[0, 2 pi)``) and values
``y``, and stores the recovered polynomial in ``polynomial_``; ``predict``
evaluates it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted

from ._validation import check_points, check_samples, check_weights
from .exceptions import MissingSamplesError, RankDeficientError, ResourceCapError
from .index_sets import DEFAULT_CAP, FrequencySet, compositions
from .trigpoly import GridSpec, TrigPoly, norm

TWO_PI = 2 * np.pi


class Dyadic(NamedTuple):
    """The torus coordinate ``2 pi k / 2^l``."""

    k: int
    l: int

    def reduced(self) -> "Dyadic":
        k, l = self.k % (2**self.l), self.l
        if k == 0:
            return Dyadic(0, 0)
        while k % 2 == 0:
            k //= 2
            l -= 1
        return Dyadic(k, l)

    @property
    def value(self) -> float:
        return TWO_PI * self.k / 2**self.l


def _reduce_arrays(k: np.ndarray, l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = np.mod(k, np.left_shift(1, l))
    l = l.copy()
    zero = k == 0
    l[zero] = 0
    while True:
        even = (k % 2 == 0) & (l > 0)
        if not np.any(even):
            return k, l
        k[even] //= 2
        l[even] -= 1


@dataclass(frozen=True, eq=False)
class PointSet:
    """Sample points on the torus.

    Coordinates with ``levels >= 0`` are exact dyadic rationals
    ``2 pi numerators / 2^levels`` in lowest terms; ``levels == -1`` marks a
    float coordinate held only in ``values``.
    """

    numerators: np.ndarray
    levels: np.ndarray
    values: np.ndarray
    tag: str = "explicit"

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]

    def __repr__(self):
        return f"PointSet(dim={self.dim}, size={len(self)}, tag={self.tag!r})"

    @classmethod
    def from_dyadic(cls, numerators, levels, tag: str = "explicit", dedup: bool = True) -> "PointSet":
        k = np.atleast_2d(np.asarray(numerators, dtype=np.int64))
        l = np.broadcast_to(np.asarray(levels, dtype=np.int64), k.shape).copy()
        if np.any(l < 0):
            raise ValueError("dyadic levels must be nonnegative")
        k, l = _reduce_arrays(k.copy(), l)
        if dedup:
            both = np.unique(np.hstack([k, l]), axis=0)
            k, l = both[:, : k.shape[1]], both[:, k.shape[1]:]
        return cls(k, l, TWO_PI * k / np.left_shift(1, l), tag)

    @classmethod
    def from_floats(cls, x, tag: str = "explicit") -> "PointSet":
        x = np.mod(np.atleast_2d(np.asarray(x, dtype=float)), TWO_PI)
        x = np.unique(x, axis=0)
        z = np.zeros(x.shape, dtype=np.int64)
        return cls(z, z - 1, x, tag)

    def union(self, other: "PointSet", tag: str | None = None) -> "PointSet":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        k = np.vstack([self.numerators, other.numerators])
        l = np.vstack([self.levels, other.levels])
        v = np.vstack([self.values, other.values])
        key = np.hstack([k, l, np.where(l < 0, v, 0.0)])
        _, first = np.unique(key, axis=0, return_index=True)
        first = np.sort(first)
        return PointSet(k[first], l[first], v[first], tag or f"{self.tag}+{other.tag}")

    def is_dyadic(self) -> np.ndarray:
        return self.levels >= 0

    def web_mask(self, s: Sequence[int], tol: float = 1e-9) -> np.ndarray:
        """Boolean mask of the points on the web ``W(s)``."""
        s = np.asarray(s, dtype=np.int64)
        if s.shape != (self.dim,):
            raise ValueError("web index dimension mismatch")
        dy = self.is_dyadic()
        # sin(2^s * 2 pi k / 2^l) = 0  <=>  k = 0 or l <= s + 1   (k odd)
        exact = (self.numerators == 0) | (self.levels <= s + 1)
        approx = np.abs(np.sin(np.ldexp(self.values, s))) < tol
        on_factor = np.where(dy, exact, approx)
        return np.any(on_factor, axis=1)

    def to_rows(self) -> list[str]:
        """``k/2^l`` per dyadic coordinate (float radians otherwise)."""
        rows = []
        for k, l, v in zip(self.numerators.tolist(), self.levels.tolist(), self.values.tolist()):
            rows.append(",".join(f"{a}/2^{b}" if b >= 0 else repr(c) for a, b, c in zip(k, l, v)))
        return rows


def random_points(m: int, d: int, seed=0, tag: str | None = None) -> PointSet:
    """``m`` i.i.d. uniform points on the torus (``seed`` may be a Generator)."""
    rng = np.random.default_rng(seed)
    return PointSet.from_floats(rng.uniform(0, TWO_PI, size=(m, d)), tag=tag or f"random({seed})")


def sparse_grid(n: int, d: int, cap: int = DEFAULT_CAP) -> PointSet:
    """``SG(n)``: union over ``|n_vec|_1 = n`` of the tensor grids ``2 pi k_j 2^{-n_j}``."""
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    levels = compositions(n, d)
    if len(levels) * 2**n > cap:
        raise ResourceCapError(f"SG({n}) in d={d} may exceed the cap {cap}")
    ks, ls = [], []
    for nv in levels:
        axes = [np.arange(2**v, dtype=np.int64) for v in nv]
        mesh = np.meshgrid(*axes, indexing="ij")
        k = np.stack([m.ravel() for m in mesh], axis=1)
        ks.append(k)
        ls.append(np.tile(np.asarray(nv, dtype=np.int64), (k.shape[0], 1)))
    return PointSet.from_dyadic(np.vstack(ks), np.vstack(ls), tag=f"sparse_grid({n})")


def web_contains(x: Sequence, s: Sequence[int], tol: float = 1e-9) -> bool:
    """Whether the point ``x`` lies on ``W(s) = {x : prod_j sin(2^{s_j} x_j) = 0}``.

    Coordinates given as :class:`Dyadic` are tested exactly; floats use
    ``|sin| < tol``.
    """
    if len(x) != len(s):
        raise ValueError("dimension mismatch")
    for c, sj in zip(x, s):
        if isinstance(c, Dyadic):
            r = c.reduced()
            if r.k == 0 or r.l <= sj + 1:
                return True
        elif abs(math.sin(math.ldexp(float(c), int(sj)))) < tol:
            return True
    return False


class NetCheck(NamedTuple):
    ok: bool
    worst_s: tuple[int, ...]
    worst_outside: int
    violations: int


def is_nl_net(points: PointSet, n: int, l: int, tol: float = 1e-9) -> NetCheck:
    """Check ``|xi \\ W(s)| <= 2^l`` for every ``s`` with ``|s|_1 = n``."""
    worst, worst_s, bad = -1, None, 0
    for s in compositions(n, points.dim):
        outside = int(np.count_nonzero(~points.web_mask(s, tol)))
        if outside > 2**l:
            bad += 1
        if outside > worst:
            worst, worst_s = outside, s
    return NetCheck(bad == 0, worst_s, worst, bad)


# --------------------------------------------------------------------------
# recovery operators

def _band(l: int) -> np.ndarray:
    """``D_l = {-2^{l-1}+1, ..., 2^{l-1}}`` listed in FFT residue order."""
    G = 2**l
    r = np.arange(G)
    return np.where(r <= G // 2, r, r - G)


def smolyak_terms(n: int, d: int) -> list[tuple[int, tuple[int, ...]]]:
    """Combination-technique coefficients: ``sum_{|s|_1<=n} prod_j (I_{s_j} - I_{s_j-1})
    = sum_q (-1)^q C(d-1, q) sum_{|s|_1 = n-q} I_s``."""
    out = []
    for q in range(min(d - 1, n) + 1):
        c = (-1) ** q * math.comb(d - 1, q)
        out.extend((c, s) for s in compositions(n - q, d))
    return out


def smolyak_reproduction_set(n: int, d: int) -> FrequencySet:
    """``union_{|s|_1 <= n} prod_j D_{s_j}``."""
    rows = []
    for s in compositions(n, d):
        mesh = np.meshgrid(*[_band(v) for v in s], indexing="ij")
        rows.append(np.stack([m.ravel() for m in mesh], axis=1))
    return FrequencySet(np.unique(np.vstack(rows), axis=0), dim=d)


def tensor_interpolant(values: np.ndarray, s: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of ``I_s`` from samples on the grid ``prod_j {2 pi k / 2^{s_j}}``.

    ``values`` has shape ``(2^{s_1}, ..., 2^{s_d}, ...)``; trailing axes are
    batched. Returns ``(frequencies, coeffs)`` with coeffs shaped ``(P, ...)``.
    """
    d = len(s)
    P = math.prod(2**v for v in s)
    C = np.fft.fftn(values, axes=tuple(range(d))) / P
    mesh = np.meshgrid(*[_band(v) for v in s], indexing="ij")
    freqs = np.stack([m.ravel() for m in mesh], axis=1)
    return freqs, C.reshape(P, *values.shape[d:])


class SmolyakRecovery(BaseEstimator):
    """Sparse-grid trigonometric interpolation on ``SG(n)``.

    Parameters
    ----------
    n : int
        Sparse grid level.
    d : int
        Dimension.
    tol : float
        Tolerance for matching float sample points to dyadic grid nodes.
    """

    def __init__(self, n: int = 3, d: int = 2, tol: float = 1e-9):
        self.n = n
        self.d = d
        self.tol = tol

    def sample_points(self) -> PointSet:
        return sparse_grid(self.n, self.d)

    def reproduction_set(self) -> FrequencySet:
        return smolyak_reproduction_set(self.n, self.d)

    def _lookup(self, X: np.ndarray) -> dict[tuple[int, ...], int]:
        scale = 2**self.n / TWO_PI
        u = X * scale
        k = np.rint(u)
        ok = np.all(np.abs(u - k) <= self.tol * max(1.0, 2**self.n), axis=1)
        k = np.mod(k.astype(np.int64), 2**self.n)
        return {tuple(row): i for i, row in enumerate(k.tolist()) if ok[i]}

    def _coefficients(self, X: np.ndarray, Y: np.ndarray) -> tuple[FrequencySet, np.ndarray]:
        table = self._lookup(X)
        R = smolyak_reproduction_set(self.n, self.d)
        out = np.zeros((len(R), *Y.shape[1:]), dtype=complex)
        for c, s in smolyak_terms(self.n, self.d):
            axes = [np.arange(2**v, dtype=np.int64) * 2 ** (self.n - v) for v in s]
            mesh = np.meshgrid(*axes, indexing="ij")
            keys = zip(*(m.ravel().tolist() for m in mesh))
            try:
                idx = np.fromiter((table[key] for key in keys), dtype=np.int64)
            except KeyError as exc:
                raise MissingSamplesError(f"no sample at sparse-grid node {exc.args[0]} (scale 2^{self.n})") from None
            vals = Y[idx].reshape(*[2**v for v in s], *Y.shape[1:])
            freqs, coeffs = tensor_interpolant(vals, s)
            out[R.positions(freqs)] += c * coeffs
        return R, out

    def fit(self, X, y):
        X = check_points(X, self.d)
        y = check_samples(y, X.shape[0])
        if y.ndim != 1:
            raise ValueError("fit expects one sample vector")
        R, c = self._coefficients(X, y)
        self.points_ = X
        self.polynomial_ = TrigPoly(R, c)
        return self

    def predict(self, X):
        check_is_fitted(self, "polynomial_")
        return self.polynomial_(check_points(X, self.d))

    def recover(self, f: TrigPoly) -> TrigPoly:
        """Sample ``f`` on ``SG(n)`` and return the interpolant."""
        X = self.sample_points().values
        return self.fit(X, f(X)).polynomial_

    def linear_map(self, X) -> tuple[FrequencySet, np.ndarray]:
        """Matrix ``M`` with ``coeffs = M @ y`` for samples at ``X``."""
        X = check_points(X, self.d)
        return self._coefficients(X, np.eye(X.shape[0], dtype=complex))


def smolyak_recover(f, n: int, d: int | None = None, points=None) -> TrigPoly:
    """``S_n`` applied to a :class:`TrigPoly` or to sample values on ``SG(n)``
    (given in the order of ``points``, default ``sparse_grid(n, d)``)."""
    if isinstance(f, TrigPoly):
        return SmolyakRecovery(n, f.dim).recover(f)
    if d is None:
        raise ValueError("d is required when passing sample values")
    X = sparse_grid(n, d).values if points is None else points
    return SmolyakRecovery(n, d).fit(X, f).polynomial_


def christoffel_weights(Q: FrequencySet, points) -> np.ndarray:
    """``w_nu = 1 / (m rho(xi_nu))`` with ``rho(x) = N^{-1} sum_{k in Q} |e^{i(k,x)}|^2``.

    On the torus ``rho`` is identically 1, so the weights are ``1/m``.
    """
    X = check_points(points, Q.dim)
    m = X.shape[0]
    Phi = np.exp(1j * X @ Q.frequencies.T.astype(float))
    rho = np.sum(np.abs(Phi) ** 2, axis=1) / len(Q)
    return 1.0 / (m * rho)


def design_matrix(Q: FrequencySet, X: np.ndarray) -> np.ndarray:
    """``Phi[nu, k] = e^{i(k, xi_nu)}``."""
    return np.exp(1j * X @ Q.frequencies.T.astype(float))


class WeightedLeastSquaresRecovery(BaseEstimator):
    """Weighted least squares fit ``argmin_{u in T(Q)} sum_nu w_nu |f(xi_nu) - u(xi_nu)|^2``.

    Parameters
    ----------
    frequencies : FrequencySet
        The recovery space ``T(Q)``.
    weights : {"christoffel", "uniform"}
        Default weights when ``fit`` gets no ``sample_weight``.
    rcond : float
        Reject designs whose singular value ratio falls below this.
    """

    def __init__(self, frequencies: FrequencySet | None = None, weights: str = "christoffel", rcond: float = 1e-10):
        self.frequencies = frequencies
        self.weights = weights
        self.rcond = rcond

    def _weights(self, X, sample_weight):
        m = X.shape[0]
        if sample_weight is not None:
            return check_weights(sample_weight, m)
        if self.weights == "christoffel":
            return christoffel_weights(self.frequencies, X)
        if self.weights == "uniform":
            return np.full(m, 1.0 / m)
        raise ValueError(f"unknown weights {self.weights!r}")

    def _factor(self, X, w):
        Q = self.frequencies
        if Q is None:
            raise ValueError("frequencies must be set")
        m, N = X.shape[0], len(Q)
        if m < N:
            raise RankDeficientError(f"{m} points cannot determine {N} coefficients", 0.0)
        A = np.sqrt(w)[:, None] * design_matrix(Q, X)
        Qf, R = np.linalg.qr(A)
        sv = np.linalg.svd(R, compute_uv=False)
        if sv[-1] < self.rcond * sv[0]:
            raise RankDeficientError(
                f"design is rank deficient: smallest/largest singular value {sv[-1] / sv[0]:.3e}",
                float(sv[-1]),
            )
        return Qf, R, sv

    def fit(self, X, y, sample_weight=None):
        X = check_points(X, self.frequencies.dim if self.frequencies is not None else None)
        y = check_samples(y, X.shape[0])
        w = self._weights(X, sample_weight)
        Qf, R, sv = self._factor(X, w)
        c = np.linalg.solve(R, Qf.conj().T @ (np.sqrt(w) * y))
        self.points_ = X
        self.weights_ = w
        self.singular_values_ = sv
        self.polynomial_ = TrigPoly(self.frequencies, c)
        return self

    def predict(self, X):
        check_is_fitted(self, "polynomial_")
        return self.polynomial_(check_points(X, self.frequencies.dim))

    def linear_map(self, X, sample_weight=None) -> tuple[FrequencySet, np.ndarray]:
        X = check_points(X, self.frequencies.dim)
        w = self._weights(X, sample_weight)
        Qf, R, _ = self._factor(X, w)
        return self.frequencies, np.linalg.solve(R, Qf.conj().T * np.sqrt(w)[None, :])


def wls_recover(values, points, Q: FrequencySet, weights=None, rcond: float = 1e-10) -> TrigPoly:
    """Weighted least squares fit in ``T(Q)``; ``weights=None`` means Christoffel weights."""
    op = WeightedLeastSquaresRecovery(Q, rcond=rcond)
    return op.fit(points, values, sample_weight=weights).polynomial_


@dataclass
class CubatureRule:
    """``Lambda_m(f) = sum_j lambda_j f(xi_j)``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("one weight per point required")

    def __call__(self, f) -> complex:
        vals = f(self.points) if callable(f) else np.asarray(f)
        return complex(np.dot(self.weights, vals))


def induced_cubature(op, points=None) -> CubatureRule:
    """Cubature ``lambda_j = int psi_j d mu``: the mean coefficient of ``op`` applied
    to the j-th unit sample vector."""
    X = _operator_points(op, points)
    Q, M = op.linear_map(X)
    zero = Q.index.get((0,) * Q.dim)
    weights = np.zeros(X.shape[0], dtype=complex) if zero is None else M[zero].copy()
    return CubatureRule(X, weights)


def _operator_points(op, points) -> np.ndarray:
    if points is not None:
        return check_points(points)
    if hasattr(op, "points_"):
        return op.points_
    if hasattr(op, "sample_points"):
        return op.sample_points().values
    raise ValueError("operator has no sample points; pass points explicitly")


def recover(f: TrigPoly, op, points=None) -> TrigPoly:
    """Apply the recovery operator to the samples of ``f`` (``op`` is not modified)."""
    X = _operator_points(op, points)
    return clone(op).fit(X, f(X)).polynomial_


def recovery_error(f: TrigPoly, op, q=2, points=None, grid: GridSpec | None = None) -> float:
    """``||f - op(f)||_q`` (exact for ``q = 2``)."""
    return norm(f - recover(f, op, points), q, grid)


def cubature_chain(f: TrigPoly, op, points=None, q=2, oversampling: int = 4) -> dict[str, float]:
    """Quantities in ``|Lambda(f) - int f| = |int (Psi f - f)| <= ||Psi f - f||_1 <= ||Psi f - f||_q``,
    plus the sup norm of the recovery residual (grid estimate)."""
    X = _operator_points(op, points)
    g = recover(f, op, X)
    resid = g - f
    rule = induced_cubature(op, X)
    lam = rule(f)
    grid = GridSpec.for_support(resid.support, factor=oversampling)
    return {
        "cubature_error": abs(lam - f.mean()),
        "residual_mean": abs(resid.mean()),
        "cubature_identity_gap": abs(lam - g.mean()),
        "l1": norm(resid, 1, grid),
        "lq": norm(resid, q, grid),
        "sup": norm(resid, math.inf, grid),
    }
