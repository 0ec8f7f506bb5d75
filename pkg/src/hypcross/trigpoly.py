"""Trigonometric polynomials on the d-torus.

Norms are taken with respect to the normalized Lebesgue measure
``(2 pi)^{-d} dx``, so ``||e^{i(k,x)}||_p = 1`` for every ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import prod
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .exceptions import AliasingError, InsufficientGridError, ResourceCapError
from .index_sets import FrequencySet

GRID_CAP = 2**26
DEFAULT_OVERSAMPLING = 4


def _parse_p(p) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "oo"):
            return math.inf
        p = float(p)
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must lie in [1, inf], got {p}")
    return p


def _is_even_integer(p: float) -> bool:
    return math.isfinite(p) and p == int(p) and int(p) % 2 == 0


class TrigPoly:
    """``f(x) = sum_{k in support} c_k e^{i(k,x)}``."""

    __slots__ = ("support", "coeffs")

    def __init__(self, support: FrequencySet, coeffs=None):
        if not isinstance(support, FrequencySet):
            support = FrequencySet(np.asarray(support))
        if coeffs is None:
            coeffs = np.zeros(len(support), dtype=complex)
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        if coeffs.shape[0] != len(support):
            raise ValueError(f"{coeffs.shape[0]} coefficients for {len(support)} frequencies")
        self.support = support
        self.coeffs = coeffs

    @classmethod
    def from_frequencies(cls, frequencies, coeffs, dim: int | None = None) -> "TrigPoly":
        """Build from unsorted frequency rows; coefficients follow the rows."""
        rows = np.asarray(frequencies, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows.reshape(-1, dim or 1)
        support = FrequencySet(rows, dim=rows.shape[1])
        c = np.zeros(len(support), dtype=complex)
        c[support.positions(rows)] = np.asarray(coeffs, dtype=complex).reshape(-1)
        return cls(support, c)

    @classmethod
    def monomial(cls, k: Sequence[int], c: complex = 1.0) -> "TrigPoly":
        return cls.from_frequencies([list(k)], [c])

    @classmethod
    def zero(cls, d: int) -> "TrigPoly":
        return cls(FrequencySet(np.zeros((0, d), dtype=np.int64), dim=d))

    @property
    def dim(self) -> int:
        return self.support.dim

    @property
    def frequencies(self) -> np.ndarray:
        return self.support.frequencies

    def __len__(self):
        return len(self.support)

    def __repr__(self):
        return f"TrigPoly(dim={self.dim}, terms={len(self)})"

    def coeff(self, k: Sequence[int]) -> complex:
        i = self.support.index.get(tuple(int(v) for v in k))
        return 0j if i is None else complex(self.coeffs[i])

    def coeffs_on(self, Q: FrequencySet) -> np.ndarray:
        """Coefficients re-indexed onto ``Q`` (zero where absent)."""
        out = np.zeros(len(Q), dtype=complex)
        pos = Q.positions(self.support)
        inside = pos >= 0
        out[pos[inside]] = self.coeffs[inside]
        return out

    def reindex(self, Q: FrequencySet) -> "TrigPoly":
        return TrigPoly(Q, self.coeffs_on(Q))

    def _combine(self, other: "TrigPoly", sign: float) -> "TrigPoly":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        if self.support == other.support:
            return TrigPoly(self.support, self.coeffs + sign * other.coeffs)
        Q = self.support.union(other.support)
        return TrigPoly(Q, self.coeffs_on(Q) + sign * other.coeffs_on(Q))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return TrigPoly(self.support, -self.coeffs)

    def __mul__(self, scalar):
        return TrigPoly(self.support, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TrigPoly(self.support, self.coeffs / complex(scalar))

    def restrict(self, mask: np.ndarray) -> "TrigPoly":
        mask = np.asarray(mask, dtype=bool)
        return TrigPoly(FrequencySet(self.frequencies[mask], dim=self.dim), self.coeffs[mask])

    def drop_zeros(self, tol: float = 0.0) -> "TrigPoly":
        return self.restrict(np.abs(self.coeffs) > tol)

    def is_real(self, tol: float = 1e-12) -> bool:
        """True iff ``c_{-k} = conj(c_k)`` for all ``k`` (up to ``tol``)."""
        mirrored = TrigPoly.from_frequencies(-self.frequencies, np.conj(self.coeffs), dim=self.dim)
        diff = self - mirrored
        return bool(np.all(np.abs(diff.coeffs) <= tol))

    def l2_coefficient_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def mean(self) -> complex:
        """Integral against the normalized measure, i.e. the coefficient at 0."""
        return self.coeff((0,) * self.dim)

    def __call__(self, x, chunk: int = 4096) -> np.ndarray:
        """Evaluate at points ``x`` of shape ``(m, d)`` by direct summation."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, self.dim)
        out = np.empty(x.shape[0], dtype=complex)
        K = self.frequencies.astype(float)
        for start in range(0, x.shape[0], chunk):
            phase = x[start:start + chunk] @ K.T
            out[start:start + chunk] = np.exp(1j * phase) @ self.coeffs
        return out


@dataclass(frozen=True)
class GridSpec:
    """Equispaced tensor grid ``x_m = (2 pi m_1 / G_1, ..., 2 pi m_d / G_d)``."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(g) for g in self.sizes)
        if not sizes or any(g < 1 for g in sizes):
            raise ValueError(f"grid sizes must be positive, got {self.sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def npoints(self) -> int:
        return prod(self.sizes)

    def points(self) -> np.ndarray:
        """All grid points as an ``(npoints, d)`` array in C order."""
        axes = [2 * np.pi * np.arange(g) / g for g in self.sizes]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @classmethod
    def for_support(cls, Q: FrequencySet, factor: float = 1.0, minimum: Iterable[int] | None = None) -> "GridSpec":
        """Smallest grid with ``G_j >= factor * (2 M_j + 1)``."""
        M = Q.max_abs
        sizes = [max(1, int(math.ceil(factor * (2 * m + 1)))) for m in M]
        if minimum is not None:
            sizes = [max(a, int(b)) for a, b in zip(sizes, minimum)]
        return cls(tuple(sizes))


@dataclass
class GridValues:
    """Function values on a :class:`GridSpec`.

    ``support`` records the frequencies of the polynomial the values were
    generated from, when known; :func:`analyze_grid` uses it to flag aliasing.
    """

    spec: GridSpec
    values: np.ndarray
    support: FrequencySet | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.spec.sizes:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.spec.sizes}")

    def to_csv_rows(self) -> list[str]:
        """``x_1,...,x_d,re,im`` rows."""
        pts = self.spec.points()
        vals = self.values.ravel()
        return [
            ",".join([*(repr(float(c)) for c in p), repr(float(v.real)), repr(float(v.imag))])
            for p, v in zip(pts, vals)
        ]


def _residues(Q: FrequencySet, spec: GridSpec) -> np.ndarray:
    return np.mod(Q.frequencies, np.asarray(spec.sizes, dtype=np.int64))


def _flat_residues(res: np.ndarray, spec: GridSpec) -> np.ndarray:
    if res.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    return np.ravel_multi_index(tuple(res.T), spec.sizes)


def _check_grid_cap(spec: GridSpec):
    if spec.npoints > GRID_CAP:
        raise ResourceCapError(f"grid of {spec.npoints} points above the cap {GRID_CAP}")


def evaluate_grid(f: TrigPoly, grid: GridSpec | Sequence[int]) -> GridValues:
    """Values of ``f`` on the grid via zero-embedding and an inverse FFT."""
    spec = grid if isinstance(grid, GridSpec) else GridSpec(tuple(grid))
    if spec.dim != f.dim:
        raise ValueError("grid dimension does not match polynomial")
    _check_grid_cap(spec)
    flat = _flat_residues(_residues(f.support, spec), spec)
    if np.unique(flat).shape[0] != flat.shape[0]:
        raise AliasingError(f"support frequencies collide modulo grid {spec.sizes}")
    A = np.zeros(spec.npoints, dtype=complex)
    A[flat] = f.coeffs
    vals = np.fft.ifftn(A.reshape(spec.sizes)) * spec.npoints
    return GridValues(spec, vals, support=f.support)


def analyze_grid(v: GridValues, Q: FrequencySet) -> TrigPoly:
    """Discrete Fourier coefficients of ``v`` on ``Q``.

    Exact inverse of :func:`evaluate_grid` on ``T(Q)`` when
    ``G_j >= 2 max|k_j| + 1``.
    """
    spec = v.spec
    if spec.dim != Q.dim:
        raise ValueError("grid dimension does not match frequency set")
    need = 2 * Q.max_abs + 1
    if np.any(np.asarray(spec.sizes) < need):
        raise InsufficientGridError(f"grid {spec.sizes} too small for support needing {tuple(need)}")
    res = _flat_residues(_residues(Q, spec), spec)
    if v.support is not None and len(v.support):
        outside = Q.positions(v.support) < 0
        if np.any(outside):
            src = FrequencySet(v.support.frequencies[outside], dim=Q.dim)
            if np.intersect1d(_flat_residues(_residues(src, spec), spec), res).size:
                raise AliasingError(
                    f"source frequencies outside Q alias onto Q modulo grid {spec.sizes}"
                )
    F = np.fft.fftn(v.values).ravel() / spec.npoints
    return TrigPoly(Q, F[res])


class NormEstimate(NamedTuple):
    value: float
    grid: GridSpec | None
    exact: bool


def default_norm_grid(f: TrigPoly, p: float, oversampling: int = DEFAULT_OVERSAMPLING) -> GridSpec:
    """Grid used by :func:`norm` when none is supplied.

    Even integer ``p``: ``G_j = p M_j + 1`` (exact). Otherwise ``oversampling``
    times the Nyquist size ``2 M_j + 1``.
    """
    M = f.support.max_abs
    if _is_even_integer(p):
        return GridSpec(tuple(int(p) * int(m) + 1 for m in M))
    return GridSpec(tuple(oversampling * (2 * int(m) + 1) for m in M))


def norm_estimate(f: TrigPoly, p, grid: GridSpec | None = None, oversampling: int = DEFAULT_OVERSAMPLING) -> NormEstimate:
    p = _parse_p(p)
    if p == 2:
        return NormEstimate(f.l2_coefficient_norm(), None, True)
    if len(f) == 0:
        return NormEstimate(0.0, grid, True)
    spec = grid or default_norm_grid(f, p, oversampling)
    vals = np.abs(evaluate_grid(f, spec).values)
    if math.isinf(p):
        return NormEstimate(float(vals.max()), spec, False)
    exact = _is_even_integer(p) and bool(np.all(np.asarray(spec.sizes) > p * f.support.max_abs))
    # scale by the max to avoid overflow for large p
    top = vals.max()
    if top == 0:
        return NormEstimate(0.0, spec, exact)
    value = top * float(np.mean((vals / top) ** p)) ** (1.0 / p)
    return NormEstimate(float(value), spec, exact)


def norm(f: TrigPoly, p, grid: GridSpec | None = None, oversampling: int = DEFAULT_OVERSAMPLING) -> float:
    """``||f||_p`` w.r.t. the normalized measure.

    Exact for ``p = 2`` (Parseval) and for even integer ``p`` on a grid with
    ``G_j > p M_j``; otherwise a Riemann-sum estimate, and for ``p = inf`` the
    grid maximum (a lower bound of the true sup norm).
    """
    return norm_estimate(f, p, grid, oversampling).value


def block_projection(f: TrigPoly, s: Sequence[int]) -> TrigPoly:
    """``delta_s(f)``: keep the coefficients with ``k in rho(s)``."""
    if len(s) != f.dim:
        raise ValueError("block index dimension mismatch")
    return f.restrict(f.support.block_mask(s))


def block_labels(frequencies: np.ndarray) -> np.ndarray:
    """Row-wise block index ``s`` with ``k in rho(s)`` (``s_j`` = bit length of ``|k_j|``)."""
    a = np.abs(np.asarray(frequencies, dtype=np.int64))
    out = np.zeros_like(a)
    nz = a > 0
    out[nz] = np.floor(np.log2(a[nz])).astype(np.int64) + 1
    return out


def block_decomposition(f: TrigPoly) -> dict[tuple[int, ...], TrigPoly]:
    """All nonzero-support block projections of ``f`` keyed by ``s``."""
    if len(f) == 0:
        return {}
    labels = block_labels(f.frequencies)
    out = {}
    for s in sorted({tuple(r) for r in labels.tolist()}):
        out[s] = f.restrict(np.all(labels == np.asarray(s), axis=1))
    return out


def vdlp_coefficients(N: int, k) -> np.ndarray:
    """``hat V_N(k) = min(1, max(0, (2N - |k|)/N))``; ``V_0 = 0``."""
    k = np.abs(np.asarray(k, dtype=float))
    if N == 0:
        return np.zeros_like(k)
    return np.clip((2 * N - k) / N, 0.0, 1.0)


def vdlp_kernel(N: int) -> TrigPoly:
    """Univariate de la Vallee Poussin kernel ``V_N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N == 0:
        return TrigPoly.zero(1)
    k = np.arange(-2 * N + 1, 2 * N, dtype=np.int64)
    return TrigPoly(FrequencySet(k.reshape(-1, 1), dim=1), vdlp_coefficients(N, k))


def _delta_vdlp_1d(s: int) -> tuple[np.ndarray, np.ndarray]:
    hi = 2**s
    lo = 2 ** (s - 2) if s >= 2 else 0  # [2^{s-2}]
    k = np.arange(-2 * hi + 1, 2 * hi, dtype=np.int64)
    return k, vdlp_coefficients(hi, k) - vdlp_coefficients(lo, k)


def delta_vdlp(s: Sequence[int]) -> TrigPoly:
    """``Delta V_s = prod_j (V_{2^{s_j}} - V_{[2^{s_j - 2}]})(x_j)``.

    Support is the box ``|k_j| < 2^{s_j + 1}``.
    """
    factors = [_delta_vdlp_1d(int(v)) for v in s]
    ks = np.meshgrid(*[f[0] for f in factors], indexing="ij")
    cs = np.meshgrid(*[f[1] for f in factors], indexing="ij")
    rows = np.stack([m.ravel() for m in ks], axis=1)
    coeffs = np.prod(np.stack([c.ravel() for c in cs], axis=1), axis=1)
    return TrigPoly.from_frequencies(rows, coeffs, dim=len(s))


def convolve(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    """Normalized convolution: coefficientwise product on the common support."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    pos = g.support.positions(f.support)
    keep = pos >= 0
    Q = FrequencySet(f.frequencies[keep], dim=f.dim)
    return TrigPoly(Q, f.coeffs[keep] * g.coeffs[pos[keep]])


def hp_norm(f: TrigPoly, E: Iterable[Sequence[int]], p, grid: GridSpec | None = None) -> float:
    """``||f||_{H_p} = max_{s in E} ||delta_s(f)||_p``."""
    E = [tuple(int(v) for v in s) for s in E]
    covered = np.zeros(len(f), dtype=bool)
    for s in E:
        covered |= f.support.block_mask(s)
    stray = ~covered & (np.abs(f.coeffs) > 0)
    if np.any(stray):
        raise ValueError("f has nonzero coefficients outside the blocks of E")
    best = 0.0
    for s in E:
        piece = block_projection(f, s)
        if len(piece):
            best = max(best, norm(piece, p, grid))
    return best


def sup_norm(f: TrigPoly, grid: GridSpec | None = None, oversampling: int = DEFAULT_OVERSAMPLING) -> float:
    """Grid maximum of ``|f|``; a lower bound of ``||f||_inf``."""
    return norm(f, math.inf, grid, oversampling)


def nikolskii_ratio(f: TrigPoly, p, grid: GridSpec | None = None, oversampling: int = DEFAULT_OVERSAMPLING) -> float:
    """``||f||_inf / ||f||_p`` with a grid-estimated sup norm."""
    p = _parse_p(p)
    if math.isinf(p):
        raise ValueError("p must be finite")
    if len(f) == 0 or not np.any(f.coeffs):
        raise ValueError("f is identically zero")
    sup = sup_norm(f, grid, oversampling)
    return sup / norm(f, p)
