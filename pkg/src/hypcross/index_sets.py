"""Frequency index sets on Z^d: dyadic blocks, stepped hyperbolic crosses,
parallelepipeds and level compositions.

Frequencies are stored as an ``(N, d)`` integer array in lexicographic order,
so two sets with the same members compare equal structurally.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ResourceCapError

DEFAULT_CAP = 2**24


def _as_multi_index(s: Iterable[int]) -> tuple[int, ...]:
    s = tuple(int(v) for v in s)
    if len(s) < 1:
        raise ValueError("multi-index must have at least one entry")
    if any(v < 0 for v in s):
        raise ValueError(f"multi-index entries must be nonnegative, got {s}")
    return s


def _lex_order(rows: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.arange(0)
    return np.lexsort(rows.T[::-1])


@dataclass(frozen=True, eq=False)
class FrequencySet:
    """A finite set of integer frequency vectors.

    ``blocks`` (optional) holds, row by row, the multi-index ``s`` with
    ``k in rho(s)``.
    """

    frequencies: np.ndarray
    blocks: np.ndarray | None = None
    dim: int = field(default=0)

    def __post_init__(self):
        k = np.asarray(self.frequencies, dtype=np.int64)
        if k.ndim == 1:
            k = k.reshape(-1, self.dim or 1)
        d = self.dim or k.shape[1]
        if k.shape[1] != d:
            raise ValueError(f"frequencies have {k.shape[1]} columns, expected {d}")
        order = _lex_order(k)
        k = k[order]
        if k.shape[0] > 1 and np.any(np.all(k[1:] == k[:-1], axis=1)):
            raise ValueError("duplicate frequencies")
        b = self.blocks
        if b is not None:
            b = np.asarray(b, dtype=np.int64).reshape(-1, d)[order]
            b.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "frequencies", k)
        object.__setattr__(self, "blocks", b)
        object.__setattr__(self, "dim", d)

    def __len__(self) -> int:
        return self.frequencies.shape[0]

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self.frequencies)

    def __contains__(self, k) -> bool:
        return tuple(int(v) for v in k) in self.index

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrequencySet):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.frequencies, other.frequencies)

    def __hash__(self):
        return hash((self.dim, self.frequencies.tobytes()))

    def __repr__(self) -> str:
        return f"FrequencySet(dim={self.dim}, size={len(self)})"

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        """Map frequency tuple -> row position."""
        return {tuple(row): i for i, row in enumerate(self.frequencies.tolist())}

    @property
    def max_abs(self) -> np.ndarray:
        """Per-coordinate maximum ``|k_j|`` (zeros for the empty set)."""
        if len(self) == 0:
            return np.zeros(self.dim, dtype=np.int64)
        return np.abs(self.frequencies).max(axis=0)

    def positions(self, other: "FrequencySet | np.ndarray") -> np.ndarray:
        """Row positions of ``other``'s frequencies in this set (-1 if absent)."""
        rows = other.frequencies if isinstance(other, FrequencySet) else np.asarray(other)
        idx = self.index
        return np.array([idx.get(tuple(r), -1) for r in rows.tolist()], dtype=np.int64)

    def block_list(self) -> list[tuple[int, ...]]:
        """Distinct block multi-indices present, lexicographically ordered."""
        if self.blocks is None:
            raise ValueError("frequency set carries no block structure")
        return sorted({tuple(r) for r in self.blocks.tolist()})

    def block_mask(self, s: Sequence[int]) -> np.ndarray:
        """Boolean mask of the rows lying in ``rho(s)``, by the defining inequalities."""
        s = np.asarray(_as_multi_index(s))
        lo = np.floor(2.0 ** (s - 1)).astype(np.int64)
        hi = 2**s
        a = np.abs(self.frequencies)
        return np.all((a >= lo) & (a < hi), axis=1)

    def union(self, other: "FrequencySet") -> "FrequencySet":
        rows = np.unique(np.vstack([self.frequencies, other.frequencies]), axis=0)
        return FrequencySet(rows, dim=self.dim)

    def intersection(self, other: "FrequencySet") -> "FrequencySet":
        keep = other.positions(self) >= 0
        return FrequencySet(self.frequencies[keep], dim=self.dim)

    def to_csv_rows(self) -> list[str]:
        """``k_1,...,k_d[,s_1,...,s_d]`` text rows."""
        if self.blocks is None:
            data = self.frequencies
        else:
            data = np.hstack([self.frequencies, self.blocks])
        return [",".join(str(v) for v in row) for row in data.tolist()]


def block_of_frequency(k: Sequence[int]) -> tuple[int, ...]:
    """The unique ``s`` with ``k in rho(s)``: ``s_j = bit_length(|k_j|)``."""
    return tuple(int(abs(int(v))).bit_length() for v in k)


def _block_1d(s: int) -> np.ndarray:
    if s == 0:
        return np.array([0], dtype=np.int64)
    pos = np.arange(2 ** (s - 1), 2**s, dtype=np.int64)
    return np.concatenate([-pos[::-1], pos])


def block_size(s: Sequence[int]) -> int:
    """``|rho(s)| = prod_j (2^{s_j} if s_j > 0 else 1)``."""
    return prod(2**v if v > 0 else 1 for v in s)


def _block_rows(s: tuple[int, ...]) -> np.ndarray:
    axes = [_block_1d(v) for v in s]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def dyadic_block(s: Sequence[int]) -> FrequencySet:
    """``rho(s) = {k : floor(2^{s_j-1}) <= |k_j| < 2^{s_j}}``."""
    s = _as_multi_index(s)
    rows = _block_rows(s)
    return FrequencySet(rows, np.tile(np.array(s, dtype=np.int64), (rows.shape[0], 1)), dim=len(s))


def compositions(n: int, d: int, up_to: bool = False) -> list[tuple[int, ...]]:
    """All ``s in N_0^d`` with ``|s|_1 == n`` (or ``<= n`` when ``up_to``).

    Ordered by level, then lexicographically.
    """
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    levels = range(n + 1) if up_to else (n,)
    out = []
    for level in levels:
        # stars and bars
        shell = []
        for bars in itertools.combinations(range(level + d - 1), d - 1):
            cuts = (-1, *bars, level + d - 1)
            shell.append(tuple(b - a - 1 for a, b in zip(cuts, cuts[1:])))
        out.extend(sorted(shell))
    return out


def hyperbolic_cross_size(n: int, d: int, shell_only: bool = False) -> int:
    return sum(block_size(s) for s in compositions(n, d, up_to=not shell_only))


def hyperbolic_cross(n: int, d: int, shell_only: bool = False, cap: int = DEFAULT_CAP) -> FrequencySet:
    """Stepped hyperbolic cross ``Q_n`` (or the shell ``Q_n \\ Q_{n-1}``)."""
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    blocks = compositions(n, d, up_to=not shell_only)
    size = sum(block_size(s) for s in blocks)
    if size > cap:
        raise ResourceCapError(f"|Q_{n}| in d={d} is {size}, above the cap {cap}")
    rows = [_block_rows(s) for s in blocks]
    labels = [np.tile(np.array(s, dtype=np.int64), (r.shape[0], 1)) for s, r in zip(blocks, rows)]
    return FrequencySet(np.vstack(rows), np.vstack(labels), dim=d)


def theta(N: Sequence[int]) -> int:
    """Dimension of the parallelepiped space, ``prod_j (2 N_j + 1)``."""
    return prod(2 * int(v) + 1 for v in N)


def parallelepiped(N: Sequence[int], cap: int = DEFAULT_CAP) -> FrequencySet:
    """``Pi(N, d) = {k : |k_j| <= N_j}``."""
    N = _as_multi_index(N)
    if theta(N) > cap:
        raise ResourceCapError(f"parallelepiped of size {theta(N)} above the cap {cap}")
    axes = [np.arange(-v, v + 1, dtype=np.int64) for v in N]
    mesh = np.meshgrid(*axes, indexing="ij")
    rows = np.stack([m.ravel() for m in mesh], axis=1)
    return FrequencySet(rows, dim=len(N))
