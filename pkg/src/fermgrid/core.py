"""Grid geometry, permutations, snake indexing, and the Hilbert curve layout."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """An L x L qubit grid holding N = L^2 modes."""

    L: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"grid side must be positive, got {self.L}")

    @property
    def N(self) -> int:
        return self.L * self.L


def snake_index(r: int, c: int, L: int) -> int:
    """Chain position of grid cell (r, c) under boustrophedon row-major order.

    Even rows run left-to-right, odd rows right-to-left, so horizontally
    adjacent cells are always chain-adjacent.
    """
    if not (0 <= r < L and 0 <= c < L):
        raise ValueError(f"cell ({r}, {c}) outside {L}x{L} grid")
    return r * L + (c if r % 2 == 0 else L - 1 - c)


def snake_cell(j: int, L: int) -> tuple[int, int]:
    """Inverse of :func:`snake_index`."""
    if not (0 <= j < L * L):
        raise ValueError(f"chain index {j} outside grid of {L * L} cells")
    r, q = divmod(j, L)
    return r, (q if r % 2 == 0 else L - 1 - q)


class Permutation:
    """A bijection on {0, ..., n-1}, stored densely as map[i] = pi(i)."""

    __slots__ = ("map",)

    def __init__(self, map):
        arr = np.asarray(map, dtype=np.int64)
        n = arr.shape[0]
        if arr.ndim != 1 or not np.array_equal(np.sort(arr), np.arange(n)):
            raise ValueError("permutation map must be a bijection on 0..n-1")
        self.map = arr
        self.map.setflags(write=False)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def reversal(cls, n: int) -> "Permutation":
        return cls(np.arange(n)[::-1].copy())

    @classmethod
    def transpose(cls, L: int) -> "Permutation":
        """2D reflection: the mode at snake index of (r, c) moves to that of (c, r)."""
        m = np.empty(L * L, dtype=np.int64)
        for r in range(L):
            for c in range(L):
                m[snake_index(r, c, L)] = snake_index(c, r, L)
        return cls(m)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        """Fisher-Yates shuffle from the supplied generator."""
        return cls(rng.permutation(n))

    def __len__(self) -> int:
        return len(self.map)

    def __call__(self, i: int) -> int:
        return int(self.map[i])

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.map, other.map)

    def __hash__(self):
        return hash(self.map.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self.map.tolist()})"

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.map, np.arange(len(self.map))))


def compose(pi: Permutation, sigma: Permutation) -> Permutation:
    """compose(pi, sigma)(i) = pi(sigma(i))."""
    if len(pi) != len(sigma):
        raise ValueError("length mismatch")
    return Permutation(pi.map[sigma.map])


def invert(pi: Permutation) -> Permutation:
    inv = np.empty_like(pi.map)
    inv[pi.map] = np.arange(len(pi.map))
    return Permutation(inv)


def inversion_set(pi: Permutation) -> set[tuple[int, int]]:
    """All pairs (i, j) with i < j and pi(i) > pi(j)."""
    m = pi.map
    n = len(m)
    return {(i, j) for i in range(n) for j in range(i + 1, n) if m[i] > m[j]}


def inversion_count(pi: Permutation) -> int:
    """Number of inversions, via an O(n log n) merge count."""
    m = list(pi.map)

    def count(a):
        if len(a) <= 1:
            return a, 0
        mid = len(a) // 2
        left, cl = count(a[:mid])
        right, cr = count(a[mid:])
        merged, i, j, inv = [], 0, 0, 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                merged.append(right[j])
                j += 1
                inv += len(left) - i
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, cl + cr + inv

    return count(m)[1]


# ---------------------------------------------------------------------------
# Hilbert space-filling curve
#
# Convention (fixed here; any consistent orientation works for the layout):
#   * even k: the classic square curve of side 2^(k/2) with axes (r, c) =
#     (y, x) of the standard iterative construction; starts at (0, 0).
#   * odd k: two even-order squares stacked vertically, each transposed so the
#     first ends at its bottom-left cell and the second starts directly below.
# The rectangle is 2^ceil(k/2) rows by 2^floor(k/2) columns. Consecutive
# indices are always edge-adjacent, and every aligned 2^q block maps to an
# axis-aligned rectangle with sides 2^floor(q/2) x 2^ceil(q/2).
# ---------------------------------------------------------------------------


def hilbert_shape(k: int) -> tuple[int, int]:
    """(rows, cols) of the order-k Hilbert rectangle."""
    if k < 0:
        raise ValueError("order must be nonnegative")
    return 1 << ((k + 1) // 2), 1 << (k // 2)


def _square_xy(i: int, n_bits: int) -> tuple[int, int]:
    # standard iterative index -> (x, y) on a square of side 2^n_bits
    x = y = 0
    s = 1
    side = 1 << n_bits
    while s < side:
        rx = 1 & (i >> 1)
        ry = 1 & (i ^ rx)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        i >>= 2
        s <<= 1
    return x, y


def _square_index(x: int, y: int, n_bits: int) -> int:
    i = 0
    s = (1 << n_bits) >> 1
    side = 1 << n_bits
    while s > 0:
        rx = 1 if (x & s) else 0
        ry = 1 if (y & s) else 0
        i += s * s * ((3 * rx) ^ ry)
        if ry == 0:
            if rx == 1:
                x = side - 1 - x
                y = side - 1 - y
            x, y = y, x
        s >>= 1
    return i


def hilbert_index_to_cell(i: int, k: int) -> tuple[int, int]:
    """Cell (r, c) of curve index i on the order-k rectangle."""
    if not (0 <= i < (1 << k)):
        raise ValueError(f"index {i} outside curve of 2^{k} cells")
    if k % 2 == 0:
        x, y = _square_xy(i, k // 2)
        return y, x
    half = 1 << (k - 1)
    s = 1 << ((k - 1) // 2)
    if i < half:
        x, y = _square_xy(i, (k - 1) // 2)
        return x, y  # transposed: ends at (s-1, 0)
    x, y = _square_xy(i - half, (k - 1) // 2)
    return s + x, y


def hilbert_cell_to_index(r: int, c: int, k: int) -> int:
    rows, cols = hilbert_shape(k)
    if not (0 <= r < rows and 0 <= c < cols):
        raise ValueError(f"cell ({r}, {c}) outside {rows}x{cols} rectangle")
    if k % 2 == 0:
        return _square_index(c, r, k // 2)
    s = 1 << ((k - 1) // 2)
    if r < s:
        return _square_index(r, c, (k - 1) // 2)
    return (1 << (k - 1)) + _square_index(r - s, c, (k - 1) // 2)


@functools.lru_cache(maxsize=32)
def hilbert_cells(k: int) -> tuple[tuple[int, int], ...]:
    """All cells of the order-k curve, in curve order."""
    return tuple(hilbert_index_to_cell(i, k) for i in range(1 << k))
