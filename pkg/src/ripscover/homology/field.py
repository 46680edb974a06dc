"""Prime fields F_p."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def is_prime(p: int) -> bool:
    p = int(p)
    if p < 2:
        return False
    f = 2
    while f * f <= p:
        if p % f == 0:
            return False
        f += 1
    return True


def check_prime(p) -> int:
    if isinstance(p, bool) or int(p) != p or not is_prime(int(p)):
        raise ValueError(f"field characteristic must be prime, got {p!r}")
    return int(p)


@lru_cache(maxsize=None)
def inverse_table(p: int) -> np.ndarray:
    """inv[a] = a^-1 mod p for a in 1..p-1; inv[0] = 0."""
    p = check_prime(p)
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, p - 2, p)
    inv.setflags(write=False)
    return inv


class Fp:
    """An element of F_p. Supports +, -, *, / and ** with ints and same-field elements."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int = 2):
        self.p = check_prime(p)
        self.value = int(value) % self.p

    def _coerce(self, other) -> int:
        if isinstance(other, Fp):
            if other.p != self.p:
                raise ValueError(f"cannot mix F_{self.p} and F_{other.p}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.p
        return NotImplemented

    def __add__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else Fp(self.value + v, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else Fp(self.value - v, self.p)

    def __rsub__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else Fp(v - self.value, self.p)

    def __mul__(self, other):
        v = self._coerce(other)
        return NotImplemented if v is NotImplemented else Fp(self.value * v, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return Fp(-self.value, self.p)

    def inverse(self) -> "Fp":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return Fp(pow(self.value, self.p - 2, self.p), self.p)

    def __truediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return self * Fp(v, self.p).inverse()

    def __rtruediv__(self, other):
        v = self._coerce(other)
        if v is NotImplemented:
            return v
        return Fp(v, self.p) * self.inverse()

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        return Fp(pow(self.value, e, self.p), self.p)

    def __eq__(self, other):
        v = self._coerce(other)
        return False if v is NotImplemented else self.value == v

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"Fp({self.value}, {self.p})"


def rank_mod_p(a: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over F_p by dense Gaussian elimination."""
    return len(row_reduce(a, p)[1])


def row_reduce(a: np.ndarray, p: int):
    """Reduced row echelon form over F_p. Returns (matrix, pivot columns)."""
    inv = inverse_table(p)
    m = np.array(a, dtype=np.int64) % p
    rows, cols = m.shape if m.ndim == 2 else (0, 0)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * inv[m[r, c]]) % p
        others = np.flatnonzero(m[:, c])
        others = others[others != r]
        if others.size:
            m[others] = (m[others] - np.outer(m[others, c], m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def solve_mod_p(a: np.ndarray, b: np.ndarray, p: int):
    """One solution x of a @ x = b over F_p (pivot variables only), or None."""
    a = np.array(a, dtype=np.int64) % p
    b = np.array(b, dtype=np.int64).reshape(-1) % p
    rows, cols = a.shape
    aug = np.hstack([a, b[:, None]])
    red, piv = row_reduce(aug, p)
    if cols in piv:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = red[i, cols]
    return x


def nullspace_mod_p(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right null space of ``a`` over F_p as columns of an array."""
    a = np.array(a, dtype=np.int64) % p
    rows, cols = a.shape
    red, piv = row_reduce(a, p) if rows else (np.zeros((0, cols), dtype=np.int64), [])
    free = [c for c in range(cols) if c not in set(piv)]
    out = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        out[f, j] = 1
        for i, c in enumerate(piv):
            out[c, j] = (-red[i, f]) % p
    return out
