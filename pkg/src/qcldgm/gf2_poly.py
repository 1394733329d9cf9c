"""Sparse arithmetic in R_n = GF(2)[x]/(x^n - 1).

An n x n binary circulant is identified with the polynomial whose
coefficients form its first row (coefficient 0 sits in column 0). Only the
support, the sorted tuple of nonzero exponents, is stored.

The text form mirrors the usual position notation, e.g. ``56:(0;1;3;8;17)``.
"""

from __future__ import annotations

import re
from typing import Iterable

import numpy as np

from qcldgm import _backend

__all__ = [
    "SparsePoly",
    "NotInvertible",
    "RingMismatch",
    "add",
    "mul",
    "square",
    "power",
    "shift",
    "transpose",
    "dilate",
    "euclid_inverse",
    "parse",
]


class RingMismatch(ValueError):
    """Operands live in rings of different size."""


class NotInvertible(ArithmeticError):
    """gcd(a(x), x^n + 1) != 1: the circulant is singular."""


class SparsePoly:
    """Immutable element of R_n held by its support."""

    __slots__ = ("n", "support")

    n: int
    support: tuple[int, ...]

    def __init__(self, n: int, support: Iterable[int] = ()):
        n = int(n)
        if n <= 0:
            raise ValueError(f"ring size must be positive, got {n}")
        sup = tuple(sorted(int(e) for e in support))
        for i, e in enumerate(sup):
            if not 0 <= e < n:
                raise ValueError(f"exponent {e} out of range [0, {n})")
            if i and sup[i - 1] == e:
                raise ValueError(f"duplicate exponent {e}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "support", sup)

    @classmethod
    def _raw(cls, n: int, support: tuple[int, ...]) -> SparsePoly:
        # trusted path: support already reduced, unique and sorted
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "support", support)
        return obj

    @classmethod
    def from_exponents(cls, n: int, exponents: Iterable[int]) -> SparsePoly:
        """Sum of monomials x^e over GF(2); exponents are reduced mod n and
        repeated ones cancel in pairs."""
        odd: set[int] = set()
        for e in exponents:
            odd ^= {int(e) % n}
        return cls._raw(n, tuple(sorted(odd)))

    @classmethod
    def zero(cls, n: int) -> SparsePoly:
        return cls._raw(n, ())

    @classmethod
    def one(cls, n: int) -> SparsePoly:
        return cls._raw(n, (0,))

    @classmethod
    def monomial(cls, n: int, j: int) -> SparsePoly:
        return cls._raw(n, (j % n,))

    @classmethod
    def from_dense(cls, bits) -> SparsePoly:
        bits = np.asarray(bits)
        return cls._raw(len(bits), tuple(int(e) for e in np.flatnonzero(bits & 1)))

    @classmethod
    def from_int(cls, n: int, value: int) -> SparsePoly:
        """Bit i of ``value`` is the coefficient of x^i; the value is reduced
        mod x^n + 1 first."""
        value = _fold_int(value, n)
        sup = []
        i = 0
        while value:
            if value & 1:
                sup.append(i)
            value >>= 1
            i += 1
        return cls._raw(n, tuple(sup))

    def __setattr__(self, name, value):
        raise AttributeError("SparsePoly is immutable")

    @property
    def weight(self) -> int:
        return len(self.support)

    def is_zero(self) -> bool:
        return not self.support

    def is_one(self) -> bool:
        return self.support == (0,)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.uint8)
        out[list(self.support)] = 1
        return out

    def to_int(self) -> int:
        v = 0
        for e in self.support:
            v |= 1 << e
        return v

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.n == other.n and self.support == other.support

    def __hash__(self):
        return hash((self.n, self.support))

    def __lt__(self, other: SparsePoly) -> bool:
        return (self.n, self.support) < (other.n, other.support)

    def __add__(self, other: SparsePoly) -> SparsePoly:
        return add(self, other)

    __sub__ = __add__

    def __mul__(self, other: SparsePoly) -> SparsePoly:
        return mul(self, other)

    def __pow__(self, e: int) -> SparsePoly:
        return power(self, e)

    def __str__(self) -> str:
        return f"{self.n}:({';'.join(map(str, self.support))})"

    def __repr__(self) -> str:
        return f"SparsePoly({self.n}, {self.support!r})"

    def __reduce__(self):
        return (SparsePoly, (self.n, self.support))


def _check_ring(a: SparsePoly, b: SparsePoly) -> None:
    if a.n != b.n:
        raise RingMismatch(f"ring sizes differ: {a.n} vs {b.n}")


def add(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    _check_ring(a, b)
    return SparsePoly._raw(a.n, tuple(sorted(set(a.support).symmetric_difference(b.support))))


def mul(a: SparsePoly, b: SparsePoly) -> SparsePoly:
    """Cyclic convolution: W[a]*W[b] exponent sums, cancelled in pairs."""
    _check_ring(a, b)
    if not a.support or not b.support:
        return SparsePoly._raw(a.n, ())
    return SparsePoly._raw(a.n, _backend.kernels.sparse_mul(a.support, b.support, a.n))


def square(a: SparsePoly) -> SparsePoly:
    """Frobenius map e -> 2e mod n.

    Doubling is injective on exponents mod n when n is odd; for even n two
    exponents e and e + n/2 land on the same place and cancel.
    """
    return SparsePoly.from_exponents(a.n, (2 * e for e in a.support))


def power(a: SparsePoly, e: int) -> SparsePoly:
    if e < 0:
        raise ValueError("negative exponent; invert first")
    result = SparsePoly.one(a.n)
    base = a
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = square(base)
    return result


def shift(a: SparsePoly, j: int) -> SparsePoly:
    n = a.n
    return SparsePoly._raw(n, tuple(sorted((e + j) % n for e in a.support)))


def transpose(a: SparsePoly) -> SparsePoly:
    """a(x^-1): the polynomial of the transposed circulant."""
    n = a.n
    return SparsePoly._raw(n, tuple(sorted((-e) % n for e in a.support)))


def dilate(a: SparsePoly, factor: int) -> SparsePoly:
    """Map a(x) in R_n to a(x^f) in R_{f n}. Weight and cycle structure are
    preserved and inverses commute with the map."""
    if factor <= 0:
        raise ValueError("factor must be positive")
    return SparsePoly._raw(a.n * factor, tuple(e * factor for e in a.support))


def _fold_int(value: int, n: int) -> int:
    mask = (1 << n) - 1
    while value >> n:
        value = (value & mask) ^ (value >> n)
    return value


def euclid_inverse(a: SparsePoly) -> SparsePoly:
    """Inverse in R_n by the extended Euclidean algorithm on a(x) and
    x^n + 1, using Python integers as dense GF(2)[x] words."""
    n = a.n
    u = a.to_int()
    if u == 0:
        raise NotInvertible(f"{a} is zero")
    v = (1 << n) | 1
    g1, g2 = 1, 0
    # invariant: g1*a == u, g2*a == v  (mod x^n + 1)
    while u != 1:
        if u == 0:
            if v == 1:
                g1 = g2
                break
            raise NotInvertible(f"{a} shares a factor with x^{n}+1")
        j = u.bit_length() - v.bit_length()
        if j < 0:
            u, v = v, u
            g1, g2 = g2, g1
            j = -j
        u ^= v << j
        g1 ^= g2 << j
    return SparsePoly.from_int(n, g1)


_TEXT = re.compile(r"^\s*(\d+)\s*:\s*\(\s*([0-9;\s]*)\)\s*$")


def parse(text: str) -> SparsePoly:
    """Parse ``n:(e1;e2;...)``. Out-of-range or repeated exponents are
    rejected rather than reduced."""
    m = _TEXT.match(text)
    if not m:
        raise ValueError(f"not a polynomial literal: {text!r}")
    n = int(m.group(1))
    body = m.group(2).strip()
    exps = [int(t) for t in body.split(";")] if body else []
    return SparsePoly(n, exps)
