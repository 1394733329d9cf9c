"""The Xi family of psi-unitary polynomials and its cycle-free subfamily.

For n = 2^(m+2) s an element of Xi has support

    c_{-1} s,
    k_i + c_i 2^(i+1) s,            i = 0..m
    k_i + 2^i s + d_i 2^(i+1) s,    i = 0..m

with 0 < k_i < 2^i s pairwise distinct, 0 <= c_{-1} < 4 and
0 <= c_i, d_i < 2^(m+1-i).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qcldgm.cycles import has_length4_cycle
from qcldgm.gf2_poly import SparsePoly, shift
from qcldgm.psi import PsiParams, is_psi_unitary

__all__ = [
    "XiParams",
    "Exhausted",
    "xi_poly",
    "goodmat",
    "sufficient_conditions",
    "sample_cycle_free",
    "random_xi_params",
    "recognize_xi",
    "canonical_rep",
]


class Exhausted(RuntimeError):
    """No acceptable parameters were found within the try budget."""


@dataclass(frozen=True)
class XiParams:
    m: int
    s: int
    k: tuple[int, ...]
    c_minus1: int = 0
    c: tuple[int, ...] = field(default=())
    d: tuple[int, ...] = field(default=())

    def __post_init__(self):
        m, s = self.m, self.s
        object.__setattr__(self, "k", tuple(int(v) for v in self.k))
        object.__setattr__(self, "c", tuple(int(v) for v in self.c) or (0,) * (m + 1))
        object.__setattr__(self, "d", tuple(int(v) for v in self.d) or (0,) * (m + 1))
        if m < 0 or s <= 0:
            raise ValueError(f"need m >= 0 and s > 0, got m={m}, s={s}")
        if not (len(self.k) == len(self.c) == len(self.d) == m + 1):
            raise ValueError("k, c and d need m + 1 entries each")
        if len(set(self.k)) != len(self.k):
            raise ValueError(f"k values must be distinct: {self.k}")
        for i, ki in enumerate(self.k):
            if not 0 < ki < (s << i):
                raise ValueError(f"k_{i}={ki} outside (0, {s << i})")
            bound = 1 << (m + 1 - i)
            if not (0 <= self.c[i] < bound and 0 <= self.d[i] < bound):
                raise ValueError(f"c_{i}, d_{i} must lie in [0, {bound})")
        if not 0 <= self.c_minus1 < 4:
            raise ValueError("c_minus1 must lie in [0, 4)")

    @property
    def n(self) -> int:
        return (4 << self.m) * self.s

    def as_record(self) -> dict[str, str]:
        """Flat key-value form used by the CLI config files."""
        return {
            "m": str(self.m),
            "s": str(self.s),
            "k": ",".join(map(str, self.k)),
            "c_minus1": str(self.c_minus1),
            "c": ",".join(map(str, self.c)),
            "d": ",".join(map(str, self.d)),
        }

    @classmethod
    def from_record(cls, rec: dict[str, str]) -> XiParams:
        def ints(key):
            v = rec.get(key, "").strip()
            return tuple(int(t) for t in v.split(",")) if v else ()

        return cls(
            m=int(rec["m"]),
            s=int(rec["s"]),
            k=ints("k"),
            c_minus1=int(rec.get("c_minus1", 0)),
            c=ints("c"),
            d=ints("d"),
        )


def _xi_exponents(p: XiParams) -> list[int]:
    s = p.s
    exps = [p.c_minus1 * s]
    for i in range(p.m + 1):
        exps.append(p.k[i] + p.c[i] * (s << (i + 1)))
    for i in range(p.m + 1):
        exps.append(p.k[i] + (s << i) + p.d[i] * (s << (i + 1)))
    return [e % p.n for e in exps]


def xi_poly(params: XiParams) -> SparsePoly:
    exps = _xi_exponents(params)
    if len(set(exps)) != len(exps):
        raise ValueError(f"positions collide for {params}; weight would drop below {2 * params.m + 3}")
    a = SparsePoly(params.n, exps)
    assert is_psi_unitary(a, PsiParams(params.s, params.m + 2, 0))
    return a


def sufficient_conditions(s: int, k: Sequence[int]) -> bool:
    """k_{i+1} > 2 k_i and s > 2 k_m: enough to rule out 4-cycles."""
    return all(k[i + 1] > 2 * k[i] for i in range(len(k) - 1)) and s > 2 * k[-1]


def goodmat(m: int, s: int, k: Sequence[int]) -> SparsePoly:
    """(0; k_0..k_m; k_0 + s; k_1 + 2s; ...; k_m + 2^m s) in R_{2^(m+2) s}.

    Violating the sufficient conditions is allowed (see
    ``sufficient_conditions``); the result is then not guaranteed to be
    cycle-free and the caller should check it.
    """
    k = [int(v) for v in k]
    if len(k) != m + 1:
        raise ValueError(f"need {m + 1} k values, got {len(k)}")
    if k[0] <= 0 or any(k[i + 1] <= k[i] for i in range(m)):
        raise ValueError(f"k must be strictly increasing and positive: {k}")
    a = xi_poly(XiParams(m, s, tuple(k)))
    if sufficient_conditions(s, k):
        assert not has_length4_cycle(a), a
    return a


def sample_cycle_free(
    m: int,
    s: int,
    rng: np.random.Generator,
    max_tries: int = 1000,
    strict: bool = False,
) -> SparsePoly:
    """Random cycle-free goodmat with 0 < k_0 < ... < k_m and s > 2 k_m.

    ``strict`` additionally imposes k_{i+1} > 2 k_i.
    """
    top = (s - 1) // 2
    if top < m + 1:
        raise Exhausted(f"no increasing k of length {m + 1} below s/2 for s={s}")
    for _ in range(max_tries):
        k = np.sort(rng.choice(np.arange(1, top + 1), size=m + 1, replace=False))
        if strict and any(k[i + 1] <= 2 * k[i] for i in range(m)):
            continue
        a = goodmat(m, s, k.tolist())
        if not has_length4_cycle(a):
            return a
    raise Exhausted(f"no cycle-free matrix found in {max_tries} tries (m={m}, s={s})")


def random_xi_params(m: int, s: int, rng: np.random.Generator, max_tries: int = 1000) -> XiParams:
    """Uniform draw over valid XiParams whose positions do not collide."""
    for _ in range(max_tries):
        k = []
        for i in range(m + 1):
            k.append(int(rng.integers(1, s << i)))
        if len(set(k)) != len(k):
            continue
        c = tuple(int(rng.integers(0, 1 << (m + 1 - i))) for i in range(m + 1))
        d = tuple(int(rng.integers(0, 1 << (m + 1 - i))) for i in range(m + 1))
        p = XiParams(m, s, tuple(k), int(rng.integers(0, 4)), c, d)
        exps = _xi_exponents(p)
        if len(set(exps)) == len(exps):
            return p
    raise Exhausted(f"could not draw collision-free Xi params (m={m}, s={s})")


def recognize_xi(a: SparsePoly) -> XiParams | None:
    """Recover XiParams from a polynomial of weight 2m + 3, if it is in Xi."""
    if a.weight < 3 or a.weight % 2 == 0:
        return None
    m = (a.weight - 3) // 2
    if a.n % (4 << m):
        return None
    s = a.n // (4 << m)
    sup = a.support

    def pairs(level, remaining, acc):
        if level > m:
            yield acc
            return
        lo, hi = s << level, s << (level + 1)
        for e1 in remaining:
            k = e1 % hi
            if not 0 < k < lo:
                continue
            for e2 in remaining:
                if e2 == e1 or e2 % hi != k + lo:
                    continue
                rest = [e for e in remaining if e not in (e1, e2)]
                step = hi
                yield from pairs(level + 1, rest, acc + [(k, (e1 - k) // step, (e2 - k - lo) // step)])

    for e0 in sup:
        if e0 % s:
            continue
        rest = [e for e in sup if e != e0]
        for triple in pairs(0, rest, []):
            ks = tuple(t[0] for t in triple)
            if len(set(ks)) != len(ks):
                continue
            try:
                p = XiParams(m, s, ks, e0 // s, tuple(t[1] for t in triple), tuple(t[2] for t in triple))
            except ValueError:
                continue
            if xi_poly(p) == a:
                return p
    return None


def canonical_rep(a: SparsePoly, m: int, s: int) -> SparsePoly:
    """Class representative under shifts by multiples of s (m = 0 only)."""
    if m != 0:
        return a
    if a.n != 4 * s:
        raise ValueError(f"expected ring size {4 * s}, got {a.n}")
    return min((shift(a, j * s) for j in range(4)), key=lambda p: p.support)
