"""The folding homomorphism psi: R_{2^q s} -> R_{2^r s}, its kernel ideals
and the psi-unitary predicate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qcldgm.gf2_poly import RingMismatch, SparsePoly, power

__all__ = [
    "PsiParams",
    "psi_map",
    "ideal_member",
    "is_psi_unitary",
    "check_lemma1",
    "coset_sample",
    "fold",
]


@dataclass(frozen=True)
class PsiParams:
    """Map from the ring of size 2^q * s to the ring of size 2^r * s (p = 2)."""

    s: int
    q: int
    r: int

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("s must be positive")
        if not 0 <= self.r <= self.q:
            raise ValueError(f"need 0 <= r <= q, got r={self.r}, q={self.q}")

    @property
    def source_size(self) -> int:
        return (1 << self.q) * self.s

    @property
    def target_size(self) -> int:
        return (1 << self.r) * self.s

    def check(self, a: SparsePoly) -> None:
        if a.n != self.source_size:
            raise RingMismatch(f"polynomial lives in R_{a.n}, map expects R_{self.source_size}")


def fold(a: SparsePoly, target: int) -> SparsePoly:
    """Reduce every exponent mod ``target`` (which must divide a.n) and cancel
    coincident terms in pairs."""
    if a.n % target:
        raise ValueError(f"{target} does not divide {a.n}")
    return SparsePoly.from_exponents(target, (e % target for e in a.support))


def psi_map(a: SparsePoly, params: PsiParams) -> SparsePoly:
    params.check(a)
    return fold(a, params.target_size)


def ideal_member(w: SparsePoly, params: PsiParams) -> bool:
    """True iff w lies in the ideal generated by x^{2^r s} + 1, i.e. every
    residue class mod 2^r s holds an even number of exponents."""
    params.check(w)
    return psi_map(w, params).is_zero()


def is_psi_unitary(a: SparsePoly, params: PsiParams) -> bool:
    params.check(a)
    return psi_map(a, params).is_one()


def check_lemma1(a: SparsePoly, params: PsiParams) -> bool:
    """Compare a^(2^r) == 1 in R_{2^q s} against psi(a) == 1 in R_{2^(q-r) s}.

    Here ``params.r`` is the power exponent, not the target exponent; the
    map goes to 2^(q-r) s. Both sides are computed independently and the
    function reports whether they agree.
    """
    params.check(a)
    if params.r == 0:
        raise ValueError("lemma needs r > 0")
    lhs = power(a, 1 << params.r).is_one()
    rhs = fold(a, (1 << (params.q - params.r)) * params.s).is_one()
    return lhs == rhs


def coset_sample(a0: SparsePoly, params: PsiParams, rng: np.random.Generator) -> SparsePoly:
    """a0 + w for w drawn uniformly from the kernel ideal of ``params``.

    w = b(x) (x^t + 1) with t = 2^r s and deg b < n - t; this parametrises
    every ideal element exactly once, so Bernoulli(1/2) coefficients give
    the uniform law.
    """
    params.check(a0)
    n = a0.n
    t = params.target_size
    b = np.flatnonzero(rng.integers(0, 2, size=n - t))
    w = SparsePoly.from_exponents(n, np.concatenate([b, b + t]).tolist())
    return a0 + w
