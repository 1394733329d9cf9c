"""QC-LDGM codes whose parity-check matrix is one row of circulants.

Layout conventions
------------------
H = [H_0 | H_1 | ... | H_{Nb-1}] with H_i the circulant of block polynomial
h_i; row r of H_i has ones in columns (r + e) mod n for e in supp(h_i).

Codewords are ordered as information blocks 0..Nb-2 followed by the parity
block, so G = [I | P] with P's block i equal to (h_last^-1 h_i)^T. In
polynomial form the parity block is sum_i u_i(x) * g_i(x^-1) where
g_i = h_last^-1 h_i, and H c^T = 0 reads sum_i h_i(x^-1) c_i(x) = 0.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from qcldgm import _backend
from qcldgm.cycles import distance_multiset, has_length4_cycle
from qcldgm.gf2_poly import NotInvertible, RingMismatch, SparsePoly, add, euclid_inverse, mul, parse, transpose
from qcldgm.inversion import fast_inverse
from qcldgm.xi_design import Exhausted, recognize_xi

__all__ = [
    "QcLdgmCode",
    "LastBlockSingular",
    "DminEstimate",
    "build_code",
    "encode",
    "syndrome",
    "low_weight_codeword",
    "dmin_estimate",
    "dmin_estimate_from_weights",
    "complexity",
    "brute_force_dmin",
    "random_blocks",
    "read_code",
    "write_code",
]


class LastBlockSingular(ValueError):
    """The last circulant block has no inverse, so no systematic G exists."""


@dataclass(frozen=True)
class QcLdgmCode:
    blocks: tuple[SparsePoly, ...]
    last_inverse: SparsePoly
    gen_blocks: tuple[SparsePoly, ...]
    inverse_method: str = "euclid"

    @property
    def n(self) -> int:
        return self.blocks[0].n

    @property
    def Nb(self) -> int:
        return len(self.blocks)

    @property
    def N(self) -> int:
        return self.Nb * self.n

    @property
    def K(self) -> int:
        return (self.Nb - 1) * self.n

    @property
    def rate(self) -> Fraction:
        return Fraction(self.Nb - 1, self.Nb)

    @property
    def weights(self) -> list[int]:
        return [b.weight for b in self.blocks]

    @cached_property
    def parity_supports(self) -> tuple[tuple[int, ...], ...]:
        """Supports of g_i(x^-1), the shifts applied by the encoder."""
        return tuple(transpose(g).support for g in self.gen_blocks)

    @cached_property
    def check_supports(self) -> tuple[tuple[int, ...], ...]:
        return tuple(transpose(h).support for h in self.blocks)


def build_code(blocks: Sequence[SparsePoly]) -> QcLdgmCode:
    blocks = tuple(blocks)
    if len(blocks) < 2:
        raise ValueError("a code needs at least two blocks")
    n = blocks[0].n
    if any(b.n != n for b in blocks):
        raise ValueError("all blocks must share the ring size")
    last = blocks[-1]
    params = recognize_xi(last)
    if params is not None:
        inv = fast_inverse(params).a_inv
        method = "fast"
    else:
        try:
            inv = euclid_inverse(last)
        except NotInvertible as exc:
            raise LastBlockSingular(str(exc)) from exc
        method = "euclid"
    gen = tuple(mul(inv, h) for h in blocks[:-1])
    for h, g in zip(blocks[:-1], gen):
        # H G^T = 0 block by block: h_i + h_last * g_i == 0
        if not add(h, mul(last, g)).is_zero():
            raise ArithmeticError("generator does not annihilate H")
    return QcLdgmCode(blocks, inv, gen, method)


def encode(code: QcLdgmCode, info) -> np.ndarray:
    info = np.asarray(info, dtype=np.uint8)
    if info.shape != (code.K,):
        raise ValueError(f"information word must have length {code.K}, got {info.shape}")
    n = code.n
    parity = np.zeros(n, dtype=np.uint8)
    acc = _backend.kernels.cyclic_accumulate
    for i, sup in enumerate(code.parity_supports):
        block = np.ascontiguousarray(info[i * n:(i + 1) * n])
        acc(parity, block, sup, n)
    return np.concatenate([info, parity])


def syndrome(code: QcLdgmCode, word) -> np.ndarray:
    """H c^T as a length-n bit vector."""
    word = np.asarray(word, dtype=np.uint8)
    n = code.n
    out = np.zeros(n, dtype=np.uint8)
    acc = _backend.kernels.cyclic_accumulate
    for i, sup in enumerate(code.check_supports):
        block = np.ascontiguousarray(word[i * n:(i + 1) * n])
        acc(out, block, sup, n)
    return out


def low_weight_codeword(code: QcLdgmCode, i: int, j: int) -> np.ndarray:
    """Codeword supported on blocks i and j only: c_i = h_j^T, c_j = h_i^T.

    Its weight is W[h_i] + W[h_j], which bounds the minimum distance.
    """
    if not 0 <= i < j < code.Nb:
        raise IndexError(f"need 0 <= i < j < {code.Nb}, got ({i}, {j})")
    n = code.n
    word = np.zeros(code.N, dtype=np.uint8)
    word[i * n:(i + 1) * n] = transpose(code.blocks[j]).to_dense()
    word[j * n:(j + 1) * n] = transpose(code.blocks[i]).to_dense()
    if syndrome(code, word).any():
        raise ArithmeticError("pair pattern is not a codeword")
    return word


@dataclass(frozen=True)
class DminEstimate:
    d_bar: int
    P: int
    A: int
    W1: int
    W2: int | None
    N1: int
    N2: int
    pairs: tuple[tuple[int, int], ...]


def dmin_estimate_from_weights(weights: Sequence[int], n: int) -> DminEstimate:
    """Pair bound on d_min and the low-weight pattern count estimate."""
    if len(weights) < 2:
        raise ValueError("need at least two blocks")
    d_bar = min(weights[i] + weights[j] for i, j in combinations(range(len(weights)), 2))
    pairs = tuple(
        (i, j) for i, j in combinations(range(len(weights)), 2) if weights[i] + weights[j] == d_bar
    )
    counts = Counter(weights)
    W1 = min(counts)
    N1 = counts[W1]
    larger = [w for w in counts if w > W1]
    W2 = min(larger) if larger else None
    N2 = counts[W2] if W2 is not None else 0
    P = N2 if N1 == 1 else math.comb(N1, 2)
    return DminEstimate(d_bar, P, n * P, W1, W2, N1, N2, pairs)


def dmin_estimate(code: QcLdgmCode) -> DminEstimate:
    return dmin_estimate_from_weights(code.weights, code.n)


def complexity(code: QcLdgmCode) -> tuple[Fraction, Fraction]:
    """(C_enc, C_dec): parity-column weight of G and mean column weight of H."""
    c_enc = Fraction(sum(g.weight for g in code.gen_blocks))
    c_dec = Fraction(sum(code.weights), code.Nb)
    return c_enc, c_dec


def decoding_complexity(weights: Sequence[int]) -> Fraction:
    return Fraction(sum(weights), len(weights))


def _generator_rows(code: QcLdgmCode) -> list[int]:
    """Rows of G as N-bit integers (bit t = codeword position t)."""
    n, K = code.n, code.K
    rows = []
    for i, g in enumerate(code.gen_blocks):
        gt = transpose(g)
        for j in range(n):
            row = 1 << (i * n + j)
            for e in gt.support:
                row |= 1 << (K + (e + j) % n)
            rows.append(row)
    return rows


def brute_force_dmin(code: QcLdgmCode, max_info_weight: int | None = None) -> int:
    """Exact minimum distance by enumerating information words.

    With K <= 24 every nonzero information word is visited (Gray order).
    Otherwise information words are visited by increasing weight t up to
    ``max_info_weight``; since the code is systematic a codeword with
    information weight t has weight >= t, so the search stops as soon as
    the best weight found is <= t + 1. If the cap is reached first a
    ValueError is raised.
    """
    rows = _generator_rows(code)
    K = code.K
    if max_info_weight is None:
        if K > 24:
            raise ValueError(f"K={K} too large for exhaustive search; give max_info_weight")
        best = code.N
        word = 0
        for t in range(1, 1 << K):
            word ^= rows[(t & -t).bit_length() - 1]
            wt = word.bit_count()
            if wt < best:
                best = wt
        return best
    best = code.N
    for t in range(1, max_info_weight + 1):
        for combo in combinations(range(K), t):
            word = 0
            for r in combo:
                word ^= rows[r]
            wt = word.bit_count()
            if wt < best:
                best = wt
        if best <= t + 1:
            return best
    raise ValueError(f"minimum distance not certified within information weight {max_info_weight}")


def random_blocks(
    n: int,
    weights: Sequence[int],
    rng: np.random.Generator,
    fixed: Sequence[SparsePoly] = (),
    max_tries: int = 10_000,
) -> list[SparsePoly]:
    """Random blocks of the given weights, each free of 4-cycles and sharing
    no circular distance with any other block or with ``fixed``."""
    used: set[int] = set()
    for f in fixed:
        if f.n != n:
            raise RingMismatch(f"fixed block lives in R_{f.n}, expected R_{n}")
        if has_length4_cycle(f):
            raise ValueError(f"fixed block {f} has a 4-cycle")
        dist = distance_multiset(f).values()
        if dist & used:
            raise ValueError("fixed blocks already share a distance")
        used |= dist
    out = []
    for w in weights:
        for _ in range(max_tries):
            sup = rng.choice(n, size=w, replace=False)
            cand = SparsePoly(n, sup.tolist())
            if has_length4_cycle(cand):
                continue
            dist = distance_multiset(cand).values()
            if dist & used:
                continue
            used |= dist
            out.append(cand)
            break
        else:
            raise Exhausted(f"no weight-{w} block fits in n={n} after {max_tries} tries")
    return out


def write_code(code_or_blocks) -> str:
    blocks = code_or_blocks.blocks if isinstance(code_or_blocks, QcLdgmCode) else tuple(code_or_blocks)
    lines = [f"N_b={len(blocks)} n={blocks[0].n}"]
    lines += [str(b) for b in blocks]
    return "\n".join(lines) + "\n"


def read_code(text: str) -> list[SparsePoly]:
    """Parse a code definition: a ``N_b=<count> n=<size>`` header then one
    polynomial per line. Blank lines and ``#`` comments are ignored."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty code file")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    try:
        nb, n = int(header["N_b"]), int(header["n"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad header line {lines[0]!r}") from exc
    blocks = [parse(ln) for ln in lines[1:]]
    if len(blocks) != nb:
        raise ValueError(f"header says {nb} blocks, found {len(blocks)}")
    if any(b.n != n for b in blocks):
        raise ValueError(f"header says n={n} but a block disagrees")
    return blocks
