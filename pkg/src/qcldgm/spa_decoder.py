"""LLR sum-product decoding on the Tanner graph of a QC-LDGM code, channel
models and Monte Carlo error-rate simulation.

Conventions: antipodal mapping 0 -> +1, 1 -> -1; positive LLR favours 0;
a posterior LLR of exactly 0 decides 1. Bit and frame errors are counted
on the information bits; a frame whose decoder converged to a codeword
other than the transmitted one is an undetected error.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from qcldgm import _backend
from qcldgm.qc_ldgm import QcLdgmCode, encode

__all__ = [
    "TannerGraph",
    "ChannelPoint",
    "DecodeResult",
    "SimResult",
    "StopRule",
    "build_graph",
    "llr_init",
    "decode",
    "decode_concatenated",
    "simulate",
    "simulate_concatenated",
    "results_to_csv",
]

DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class TannerGraph:
    """Check-regular bipartite graph stored edge-wise, check by check."""

    N: int
    n_checks: int
    check_degree: int
    var_idx: np.ndarray

    @property
    def edges(self) -> int:
        return self.var_idx.shape[0]

    def variable_degrees(self) -> np.ndarray:
        return np.bincount(self.var_idx, minlength=self.N)

    def check_neighbours(self, c: int) -> np.ndarray:
        dc = self.check_degree
        return self.var_idx[c * dc:(c + 1) * dc]


def build_graph(code: QcLdgmCode) -> TannerGraph:
    n = code.n
    offsets = []
    for i, h in enumerate(code.blocks):
        offsets.extend(i * n + e for e in h.support)
    offsets = np.asarray(offsets, dtype=np.int64)
    c = np.arange(n, dtype=np.int64)[:, None]
    block = offsets // n
    var = block * n + (offsets % n + c) % n
    var.sort(axis=1)
    return TannerGraph(code.N, n, len(offsets), np.ascontiguousarray(var.ravel()))


@dataclass(frozen=True)
class ChannelPoint:
    kind: str
    param: float
    rate: float = 1.0

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind == "BSC":
            if not 0 <= self.param < 0.5:
                raise ValueError(f"BSC transition probability must lie in [0, 0.5), got {self.param}")
        elif kind == "AWGN":
            if not 0 < self.rate <= 1:
                raise ValueError("rate must lie in (0, 1]")
        else:
            raise ValueError(f"unknown channel {self.kind!r}")

    @property
    def sigma(self) -> float:
        if self.kind != "AWGN":
            raise AttributeError("sigma is defined for AWGN only")
        return math.sqrt(1.0 / (2.0 * self.rate * 10 ** (self.param / 10)))

    def transmit(self, codeword: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "BSC":
            if self.param == 0:
                return codeword.copy()
            flips = rng.random(codeword.shape[0]) < self.param
            return codeword ^ flips.astype(np.uint8)
        x = 1.0 - 2.0 * codeword
        return x + self.sigma * rng.standard_normal(codeword.shape[0])


def llr_init(received, point: ChannelPoint) -> np.ndarray:
    received = np.asarray(received)
    if point.kind == "BSC":
        p = point.param
        if not 0 < p < 0.5:
            if p == 0:
                return np.where(received == 0, 38.0, -38.0)
            raise ValueError(f"p must lie in (0, 0.5), got {p}")
        return (1.0 - 2.0 * received) * math.log((1 - p) / p)
    return 2.0 * received / point.sigma**2


class DecodeResult(NamedTuple):
    bits: np.ndarray
    iterations: int
    converged: bool
    posterior: np.ndarray


def decode(graph: TannerGraph, llr, max_iter: int = DEFAULT_MAX_ITER, min_sum: bool = False) -> DecodeResult:
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (graph.N,):
        raise ValueError(f"expected {graph.N} LLRs, got {llr.shape}")
    bits, it, ok, post = _backend.kernels.spa_decode(graph.var_idx, graph.check_degree, llr, max_iter, min_sum)
    return DecodeResult(bits, int(it), bool(ok), post)


def decode_concatenated(
    inner: tuple[QcLdgmCode, TannerGraph],
    outer: tuple[QcLdgmCode, TannerGraph],
    llr,
    max_iter: tuple[int, int] = (DEFAULT_MAX_ITER, DEFAULT_MAX_ITER),
    min_sum: bool = False,
) -> np.ndarray:
    """Inner decode from channel LLRs, then outer decode primed with the
    inner a-posteriori LLRs of its systematic part. Returns the outer
    information bits."""
    (icode, igraph), (ocode, ograph) = inner, outer
    if ocode.N != icode.K:
        raise ValueError(f"outer length {ocode.N} != inner dimension {icode.K}")
    res = decode(igraph, llr, max_iter[0], min_sum)
    prior = res.posterior[: icode.K]
    out = decode(ograph, prior, max_iter[1], min_sum)
    return out.bits[: ocode.K]


@dataclass(frozen=True)
class StopRule:
    max_frames: int = 10_000_000
    min_frame_errors: int = 100


@dataclass
class SimResult:
    channel: str
    param: float
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    undetected: int = 0
    iterations: int = 0
    info_bits: int = 0
    max_iter: int = DEFAULT_MAX_ITER
    seed: int | None = None
    patterns: list = field(default_factory=list)

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.info_bits) if self.frames else math.nan

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else math.nan

    @property
    def avg_iters(self) -> float:
        return self.iterations / self.frames if self.frames else math.nan

    def merge(self, other: SimResult) -> SimResult:
        if (self.channel, self.param, self.info_bits) != (other.channel, other.param, other.info_bits):
            raise ValueError("cannot merge results from different points")
        return SimResult(
            self.channel,
            self.param,
            self.frames + other.frames,
            self.bit_errors + other.bit_errors,
            self.frame_errors + other.frame_errors,
            self.undetected + other.undetected,
            self.iterations + other.iterations,
            self.info_bits,
            self.max_iter,
            self.seed,
            self.patterns + other.patterns,
        )


def _sim_worker(args) -> SimResult:
    code, point, max_frames, min_fe, seed_seq, max_iter, all_zero, collect, min_sum = args
    rng = np.random.default_rng(seed_seq)
    graph = build_graph(code)
    K = code.K
    res = SimResult(point.kind, point.param, info_bits=K, max_iter=max_iter)
    zero_info = np.zeros(K, dtype=np.uint8)
    while res.frames < max_frames and res.frame_errors < min_fe:
        info = zero_info if all_zero else rng.integers(0, 2, K, dtype=np.uint8)
        cw = encode(code, info)
        rx = point.transmit(cw, rng)
        dec = decode(graph, llr_init(rx, point), max_iter, min_sum)
        res.frames += 1
        res.iterations += dec.iterations
        diff = dec.bits ^ cw
        errs = int(diff[:K].sum())
        if errs:
            res.bit_errors += errs
            res.frame_errors += 1
            # a converged decoder with wrong information bits sits on another codeword
            if dec.converged:
                res.undetected += 1
                if collect:
                    res.patterns.append(np.flatnonzero(diff))
    return res


def simulate(
    code: QcLdgmCode,
    point: ChannelPoint,
    stop: StopRule = StopRule(),
    rng: int | None = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
    all_zero: bool = False,
    collect_patterns: bool = False,
    min_sum: bool = False,
) -> SimResult:
    """Monte Carlo error rates at one channel point.

    Frames are split statically over ``workers``, each with its own seed
    spawned from ``rng``; results are identical for identical (seed,
    workers).
    """
    workers = max(1, workers)
    seq = np.random.SeedSequence(rng)
    per_frames = [stop.max_frames // workers + (i < stop.max_frames % workers) for i in range(workers)]
    per_fe = -(-stop.min_frame_errors // workers)
    jobs = [
        (code, point, nf, per_fe, child, max_iter, all_zero, collect_patterns, min_sum)
        for nf, child in zip(per_frames, seq.spawn(workers))
    ]
    if workers == 1:
        parts = [_sim_worker(jobs[0])]
    else:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_sim_worker, jobs))
    total = parts[0]
    for p in parts[1:]:
        total = total.merge(p)
    total.seed = rng if isinstance(rng, int) else None
    return total


@dataclass
class ConcatResult:
    frames: int = 0
    inner_frame_errors: int = 0
    concat_frame_errors: int = 0
    inner_bit_errors: int = 0
    concat_bit_errors: int = 0
    info_bits: int = 0

    @property
    def inner_fer(self) -> float:
        return self.inner_frame_errors / self.frames

    @property
    def concat_fer(self) -> float:
        return self.concat_frame_errors / self.frames

    @property
    def inner_ber(self) -> float:
        return self.inner_bit_errors / (self.frames * self.info_bits)

    @property
    def concat_ber(self) -> float:
        return self.concat_bit_errors / (self.frames * self.info_bits)


def simulate_concatenated(
    inner: QcLdgmCode,
    outer: QcLdgmCode,
    point: ChannelPoint,
    stop: StopRule = StopRule(),
    rng: int | None = 0,
    max_iter: tuple[int, int] = (DEFAULT_MAX_ITER, DEFAULT_MAX_ITER),
) -> ConcatResult:
    """Serial concatenation over one channel point, recording on the same
    frames the inner-only error events (inner hard decisions on the outer
    information bits) and the concatenated ones. Stops when both error
    counts reach ``stop.min_frame_errors`` or at ``stop.max_frames``."""
    generator = np.random.default_rng(rng)
    igraph, ograph = build_graph(inner), build_graph(outer)
    res = ConcatResult(info_bits=outer.K)
    Ko = outer.K
    while res.frames < stop.max_frames and min(res.inner_frame_errors, res.concat_frame_errors) < stop.min_frame_errors:
        u = generator.integers(0, 2, Ko, dtype=np.uint8)
        cw = encode(inner, encode(outer, u))
        llr = llr_init(point.transmit(cw, generator), point)
        ires = decode(igraph, llr, max_iter[0])
        ores = decode(ograph, ires.posterior[: inner.K], max_iter[1])
        res.frames += 1
        ie = int((ires.bits[:Ko] ^ u).sum())
        ce = int((ores.bits[:Ko] ^ u).sum())
        res.inner_bit_errors += ie
        res.concat_bit_errors += ce
        res.inner_frame_errors += ie > 0
        res.concat_frame_errors += ce > 0
    return res


def results_to_csv(rows: list[tuple[str, SimResult]]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(
        ["code_id", "channel", "param", "frames", "bit_errors", "frame_errors", "undetected",
         "BER", "FER", "avg_iters", "max_iter", "seed"]
    )
    for code_id, r in rows:
        wr.writerow([
            code_id, r.channel, r.param, r.frames, r.bit_errors, r.frame_errors, r.undetected,
            f"{r.ber:.6e}", f"{r.fer:.6e}", f"{r.avg_iters:.3f}", r.max_iter,
            "" if r.seed is None else r.seed,
        ])
    return buf.getvalue()
