"""Timing of the compiled kernels against the pure-Python fallback.

Each kernel is run on the same inputs under both backends; the table
reports the mean wall time per call and the speed-up of the compiled
version. Inputs are fixed by the seed so repeated runs time identical work.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from qcldgm import _backend
from qcldgm.gf2_poly import SparsePoly, parse

__all__ = ["KernelTiming", "bench_kernels", "kernel_table_csv"]


@dataclass(frozen=True)
class KernelTiming:
    kernel: str
    backend: str
    calls: int
    mean_us: float


def _mean_us(fn: Callable[[], object], calls: int) -> float:
    fn()
    t0 = time.perf_counter()
    for _ in range(calls):
        fn()
    return (time.perf_counter() - t0) / calls * 1e6


def _workloads(rng: np.random.Generator, decode_snr_db: float):
    # local imports keep this module importable from the package root
    from qcldgm.qc_ldgm import build_code, random_blocks
    from qcldgm.spa_decoder import ChannelPoint, build_graph, llr_init

    n = 1408
    a = parse("1408:(0;8;24;56;96;200;408)")
    b = SparsePoly(n, rng.choice(n, size=43, replace=False).tolist())

    last = parse("312:(0;3;9;42;87)")
    code = build_code(random_blocks(312, [5, 5, 5], rng, fixed=[last]) + [last])
    info = rng.integers(0, 2, code.K, dtype=np.uint8)
    block = np.ascontiguousarray(info[: code.n])
    sup = code.parity_supports[0]

    graph = build_graph(code)
    point = ChannelPoint("AWGN", decode_snr_db, rate=float(code.rate))
    cw = np.zeros(code.N, dtype=np.uint8)
    llr = llr_init(point.transmit(cw, rng), point)

    return {
        "sparse_mul": lambda k: k.sparse_mul(a.support, b.support, n),
        "cyclic_accumulate": lambda k: k.cyclic_accumulate(np.zeros(code.n, np.uint8), block, sup, code.n),
        "spa_decode": lambda k: k.spa_decode(graph.var_idx, graph.check_degree, llr, 20),
    }


def bench_kernels(calls: int = 200, seed: int = 0, decode_snr_db: float = 2.5) -> list[KernelTiming]:
    rng = np.random.default_rng(seed)
    work = _workloads(rng, decode_snr_db)
    backends = [("python", _backend.pure)]
    if _backend.compiled is not None:
        backends.append(("cython", _backend.compiled))
    rows = []
    for name, fn in work.items():
        for label, mod in backends:
            reps = calls if label == "cython" else max(1, calls // 10)
            rows.append(KernelTiming(name, label, reps, _mean_us(lambda: fn(mod), reps)))
    return rows


def kernel_table_csv(rows: list[KernelTiming]) -> str:
    py = {r.kernel: r.mean_us for r in rows if r.backend == "python"}
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["kernel", "backend", "calls", "mean_us", "speedup_vs_python"])
    for r in rows:
        wr.writerow([r.kernel, r.backend, r.calls, f"{r.mean_us:.2f}", f"{py[r.kernel] / r.mean_us:.2f}"])
    return buf.getvalue()
