"""Command-line entry point: ``qcldgm <subcommand> [options]``.

Every subcommand writes a text document whose first line is a ``#`` header
carrying the tool version, a hash of the effective configuration and the
seed. Options may also come from ``--config FILE``, a flat ``key = value``
file (``#`` comments allowed); flags given on the command line win.

Exit codes: 0 success, 2 invalid input, 3 not invertible or search
exhausted, 4 a ``--assert`` check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import operator
import re
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from qcldgm import __version__, _backend
from qcldgm.cycles import has_length4_cycle, matrix_girth_ok
from qcldgm.gf2_poly import NotInvertible, SparsePoly, parse
from qcldgm.inversion import (
    bench_invert,
    bench_to_csv,
    euclid_report,
    fast_inverse,
    weight_distribution,
)
from qcldgm.psi import PsiParams, is_psi_unitary
from qcldgm.qc_ldgm import (
    LastBlockSingular,
    build_code,
    complexity,
    dmin_estimate,
    random_blocks,
    read_code,
    write_code,
)
from qcldgm.spa_decoder import ChannelPoint, StopRule, results_to_csv, simulate
from qcldgm.xi_design import Exhausted, goodmat, recognize_xi, sample_cycle_free

EXIT_OK, EXIT_INVALID, EXIT_SINGULAR, EXIT_ASSERT = 0, 2, 3, 4

# options that do not change results and so stay out of the config hash
_UNHASHED = {"config", "out", "assertions", "func"}


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def load_config(path: str) -> dict[str, str]:
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def _read_poly(arg: str) -> SparsePoly:
    """A polynomial literal or a file holding one (first non-comment line)."""
    path = Path(arg)
    if ":" not in arg and path.exists():
        lines = [ln.strip() for ln in path.read_text().splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise ValueError(f"{arg}: no polynomial found")
        return parse(lines[0])
    return parse(arg)


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


# --- subcommands ---------------------------------------------------------
# each returns (document body, facts); facts feed --assert


def cmd_design(args) -> tuple[str, dict]:
    m, s = args.m, args.s
    if args.random:
        a = sample_cycle_free(m, s, np.random.default_rng(args.seed), strict=args.strict)
    else:
        if args.k is None:
            raise ValueError("design needs --k or --random")
        a = goodmat(m, s, args.k)
    facts = {
        "poly": str(a),
        "n": a.n,
        "weight": a.weight,
        "cycle_free": _yes(not has_length4_cycle(a)),
        "psi_unitary": _yes(is_psi_unitary(a, PsiParams(s, m + 2, 0))),
    }
    body = f"{a}\n# cycle-free={facts['cycle_free']} psi-unitary={facts['psi_unitary']}\n"
    return body, facts


def cmd_invert(args) -> tuple[str, dict]:
    a = _read_poly(args.poly)
    reports = []
    params = recognize_xi(a)
    if args.method in ("fast", "both"):
        if params is not None:
            reports.append(fast_inverse(params))
        elif args.method == "fast":
            raise ValueError(f"{a} is not in the Xi family; use --method euclid")
    if args.method in ("euclid", "both"):
        reports.append(euclid_report(a, params.m if params else None))
    invs = {r.a_inv for r in reports}
    lines = ["method,n,weight_a,weight_inv,bound,inverse"]
    lines += [f"{r.method},{a.n},{a.weight},{r.weight_inv},{r.bound},{r.a_inv}" for r in reports]
    facts = {
        "inverse": str(reports[0].a_inv),
        "weight": reports[0].weight_inv,
        "agree": _yes(len(invs) == 1),
        "methods": "+".join(r.method for r in reports),
    }
    lines.append(f"# agree={facts['agree']}")
    return "\n".join(lines) + "\n", facts


def cmd_code(args) -> tuple[str, dict]:
    if args.weights is not None:
        if args.last is None:
            raise ValueError("generating blocks needs --last")
        last = _read_poly(args.last)
        rng = np.random.default_rng(args.seed)
        blocks = random_blocks(last.n, args.weights, rng, fixed=[last]) + [last]
    elif args.blocks is not None:
        blocks = read_code(Path(args.blocks).read_text())
    else:
        raise ValueError("code needs a block file or --weights with --last")
    code = build_code(blocks)
    est = dmin_estimate(code)
    c_enc, c_dec = complexity(code)
    facts = {
        "N": code.N,
        "K": code.K,
        "n": code.n,
        "N_b": code.Nb,
        "rate": str(code.rate),
        "inverse_method": code.inverse_method,
        "W_last_inv": code.last_inverse.weight,
        "d_bar": est.d_bar,
        "P": est.P,
        "A": est.A,
        "C_enc": str(c_enc),
        "C_dec": str(c_dec),
        "girth_ok": _yes(matrix_girth_ok(list(code.blocks))),
    }
    body = write_code(code) + "".join(f"# {k}={v}\n" for k, v in facts.items())
    return body, facts


def cmd_simulate(args) -> tuple[str, dict]:
    code = build_code(read_code(Path(args.code_file).read_text()))
    stop = StopRule(args.max_frames, args.min_errors)
    code_id = args.code_id or f"QC({code.N},{code.K})"
    rows = []
    for p in args.points:
        point = ChannelPoint(args.channel, p, rate=float(code.rate))
        res = simulate(code, point, stop, rng=args.seed, max_iter=args.max_iter,
                       workers=args.workers, all_zero=args.all_zero, min_sum=args.min_sum)
        rows.append((code_id, res))
    facts = {f"fer@{p:g}": r.fer for p, (_, r) in zip(args.points, rows)}
    facts["rule"] = "min-sum" if args.min_sum else "tanh"
    meta = (f"# decoder={facts['rule']} schedule=flooding llr_clip=38 "
            f"mapping=0->+1 zero_llr_decides=1 backend={_backend.name}\n")
    return meta + results_to_csv(rows), facts


def cmd_bench(args) -> tuple[str, dict]:
    if args.kernels:
        from qcldgm.bench import bench_kernels, kernel_table_csv

        rows = bench_kernels(args.trials, args.seed)
        facts = {f"{r.kernel}_{r.backend}_us": r.mean_us for r in rows}
        return kernel_table_csv(rows), facts
    rows = bench_invert(args.n, args.weights, args.trials, np.random.default_rng(args.seed))
    facts = {f"{r.method}_{r.n}_{r.W}": r.mean_time_normalized for r in rows}
    return bench_to_csv(rows), facts


def cmd_weightdist(args) -> tuple[str, dict]:
    dist = weight_distribution(args.m, args.s, args.samples, args.seed, workers=args.workers)
    facts = {"mean": dist.mean, "samples": dist.samples, "max": max(dist.counts)}
    facts.update({f"pct{w}": dist.percent(w) for w in dist.counts})
    return f"# sampling={dist.sampling} m={args.m} s={args.s}\n" + dist.to_csv(), facts


# --- assertions ----------------------------------------------------------

_OPS: dict[str, Callable] = {
    "<=": operator.le, ">=": operator.ge, "!=": operator.ne,
    "==": operator.eq, "=": operator.eq, "<": operator.lt, ">": operator.gt,
}
_ASSERT_RE = re.compile(r"^\s*([\w@.+-]+?)\s*(<=|>=|!=|==|=|<|>)\s*(.+?)\s*$")


def check_assertions(facts: dict, assertions: Sequence[str]) -> list[str]:
    """Return the failed assertions, each as a readable message."""
    failed = []
    for text in assertions:
        mt = _ASSERT_RE.match(text)
        if not mt:
            raise ValueError(f"cannot parse assertion {text!r}; use key<op>value")
        key, op, want = mt.groups()
        if key not in facts:
            raise ValueError(f"unknown fact {key!r}; known: {', '.join(sorted(facts))}")
        have = facts[key]
        try:
            lhs, rhs = float(have), float(want)
        except (TypeError, ValueError):
            lhs, rhs = str(have), want
        if not _OPS[op](lhs, rhs):
            failed.append(f"{key}={have} violates {key}{op}{want}")
    return failed


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    common.add_argument("--out", "-o", help="write the document here instead of stdout")
    common.add_argument("--assert", dest="assertions", action="append", default=[],
                        metavar="KEY<OP>VALUE", help="check a reported fact; exit 4 on failure")

    p = argparse.ArgumentParser(prog="qcldgm", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"qcldgm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", parents=[common], help="build a cycle-free psi-unitary block")
    d.add_argument("--m", type=int, required=True)
    d.add_argument("--s", type=int, required=True)
    d.add_argument("--k", type=_int_list)
    d.add_argument("--random", type=_bool, nargs="?", const=True, default=False)
    d.add_argument("--strict", type=_bool, nargs="?", const=True, default=False,
                   help="with --random also require k_{i+1} > 2 k_i")
    d.set_defaults(func=cmd_design)

    i = sub.add_parser("invert", parents=[common], help="invert a circulant polynomial")
    i.add_argument("poly", help="literal like 56:(0;1;3;8;17) or a file holding one")
    i.add_argument("--method", choices=["fast", "euclid", "both"], default="both")
    i.set_defaults(func=cmd_invert)

    c = sub.add_parser("code", parents=[common], help="report code parameters, or generate blocks")
    c.add_argument("blocks", nargs="?", help="code file: 'N_b=<count> n=<size>' then one block per line")
    c.add_argument("--last", help="last block (literal or file) when generating")
    c.add_argument("--weights", type=_int_list, help="weights of the random blocks to generate")
    c.set_defaults(func=cmd_code)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo BER/FER over a channel grid")
    s.add_argument("code_file")
    s.add_argument("--channel", choices=["BSC", "AWGN", "bsc", "awgn"], default="BSC")
    s.add_argument("--points", type=_float_list, required=True,
                   help="BSC crossover probabilities or AWGN Eb/N0 values in dB")
    s.add_argument("--max-frames", type=int, default=10_000_000)
    s.add_argument("--min-errors", type=int, default=100)
    s.add_argument("--max-iter", type=int, default=100)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--all-zero", type=_bool, nargs="?", const=True, default=False)
    s.add_argument("--min-sum", type=_bool, nargs="?", const=True, default=False)
    s.add_argument("--code-id")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bench", parents=[common], help="inversion timing table or kernel timings")
    b.add_argument("--n", type=_int_list, default=[128, 256, 512, 1024, 2048, 4096, 8192])
    b.add_argument("--weights", type=_int_list, default=[3, 5, 7])
    b.add_argument("--trials", type=int, default=50)
    b.add_argument("--kernels", type=_bool, nargs="?", const=True, default=False,
                   help="time compiled against pure-Python kernels instead")
    b.set_defaults(func=cmd_bench)

    w = sub.add_parser("weightdist", parents=[common], help="histogram of inverse weights")
    w.add_argument("--m", type=int, required=True)
    w.add_argument("--s", type=int, required=True)
    w.add_argument("--samples", type=int, default=20_000)
    w.add_argument("--workers", type=int, default=1)
    w.set_defaults(func=cmd_weightdist)
    return p


def _parse(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    early, _ = pre.parse_known_args(argv)
    if early.config:
        subparsers = parser._subparsers._group_actions[0].choices  # noqa: SLF001
        command = next((tok for tok in argv if tok in subparsers), None)
        if command is not None:
            _apply_config(subparsers[command], load_config(early.config), command)
    return parser.parse_args(argv)


def _apply_config(sub: argparse.ArgumentParser, cfg: dict[str, str], command: str) -> None:
    """Install config values as defaults, so explicit flags still win."""
    known = {a.dest: a for a in sub._actions}  # noqa: SLF001
    unknown = set(cfg) - set(known) - {"config"}
    if unknown:
        raise ValueError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    for key, value in cfg.items():
        if key == "config":
            continue
        act = known[key]
        if act.type is not None:
            value = act.type(value)
        act.default = value
        act.required = False
        if not act.option_strings:
            act.nargs = "?"


def config_hash(args: argparse.Namespace) -> str:
    eff = {k: v for k, v in sorted(vars(args).items()) if k not in _UNHASHED}
    blob = json.dumps(eff, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except SystemExit as exc:  # argparse usage errors already exit with 2
        return int(exc.code or 0)
    except (ValueError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"qcldgm: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        body, facts = args.func(args)
        failed = check_assertions(facts, args.assertions)
    except (NotInvertible, LastBlockSingular, Exhausted) as exc:
        print(f"qcldgm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (ValueError, OSError) as exc:
        print(f"qcldgm: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    header = f"# qcldgm {__version__} command={args.command} config={config_hash(args)} seed={args.seed}\n"
    doc = header + body
    if args.out:
        Path(args.out).write_text(doc)
    else:
        sys.stdout.write(doc)
    for msg in failed:
        print(f"qcldgm: assertion failed: {msg}", file=sys.stderr)
    return EXIT_ASSERT if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
