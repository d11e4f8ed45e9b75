"""Command-line entry point: ``lpdecode {decode,experiment,precond-bench,gen-code}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..adaptive import ALGORITHMS, decode
from ..ipm import DenseNormalSolver, InteriorPointSolver, PcgNormalSolver
from ..tanner import load_alist, save_alist
from .bench import EARLY_GAP, LATE_GAP, capture_systems, iterations_to, run_solvers, write_bench
from .codes import CodeConstructionError, generate_regular_code
from .config import PRECONDITIONERS, ConfigError, load_config, parse_config
from .experiment import run_experiment


def _solver(args) -> InteriorPointSolver:
    if args.solver == "dense":
        return InteriorPointSolver(normal_solver=DenseNormalSolver())
    return InteriorPointSolver(normal_solver=PcgNormalSolver(preconditioner=args.preconditioner))


def cmd_decode(args) -> int:
    g = load_alist(args.alist)
    gamma = np.loadtxt(args.llr, dtype=float, ndmin=1).ravel()
    if gamma.size != g.n:
        print(f"error: {gamma.size} LLRs for a code of length {g.n}", file=sys.stderr)
        return 2
    out = decode(g, gamma, args.algorithm, solver=_solver(args))
    payload = {
        "status": out.status.value,
        "iterations": out.iterations,
        "point": [float(v) for v in out.point],
        "bits": [int(b) for b in np.rint(np.clip(out.point, 0, 1))],
        "objectives": out.objectives,
        "trace": [t.as_record() for t in out.trace],
        "message": out.message,
    }
    text = json.dumps(payload, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return 0


def _overrides(pairs) -> str:
    lines = []
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        lines.append(item)
    return "\n".join(lines)


def cmd_experiment(args) -> int:
    text = Path(args.config).read_text() + "\n" + _overrides(args.set)
    if args.output_dir:
        text += f"\noutput_dir = {args.output_dir}"
    cfg = parse_config(text)
    res = run_experiment(cfg)
    print(json.dumps(res.summary, indent=2, sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    g = load_alist(args.alist) if args.alist else None
    captures = capture_systems(g, n=args.n, snr_db=args.snr, seed=args.seed,
                               code_seed=args.code_seed, algorithm=args.algorithm,
                               thresholds=(args.late_gap, args.early_gap))
    traces = {thr: run_solvers(s, maxit=args.maxit) for thr, s in captures.items()}
    out = write_bench(captures, traces, args.out)
    for thr, per in traces.items():
        s = captures[thr]
        print(f"gap {s.gap:.4g} ({s.lp_rows} rows, trial {s.trial})")
        for name, tr in per.items():
            hit = iterations_to(tr, 1e-4)
            print(f"  {name:20s} final {tr.residual_history[-1] ** 0.5:.3e}  to 1e-4: {hit}")
    print(f"traces written to {out}")
    return 0


def cmd_gen_code(args) -> int:
    g = generate_regular_code(args.dv, args.dc, args.n, args.seed)
    text = save_alist(g)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lpdecode", description="Adaptive LP decoding of LDPC codes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decode", help="decode one LLR vector")
    d.add_argument("alist", help="parity-check matrix in alist format")
    d.add_argument("llr", help="text file of n whitespace-separated LLRs")
    d.add_argument("-a", "--algorithm", choices=ALGORITHMS, default="malp-b")
    d.add_argument("--solver", choices=("pcg", "dense"), default="pcg")
    d.add_argument("--preconditioner", choices=PRECONDITIONERS, default="columnwise")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_decode)

    e = sub.add_parser("experiment", help="run a configured Monte-Carlo experiment")
    e.add_argument("config", help="flat key = value configuration file")
    e.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    e.add_argument("--output-dir")
    e.set_defaults(func=cmd_experiment)

    b = sub.add_parser("precond-bench", help="compare CG and PCG on captured normal systems")
    b.add_argument("--alist", help="use this code instead of a random (3,6)-regular one")
    b.add_argument("--n", type=int, default=480)
    b.add_argument("--code-seed", type=int, default=0)
    b.add_argument("--snr", type=float, default=1.5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("-a", "--algorithm", choices=ALGORITHMS, default="malp-b")
    b.add_argument("--late-gap", type=float, default=LATE_GAP)
    b.add_argument("--early-gap", type=float, default=EARLY_GAP)
    b.add_argument("--maxit", type=int, default=200)
    b.add_argument("--out", default="bench")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("gen-code", help="emit a random regular code as alist")
    c.add_argument("--dv", type=int, default=3)
    c.add_argument("--dc", type=int, default=6)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_gen_code)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, CodeConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
