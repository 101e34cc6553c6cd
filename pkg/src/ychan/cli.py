"""Batch command-line front end.

Subcommands: enumerate, check, allocate, simulate, sweep. All randomness is
derived from explicit --seed values, so identical command lines produce
byte-identical output. Exit codes: 0 success (or "inside"), 1 semantic
negative (outside the region / infeasible plan), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from .allocator import allocate, assign_subchannels, plan_to_json_dict, \
    trace_to_json_list, verify_plan
from .cycles import enumerate_cycles
from .dof import DofTuple, RegionParams, region_contains
from .errors import CapacityError, IntegralityError, YchanError
from .phy import SimConfig, sweep_rows

CSV_HEADER = "rho,mode,K,M,N,seed,delivered,used,errors,ser"


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_tuple(args) -> DofTuple:
    if args.tuple_json is not None:
        return DofTuple.from_json(args.tuple_json)
    with open(args.tuple, "r", encoding="utf-8") as fh:
        return DofTuple.from_json_dict(json.load(fh))


def _add_tuple_source(parser: argparse.ArgumentParser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--tuple", help="path to a demand-tuple JSON file")
    group.add_argument("--tuple-json", help="demand tuple as an inline JSON string")


def _csv_text(rows: list[dict]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join(str(row[col]) for col in CSV_HEADER.split(",")))
    return "\n".join(lines) + "\n"


def _workers() -> int:
    raw = os.environ.get("YCHAN_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return min(8, os.cpu_count() or 1)


def cmd_enumerate(args) -> int:
    cset = enumerate_cycles(args.k, args.length)
    out = "".join(json.dumps(list(c.nodes)) + "\n" for c in cset)
    _emit(out, args.out)
    return 0


def cmd_check(args) -> int:
    d = _load_tuple(args)
    verdict = region_contains(d, RegionParams(K=d.K, M=args.m, N=args.n))
    payload = {
        "K": d.K, "M": args.m, "N": args.n,
        "inside": verdict.inside,
        "max_lhs": str(verdict.max_lhs),
        "binding_permutations": [list(p) for p in verdict.binding_permutations],
    }
    _emit(json.dumps(payload, sort_keys=True) + "\n", args.out)
    return 0 if verdict.inside else 1


def cmd_allocate(args) -> int:
    d = _load_tuple(args)
    plan, trace = allocate(d)
    if plan.num_subchannels.denominator == 1 and plan.num_subchannels <= args.n:
        plan = assign_subchannels(plan, args.n)
    verdict = verify_plan(plan, d, trace, args.n)
    payload = {
        "plan": plan_to_json_dict(plan),
        "trace": trace_to_json_list(trace),
        "verdict": {"ok": verdict.ok, "failures": list(verdict.failures),
                    "conservation_ok": verdict.conservation_ok,
                    "subchannel_count_ok": verdict.subchannel_count_ok,
                    "residual_acyclic": verdict.residual_acyclic,
                    "within_capacity": verdict.within_capacity},
    }
    _emit(json.dumps(payload, sort_keys=True) + "\n", args.out)
    return 0 if verdict.ok else 1


def _round_params(args) -> SimConfig:
    """Round parameters: a --config file supplies defaults, flags override."""
    base = SimConfig()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            base = SimConfig.from_json_dict(json.load(fh))
    return SimConfig(
        mode=args.mode if args.mode is not None else base.mode,
        rho=base.rho,
        seed=args.seed if args.seed is not None else base.seed,
        constellation=(args.constellation if args.constellation is not None
                       else base.constellation))


def cmd_simulate(args) -> int:
    d = _load_tuple(args)
    cfg = _round_params(args)
    rho = float(args.rho) if args.rho is not None else cfg.rho
    rows = sweep_rows(d, args.m, args.n, [rho], [cfg.seed],
                      cfg.mode, cfg.constellation, workers=1)
    _emit(_csv_text(rows), args.out)
    return 0


def cmd_sweep(args) -> int:
    d = _load_tuple(args)
    cfg = _round_params(args)
    if args.rho is not None:
        rhos = [float(tok) for tok in args.rho.split(",") if tok]
    else:
        rhos = [cfg.rho]
        if not args.config:
            raise ValueError("sweep needs --rho or a --config file")
    seeds = list(range(cfg.seed, cfg.seed + args.seeds))
    rows = sweep_rows(d, args.m, args.n, rhos, seeds, cfg.mode,
                      cfg.constellation, workers=_workers())
    _emit(_csv_text(rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ychan")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list all cycles of one length")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--len", dest="length", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("check", help="test a demand tuple against the region")
    _add_tuple_source(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("allocate", help="run the greedy allocator on a tuple")
    _add_tuple_source(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_allocate)

    for name in ("simulate", "sweep"):
        p = sub.add_parser(name, help=f"{name} rounds and emit CSV")
        _add_tuple_source(p)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--mode", choices=("noiseless", "awgn"))
        p.add_argument("--constellation", choices=("gaussian", "qpsk"))
        p.add_argument("--config", help="round-parameter JSON file; flags override")
        p.add_argument("--out")
        if name == "simulate":
            p.add_argument("--rho", type=float)
            p.set_defaults(func=cmd_simulate)
        else:
            p.add_argument("--rho", help="comma-separated list of powers")
            p.add_argument("--seeds", type=int, default=1,
                           help="number of seeds, starting at --seed")
            p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already; normalize other codes
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (CapacityError, IntegralityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except YchanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
