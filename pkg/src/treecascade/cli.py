"""``treecascade`` command-line front end."""
import argparse
import sys
import time
from dataclasses import replace

from .bench import run_bench, write_csv
from .config import load_config
from .errors import TraceParseError
from .trace import RunParams, generate, load_trace, parse_gen_spec, run_differential, shrink


def _run_params(cfg, **extra):
    params = RunParams(B=cfg.B, G=cfg.G, c=cfg.c, d=cfg.d, fanout=cfg.fanout, d_max=cfg.d_max,
                       locator=cfg.locator, audit_every=cfg.audit_every, faults=cfg.faults)
    return replace(params, **extra)


def _gen_spec(text, cfg):
    spec = parse_gen_spec(text)
    if "ops=" not in text:
        spec.ops = cfg.ops
    return spec


def cmd_verify(args):
    cfg = load_config(args.config)
    if args.fault:
        cfg.faults = tuple(args.fault)
        cfg.validate()
    seed = args.seed if args.seed is not None else cfg.seed
    try:
        trace = load_trace(args.trace) if args.trace else generate(_gen_spec(args.gen, cfg), seed)
    except TraceParseError as exc:
        print(f"error: {args.trace}: {exc}", file=sys.stderr)
        return 2
    params = _run_params(cfg, stop_on_first=args.stop_on_first)
    t0 = time.perf_counter()
    report = run_differential(trace, params)
    elapsed = time.perf_counter() - t0
    source = args.trace or f"generated {args.gen} seed={seed}"
    print(f"trace: {source} ({len(trace.ops)} ops)")
    print(report.format(limit=args.limit))
    print(f"runtime: {elapsed:.2f}s")
    if not report.ok and args.shrink:
        small = shrink(trace, _run_params(cfg, stop_on_first=True, audit_every=1))
        print(f"shrunk failing trace ({len(small.ops)} ops):")
        sys.stdout.write(small.dumps())
        if args.dump:
            with open(args.dump, "w", encoding="utf-8") as fh:
                fh.write(small.dumps())
    return 0 if report.ok else 1


def cmd_bench(args):
    cfg = load_config(args.config)
    out = args.out or cfg.out or "-"
    rows = run_bench(cfg)
    if out == "-":
        write_csv(rows, sys.stdout, cfg)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh, cfg)
        print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_gen(args):
    cfg = load_config(args.config)
    trace = generate(_gen_spec(args.spec, cfg), args.seed)
    text = trace.dumps()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="treecascade",
                                description="Dynamic catalog search along tree paths: "
                                            "differential verification and benchmarks.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="replay a trace against brute-force oracles and audits")
    src = v.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", metavar="FILE", help="trace file to replay")
    src.add_argument("--gen", metavar="SPEC",
                     help="generate a trace, e.g. 'search:ops=100000,nodes=512'")
    v.add_argument("--seed", type=int, help="generator seed (default: config seed)")
    v.add_argument("--config", metavar="FILE", help="key=value configuration file")
    v.add_argument("--fault", action="append", metavar="NAME",
                   help="inject a documented fault (repeatable)")
    v.add_argument("--stop-on-first", action="store_true", help="stop at the first failure")
    v.add_argument("--shrink", action="store_true", help="on failure, print a minimal failing trace")
    v.add_argument("--dump", metavar="FILE", help="write the shrunk trace here")
    v.add_argument("--limit", type=int, default=10, help="failures to list (default 10)")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="count comparisons against per-node binary search")
    b.add_argument("--config", metavar="FILE", help="key=value configuration file")
    b.add_argument("--out", metavar="CSV", help="output path ('-' for stdout)")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="write a generated trace")
    g.add_argument("spec", metavar="SPEC")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--config", metavar="FILE")
    g.add_argument("--out", metavar="FILE")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
