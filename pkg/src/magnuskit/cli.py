"""Command line entry point: ``magnuskit {bench,eigen,order,check,list}``."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .bench import (
    eigen_csv,
    load_config,
    order_table,
    records_to_csv,
    run_benchmark,
    run_checks,
    run_eigen,
)
from .errors import ConfigError, MagnusError


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_bench(args):
    cfg = load_config(args.config)
    records = run_benchmark(cfg, log=lambda msg: print(msg, file=sys.stderr))
    _emit(records_to_csv(records), args.out)
    return 0


def _cmd_eigen(args):
    cfg = load_config(args.config)
    rows, slope = run_eigen(cfg)
    text = eigen_csv(rows)
    if slope is not None:
        text += f"# error-vs-lambda slope {slope:.6f}\n"
    _emit(text, args.out)
    return 0


def _cmd_order(args):
    cfg = load_config(args.config)
    lines = ["method,slope"]
    for name, slope in order_table(cfg):
        lines.append(f"{name},{slope:.4f}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_check(args):
    results = run_checks(args.seed)
    failed = 0
    for name, ok, value, bound in results:
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name} value={value:.3e} bound={bound}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def _cmd_list(args):
    from .problems import CATALOG
    from .splitting import BAB_SEEDS, SPLIT_METHODS
    from .steppers import METHODS

    print("problems: " + ", ".join(CATALOG))
    print("linear methods: " + ", ".join(METHODS))
    print("split methods: " + ", ".join(list(SPLIT_METHODS) + list(BAB_SEEDS)))
    print("nonlinear methods: ISO2, ISO3, NLM2")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magnuskit", description="Magnus-type integrators and benchmarks.")
    p.add_argument("--version", action="version", version=f"magnuskit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("bench", _cmd_bench, "run a benchmark grid and write CSV records"),
        ("eigen", _cmd_eigen, "scan Sturm-Liouville eigenvalues"),
        ("order", _cmd_order, "empirical convergence order per method"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True, help="key = value configuration file")
        sp.add_argument("-o", "--out", help="write output here instead of stdout")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("check", help="run the invariant suite; exit 1 on failure")
    sp.add_argument("--seed", type=int, default=42)
    sp.set_defaults(func=_cmd_check)

    sp = sub.add_parser("list", help="list problems and methods")
    sp.set_defaults(func=_cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"magnuskit: config error: {exc}", file=sys.stderr)
        return 2
    except (MagnusError, OSError) as exc:
        print(f"magnuskit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
