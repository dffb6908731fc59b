"""Command-line interface: validate / run / matrix."""

import argparse
import sys

from .config import load_config
from .errors import QfpError
from .gksl import Classification, validate_params
from .runner import run_matrix, run_scenario


def _add_common(parser):
    parser.add_argument("--config", required=True, help="scenario .toml/.json (matrix: directory)")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed override")
    parser.add_argument("--n", type=int, default=None, help="Fock truncation override")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qfpsim",
        description="Quantum Fokker-Planck simulator (truncated Fock basis)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="classify the Lindblad parameters")
    _add_common(p_validate)

    p_run = sub.add_parser("run", help="run one scenario")
    _add_common(p_run)

    p_matrix = sub.add_parser("matrix", help="run a directory of scenarios")
    _add_common(p_matrix)
    p_matrix.add_argument("--jobs", type=int, default=1, help="concurrent scenarios")
    return parser


def _overrides(args):
    return {"seed": args.seed, "n": args.n}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            config = load_config(args.config, overrides=_overrides(args))
            cls, delta = validate_params(config.params)
            print(f"classification: {cls}")
            print(f"delta: {delta:.12g}")
            return 0 if cls is not Classification.INVALID else 1

        if args.command == "run":
            config = load_config(args.config, overrides=_overrides(args))
            result = run_scenario(config, out_dir=args.out)
            for check in result.checks:
                mark = "PASS" if check["pass"] else "FAIL"
                print(f"[{mark}] {check['name']}: {check['value']} "
                      f"(threshold {check['threshold']})")
            if result.error:
                print(f"error: {result.error}", file=sys.stderr)
            print(f"report: {result.out_dir / 'report.json'}")
            return 0 if result.ok else 1

        if args.command == "matrix":
            results, failed = run_matrix(args.config, out_root=args.out, jobs=args.jobs)
            width = max(len(r.name) for r in results)
            for r in results:
                status = "pass" if r.ok else "fail"
                print(f"{r.name:<{width}}  {status}" + (f"  ({r.error})" if r.error else ""))
            print(f"{len(results) - failed}/{len(results)} scenarios passed")
            return min(failed, 125)
    except QfpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
