"""Command-line entry point ``swipt-opt``.

Exit codes: 0 success, 1 infeasible rate, 2 numerical failure, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from ..channel import SystemParams, dbm_to_watts, decompose, generate_channel
from ..errors import (
    ApproximationInapplicableError,
    DegenerateChannelError,
    DimensionError,
    DomainError,
    NumericalBracketError,
    OutputError,
    SwiptError,
)
from ..solver import solve_op1
from ..waterfill import max_rate
from .config import SCHEMES, load_config
from .csvio import emit_csv
from .sweep import SummaryRow, run_sweep, solve_scheme, summarize

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_BAD_INPUT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _add_instance_args(p: argparse.ArgumentParser, square: bool = True) -> None:
    if square:
        p.add_argument("--n", type=int, required=True, help="antennas at each end")
    p.add_argument("--theta", type=float, required=True, help="path-loss amplitude")
    p.add_argument("--sigma2-dbm", type=float, required=True, help="noise power in dBm")
    p.add_argument("--pt", type=float, required=True, help="transmit power budget in watts")
    p.add_argument("--rate", type=float, required=True, help="required rate in bps/Hz")
    p.add_argument("--seed", type=int, required=True, help="channel seed")
    p.add_argument("--tol", type=float, default=1e-4, help="splitting-ratio tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swipt-opt", description="Rate-constrained power transfer optimizers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sweep = sub.add_parser("sweep", help="run a Monte-Carlo sweep from a JSON config")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True, help="per-point record CSV")
    sweep.add_argument("--summary", help="optional summary CSV")

    solve = sub.add_parser("solve", help="solve one random instance and print JSON")
    _add_instance_args(solve)
    solve.add_argument("--scheme", choices=SCHEMES, default="op1")

    oracle = sub.add_parser("oracle", help="compare the optimizer with a brute-force grid on a 2x2 channel")
    _add_instance_args(oracle, square=False)
    oracle.add_argument("--grid", type=int, default=401, help="grid points per axis")
    return parser


def _params(args: argparse.Namespace) -> SystemParams:
    return SystemParams(args.pt, dbm_to_watts(args.sigma2_dbm), args.rate, args.tol)


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    records = list(run_sweep(config))
    emit_csv(records, args.out)
    if args.summary:
        emit_csv(summarize(records, config.infeasible_policy), args.summary, SummaryRow)
    print(json.dumps({"records": len(records), "out": args.out, "summary": args.summary}))
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    h = generate_channel(args.n, args.n, args.theta, args.seed)
    dec = decompose(h)
    params = _params(args)
    sol = solve_scheme(args.scheme, h, dec, params)
    out = {
        "scheme": args.scheme,
        "singvals": [float(s) for s in dec.singvals],
        "rate_max": max_rate(dec, params),
        "solution": sol.to_dict(),
    }
    print(json.dumps(out))
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def _cmd_oracle(args: argparse.Namespace) -> int:
    from ..bench import oracle_grid_2x2

    h = generate_channel(2, 2, args.theta, args.seed)
    dec = decompose(h)
    params = _params(args)
    sol = solve_op1(dec, params)
    grid = oracle_grid_2x2(dec, params, args.grid)
    gap = None
    if sol.feasible and grid.feasible and grid.p_re > 0:
        gap = (grid.p_re - sol.p_re) / grid.p_re
    print(json.dumps({"op1": sol.to_dict(), "oracle": grid.to_dict(), "relative_gap": gap}))
    return EXIT_OK if sol.feasible else EXIT_INFEASIBLE


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"sweep": _cmd_sweep, "solve": _cmd_solve, "oracle": _cmd_oracle}[args.command]
    try:
        return handler(args)
    except (DomainError, DimensionError, DegenerateChannelError, FileNotFoundError) as exc:
        print(f"swipt-opt: bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (NumericalBracketError, ApproximationInapplicableError) as exc:
        print(f"swipt-opt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OutputError as exc:
        print(f"swipt-opt: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except SwiptError as exc:
        print(f"swipt-opt: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
