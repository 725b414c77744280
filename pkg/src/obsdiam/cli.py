"""Command line front end: ``obsdiam <command> [options]``.

On failure the exit code is nonzero and a JSON object
``{"error": <kind>, "message": <text>}`` is written to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .experiments import COMMANDS, ExperimentConfig, HypothesisError, emit, run_experiment


def _exponent(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    val = float(text)
    if not val >= 1:
        raise argparse.ArgumentTypeError(f"exponent must be >= 1 or inf, got {text}")
    return val


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("usage", message, code=2)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="obsdiam", description="Seeded concentration-of-measure experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--p", type=_exponent, help="ball / sphere exponent")
    ap.add_argument("--q", type=_exponent, help="distance exponent")
    ap.add_argument("--eps", type=float, help="reduction accuracy")
    ap.add_argument("--kappa", type=float, help="mass left out")
    ap.add_argument("--n-list", type=_int_list, help="comma separated dimensions")
    ap.add_argument("--samples", type=int, help="samples, pairs or trials depending on the command")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output", default="-", help="output path, '-' for stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--r-grid", type=_float_list, help="radii for sphere-concentration")
    ap.add_argument("--exact-points", type=int, default=22,
                    help="subsample size for exact partial diameters in theorem1")
    ap.add_argument("--input", help="mm-space JSON file for obsdiam-bracket")
    return ap


def _fail(kind: str, message: str, code: int = 1):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    sys.exit(code)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExperimentConfig(
        command=args.command, p=args.p, q=args.q, n_list=args.n_list, samples=args.samples,
        eps=args.eps, kappa=args.kappa, seed=args.seed, output=args.output,
        format=args.format, r_grid=args.r_grid, exact_points=args.exact_points, input=args.input,
    )
    try:
        record = run_experiment(cfg)
        emit(record, cfg.format, cfg.output)
    except HypothesisError as exc:
        _fail("hypothesis", str(exc), code=2)
    except ValueError as exc:
        _fail("invalid", str(exc), code=2)
    except OSError as exc:
        _fail("io", str(exc), code=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
