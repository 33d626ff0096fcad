"""Command-line front-end: load a theory, run belief/projection/density
queries over an action sequence, show the regression derivation, and emit
JSON reports or CSV profiles.

Exit codes: 0 success, 2 parse/validation failure, 3 undefined belief."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import load_theory
from .evaluate import (
    EvalError, UndefinedBeliefError, density_profile, eval_belief, mc_oracle,
    profile_csv,
)
from .parser import ParseError, parse_action_sequence, parse_formula
from .regression import regress_belief, regress_projection
from .syntax import pretty
from .theory import TheoryError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNDEFINED = 3


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="regbel",
        description="Evaluate degrees of belief after acting and sensing by "
                    "regressing the query to the initial state.")
    p.add_argument("--theory", required=True, help="theory file")
    p.add_argument("--query", default="true", help="query formula")
    p.add_argument("--after", default="",
                   help="semicolon-separated ground actions, in execution order")
    p.add_argument("--mode", choices=("belief", "projection", "density"),
                   default="belief")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="absolute quadrature tolerance")
    p.add_argument("--show-regression", action="store_true",
                   help="print the step-by-step derivation")
    p.add_argument("--oracle", type=int, metavar="N",
                   help="cross-check with a Monte Carlo estimate of N samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--out", help="write output to this file")
    p.add_argument("--fluent", help="fluent to profile (density mode)")
    p.add_argument("--grid", default="",
                   help="density grid as lo:hi:count (density mode)")
    p.add_argument("--prefixes",
                   help="'|'-separated action prefixes, one CSV each "
                        "(density mode; defaults to --after)")
    return p


def _rational(x) -> dict:
    out = {"float": float(x)}
    if isinstance(x, (Fraction, int)):
        f = Fraction(x)
        out["exact"] = f"{f.numerator}/{f.denominator}"
    return out


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def run_query(args) -> int:
    try:
        theory = load_theory(args.theory)
        if theory.diagnostics:
            for d in theory.diagnostics:
                print(f"error: {d}", file=sys.stderr)
            return EXIT_INVALID
        query = parse_formula(args.query, fluents=theory.fluent_names)
        situation = parse_action_sequence(args.after)
        for a in situation.actions:
            if not theory.declared(a.name):
                raise TheoryError(f"undeclared action {a.name!r}")
    except (OSError, ParseError, TheoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.mode == "density":
        return _run_density(args, theory)

    if args.mode == "projection":
        try:
            regressed = regress_projection(theory, query, situation)
        except (TheoryError, EvalError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        if args.json:
            _write(json.dumps({"query": args.query, "actions": args.after,
                               "regressed": pretty(regressed)}, indent=2) + "\n",
                   args.out)
        else:
            _write(f"query: {pretty(query)}\nafter: {args.after or '(none)'}\n"
                   f"regressed: {pretty(regressed)}\n", args.out)
        return EXIT_OK

    try:
        expr, trace = regress_belief(theory, query, situation)
        result = eval_belief(theory, expr, tol=args.tol)
    except UndefinedBeliefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except (TheoryError, EvalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    oracle = None
    if args.oracle:
        oracle = mc_oracle(theory, query, situation, args.oracle, seed=args.seed)

    if args.json:
        report = {
            "query": args.query,
            "actions": args.after,
            "regressed": {
                "condition": pretty(expr.condition),
                "gamma_condition": pretty(expr.gamma_condition),
                "likelihood": [pretty(f) for f in expr.factors],
                "prior": pretty(expr.prior),
                "trace": trace.to_dict(),
            },
            "value": _rational(result.value),
            "gamma": _rational(result.gamma),
            "error": result.error,
        }
        if oracle:
            report["oracle"] = {"estimate": oracle.estimate, "stderr": oracle.stderr,
                                "n": oracle.samples, "seed": oracle.seed}
        _write(json.dumps(report, indent=2) + "\n", args.out)
        return EXIT_OK

    lines = [f"query: {pretty(query)}",
             f"after: {args.after or '(none)'}"]
    if args.show_regression:
        lines.append("derivation:")
        lines.append(trace.render())
    lines.append("regressed:")
    lines.append(str(expr))
    value = result.value
    if isinstance(value, Fraction):
        lines.append(f"value: {value} = {float(value):.6f}")
        lines.append(f"gamma: {result.gamma} = {float(result.gamma):.6f}")
    else:
        lines.append(f"value: {value:.9f} (+/- {result.error:.2e})")
        lines.append(f"gamma: {float(result.gamma):.9f}")
    if oracle:
        lines.append(f"oracle: {oracle.estimate:.6f} "
                     f"(stderr {oracle.stderr:.2e}, n={oracle.samples}, "
                     f"seed={oracle.seed})")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _run_density(args, theory) -> int:
    fluent = args.fluent
    if fluent is None:
        real = [f.name for f in theory.fluents if not f.domain.is_finite]
        if len(real) != 1:
            print("error: --fluent is required", file=sys.stderr)
            return EXIT_INVALID
        fluent = real[0]
    try:
        lo, hi, count = args.grid.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
        if count < 1:
            raise ValueError
    except ValueError:
        print("error: --grid must be lo:hi:count", file=sys.stderr)
        return EXIT_INVALID
    grid = [lo + (hi - lo) * i / max(count - 1, 1) for i in range(count)]
    prefixes = (args.prefixes if args.prefixes is not None else args.after).split("|")
    try:
        for i, prefix in enumerate(prefixes):
            situation = parse_action_sequence(prefix)
            rows = density_profile(theory, situation, fluent, grid)
            csv = profile_csv(rows)
            if args.out and len(prefixes) > 1:
                path = Path(args.out)
                _write(csv, str(path.with_name(f"{path.stem}_{i}{path.suffix}")))
            else:
                _write(csv, args.out)
    except (ParseError, TheoryError, EvalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    return run_query(args)


if __name__ == "__main__":
    sys.exit(main())
