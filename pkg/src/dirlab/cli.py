"""Command-line front end.

Exit codes: 0 success, 1 selftest failure, 2 configuration error,
3 numerical flag (divergence, unconverged or inconclusive result).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import acceptance, carleson, energy, reporting, thresholds
from .boundary import parse_spec
from .quadrature import is_power_of_two

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


def _grid_size(text: str) -> int:
    n = int(text)
    if not (is_power_of_two(n) and 2**6 <= n <= 2**14):
        raise argparse.ArgumentTypeError(f"n must be a power of two in [64, 16384], got {n}")
    return n


def _alpha(text: str) -> float:
    a = float(text)
    if not 0.0 <= a < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 1), got {a}")
    return a


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=_alpha, default=0.5, help="weight exponent in [0, 1)")
    common.add_argument("--n", type=_grid_size, default=1024, help="angular grid size")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized corpora")

    p = argparse.ArgumentParser(prog="dirlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("energy", parents=[common], help="D_alpha of O_h along all routes")
    e.add_argument("--h", required=True, help="boundary spec, e.g. poly:1+z/2 or csv:path")

    c = sub.add_parser("carleson", parents=[common], help="boundary decomposition of ||O_h||^2")
    c.add_argument("--h", required=True, help="boundary spec")
    c.add_argument("--lambda", dest="lam", type=float,
                   help="constant lambda instead of mu_h")
    c.add_argument("--emit-mu", type=Path, help="write the mu_h profile as CSV")
    c.add_argument("--refine", action="store_true",
                   help="also flag divergence by grid refinement")

    t = sub.add_parser("thresholds", parents=[common], help="finiteness thresholds for h_beta")
    t.add_argument("--betas", type=_floats, default=[0.3, 0.6, 0.8, 0.9, 1.3])
    t.add_argument("--quantity", choices=("N", "D", "C", "all"), default="all")
    t.add_argument("--depth", type=int, default=6)
    t.add_argument("--strict", action="store_true",
                   help="reject betas within the classifier margin of a threshold")

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    s.add_argument("--quick", action="store_true", help="halve the grids")
    s.add_argument("--douglas-prefactor", type=float, help=argparse.SUPPRESS)
    return p


def _config(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, Path):
            v = str(v)
        out[k] = v
    return out


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def _envelope(args, result: dict) -> str:
    return reporting.dumps({"command": args.command, "config": _config(args), "result": result})


def cmd_energy(args) -> int:
    h = parse_spec(args.h)
    rep = energy.energy_report(h, args.alpha, args.n)
    if args.format == "json":
        _emit(args, _envelope(args, rep.to_dict()))
    else:
        rows = [("route", k, v) for k, v in rep.routes.items()]
        rows += [("ratio", k, v) for k, v in sorted(rep.ratios.items())]
        _emit(args, reporting.csv_rows(("kind", "name", "value"), rows))
    return EXIT_NUMERIC if rep.flags else EXIT_OK


def cmd_carleson(args) -> int:
    h = parse_spec(args.h)
    mu = carleson.mu_profile(h, args.n)
    lam = args.lam if args.lam is not None else None
    if lam is not None and not lam > 0:
        raise ConfigError("lambda must be positive")
    dec = carleson.theorem_decomposition(h, args.alpha, lam=lam, n=args.n, refine=args.refine,
                                         mu=mu)
    result = dec.to_dict()
    result["mu"] = mu.to_dict()
    if args.emit_mu is not None:
        args.emit_mu.write_text(mu.to_csv())
    if args.format == "json":
        _emit(args, _envelope(args, result))
    else:
        keys = ("norm_h2", "N_alpha", "n_alpha", "n_tilde_alpha", "rhs", "lhs", "ratio",
                "ratio_grid", "ratio_without_norm")
        rows = [(k, float("nan") if result[k] is None else result[k]) for k in keys]
        _emit(args, reporting.csv_rows(("field", "value"), rows))
    return EXIT_NUMERIC if dec.flags else EXIT_OK


def cmd_thresholds(args) -> int:
    if args.alpha <= 0:
        raise ConfigError("thresholds need 0 < alpha < 1")
    quantities = thresholds.QUANTITIES if args.quantity == "all" else (args.quantity,)
    rows = thresholds.threshold_table(args.alpha, args.betas, args.depth, quantities,
                                      strict=args.strict)
    if args.format == "json":
        _emit(args, _envelope(args, {"rows": thresholds.table_to_dicts(rows)}))
    else:
        _emit(args, thresholds.table_to_csv(rows))
    inconclusive = any(r.verdict == thresholds.INCONCLUSIVE for r in rows)
    return EXIT_NUMERIC if inconclusive else EXIT_OK


def cmd_selftest(args) -> int:
    results = []
    for k in range(1, len(acceptance.CRITERIA) + 1):
        r = acceptance.run_criterion(k, args.quick, args.douglas_prefactor, args.seed)
        results.append(r)
        print(r.line(), file=sys.stderr if args.out is None and args.format == "json" else sys.stdout)
    if args.format == "json":
        payload = [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
                    "budget_seconds": r.budget} for r in results]
        _emit(args, _envelope(args, {"criteria": payload,
                                     "passed": all(r.passed for r in results)}))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


COMMANDS = {
    "energy": cmd_energy,
    "carleson": cmd_carleson,
    "thresholds": cmd_thresholds,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, SyntaxError) as exc:
        print(f"dirlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # bad spec arguments surface as ValueError from the constructors
        if getattr(args, "h", None) is not None and _spec_invalid(args.h):
            print(f"dirlab: configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"dirlab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _spec_invalid(spec: str) -> bool:
    try:
        parse_spec(spec)
    except Exception:
        return True
    return False


if __name__ == "__main__":
    sys.exit(main())
