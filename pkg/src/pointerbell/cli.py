"""Command-line front end.

Angles are given in degrees and converted to radians here. Every output
carries a metadata block echoing the full configuration.

Exit codes: 0 success, 2 configuration error, 3 numerical-invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections.abc import Sequence

import numpy as np

from . import __version__
from .engine import (
    METHODS, OUTCOMES, ExperimentConfig, branch_basis_density, closed_form_probabilities,
    locality_report, pointer_overlap, run,
)
from .errors import ConfigurationError, DimensionError, InvariantViolation
from .linalg import max_offdiagonal
from .photon import AnalyzerSettings
from .statistics import (
    OutcomeDistribution, chi_square_self_test, chsh_correlations, correlation,
    engine_for, sample,
)

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3
SCHEMA_VERSION = 1
EPSILON_MATCH_TOL = 1e-12

DEFAULTS = {
    "converge": {"sites": 64, "epsilon": 8.0},
}


def _num(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _fmt(x) -> str:
    x = _num(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _finite_degrees(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be a finite angle in degrees, got {value}")
    return math.radians(value)


def resolve_timing(args) -> tuple[float, float]:
    """Return ``(t, lam)`` from any combination of --epsilon, --time, --coupling."""
    eps, t, lam = args.epsilon, args.time, args.coupling
    if eps is None:
        eps = DEFAULTS.get(args.command, {}).get("epsilon")
    if eps is None:
        return (1.0 if t is None else t), (1.0 if lam is None else lam)
    if t is not None and lam is not None:
        if abs(t * lam - eps) > EPSILON_MATCH_TOL:
            raise ConfigurationError(f"--time {t} x --coupling {lam} = {t * lam} does not match --epsilon {eps}")
        return t, lam
    if t is not None:
        if t == 0:
            raise ConfigurationError("--time 0 cannot realise a nonzero --epsilon")
        return t, eps / t
    if lam is not None:
        if lam == 0:
            raise ConfigurationError("--coupling 0 cannot realise a nonzero --epsilon")
        return eps / lam, lam
    return 1.0, eps


def build_config(args, alpha_deg: float = 0.0, beta_deg: float = 22.5,
                 pointer: str | None = None, leak_tolerance="default") -> ExperimentConfig:
    t, lam = resolve_timing(args)
    sites = args.sites or DEFAULTS.get(args.command, {}).get("sites", 3)
    mode = pointer or args.pointer
    kwargs = {}
    if leak_tolerance != "default":
        kwargs["leak_tolerance"] = leak_tolerance
    return ExperimentConfig(
        analyzers=AnalyzerSettings(_finite_degrees("alpha", alpha_deg), _finite_degrees("beta", beta_deg)),
        pointer_sites=sites,
        pointer_mode=mode,
        sigma=args.sigma,
        interaction_time=t,
        coupling=lam,
        tolerance=args.tolerance,
        seed=args.seed,
        **kwargs,
    )


def config_echo(config: ExperimentConfig) -> dict:
    return {
        "alpha_deg": math.degrees(config.analyzers.alpha),
        "beta_deg": math.degrees(config.analyzers.beta),
        "pointer_mode": config.pointer_mode,
        "pointer_sites": config.pointer_sites,
        "sigma": config.sigma,
        "interaction_time": config.interaction_time,
        "coupling": config.coupling,
        "epsilon": config.epsilon,
        "tolerance": config.tolerance,
        "seed": config.seed,
    }


def metadata(args, config: ExperimentConfig, **extra) -> dict:
    params = {k: _num(v) for k, v in vars(args).items() if k not in ("func", "out", "format")}
    return {
        "command": args.command,
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "tolerance": config.tolerance,
        "arguments": params,
        "config": config_echo(config),
        **extra,
    }


def emit(args, meta: dict, rows: list[dict], extra: dict | None = None) -> None:
    """Write rows as JSON (one object) or CSV (``#`` metadata lines, header, rows)."""
    if args.format == "json":
        doc = {"metadata": meta, "results": rows}
        if extra:
            doc.update(extra)
        text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, default=_num) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + json.dumps(meta, sort_keys=True, default=_num) + "\n")
        if extra:
            buf.write("# " + json.dumps(extra, sort_keys=True, default=_num) + "\n")
        if rows:
            writer = csv.writer(buf, lineterminator="\n")
            header = list(rows[0])
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(row[h]) for h in header])
        text = buf.getvalue()
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _prob_row(config: ExperimentConfig, method: str) -> dict:
    result = run(config, method)
    dist = OutcomeDistribution.from_result(result)
    closed = closed_form_probabilities(config.analyzers)
    row = {
        "alpha_deg": math.degrees(config.analyzers.alpha),
        "beta_deg": math.degrees(config.analyzers.beta),
    }
    row.update({f"p{o}": result.outcome_probs[o] for o in OUTCOMES})
    row["p_inconclusive"] = result.p_inconclusive
    row.update({f"closed_p{o}": float(closed[o]) for o in OUTCOMES})
    row["E"] = correlation(dist)
    return row


def cmd_probs(args) -> None:
    config = build_config(args, args.alpha, args.beta)
    emit(args, metadata(args, config), [_prob_row(config, args.method)])


def cmd_scan(args) -> None:
    if args.grid < 1:
        raise ConfigurationError(f"--grid must be >= 1, got {args.grid}")
    base = build_config(args)
    angles = [180.0 * i / args.grid for i in range(args.grid)]
    rows = []
    for a in angles:
        for b in angles:
            rows.append(_prob_row(base.at(math.radians(a), math.radians(b)), args.method))
    emit(args, metadata(args, base), rows)


def cmd_chsh(args) -> None:
    a, a2, b, b2 = (_finite_degrees(n, v) for n, v in zip(("a", "a'", "b", "b'"), args.angles))
    base = build_config(args)
    e = chsh_correlations(a, a2, b, b2, engine_for(base, args.method))
    s = e["E(a,b)"] - e["E(a,b')"] + e["E(a',b)"] + e["E(a',b')"]
    row = {"S": s, **e, "tsirelson_bound": 2 * math.sqrt(2)}
    emit(args, metadata(args, base), [row])


def cmd_locality(args) -> None:
    config = build_config(args, args.alpha, args.beta)
    rows = []
    for label, mu in (("local", 0.0), ("nonlocal", args.mu)):
        rows.append({"hamiltonian": label, "mu": mu, **locality_report(config, mu)})
    emit(args, metadata(args, config), rows)


def cmd_sample(args) -> None:
    if args.n < 1:
        raise ConfigurationError(f"--n must be >= 1, got {args.n}")
    config = build_config(args, args.alpha, args.beta)
    dist = OutcomeDistribution.from_result(run(config, args.method))
    seq = sample(dist, args.n, args.seed)
    counts = seq.counts()
    summary = {
        "counts": {o: int(c) for o, c in zip(OUTCOMES, counts)},
        "probabilities": {o: float(p) for o, p in zip(OUTCOMES, dist.conditional())},
    }
    try:
        test = chi_square_self_test(seq, dist)
        summary["chi_square"] = {
            "statistic": test.statistic,
            "dof": test.dof,
            "quantile_99": test.quantile(0.99),
            "exceeds_99": test.exceeds(0.99),
        }
    except ValueError as exc:
        summary["chi_square"] = {"skipped": str(exc)}
    rows = [{"trial": i, "outcome": o} for i, o in enumerate(seq.outcomes)]
    emit(args, metadata(args, config), rows, extra={"summary": summary})


def cmd_converge(args) -> None:
    rows = []
    config = None
    for sigma in args.sigmas:
        args.sigma = sigma
        config = build_config(args, args.alpha, args.beta, pointer="gaussian", leak_tolerance=None)
        result = run(config, "branch")
        closed = closed_form_probabilities(config.analyzers)
        rows.append({
            "sigma": sigma,
            "sigma_over_epsilon": sigma / config.epsilon,
            "overlap": pointer_overlap(config),
            "max_offdiagonal": max_offdiagonal(branch_basis_density(result.final_state, config)),
            "p_inconclusive": result.p_inconclusive,
            "max_deviation": max(abs(result.outcome_probs[o] - closed[o]) for o in OUTCOMES),
        })
    args.sigma = None
    emit(args, metadata(args, config), rows)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--pointer", choices=("delta", "gaussian"), default="delta")
    p.add_argument("--sites", type=int, default=None, help="pointer lattice size N")
    p.add_argument("--sigma", type=float, default=None, help="gaussian pointer width in sites")
    p.add_argument("--epsilon", type=float, default=None, help="pointer displacement t*lambda in sites")
    p.add_argument("--time", type=float, default=None, help="interaction time t")
    p.add_argument("--coupling", type=float, default=None, help="coupling strength lambda")
    p.add_argument("--mu", type=float, default=1.0, help="cross-station coupling of the nonlocal counterexample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--method", choices=METHODS, default="branch")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointerbell",
        description="Pointer-model simulation of a two-station Bell experiment.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("probs", help="outcome probabilities at one analyzer setting")
    p.add_argument("--alpha", type=float, default=0.0, help="station A analyzer angle (degrees)")
    p.add_argument("--beta", type=float, default=22.5, help="station B analyzer angle (degrees)")
    p.set_defaults(func=cmd_probs)

    p = sub.add_parser("scan", help="probabilities and correlation over an angle grid")
    p.add_argument("--grid", type=int, default=19, help="grid points per angle over [0, 180)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("chsh", help="CHSH value S and its four correlations")
    p.add_argument("--angles", type=float, nargs=4, default=[0.0, 45.0, 22.5, 67.5],
                   metavar=("A", "A_PRIME", "B", "B_PRIME"), help="analyzer angles in degrees")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("locality", help="commutator, factorization and order-swap diagnostics")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=45.0)
    p.set_defaults(func=cmd_locality)

    p = sub.add_parser("sample", help="seeded outcome sequence with a chi-square self-test")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=22.5)
    p.add_argument("--n", type=int, default=10000)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("converge", help="gaussian-pointer deviation from the ideal law versus sigma")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=22.5)
    p.add_argument("--sigmas", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    p.set_defaults(func=cmd_converge)

    for p in sub.choices.values():
        _add_common(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigurationError, DimensionError, ValueError) as exc:
        print(f"pointerbell: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"pointerbell: numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
