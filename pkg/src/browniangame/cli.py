"""Command-line front end for the coordination-game solver.

Commands: ``solve``, ``verify``, ``best-response``, ``payoff``,
``potential``, ``benchmarks``, and ``org`` with subcommands ``threshold`` and
``sweep``.  Inputs are JSON spec files (see :mod:`browniangame.specio`);
output is JSON, CSV (where tabular) or plain text, written atomically when
``--out`` is given.  Reports embed the spec file's SHA-256 and the library
version so a report can be traced to its exact inputs; given the same seed
and version a rerun reproduces the bytes.

Exit status: 0 on success, 2 on validation errors (bad file, bad schema, bad
parameters), 3 on solver failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .best_response import best_response, br_grid_oracle
from .equilibrium import (
    benchmark_profiles,
    conformity_gaps,
    enumerate_equilibria,
    extremal_equilibria,
    multiplicity_diagnostics,
    verify_equilibrium,
)
from .errors import SolverError, ValidationError
from .game import DEFAULT_TOL
from .oracle import mc_payoff, mc_potential
from .organization import SWEEP_COLUMNS, build_org_report, sweep_sigma
from .payoff import payoff_breakdown, payoff_kinks, potential_value
from .potential import maximize_potential, potential_grid_oracle
from .specio import load_game, load_org, spec_sha256

DEFAULT_SAMPLES = 100_000
DEFAULT_STEP = 1e-3


def _json_ready(obj):
    """Recursively convert numpy values for JSON output; NaN becomes null."""
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _fmt(value) -> str:
    """Locale-independent 12-significant-digit numeric formatting."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "" if math.isnan(v) else f"{v:.12g}"
    return str(value)


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, payload: dict, text_lines=None, csv_rows=None, csv_header=None) -> None:
    fmt = getattr(args, "format", "json")
    if fmt == "csv":
        if csv_rows is None:
            raise ValidationError("this command has no CSV representation")
        lines = [",".join(csv_header)]
        lines += [",".join(_fmt(v) for v in row) for row in csv_rows]
        text = "\n".join(lines) + "\n"
    elif fmt == "text":
        lines = text_lines or [json.dumps(_json_ready(payload), indent=2, sort_keys=True)]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(_json_ready(payload), indent=2, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out:
        _atomic_write(Path(out), text)
    else:
        sys.stdout.write(text)


def _envelope(args, command: str, result: dict, options: dict) -> dict:
    return {
        "command": command,
        "version": __version__,
        "input": str(args.spec),
        "input_sha256": spec_sha256(args.spec),
        "options": options,
        "result": result,
    }


def _parse_profile(raw: str, n: int) -> np.ndarray:
    try:
        vals = [float(x) for x in raw.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse profile {raw!r}") from exc
    if len(vals) != n:
        raise ValidationError(f"profile must have {n} entries, got {len(vals)}")
    return np.asarray(vals)


def _parse_sigma_range(raw: str) -> np.ndarray:
    parts = raw.split(":")
    if len(parts) != 3:
        raise ValidationError("--sigma2 expects start:stop:step")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError as exc:
        raise ValidationError(f"cannot parse --sigma2 range {raw!r}") from exc
    if step <= 0 or stop < start:
        raise ValidationError("--sigma2 range must have positive step and stop >= start")
    count = int(round((stop - start) / step))
    grid = start + step * np.arange(count + 1)
    return grid[grid <= stop + 0.5 * step]


def _check_payload(check) -> dict:
    out = {"is_equilibrium": check.is_equilibrium}
    if check.followership is not None:
        out["followership"] = check.followership
    out["violations"] = [
        {
            "player": v.player,
            "kind": v.kind,
            "value": v.value,
            "lower": None if not np.isfinite(v.lower) else v.lower,
            "upper": v.upper,
        }
        for v in check.violations
    ]
    return out


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------


def _cmd_solve(args) -> int:
    game = load_game(args.spec)
    options = {"tol": args.tol}
    if game.n <= 5:
        report = enumerate_equilibria(game, tol=args.tol)
        result = {
            "method": report.method,
            "least": report.least,
            "greatest": report.greatest,
            "unique": bool(
                not report.segments
                and not report.families
                and len(report.points) == 1
            ),
            "points": [
                {
                    "profile": pt.profile,
                    "expected_outcomes": pt.outcomes,
                    "followership": pt.followership,
                }
                for pt in report.points
            ],
            "segments": [
                {
                    "lower": seg.lower,
                    "upper": seg.upper,
                    "outcomes_at_lower": seg.outcomes_at_lower,
                    "outcomes_at_upper": seg.outcomes_at_upper,
                    "tie_blocks": [list(b) for b in seg.blocks],
                }
                for seg in report.segments
            ],
            "families": [
                {
                    "lower": fam.lower,
                    "upper": fam.upper,
                    "dim": fam.dim,
                    "tie_blocks": [list(b) for b in fam.blocks],
                }
                for fam in report.families
            ],
        }
    else:
        least, greatest = extremal_equilibria(game, tol=args.tol)
        report = None
        result = {"method": "iteration", "least": least, "greatest": greatest,
                  "unique": bool(np.max(np.abs(greatest - least)) <= 1e-7)}
    diag = multiplicity_diagnostics(game, args.tol)
    if diag is not None:
        result["tie_interval"] = diag
    payload = _envelope(args, "solve", result, options)
    lines = [
        f"least equilibrium policies:    {np.array2string(np.asarray(result['least']), precision=10)}",
        f"greatest equilibrium policies: {np.array2string(np.asarray(result['greatest']), precision=10)}",
        f"unique: {result['unique']}",
    ]
    _emit(args, payload, text_lines=lines)
    if args.plot and report is not None and game.n == 2:
        from .figures import render_equilibrium_map

        render_equilibrium_map(game, report, args.plot)
    return 0


def _cmd_verify(args) -> int:
    game = load_game(args.spec)
    profile = _parse_profile(args.profile, game.n)
    check = verify_equilibrium(game, profile, args.tol)
    payload = _envelope(
        args,
        "verify",
        {"profile": profile, **_check_payload(check)},
        {"tol": args.tol, "profile": args.profile},
    )
    lines = ["equilibrium" if check.is_equilibrium else "not an equilibrium"]
    for v in check.violations:
        if v.kind == "corner":
            lines.append(
                f"  player {v.player}: status-quo outcome {v.value:.10g} exceeds "
                f"best achievable target {v.upper:.10g} (corner condition)"
            )
        else:
            lines.append(
                f"  player {v.player}: required tie load {v.value:.10g} outside "
                f"[{v.lower:.10g}, {v.upper:.10g}] (interior condition)"
            )
    _emit(args, payload, text_lines=lines)
    return 0


def _cmd_best_response(args) -> int:
    game = load_game(args.spec)
    profile = _parse_profile(args.profile, game.n)
    res = best_response(game, args.player, profile, args.tol)
    result = {
        "player": args.player,
        "policy": res.policy,
        "expected_outcome": res.expected_outcome,
        "regime": res.regime,
        "at_corner": res.at_corner,
        "at_kink": res.at_kink,
        "utility": res.utility,
    }
    if args.oracle:
        result["grid_oracle_policy"] = br_grid_oracle(game, args.player, profile, args.step)
    payload = _envelope(
        args,
        "best-response",
        result,
        {"tol": args.tol, "profile": args.profile, "player": args.player, "step": args.step},
    )
    _emit(args, payload, text_lines=[f"best response of player {args.player}: {res.policy:.10g}"])
    return 0


def _cmd_payoff(args) -> int:
    game = load_game(args.spec)
    profile = _parse_profile(args.profile, game.n)
    players = [args.player] if args.player is not None else list(range(game.n))
    result = {"profile": profile, "players": []}
    for i in players:
        b = payoff_breakdown(game, profile, i, args.tol)
        entry = {
            "player": i,
            "utility": b.total,
            "mean_term": b.mean_term,
            "own_var": b.own_var,
            "cross_var": b.cross_var,
            "cov_bonus": b.cov_bonus,
            "kinks": [
                {"location": kink.location, "slope_drop": kink.slope_drop}
                for kink in payoff_kinks(game, profile, i, args.tol)
            ],
        }
        if args.mc:
            est = mc_payoff(game, profile, i, args.samples, args.seed)
            entry["mc"] = {"mean": est.mean, "stderr": est.stderr,
                           "n_samples": est.n_samples, "seed": est.seed}
        result["players"].append(entry)
    payload = _envelope(
        args,
        "payoff",
        result,
        {
            "tol": args.tol,
            "profile": args.profile,
            "player": args.player,
            "mc": args.mc,
            "samples": args.samples,
            "seed": args.seed,
        },
    )
    lines = [
        f"player {e['player']}: U = {e['utility']:.10g}" for e in result["players"]
    ]
    _emit(args, payload, text_lines=lines)
    if args.plot:
        from .figures import render_payoff_slice

        render_payoff_slice(game, players[0], profile, args.plot)
    return 0


def _cmd_potential(args) -> int:
    game = load_game(args.spec)
    if args.profile:
        profile = _parse_profile(args.profile, game.n)
        value = potential_value(game, profile, args.tol)
        result = {"profile": profile, "value": value}
        if args.mc:
            est = mc_potential(game, profile, args.samples, args.seed)
            result["mc"] = {"mean": est.mean, "stderr": est.stderr,
                            "n_samples": est.n_samples, "seed": est.seed}
        lines = [f"potential value: {value:.10g}"]
    else:
        res = maximize_potential(game, args.tol)
        result = {
            "maximizer": res.profile,
            "value": res.value,
            "followership": res.followership,
            "is_equilibrium": res.is_equilibrium,
            "certificate": {
                "right_slopes": res.certificate.right_slopes,
                "left_slopes": res.certificate.left_slopes,
                "max_violation": res.certificate.max_violation,
                "analytic_residual": res.certificate.analytic_residual,
                "ok": res.certificate.ok,
            },
        }
        if args.oracle:
            result["grid_oracle"] = potential_grid_oracle(game, args.step)
        lines = [f"potential maximizer: {np.array2string(res.profile, precision=10)}"]
    payload = _envelope(
        args,
        "potential",
        result,
        {"tol": args.tol, "profile": args.profile, "step": args.step,
         "mc": args.mc, "samples": args.samples, "seed": args.seed},
    )
    _emit(args, payload, text_lines=lines)
    return 0


def _cmd_benchmarks(args) -> int:
    game = load_game(args.spec)
    bench = benchmark_profiles(game, args.tol)
    result = {
        "gamma0": {"policies": bench.gamma0.policies, "expected_outcomes": bench.gamma0.outcomes},
        "gamma1": {"policies": bench.gamma1.policies, "expected_outcomes": bench.gamma1.outcomes},
        "gamma_least": {
            "policies": bench.gamma_least.policies,
            "expected_outcomes": bench.gamma_least.outcomes,
        },
        "gamma_greatest": {
            "policies": bench.gamma_greatest.policies,
            "expected_outcomes": bench.gamma_greatest.outcomes,
        },
        "unique": bench.unique,
        "D": bench.D,
        "distance0": bench.distance0,
        "distance1": bench.distance1,
        "distance_star": bench.distance_star,
    }
    if bench.unique:
        try:
            conf = conformity_gaps(game, bench.gamma_least.policies, args.tol)
            result["conformity"] = {
                "shift": conf.conformity_shift,
                "all_strict": conf.all_strict,
                "identity_holds": conf.identity_holds,
                "pairs": [
                    {
                        "low_player": pg.low_player,
                        "high_player": pg.high_player,
                        "outcome_gap": pg.outcome_gap,
                        "beta_gap": pg.beta_gap,
                        "strict": pg.strict,
                    }
                    for pg in conf.pairs
                ],
            }
        except ValidationError:
            pass
    payload = _envelope(args, "benchmarks", result, {"tol": args.tol})
    lines = [
        f"no-uncertainty outcomes:     {np.array2string(bench.gamma0.outcomes, precision=10)}",
        f"independent-noise outcomes:  {np.array2string(bench.gamma1.outcomes, precision=10)}",
        f"game outcomes (least eq.):   {np.array2string(bench.gamma_least.outcomes, precision=10)}",
    ]
    _emit(args, payload, text_lines=lines)
    return 0


def _cmd_org_threshold(args) -> int:
    org = load_org(args.spec)
    report = build_org_report(org, args.tol)
    thr = report.threshold
    result = {
        "induced_d": report.game.d,
        "induced_g": float(report.game.G[0, 1]),
        "k": report.k,
        "p_opt": report.p_opt,
        "is_implementable": report.is_implementable,
        "threshold_predicts": report.threshold_predicts,
        "threshold_k": thr.threshold_k,
        "threshold_sigma2": thr.threshold_sigma2,
        "onset_k": thr.onset_k,
        "onset_sigma2": thr.onset_sigma2,
        "binding": thr.binding,
        "bisection_k": thr.bisection_k,
        "interiority": report.interiority_flags,
        "x0_condition_value": thr.x0_condition_value,
    }
    payload = _envelope(args, "org threshold", result, {"tol": args.tol})
    lines = [
        f"profit maximizer: {np.array2string(report.p_opt, precision=10)}",
        f"decentralization threshold: k = {thr.threshold_k:.10g} "
        f"(sigma2 = {thr.threshold_sigma2:.10g}), binding: {thr.binding}",
        f"implementable at k = {report.k:.10g}: {report.is_implementable}",
    ]
    _emit(args, payload, text_lines=lines)
    return 0


def _cmd_org_sweep(args) -> int:
    org = load_org(args.spec)
    grid = _parse_sigma_range(args.sigma2)
    rows = sweep_sigma(org, grid, args.tol)
    csv_rows = [
        [
            row.sigma2,
            row.k,
            row.p1_star,
            row.p2_star,
            row.L,
            row.U,
            row.r1_star,
            row.r2_star,
            row.r_star,
            row.branch,
            row.interior,
        ]
        for row in rows
    ]
    result = {"columns": list(SWEEP_COLUMNS), "rows": csv_rows}
    payload = _envelope(args, "org sweep", result, {"tol": args.tol, "sigma2": args.sigma2})
    _emit(args, payload, csv_rows=csv_rows, csv_header=SWEEP_COLUMNS)
    if args.plot:
        from .figures import render_sweep

        render_sweep(rows, args.plot)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser, *, fmt_default="json"):
    parser.add_argument("spec", help="path to the JSON spec file")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="absolute tolerance (default 1e-9)")
    parser.add_argument("--format", choices=("json", "csv", "text"), default=fmt_default)
    parser.add_argument("--out", default=None, help="write output to this path (atomic)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="browniangame",
        description="Solver for coordination games on a Brownian outcome function",
        epilog=(
            "spec files are JSON objects with a 'kind' field: game specs carry "
            "n, G (row-major flat or nested), d, mu, sigma2, p0, X0 and optional "
            "sigma_pairs / mu_vec; organization specs carry a1, a2, b, c1, c2, "
            "g_org, mu, sigma2, p0, X0. Unknown fields are rejected."
        ),
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="enumerate/verify the equilibrium set")
    _add_common(p)
    p.add_argument("--plot", default=None, help="render the two-player equilibrium map here")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="check whether a profile is an equilibrium")
    _add_common(p)
    p.add_argument("--profile", required=True, help="comma-separated policies")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("best-response", help="one player's exact best response")
    _add_common(p)
    p.add_argument("--player", type=int, required=True, help="player index (0-based)")
    p.add_argument("--profile", required=True,
                   help="comma-separated policies (own entry ignored)")
    p.add_argument("--step", type=float, default=DEFAULT_STEP, help="oracle grid step")
    p.add_argument("--oracle", action="store_true", help="also run the brute-force grid oracle")
    p.set_defaults(func=_cmd_best_response)

    p = sub.add_parser("payoff", help="closed-form payoff breakdowns and kinks")
    _add_common(p)
    p.add_argument("--profile", required=True, help="comma-separated policies")
    p.add_argument("--player", type=int, default=None, help="restrict to one player (0-based)")
    p.add_argument("--mc", action="store_true", help="add a seeded Monte Carlo estimate")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", default=None, help="render the own-policy payoff slice here")
    p.set_defaults(func=_cmd_payoff)

    p = sub.add_parser("potential", help="potential value or its exact maximizer")
    _add_common(p)
    p.add_argument("--profile", default=None, help="evaluate at this profile instead of maximizing")
    p.add_argument("--step", type=float, default=DEFAULT_STEP, help="grid-oracle step")
    p.add_argument("--oracle", action="store_true", help="also run the grid oracle (n <= 3)")
    p.add_argument("--mc", action="store_true", help="add a seeded Monte Carlo estimate")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_potential)

    p = sub.add_parser("benchmarks", help="no-uncertainty / independent-noise benchmarks")
    _add_common(p)
    p.set_defaults(func=_cmd_benchmarks)

    p = sub.add_parser("org", help="two-division organization application")
    orgsub = p.add_subparsers(dest="org_command", required=True)

    q = orgsub.add_parser("threshold", help="profit maximizer and decentralization threshold")
    _add_common(q)
    q.set_defaults(func=_cmd_org_threshold)

    q = orgsub.add_parser("sweep", help="variance sweep of equilibrium/maximizer policies")
    _add_common(q, fmt_default="csv")
    q.add_argument("--sigma2", required=True, help="range start:stop:step")
    q.add_argument("--plot", default=None, help="render the sweep figure here")
    q.set_defaults(func=_cmd_org_sweep)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
