"""Command-line entry point: verify / classify / solve / search / demo.

Output is deterministic: floats print via repr, records are emitted in a
fixed order, and nothing time- or path-dependent is written.  Exit codes:
0 success or pass, 1 verification failure, 2 hypothesis rejection,
3 failed certificate, 64 usage or input-format error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import classify as _classify
from . import search as _search
from . import solvers as _solvers
from .fileio import (
    FileFormatError,
    format_map,
    parse_map_file,
    parse_space_file,
    write_space_file,
)
from .solvers import (
    AffineMap,
    CauchyBoundParams,
    ContractionProfile,
    FiniteContext,
    HypothesisRejected,
    IntervalContext,
    PsiFunction,
    cauchy_bound_check,
    estimate_constants,
    profile_rate,
    solve,
    trace_pair_distances,
)
from .spaces import (
    DEFAULT_REL_TOL,
    DEFAULT_REPORT_CAP,
    AxiomProfile,
    DistanceTable,
    build_affine_theta_example,
    verify_axioms,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_HYPOTHESIS = 2
EXIT_FAILED_CERT = 3
EXIT_USAGE = 64

_THEOREM_TOKENS = {
    "banach": "banach_partial",
    "kannan": "kannan_partial",
    "quasi": "quasi_partial",
    "banach-theta": "banach_theta",
    "weak": "weak_theta",
    "reich": "reich_theta",
    "kannan-theta": "kannan_theta",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _coeff_desc(profile: AxiomProfile) -> str:
    return "theta" if profile.uses_theta else _fmt(profile.s)


def _report_lines(report, *, machine: bool) -> list[str]:
    p = report.profile
    verdict = "vacuous" if (report.passed and report.vacuous) else report.verdict
    lines = [f"verdict kind={p.kind} v={p.v} s={_coeff_desc(p)} {verdict}"]
    if not machine:
        lines.append(f"tuples_checked {report.tuples_checked}")
        for w in report.warnings:
            lines.append(f"warning {w}")
    for viol in report.violations:
        lines.append(
            f"violation axiom={viol.axiom_id} tuple={','.join(str(i) for i in viol.points)}"
            f" lhs={_fmt(viol.lhs)} rhs={_fmt(viol.rhs)}"
        )
    return lines


def _build_parser() -> _Parser:
    parser = _Parser(prog="gms", description="generalized metric space toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tolerance", type=float, default=DEFAULT_REL_TOL,
                       help="relative comparison tolerance (default 1e-9)")
        p.add_argument("--report-cap", type=int, default=DEFAULT_REPORT_CAP,
                       help="max listed violations (default 10)")
        p.add_argument("--machine", action="store_true",
                       help="one key=value record per line")

    p = sub.add_parser("verify", help="check a space file against its claimed axioms")
    p.add_argument("space")
    common(p)

    p = sub.add_parser("classify", help="family membership sweep and minimal parameters")
    p.add_argument("space")
    p.add_argument("--max-v", type=int, default=_classify.DEFAULT_V_MAX)
    p.add_argument("--s-grid", type=str, default="1")
    common(p)

    p = sub.add_parser("solve", help="run a certified fixed-point solver")
    p.add_argument("space", nargs="?")
    p.add_argument("map", nargs="?")
    p.add_argument("--demo", choices=["affine"], help="use the affine demo map instead of files")
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--interval", type=float, nargs=2, default=[0.0, 1.0], metavar=("LO", "HI"))
    p.add_argument("--theorem", required=True, choices=sorted(_THEOREM_TOKENS))
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--tol", type=float, default=_solvers.DEFAULT_RESIDUAL_TOL)
    p.add_argument("--max-iter", type=int, default=_solvers.DEFAULT_MAX_ITER)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--psi", type=str, default=None,
                   help="gauge breakpoints 't0:v0,t1:v1,...,slope:<r>'")
    p.add_argument("--override", action="store_true",
                   help="run the orbit even when hypotheses fail (recorded)")
    p.add_argument("--cauchy-bound-mode", choices=["printed", "corrected"], default=None,
                   help="also re-check the pairwise recurrence bound on the trace")
    common(p)

    p = sub.add_parser("search", help="hunt separation witnesses")
    p.add_argument("--target", required=True, choices=_search.SEARCH_GOALS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--v", type=int, default=1)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None, help="write the witness space file here")
    common(p)

    p = sub.add_parser("demo", help="built-in worked examples")
    p.add_argument("name", choices=["affine-theta"])
    p.add_argument("--N", type=int, default=12, help="largest point label (>= 7)")
    common(p)

    return parser


def _parse_psi(text: str) -> PsiFunction:
    slope = None
    knots: list[tuple[float, float]] = []
    for part in text.split(","):
        key, _, value = part.partition(":")
        if not value:
            raise _UsageError(f"bad psi segment {part!r}")
        if key.strip() == "slope":
            slope = float(value)
        else:
            knots.append((float(key), float(value)))
    if slope is None:
        raise _UsageError("psi needs a final 'slope:<r>' segment")
    if not knots:
        knots = [(0.0, 0.0)]
    return PsiFunction(tuple(knots), slope)


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_verify(ns, out: list[str]) -> int:
    table, profile = parse_space_file(ns.space)
    report = verify_axioms(table, profile, report_cap=ns.report_cap, rel_tol=ns.tolerance)
    out.extend(_report_lines(report, machine=ns.machine))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def _cmd_classify(ns, out: list[str]) -> int:
    table, profile = parse_space_file(ns.space)
    try:
        s_grid = tuple(float(x) for x in ns.s_grid.split(","))
    except ValueError:
        raise _UsageError(f"bad --s-grid {ns.s_grid!r}")
    hier = _classify.hierarchy_profile(
        table, v_max=ns.max_v, s_grid=s_grid, theta=profile.theta, rel_tol=ns.tolerance
    )
    for prof, verdict in hier.memberships:
        out.append(f"verdict kind={prof.kind} v={prof.v} s={_coeff_desc(prof)} {verdict}")
    for family in _classify.FAMILIES:
        for v, smin in hier.minimal_s[family].items():
            shown = "none" if smin is None else _fmt(smin)
            out.append(f"minimal_s family={family} v={v} s_min={shown}")
        for s, vmin in hier.minimal_v[family].items():
            shown = "none" if vmin is None else str(vmin)
            out.append(f"minimal_v family={family} s={_fmt(s)} v={shown}")
    return EXIT_OK


def _solve_inputs(ns):
    if ns.demo is not None:
        if ns.space is not None or ns.map is not None:
            raise _UsageError("--demo replaces the space and map files")
        lo, hi = ns.interval
        ctx = IntervalContext(lo, hi)
        smap = AffineMap(ns.a, ns.b)
        return ctx, smap, None
    if ns.space is None or ns.map is None:
        raise _UsageError("solve needs a space file and a map file, or --demo")
    table, profile = parse_space_file(ns.space)
    smap = parse_map_file(ns.map)
    theorem = _THEOREM_TOKENS[ns.theorem]
    if theorem in _solvers.THETA_THEOREMS and profile.theta is None:
        raise _UsageError(f"theorem {ns.theorem} needs a pairwise-coefficient (theta) space")
    if theorem in _solvers.PARTIAL_THEOREMS and profile.uses_theta:
        raise _UsageError(f"theorem {ns.theorem} needs a constant-coefficient space")
    ctx = FiniteContext(table, s=profile.s if profile.s is not None else 1.0, theta=profile.theta)
    return ctx, smap, profile


def _solve_profile(ns, ctx, smap, out: list[str]) -> Optional[ContractionProfile]:
    theorem = _THEOREM_TOKENS[ns.theorem]
    if theorem == "weak_theta":
        if ns.psi is None:
            raise _UsageError("--theorem weak requires --psi")
        return ContractionProfile(theorem=theorem, psi=_parse_psi(ns.psi))
    if theorem in ("reich_theta", "kannan_theta"):
        if ns.beta is not None and ns.gamma is not None:
            alpha = ns.alpha if theorem == "reich_theta" else 0.0
            if alpha is None:
                raise _UsageError("--theorem reich requires --alpha --beta --gamma")
            return ContractionProfile(theorem=theorem, alpha=alpha, beta=ns.beta, gamma=ns.gamma)
    elif ns.lam is not None:
        return ContractionProfile(theorem=theorem, lam=ns.lam)
    fit = estimate_constants(ctx, smap, theorem, rel_tol=ns.tolerance)
    if fit.profile is None:
        out.append(f"hypothesis violated: {fit.failure}")
        return None
    prof = fit.profile
    if theorem in ("reich_theta", "kannan_theta"):
        out.append(
            f"fitted alpha={_fmt(prof.alpha)} beta={_fmt(prof.beta)} gamma={_fmt(prof.gamma)}"
        )
    else:
        out.append(f"fitted lambda={_fmt(prof.lam)}")
    return prof


def _cmd_solve(ns, out: list[str]) -> int:
    ctx, smap, space_profile = _solve_inputs(ns)
    theorem = _THEOREM_TOKENS[ns.theorem]
    out.append(f"theorem {ns.theorem}")

    if space_profile is not None:
        space_report = verify_axioms(
            ctx.table, space_profile, report_cap=ns.report_cap, rel_tol=ns.tolerance
        )
        if not space_report.passed:
            out.append("hypothesis violated: the space fails its own axiom verification")
            out.extend(_report_lines(space_report, machine=ns.machine))
            return EXIT_HYPOTHESIS

    profile = _solve_profile(ns, ctx, smap, out)
    if profile is None:
        return EXIT_HYPOTHESIS

    if isinstance(ctx, FiniteContext):
        x0 = int(ns.x0) if ns.x0 is not None else 0
    else:
        x0 = ns.x0 if ns.x0 is not None else ctx.lo
    try:
        cert = solve(
            ctx, smap, profile, x0,
            tol=ns.tol, max_iter=ns.max_iter, override=ns.override, rel_tol=ns.tolerance,
        )
    except HypothesisRejected as exc:
        for v in exc.report.violations:
            out.append(f"hypothesis violated: {v}")
        return EXIT_HYPOTHESIS

    for w in cert.warnings:
        out.append(f"warning {w}")
    fields = [
        ("status", cert.status),
        ("fixed_point", _fmt(cert.fixed_point)),
        ("residual", _fmt(cert.residual)),
        ("self_distance", _fmt(cert.self_distance)),
        ("unique", _fmt(cert.unique)),
        ("rate_ok", _fmt(cert.rate_ok)),
        ("iterations", cert.iterations),
        ("stop_reason", cert.stop_reason),
        ("override_used", _fmt(cert.override_used)),
    ]
    if ns.machine:
        out.append("certificate " + " ".join(f"{k}={v}" for k, v in fields))
    else:
        out.extend(f"{k} {v}" for k, v in fields)
        if cert.failure_reason:
            out.append(f"failure_reason {cert.failure_reason}")

    if ns.cauchy_bound_mode is not None and profile.theorem != "weak_theta":
        trace = _solvers.picard_orbit(ctx, smap, x0, tol=ns.tol, max_iter=ns.max_iter)
        rate = profile_rate(profile)
        s0 = trace.sigma[0] if trace.sigma else 0.0
        if profile.theorem in ("reich_theta", "kannan_theta") and rate > 0:
            params = CauchyBoundParams(
                c=profile.alpha, k1=profile.beta * s0 / rate, k2=profile.gamma * s0 / rate,
                mode=ns.cauchy_bound_mode, base=rate,
            )
        elif profile.theorem == "kannan_partial" and rate > 0:
            k = profile.lam * s0 / rate
            params = CauchyBoundParams(c=0.0, k1=k, k2=k, mode=ns.cauchy_bound_mode, base=rate)
        else:
            params = CauchyBoundParams(c=rate, k1=0.0, k2=0.0, mode=ns.cauchy_bound_mode)
        check = cauchy_bound_check(trace_pair_distances(trace, ctx), params, rel_tol=ns.tolerance)
        where = "none" if check.first_violation is None else f"{check.first_violation[0]},{check.first_violation[1]}"
        out.append(
            f"cauchy_bound mode={ns.cauchy_bound_mode} ok={_fmt(check.ok)} first_violation={where}"
        )

    return EXIT_OK if cert.status == "certified" else EXIT_FAILED_CERT


def _cmd_search(ns, out: list[str]) -> int:
    target = _search.SearchTarget(
        goal=ns.target, n=ns.n, v=ns.v, s=ns.s, budget=ns.budget, seed=ns.seed
    )
    result = _search.search_separation(target, rel_tol=ns.tolerance)
    out.append(f"search goal={ns.target} found={_fmt(result.found)} attempts={result.attempts}")
    if result.note:
        out.append(f"note {result.note}")
    if not result.found:
        return EXIT_OK
    for label, report in (("pass", result.report_pass), ("fail", result.report_fail)):
        if report is None:
            continue
        if hasattr(report, "profile") and hasattr(report, "verdict"):
            head, *rest = _report_lines(report, machine=ns.machine)
            out.append(f"report_{label} {head}")
            out.extend(rest)
        elif hasattr(report, "violations"):
            out.append(f"report_{label} hypotheses ok={_fmt(report.ok)}")
            out.extend(f"  {v}" for v in report.violations)
        elif hasattr(report, "points"):
            out.append(f"report_{label} limit_set={','.join(str(p) for p in report.points)}")
        else:
            out.append(f"report_{label} {report.failure}")
    if result.witness_map is not None:
        out.append("map " + " ".join(str(i) for i in result.witness_map.images))
    if ns.out is not None and result.witness is not None:
        if result.theta is not None:
            profile = AxiomProfile.for_kind("bv_theta", v=ns.v, theta=result.theta)
        elif hasattr(result.report_pass, "profile"):
            profile = result.report_pass.profile
        else:
            profile = AxiomProfile.for_kind("partial_metric")
        write_space_file(ns.out, result.witness, profile)
        out.append(f"witness written to {ns.out}")
    return EXIT_OK


def _cmd_demo(ns, out: list[str]) -> int:
    if ns.N < 7:
        raise _UsageError("--N must be at least 7")
    table, theta = build_affine_theta_example(ns.N)
    profile = AxiomProfile.for_kind("bv_theta", v=5, theta=theta)
    out.append(f"demo affine-theta n_max={ns.N} points={table.n} v=5")
    report = verify_axioms(table, profile, report_cap=ns.report_cap, rel_tol=ns.tolerance)
    out.extend(_report_lines(report, machine=ns.machine))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def run(argv) -> tuple[int, str, str]:
    """Parse and dispatch; returns (exit_code, stdout_text, stderr_text)."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        return EXIT_USAGE, "", f"error: {exc}\n"
    except SystemExit as exc:  # --help
        return int(exc.code or 0), "", ""
    out: list[str] = []
    try:
        handler = {
            "verify": _cmd_verify,
            "classify": _cmd_classify,
            "solve": _cmd_solve,
            "search": _cmd_search,
            "demo": _cmd_demo,
        }[ns.command]
        code = handler(ns, out)
    except _UsageError as exc:
        return EXIT_USAGE, "", f"error: {exc}\n"
    except FileFormatError as exc:
        return EXIT_USAGE, "", f"error: {exc}\n"
    except OSError as exc:
        return EXIT_USAGE, "", f"error: {exc}\n"
    except ValueError as exc:
        return EXIT_USAGE, "", f"error: {exc}\n"
    text = "\n".join(out) + "\n" if out else ""
    return code, text, ""


def main(argv=None) -> int:
    code, out_text, err_text = run(sys.argv[1:] if argv is None else argv)
    if out_text:
        sys.stdout.write(out_text)
    if err_text:
        sys.stderr.write(err_text)
    return code


if __name__ == "__main__":
    sys.exit(main())
