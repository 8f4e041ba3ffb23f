"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 for usage or input errors. Reports go to stdout and are byte-identical for
identical invocations; wall time goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings

import numpy as np

from . import ep, products, pseudoinverse, shiftlab, suite
from .errors import (
    CutoffError,
    DimensionError,
    IllDeterminedRankError,
    IllDeterminedRankWarning,
    NotEPError,
    OperatorFileError,
    PreconditionError,
)
from .linalg import NumericalContext, factorize, fro, numerical_rank
from .opfile import load_operator
from .subspace import range_of

EXIT_PASS, EXIT_DEFECT, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _num(x):
    """Round reported reals to 6 significant digits so reports stay short."""
    x = float(x)
    return float(f"{x:.6g}") if np.isfinite(x) else str(x)


def _complex12(z) -> str:
    re, im = float(z.real) + 0.0, float(z.imag) + 0.0
    return f"{re:.12g}" if im == 0 else f"{re:.12g}{im:+.12g}j"


def _plain(value):
    if isinstance(value, (bool, str, int)) or value is None:
        return value
    if isinstance(value, (float, np.floating)):
        return _num(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


class RunReport:
    def __init__(self, command: list[str], ctx: NumericalContext, seed=None):
        self.command = "eplab " + " ".join(command)
        self.context = {
            "rank_rel_tol": ctx.rank_rel_tol,
            "eq_tol": ctx.eq_tol,
            "gap_warn_ratio": ctx.gap_warn_ratio,
        }
        if seed is not None:
            self.context["seed"] = seed
        self.sections: dict[str, dict] = {}
        self.checks: list[dict] = []

    def section(self, title: str, **values):
        self.sections.setdefault(title, {}).update(_plain(values))

    def check(self, name: str, passed: bool, **values):
        self.checks.append({"name": name, "passed": bool(passed), **_plain(values)})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "context": self.context,
            "sections": self.sections,
            "checks": self.checks,
            "passed": self.passed,
        }

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.as_dict(), indent=2) + "\n"
        lines = [f"command: {self.command}"]
        lines.append("context: " + " ".join(f"{k}={v}" for k, v in self.context.items()))
        for title, values in self.sections.items():
            lines.append(f"[{title}]")
            for key, value in values.items():
                if isinstance(value, list) and value and isinstance(value[0], list):
                    lines.append(f"  {key}:")
                    lines.extend("    [" + ", ".join(map(str, row)) + "]" for row in value)
                else:
                    lines.append(f"  {key}: {json.dumps(value) if isinstance(value, (dict, list)) else value}")
        lines.append("[checks]")
        for c in self.checks:
            extra = " ".join(f"{k}={v}" for k, v in c.items() if k not in ("name", "passed"))
            lines.append(f"  {'PASS' if c['passed'] else 'FAIL'} {c['name']}" + (f" ({extra})" if extra else ""))
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _quiet_pinv(T, ctx):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllDeterminedRankWarning)
        return pseudoinverse.mp_svd(T, ctx)


def _load(path):
    T, name = load_operator(path)
    return T, name or path


# -- commands -----------------------------------------------------------------


def _mp_checks(report: RunReport, T, ctx):
    f = factorize(T)
    decision = numerical_rank(f, ctx)
    G = _quiet_pinv(T, ctx)
    report.section(
        "pseudoinverse",
        shape=list(T.shape),
        rank=decision.rank,
        rank_ill_determined=decision.ill_determined,
        singular_values=[float(s) for s in f.singular_values],
        pinv=[[_complex12(z) for z in row] for row in G],
    )
    pr = pseudoinverse.penrose_residuals(T, G, ctx)
    tol = pseudoinverse.penrose_tolerance(T, G, ctx)
    report.check("penrose_equations", pr.passed(tol), max_residual=pr.max_residual, tol=tol)

    ids = pseudoinverse.mp_identities_check(T, ctx)
    for name, ok in ids.checks.items():
        report.check(name, ok)

    trace = pseudoinverse.mp_tikhonov(T, ctx=ctx)
    bound = pseudoinverse.tikhonov_agreement_bound(T, trace.omegas[-1], ctx)
    dropped = f.singular_values[decision.rank :]
    exact = not np.any(dropped)
    report.section(
        "tikhonov",
        omegas=list(trace.omegas),
        errors=list(trace.errors),
        dropped_singular_values_exactly_zero=exact,
    )
    if exact:
        report.check("tikhonov_nonincreasing", trace.is_nonincreasing())
        report.check("tikhonov_agreement", trace.final_error <= bound, final_error=trace.final_error, bound=bound)
    else:
        # the limit is the inverse of the stored matrix, whose dropped modes are not exactly zero
        report.section("tikhonov", note="dropped singular values are nonzero; convergence to the truncated inverse is not enforced")


def _ep_checks(report: RunReport, T, ctx):
    rep = ep.is_ep(T, ctx)
    report.section("ep", **rep.as_dict())
    report.check(
        "ep_characterizations_agree",
        not rep.disagreement or rep.ill_determined,
        disagreement=rep.disagreement,
    )
    if not rep.is_ep:
        report.section(
            "ep",
            witness=f"Ran(T) differs from Ran(T*): projector distance {_num(rep.range_distance)}, "
            f"largest principal angle {_num(rep.max_principal_angle)} rad",
        )
        return
    G = _quiet_pinv(T, ctx)
    adj, com = ep.ep_factor_adjoint(T, ctx), ep.ep_factor_commuting(T, ctx)
    report.section("factorizations", lower_bound_c=adj.lower_bound)
    report.check("factor_adjoint_form", adj.residual <= ctx.eq_tol * (1 + fro(T)) and adj.v_sigma_min > ctx.eq_tol,
                 residual=adj.residual, v_sigma_min=adj.v_sigma_min)
    report.check("factor_commuting_form", com.residual <= ctx.eq_tol * (1 + fro(G)) and com.v_sigma_min > ctx.eq_tol,
                 residual=com.residual, v_sigma_min=com.v_sigma_min)
    cf = ep.canonical_form(T, ctx)
    rt, inv = fro(cf.reconstruct() - T), fro(cf.pinv() - G)
    report.check("canonical_form_round_trip", rt <= ctx.eq_tol * (1 + fro(T)), error=rt)
    report.check("canonical_form_pinv", inv <= ctx.eq_tol * (1 + fro(G)), error=inv)


def _block_check(report: RunReport, T, ctx):
    try:
        bd = ep.block_decompose(T, range_of(T, ctx), ctx)
    except IllDeterminedRankError as exc:
        report.section("block_formula", skipped=str(exc))
        return
    G = _quiet_pinv(T, ctx)
    err = fro(bd.mp_from_blocks - G)
    report.check("block_formula_pinv", err <= ctx.eq_tol * (1 + fro(G)), error=err, a_sigma_min=bd.a_sigma_min)


def cmd_analyze(args, ctx, report: RunReport):
    T, name = _load(args.path)
    report.section("operator", name=name, rows=T.shape[0], cols=T.shape[1])
    _mp_checks(report, T, ctx)
    _block_check(report, T, ctx)
    if T.shape[0] == T.shape[1]:
        _ep_checks(report, T, ctx)
    else:
        report.section("ep", note="rectangular operator: EP analysis does not apply")


def cmd_product(args, ctx, report: RunReport):
    (T, name_t), (S, name_s) = _load(args.path_t), _load(args.path_s)
    if T.shape[0] != T.shape[1] or S.shape != T.shape:
        raise DimensionError(f"need two square operators of equal size, got {T.shape} and {S.shape}")
    report.section("operators", T=name_t, S=name_s, dim=T.shape[0])
    rep = products.theorem_ep6(T, S, ctx)
    report.section("conditions", **rep.as_dict())
    report.check("implication_i_to_iii", rep.implication_i_iii)
    report.check("biconditional_i_ii_vs_iii_iv", rep.biconditional)
    report.check("inclusions_when_ts_ep", rep.inclusions_if_ep, inclusions=list(rep.inclusions))
    report.check("kernel_decomposition", rep.kernel_decomposition)
    note = products.product_closed_range_note(T, S, ctx)
    report.section("closed_range", summand_dim=note.summand_dim, ts_rank=note.ts_rank, note=note.note)
    report.check("closed_range_summand_complemented", note.complemented)

    commutator = products.commutator_norm(T, S)
    commuting = commutator <= ctx.eq_tol * (1 + fro(T) * fro(S))
    report.section("commuting", commutator_norm=commutator, commuting=commuting)
    if commuting:
        report.check("commuting_pinv_commutes", products.commuting_mp_check(T, S, ctx))
        cp = products.commuting_ep_product(T, S, ctx)
        report.check("commuting_product_pinv", cp.passed, ts_is_ep=cp.ts.is_ep,
                     err_s_pinv_t_pinv=cp.err_s_pinv_t_pinv, err_t_pinv_s_pinv=cp.err_t_pinv_s_pinv, tol=cp.tol)
    report.section("verdict", verdict=rep.verdict)


def cmd_example34(args, ctx, report: RunReport):
    N = args.cutoff
    if N < 10 or N % 2:
        raise CutoffError(f"cutoff must be an even integer >= 10, got {N}")
    rep = shiftlab.verify_example34(N)
    report.section(
        "example34",
        cutoff=N,
        ts_range_sample=list(rep.ts_range_sample),
        ts_kernel_sample=list(rep.ts_kernel_sample),
    )
    v = rep.verdicts()
    report.check("index_2_outside_ran_TS", v["index_2_outside_ran_TS"])
    report.check("index_2_outside_ker_TS", v["index_2_outside_ker_TS"])
    report.check("T_maps_ran_S_into_ran_S", v["T_maps_ran_S_into_ran_S"])
    report.check("S_adjoint_maps_ran_T_into_ran_T", v["S_adjoint_maps_ran_T_into_ran_T"])
    report.check("T_is_EP", v["T_is_EP"])
    report.check("S_is_EP", v["S_is_EP"])
    report.check("TS_is_not_EP", not v["TS_is_EP"])
    report.section(
        "conclusion",
        converse_fails=rep.converse_fails,
        statement="Ran(TS) + Ker(TS) misses xi_2, so TS is not EP although T, S are EP and both inclusions hold",
    )


def cmd_suite(args, ctx, report: RunReport):
    if args.dim < 1:
        raise UsageError("--dim must be positive")
    only = set(args.only) if args.only else None
    if only:
        unknown = only - set(suite.property_names())
        if unknown:
            raise UsageError(f"unknown properties: {', '.join(sorted(unknown))}")
    result = suite.run_suite(args.seed, args.trials, args.dim, ctx, dump_dir=args.dump_dir, only=only)
    report.section("suite", seed=args.seed, trials=args.trials, dim=args.dim)
    for name, (passed, run) in result.counts.items():
        report.check(name, passed == run, passed_trials=passed, trials=run)
    if result.failures:
        report.section(
            "failures",
            **{f"{f.property}#{f.trial}": {"detail": f.detail, "manifest": f.manifest} for f in result.failures},
        )


def cmd_replay(args, ctx, report: RunReport):
    result = suite.replay(args.manifest, ctx if args.ctx_overridden else None)
    report.section(
        "replay",
        property=result.property,
        recorded_passed=result.recorded_passed,
        reproduced=result.reproduced,
        detail=result.detail,
    )
    report.check(result.property, result.passed)


# -- argument parsing ---------------------------------------------------------


def _uint(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (np.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=_positive_float, default=None, help="relative rank threshold (default 1e-10)")
    common.add_argument("--eq-tol", type=_positive_float, default=None, help="equality threshold (default 1e-9)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(prog="eplab", description="Moore-Penrose inverses and EP operators")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="full Moore-Penrose and EP report for one operator")
    p.add_argument("path")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("product", parents=[common], help="product conditions for two EP operators")
    p.add_argument("path_t")
    p.add_argument("path_s")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("example34", parents=[common], help="exact shift/projection counterexample")
    p.add_argument("--cutoff", type=_uint, default=50)
    p.set_defaults(func=cmd_example34)

    p = sub.add_parser("suite", parents=[common], help="seeded randomized property suite")
    p.add_argument("--seed", type=_uint, default=0)
    p.add_argument("--trials", type=_uint, default=100)
    p.add_argument("--dim", type=_uint, default=8)
    p.add_argument("--dump-dir", default="eplab-failures", help="where failing operators are written")
    p.add_argument("--only", action="append", metavar="PROPERTY", help="run only this property (repeatable)")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("replay", parents=[common], help="re-run a dumped suite failure")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    started = time.perf_counter()
    args.ctx_overridden = args.rank_tol is not None or args.eq_tol is not None
    defaults = NumericalContext()
    try:
        ctx = NumericalContext(
            rank_rel_tol=defaults.rank_rel_tol if args.rank_tol is None else args.rank_tol,
            eq_tol=defaults.eq_tol if args.eq_tol is None else args.eq_tol,
        )
    except ValueError as exc:
        print(f"eplab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = RunReport(argv, ctx, getattr(args, "seed", None))
    try:
        args.func(args, ctx, report)
    except (OperatorFileError, DimensionError, PreconditionError, NotEPError, CutoffError, UsageError) as exc:
        print(f"eplab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(report.render(args.format))
    print(f"wall-time: {time.perf_counter() - started:.3f} s", file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_DEFECT


if __name__ == "__main__":
    sys.exit(main())
