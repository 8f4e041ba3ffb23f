"""Seeded randomized property suite with replayable failure artifacts.

Each property draws its operators from ``default_rng([seed, trial, index])``
so that any single trial can be regenerated without running the others.
Failing trials are written out as operator files plus a JSON manifest, and
:func:`replay` re-runs the check on exactly those operators.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import compacts, ep, products, pseudoinverse
from .errors import IllDeterminedRankWarning, OperatorFileError
from .linalg import DEFAULT_CONTEXT, NumericalContext, factorize, fro, numerical_rank, op_norm
from .opfile import load_operator, save_operator
from .sampling import complex_gaussian, random_exact_rank, random_low_rank, random_unitary
from .subspace import (
    complement,
    equal,
    intersect,
    kernel_of,
    principal_angles,
    range_of,
    subspace_sum,
)

Ops = dict[str, np.ndarray]
Outcome = tuple[bool, dict]


@dataclass(frozen=True)
class Property:
    name: str
    generate: Callable[[np.random.Generator, int], Ops]
    check: Callable[[Ops, NumericalContext], Outcome]


PROPERTIES: list[Property] = []


def _register(name):
    def wrap(pair):
        generate, check = pair
        PROPERTIES.append(Property(name, generate, check))
        return pair

    return wrap


def _pinv(T, ctx, scale=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllDeterminedRankWarning)
        return pseudoinverse.mp_svd(T, ctx, scale)


def _half_rank(n):
    return max(1, n // 2)


def _exact_rank_op(rng, n):
    return {"T": random_exact_rank(n, n, _half_rank(n), rng)}


def _random_ep_op(rng, n):
    return {"T": ep.random_ep(n, int(rng.integers(0, n + 1)), rng)}


def _commuting_pair(rng, n):
    T, S = ep.random_commuting_ep_pair(n, rng)
    return {"T": T, "S": S}


# -- pseudoinverse -----------------------------------------------------------


def _check_penrose(ops, ctx):
    T = ops["T"]
    G = _pinv(T, ctx)
    rep = pseudoinverse.penrose_residuals(T, G, ctx)
    tol = pseudoinverse.penrose_tolerance(T, G, ctx)
    return rep.passed(tol), {"max_residual": rep.max_residual, "tol": tol}


_register("penrose_equations")((_exact_rank_op, _check_penrose))


def _check_involution(ops, ctx):
    T = ops["T"]
    G = _pinv(T, ctx)
    back = fro(_pinv(G, ctx) - T)
    adj = fro(_pinv(T.conj().T, ctx) - G.conj().T)
    tol_back, tol_adj = ctx.eq_tol * (1 + fro(T)), ctx.eq_tol * (1 + fro(G))
    return back <= tol_back and adj <= tol_adj, {"involution_error": back, "adjoint_error": adj}


_register("pinv_involution_and_adjoint")(
    (lambda rng, n: {"T": random_low_rank(n, n, _half_rank(n), rng)}, _check_involution)
)


def _check_identities(ops, ctx):
    rep = pseudoinverse.mp_identities_check(ops["T"], ctx)
    return rep.passed, {k: v for k, v in rep.checks.items()}


_register("mp_range_kernel_identities")((_exact_rank_op, _check_identities))


def _check_tikhonov(ops, ctx):
    T = ops["T"]
    trace = pseudoinverse.mp_tikhonov(T, ctx=ctx)
    bound = pseudoinverse.tikhonov_agreement_bound(T, trace.omegas[-1], ctx)
    ok = trace.is_nonincreasing() and trace.final_error <= bound
    return ok, {"final_error": trace.final_error, "bound": bound, "monotone": trace.is_nonincreasing()}


_register("tikhonov_limit")((_exact_rank_op, _check_tikhonov))


# -- subspaces ---------------------------------------------------------------


def _subspace_pair(rng, n):
    shared = int(rng.integers(0, n + 1))
    k1, k2 = (int(rng.integers(0, n - shared + 1)) for _ in range(2))
    C = complex_gaussian(rng, (n, shared))
    return {
        "A_span": np.hstack([C, complex_gaussian(rng, (n, k1))]),
        "B_span": np.hstack([C, complex_gaussian(rng, (n, k2))]),
    }


def _check_lattice(ops, ctx):
    A, B = range_of(ops["A_span"], ctx), range_of(ops["B_span"], ctx)
    meet, join = intersect(A, B), subspace_sum(A, B)
    angles = principal_angles(A, B)
    detail = {
        "de_morgan": equal(complement(join), intersect(complement(A), complement(B))),
        "dimension_formula": join.dim == A.dim + B.dim - meet.dim,
        "double_complement": equal(complement(complement(A)), A),
        "meet_commutes": equal(meet, intersect(B, A)),
        "meet_matches_angles": meet.dim == int(np.count_nonzero(angles < 1e-6)),
    }
    return all(detail.values()), detail


_register("subspace_lattice")((_subspace_pair, _check_lattice))


def _check_complements(ops, ctx):
    T = ops["T"]
    Th = T.conj().T
    r = numerical_rank(factorize(T), ctx).rank
    detail = {
        "ran_perp_is_ker_adjoint": equal(complement(range_of(T, ctx)), kernel_of(Th, ctx)),
        "ker_perp_is_ran_adjoint": equal(complement(kernel_of(T, ctx)), range_of(Th, ctx)),
        "rank_adjoint": r == numerical_rank(factorize(Th), ctx).rank,
        "rank_gram": r == numerical_rank(factorize(Th @ T), ctx).rank,
    }
    return all(detail.values()), detail


_register("range_kernel_complements")((_exact_rank_op, _check_complements))


# -- EP detection and factorizations ------------------------------------------


def _check_random_ep(ops, ctx):
    rep = ep.is_ep(ops["T"], ctx)
    return rep.is_ep and not rep.disagreement, {"is_ep": rep.is_ep, "rank": rep.rank}


_register("random_ep_is_ep")((_random_ep_op, _check_random_ep))


def _generic_op(rng, n):
    r = int(rng.integers(1, n + 1))
    return {"T": complex_gaussian(rng, (n, r)) @ complex_gaussian(rng, (r, n))}


def _check_four_way(ops, ctx):
    rep = ep.is_ep(ops["T"], ctx)
    ok = not rep.disagreement or rep.ill_determined
    return ok, {"is_ep": rep.is_ep, "disagreement": rep.disagreement, "ill_determined": rep.ill_determined}


_register("ep_four_way_agreement")((_generic_op, _check_four_way))


def _check_unitary_invariance(ops, ctx):
    T, Q = ops["T"], ops["Q"]
    a, b = ep.is_ep(T, ctx).is_ep, ep.is_ep(Q @ T @ Q.conj().T, ctx).is_ep
    return a == b, {"is_ep": a, "is_ep_conjugated": b}


def _conjugation_ops(rng, n):
    ops = _random_ep_op(rng, n) if rng.uniform() < 0.5 else _generic_op(rng, n)
    ops["Q"] = random_unitary(n, rng)
    return ops


_register("ep_unitary_invariance")((_conjugation_ops, _check_unitary_invariance))


def _check_factorizations(ops, ctx):
    T = ops["T"]
    G = _pinv(T, ctx)
    adj, com = ep.ep_factor_adjoint(T, ctx), ep.ep_factor_commuting(T, ctx)
    t1_norm = ep.restricted_operator_norm(T, ctx)
    v_floor = min(1.0, 1 / t1_norm**2) - ctx.eq_tol if t1_norm else 1.0 - ctx.eq_tol
    detail = {
        "adjoint_residual": adj.residual,
        "commuting_residual": com.residual,
        "adjoint_v_sigma_min": adj.v_sigma_min,
        "commuting_v_sigma_min": com.v_sigma_min,
    }
    ok = (
        adj.residual <= ctx.eq_tol * (1 + fro(T))
        and com.residual <= ctx.eq_tol * (1 + fro(G))
        and adj.v_sigma_min > ctx.eq_tol
        and com.v_sigma_min >= v_floor
    )
    return ok, detail


_register("ep_factorizations")((_random_ep_op, _check_factorizations))


def _check_canonical(ops, ctx):
    T = ops["T"]
    G = _pinv(T, ctx)
    cf = ep.canonical_form(T, ctx)
    rt, inv = fro(cf.reconstruct() - T), fro(cf.pinv() - G)
    unitary = fro(cf.U.conj().T @ cf.U - np.eye(T.shape[0]))
    ok = rt <= ctx.eq_tol * (1 + fro(T)) and inv <= ctx.eq_tol * (1 + fro(G)) and unitary <= ctx.eq_tol
    return ok, {"round_trip": rt, "pinv_error": inv, "unitarity": unitary}


_register("canonical_form")((_random_ep_op, _check_canonical))


def _block_ops(rng, n):
    return {
        "T": random_low_rank(n, n, _half_rank(n), rng),
        "W_span": complex_gaussian(rng, (n, int(rng.integers(0, n + 1)))),
    }


def _check_block(ops, ctx):
    T = ops["T"]
    bd = ep.block_decompose(T, range_of(ops["W_span"], ctx), ctx)
    G = _pinv(T, ctx)
    err = fro(bd.mp_from_blocks - G)
    ok = err <= ctx.eq_tol * (1 + fro(G)) and bd.off_block_norm <= ctx.eq_tol * (1 + fro(T)) and bd.a_sigma_min > ctx.eq_tol
    return ok, {"mp_error": err, "off_block_norm": bd.off_block_norm, "a_sigma_min": bd.a_sigma_min}


_register("block_formula")((_block_ops, _check_block))


# -- products -----------------------------------------------------------------


def _check_commuting_pinv(ops, ctx):
    ok = products.commuting_mp_check(ops["T"], ops["S"], ctx)
    return ok, {"commutes_with_pinv": ok}


_register("commuting_pinv_commutes")((_commuting_pair, _check_commuting_pinv))


def _check_commuting_product(ops, ctx):
    rep = products.commuting_ep_product(ops["T"], ops["S"], ctx)
    detail = {
        "ts_is_ep": rep.ts.is_ep,
        "err_s_pinv_t_pinv": rep.err_s_pinv_t_pinv,
        "err_t_pinv_s_pinv": rep.err_t_pinv_s_pinv,
    }
    return rep.passed, detail


_register("commuting_ep_product")((_commuting_pair, _check_commuting_product))


def _check_ep6_commuting(ops, ctx):
    rep = products.theorem_ep6(ops["T"], ops["S"], ctx)
    detail = {"cond_i": rep.cond_i, "cond_iii": rep.cond_iii, "cond_iv": rep.cond_iv, "consistent": rep.consistent}
    return rep.cond_i and rep.cond_iii and rep.cond_iv and rep.consistent, detail


_register("product_conditions_commuting")((_commuting_pair, _check_ep6_commuting))


def _check_inclusions(ops, ctx):
    first, second = products.invariance_inclusions(ops["T"], ops["S"], ctx)
    return first and second, {"T_ran_S": first, "S_adjoint_ran_T": second}


_register("invariance_inclusions")((_commuting_pair, _check_inclusions))


def _independent_ep_pair(rng, n):
    return {"T": _random_ep_op(rng, n)["T"], "S": _random_ep_op(rng, n)["T"]}


def _check_ep6_consistency(ops, ctx):
    rep = products.theorem_ep6(ops["T"], ops["S"], ctx)
    detail = {"cond_i": rep.cond_i, "cond_iii": rep.cond_iii, "cond_iv": rep.cond_iv, "verdict": rep.verdict}
    return rep.consistent, detail


_register("product_conditions_consistency")((_independent_ep_pair, _check_ep6_consistency))


def _check_closed_range(ops, ctx):
    note = products.product_closed_range_note(ops["T"], ops["S"], ctx)
    return note.complemented, {"summand_dim": note.summand_dim, "ts_rank": note.ts_rank}


_register("product_closed_range")((_independent_ep_pair, _check_closed_range))


# -- compact-operator algebra model --------------------------------------------

ALGEBRA = compacts.BlockAlgebra((2, 3))


def _element_ops(prefix, element) -> Ops:
    return {f"{prefix}{i}": b for i, b in enumerate(element.blocks)}


def _element_from(ops, prefix):
    return ALGEBRA.element(ops[f"{prefix}{i}"] for i in range(len(ALGEBRA.block_dims)))


def _element_pair(rng, n):
    a, b = compacts.random_commuting_ep_elements(ALGEBRA, rng)
    return {**_element_ops("a", a), **_element_ops("b", b)}


def _check_ideals(ops, ctx):
    a, b = _element_from(ops, "a"), _element_from(ops, "b")
    rep = compacts.ideal_equality_check(a, b, ctx)
    La, Lb = compacts.left_mult_matrix(a), compacts.left_mult_matrix(b)
    hom = fro(compacts.left_mult_matrix(a @ b) - La @ Lb)
    detail = {
        "ideal_distance": rep.ideal_distance,
        "ab_ep": rep.ab_ep,
        "consistent": rep.consistent,
        "homomorphism_error": hom,
        "annihilator_is_kernel": equal(compacts.right_annihilator(a, ctx), kernel_of(La, ctx)),
        "ideal_is_range": equal(compacts.right_ideal(a, ctx), range_of(La, ctx)),
    }
    ok = (
        rep.a_ep and rep.b_ep and rep.ab_ep and rep.ideal_equality and rep.consistent
        and hom <= ctx.eq_tol * (1 + op_norm(La) * op_norm(Lb))
        and detail["annihilator_is_kernel"] and detail["ideal_is_range"]
    )
    return ok, detail


_register("compact_ideal_equality")((_element_pair, _check_ideals))


def _check_element_ep(ops, ctx):
    rep = compacts.element_is_ep(_element_from(ops, "a"), ctx)
    return rep.agree, {"blockwise": rep.is_ep, "left_mult": rep.left_mult.is_ep}


_register("compact_element_ep_agreement")(
    (lambda rng, n: _element_ops("a", compacts.random_element(ALGEBRA, rng)), _check_element_ep)
)


# -- running --------------------------------------------------------------------


def property_names() -> list[str]:
    return [p.name for p in PROPERTIES]


def _lookup(name) -> tuple[int, Property]:
    for idx, prop in enumerate(PROPERTIES):
        if prop.name == name:
            return idx, prop
    raise KeyError(f"unknown property {name!r}")


def _safe_check(prop: Property, ops: Ops, ctx) -> Outcome:
    """A check that raises counts as a failure; the exception text is the detail."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IllDeterminedRankWarning)
            passed, detail = prop.check(ops, ctx)
    except Exception as exc:  # noqa: BLE001 - any crash is a reportable defect
        return False, {"error": f"{type(exc).__name__}: {exc}"}
    return bool(passed), {k: (v.item() if isinstance(v, np.generic) else v) for k, v in detail.items()}


@dataclass
class Failure:
    property: str
    trial: int
    detail: dict
    manifest: str | None = None


@dataclass
class SuiteResult:
    seed: int
    trials: int
    dim: int
    counts: dict[str, list[int]] = field(default_factory=dict)  # name -> [passed, run]
    failures: list[Failure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _context_dict(ctx: NumericalContext) -> dict:
    return {"rank_rel_tol": ctx.rank_rel_tol, "eq_tol": ctx.eq_tol, "gap_warn_ratio": ctx.gap_warn_ratio}


def _dump(dump_dir: Path, prop: Property, seed, trial, dim, ops, ctx, detail) -> str:
    stem = f"{prop.name}-s{seed}-t{trial}"
    dump_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    for key, M in ops.items():
        fname = f"{stem}-{key}.json"
        save_operator(dump_dir / fname, M, name=key)
        files[key] = fname
    manifest = {
        "property": prop.name,
        "seed": seed,
        "trial": trial,
        "dim": dim,
        "context": _context_dict(ctx),
        "operators": files,
        "passed": False,
        "detail": detail,
    }
    path = dump_dir / f"{stem}-manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return str(path)


def run_suite(seed: int, trials: int, dim: int, ctx: NumericalContext = DEFAULT_CONTEXT,
              dump_dir=None, only=None) -> SuiteResult:
    if trials < 0 or dim < 1:
        raise ValueError("trials must be >= 0 and dim >= 1")
    selected = [(i, p) for i, p in enumerate(PROPERTIES) if only is None or p.name in only]
    result = SuiteResult(seed, trials, dim, {p.name: [0, 0] for _, p in selected})
    for trial in range(trials):
        for idx, prop in selected:
            ops = prop.generate(np.random.default_rng([seed, trial, idx]), dim)
            passed, detail = _safe_check(prop, ops, ctx)
            tally = result.counts[prop.name]
            tally[1] += 1
            if passed:
                tally[0] += 1
                continue
            failure = Failure(prop.name, trial, detail)
            if dump_dir is not None:
                failure.manifest = _dump(Path(dump_dir), prop, seed, trial, dim, ops, ctx, detail)
            result.failures.append(failure)
    return result


@dataclass
class ReplayResult:
    property: str
    passed: bool
    detail: dict
    recorded_passed: bool
    recorded_detail: dict

    @property
    def reproduced(self) -> bool:
        return self.passed == self.recorded_passed and self.detail == self.recorded_detail


def replay(manifest_path, ctx: NumericalContext | None = None) -> ReplayResult:
    """Re-run a dumped trial; tolerances default to those recorded in the manifest."""
    path = Path(manifest_path)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
        _, prop = _lookup(manifest["property"])
        ops = {key: load_operator(path.parent / fname)[0] for key, fname in manifest["operators"].items()}
        if ctx is None:
            ctx = NumericalContext(**manifest["context"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, OperatorFileError):
            raise
        raise OperatorFileError(f"bad manifest {path}: {exc}") from exc
    passed, detail = _safe_check(prop, ops, ctx)
    return ReplayResult(prop.name, passed, detail, bool(manifest.get("passed")), manifest.get("detail", {}))
