"""Moore-Penrose inverse by spectral truncation and by the Tikhonov limit.

The two routes share nothing beyond :func:`~eplab.linalg.as_matrix`, so each
one can serve as an oracle for the other.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, IllDeterminedRankWarning
from .linalg import DEFAULT_CONTEXT, NumericalContext, adjoint, as_matrix, factorize, fro, numerical_rank
from .subspace import equal, is_orthogonal_sum, kernel_of, range_of

DEFAULT_SCHEDULE = tuple(10.0 ** -k for k in range(1, 11))


def mp_svd(T, ctx: NumericalContext = DEFAULT_CONTEXT, scale: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse from the truncated singular value decomposition.

    Emits :class:`IllDeterminedRankWarning` when the rank decision falls in a
    narrow spectral gap. ``scale`` is passed to
    :func:`~eplab.linalg.numerical_rank`.
    """
    T = as_matrix(T)
    f = factorize(T)
    r, ill = numerical_rank(f, ctx, scale)
    if ill:
        warnings.warn(
            f"numerical rank {r} is ill-determined (gap ratio below {ctx.gap_warn_ratio:g})",
            IllDeterminedRankWarning,
            stacklevel=2,
        )
    W = f.right[:, :r]
    U = f.left[:, :r]
    return (W / f.singular_values[:r]) @ U.conj().T


@dataclass(frozen=True)
class PenroseReport:
    """Residuals of a candidate ``G`` in the four Penrose equations.

    ``residuals`` holds ``||TGT - T||``, ``||GTG - G||``, ``||(TG)^* - TG||``
    and ``||(GT)^* - GT||`` in Frobenius norm. ``projector_checks`` says whether
    ``TG`` and ``GT`` are orthogonal projections within ``eq_tol``.
    """

    candidate: np.ndarray
    residuals: tuple[float, float, float, float]
    projector_checks: tuple[bool, bool]

    @property
    def max_residual(self) -> float:
        return max(self.residuals)

    def passed(self, tol: float) -> bool:
        return self.max_residual <= tol and all(self.projector_checks)


def _is_orthogonal_projection(P: np.ndarray, tol: float) -> bool:
    return fro(P - P.conj().T) <= tol and fro(P @ P - P) <= tol


def penrose_residuals(T, G, ctx: NumericalContext = DEFAULT_CONTEXT) -> PenroseReport:
    T, G = as_matrix(T), as_matrix(G)
    if G.shape != T.shape[::-1]:
        raise DimensionError(f"candidate shape {G.shape} does not match adjoint shape {T.shape[::-1]}")
    TG, GT = T @ G, G @ T
    residuals = (
        fro(TG @ T - T),
        fro(GT @ G - G),
        fro(TG.conj().T - TG),
        fro(GT.conj().T - GT),
    )
    checks = (_is_orthogonal_projection(TG, ctx.eq_tol), _is_orthogonal_projection(GT, ctx.eq_tol))
    return PenroseReport(G, residuals, checks)


def penrose_tolerance(T, G, ctx: NumericalContext = DEFAULT_CONTEXT) -> float:
    """Scale-aware acceptance threshold ``eq_tol * (1 + ||T|| + ||G||)``."""
    return ctx.eq_tol * (1 + fro(T) + fro(G))


@dataclass(frozen=True)
class TikhonovTrace:
    omegas: tuple[float, ...]
    iterates: tuple[np.ndarray, ...]
    errors: tuple[float, ...]
    reference: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def final_error(self) -> float:
        return self.errors[-1]

    def is_nonincreasing(self, slack: float = 1e-14) -> bool:
        return all(b <= a + slack for a, b in zip(self.errors, self.errors[1:]))


def _validate_schedule(schedule) -> tuple[float, ...]:
    omegas = tuple(float(w) for w in schedule)
    if not omegas:
        raise ValueError("schedule must be nonempty")
    if any(not (np.isfinite(w) and w > 0) for w in omegas):
        raise ValueError("schedule entries must be positive and finite")
    if any(b >= a for a, b in zip(omegas, omegas[1:])):
        raise ValueError("schedule must be strictly decreasing")
    return omegas


_SPLIT = 134217729.0  # 2^27 + 1, Veltkamp splitting constant


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ca, cb = _SPLIT * a, _SPLIT * b
    ah, bh = ca - (ca - a), cb - (cb - b)
    al, bl = a - ah, b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_matmul(A, B):
    """Real ``A @ B`` as an unevaluated sum ``hi + lo`` with ~32-digit accuracy."""
    hi, lo = _two_prod(A.T[:, :, None], B[:, None, :])  # one (m, n) slice per inner index
    while hi.shape[0] > 1:
        if hi.shape[0] % 2:
            pad = np.zeros((1,) + hi.shape[1:])
            hi, lo = np.concatenate([hi, pad]), np.concatenate([lo, pad])
        half = hi.shape[0] // 2
        hi, err = _two_sum(hi[:half], hi[half:])
        lo = lo[:half] + lo[half:] + err
    if hi.shape[0] == 0:
        return np.zeros((A.shape[0], B.shape[1])), np.zeros((A.shape[0], B.shape[1]))
    return _two_sum(hi[0], lo[0])


def _dd_cmatmul(A, B):
    """Complex ``A @ B`` in double-double; returns ``(hi, lo)`` complex arrays."""
    left = np.hstack([A.real, -A.imag])
    re = _dd_matmul(left, np.vstack([B.real, B.imag]))
    im = _dd_matmul(np.hstack([A.real, A.imag]), np.vstack([B.imag, B.real]))
    return re[0] + 1j * im[0], re[1] + 1j * im[1]


def tikhonov_iterate(T, omega: float, refinements: int = 6) -> np.ndarray:
    """Solve ``(omega I + T^* T) X = T^*`` for ``X``.

    Cholesky in double precision followed by iterative refinement with
    residuals evaluated in double-double arithmetic. A plain double solve
    behaves like an ``eps ||T||`` perturbation of ``T`` whose effect grows
    like ``eps / omega``; even long-double residuals leave a floor near
    ``1e-19 / omega`` along ``Ker(T)``, which swamps the true regularization
    error once ``omega`` drops below ~1e-9.
    """
    T = as_matrix(T)
    n = T.shape[1]
    Th = T.conj().T
    g_hi, g_lo = _dd_cmatmul(Th, T)
    gram = g_hi + g_lo + omega * np.eye(n)
    try:
        chol = scipy.linalg.cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"omega*I + T^*T not positive definite at omega={omega:g}") from exc
    X = scipy.linalg.cho_solve(chol, Th)
    for _ in range(refinements):
        # residual Th - g_hi X - g_lo X - omega X; only the first product needs extra precision
        p_hi, p_lo = _dd_cmatmul(g_hi, X)
        resid = (Th - p_hi) - (p_lo + g_lo @ X + omega * X)
        step = scipy.linalg.cho_solve(chol, resid)
        X = X + step
        if fro(step) <= np.finfo(float).eps * fro(X):
            break
    return X


def mp_tikhonov(T, schedule=DEFAULT_SCHEDULE, ctx: NumericalContext = DEFAULT_CONTEXT) -> TikhonovTrace:
    """Approach the Moore-Penrose inverse along ``(omega I + T^* T)^{-1} T^*``.

    Errors are measured against :func:`mp_svd` in Frobenius norm.
    """
    T = as_matrix(T)
    omegas = _validate_schedule(schedule)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllDeterminedRankWarning)
        reference = mp_svd(T, ctx)
    if not np.any(T):
        zero = np.zeros(T.shape[::-1], dtype=np.complex128)
        return TikhonovTrace(omegas, tuple(zero for _ in omegas), tuple(0.0 for _ in omegas), reference)
    iterates = tuple(tikhonov_iterate(T, w) for w in omegas)
    errors = tuple(fro(X - reference) for X in iterates)
    return TikhonovTrace(omegas, iterates, errors, reference)


def tikhonov_agreement_bound(T, omega_final: float, ctx: NumericalContext = DEFAULT_CONTEXT) -> float:
    """Allowed gap ``max(1e-5, 10 omega / sigma_min^3)`` between the two routes."""
    f = factorize(T)
    r, _ = numerical_rank(f, ctx)
    if r == 0:
        return 1e-5
    return max(1e-5, 10 * omega_final / f.singular_values[r - 1] ** 3)


@dataclass(frozen=True)
class IdentityReport:
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def mp_identities_check(T, ctx: NumericalContext = DEFAULT_CONTEXT) -> IdentityReport:
    """Range/kernel identities of the Moore-Penrose inverse, as subspace statements."""
    T = as_matrix(T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllDeterminedRankWarning)
        G = mp_svd(T, ctx)
    Th = adjoint(T)
    ran_G, ker_G = range_of(G, ctx), kernel_of(G, ctx)
    ran_T, ker_T = range_of(T, ctx), kernel_of(T, ctx)
    checks = {
        "ran_pinv_eq_ran_adjoint": equal(ran_G, range_of(Th, ctx)),
        "ker_pinv_eq_ker_adjoint": equal(ker_G, kernel_of(Th, ctx)),
        "ran_pinv_eq_ran_pinv_T": equal(ran_G, range_of(G @ T, ctx)),
        "ran_T_eq_ran_T_pinv": equal(ran_T, range_of(T @ G, ctx)),
        "ker_T_eq_ker_pinv_T": equal(ker_T, kernel_of(G @ T, ctx)),
        "ker_pinv_eq_ker_T_pinv": equal(ker_G, kernel_of(T @ G, ctx)),
        "domain_eq_ker_T_plus_ran_pinv": is_orthogonal_sum(ker_T, ran_G),
        "codomain_eq_ker_pinv_plus_ran_T": is_orthogonal_sum(ker_G, ran_T),
    }
    return IdentityReport(checks)
