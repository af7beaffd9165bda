"""State divergences: closed forms and the geometric-mean program D#_α.

All logarithms are base 2. Support violations give +inf, never an error.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from hermitian_ops import (
    DEFAULT_RANK_TOL,
    DimensionMismatchError,
    HermitianOperator,
    OperatorLike,
    as_matrix,
    psd_power,
    subset_check,
    support_basis,
)

from .config import ALPHA_MARGIN, SolverConfig
from .errors import OutOfRangeError, SolverFailureError
from .meanrep import build_mean_constraint, dyadic_approx, mean_eval
from .models import DivergenceResult, DyadicWeight, SharpBounds
from .quantum import QState, herm, pinched_spectra
from .sdp import ConicSolution, ProgramBuilder, Trace, solve

logger = logging.getLogger(__name__)

WITNESS_TOL = 1e-6
INF = math.inf

StateLike = Union[QState, OperatorLike]


def check_alpha(alpha: float) -> float:
    if not alpha > 1 + ALPHA_MARGIN:
        raise OutOfRangeError(f"alpha must exceed 1 + {ALPHA_MARGIN}, got {alpha}")
    return float(alpha)


def state_matrix(state: StateLike) -> np.ndarray:
    if isinstance(state, QState):
        return state.matrix
    return as_matrix(state)


def _pair(rho: StateLike, sigma: StateLike) -> Tuple[np.ndarray, np.ndarray]:
    r, s = state_matrix(rho), state_matrix(sigma)
    if r.shape != s.shape:
        raise DimensionMismatchError(f"rho is {r.shape} but sigma is {s.shape}")
    return r, s


def d_from_q(q: float, alpha: float) -> float:
    """log2(q)/(α−1), or −inf when q is not positive."""
    if q <= 0:
        return -INF
    return math.log2(q) / (alpha - 1)


def _on_support(
    rho: np.ndarray, sigma: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Compress ρ and σ onto supp(σ); returns (V, V†ρV, V†σV)."""
    basis = support_basis(sigma, rank_tol)
    return (
        basis,
        herm(basis.conj().T @ rho @ basis),
        herm(basis.conj().T @ sigma @ basis),
    )


def d_classical(p: np.ndarray, q: np.ndarray, alpha: float) -> float:
    """(1/(α−1)) log2 Σ p^α q^{1−α}; +inf unless p ≪ q."""
    alpha = check_alpha(alpha)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatchError(f"p has shape {p.shape}, q has {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise OutOfRangeError("probability weights must be nonnegative")
    if np.any((p > 0) & (q == 0)):
        return INF
    support = p > 0
    total = float(np.sum(p[support] ** alpha * q[support] ** (1 - alpha)))
    return d_from_q(total, alpha)


def d_binary(p: float, q: float, alpha: float) -> float:
    """Binary Rényi divergence δ_α(p‖q)."""
    for name, value in (("p", p), ("q", q)):
        if not 0 <= value <= 1:
            raise OutOfRangeError(f"{name} must lie in [0, 1], got {value}")
    return d_classical(np.array([p, 1 - p]), np.array([q, 1 - q]), alpha)


def q_sandwiched(rho: StateLike, sigma: StateLike, alpha: float) -> float:
    r, s = _pair(rho, sigma)
    if not subset_check(r, s):
        return INF
    _, r, s = _on_support(r, s)
    power = psd_power(s, (1 - alpha) / (2 * alpha))
    values = np.clip(np.linalg.eigvalsh(herm(power @ r @ power)), 0, None)
    return float(np.sum(values**alpha))


def d_sandwiched(rho: StateLike, sigma: StateLike, alpha: float) -> float:
    """(1/(α−1)) log2 tr (σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α."""
    alpha = check_alpha(alpha)
    q = q_sandwiched(rho, sigma, alpha)
    return INF if math.isinf(q) else d_from_q(q, alpha)


def d_geometric(rho: StateLike, sigma: StateLike, alpha: float) -> float:
    """(1/(α−1)) log2 tr σ^{1/2} (σ^{−1/2} ρ σ^{−1/2})^α σ^{1/2}."""
    alpha = check_alpha(alpha)
    r, s = _pair(rho, sigma)
    if not subset_check(r, s):
        return INF
    _, r, s = _on_support(r, s)
    inv_root = psd_power(s, -0.5)
    values, vectors = np.linalg.eigh(herm(inv_root @ r @ inv_root))
    values = np.clip(values, 0, None)
    # tr σ^{1/2} C^α σ^{1/2} = Σ_i λ_i^α ⟨v_i|σ|v_i⟩
    weights = np.real(np.einsum("ji,jk,ki->i", vectors.conj(), s, vectors))
    return d_from_q(float(np.sum(values**alpha * weights)), alpha)


def d_max(rho: StateLike, sigma: StateLike) -> float:
    """log2 inf{λ : ρ ⪯ λσ}."""
    r, s = _pair(rho, sigma)
    if not subset_check(r, s):
        return INF
    _, r, s = _on_support(r, s)
    inv_root = psd_power(s, -0.5)
    top = float(np.linalg.eigvalsh(herm(inv_root @ r @ inv_root))[-1])
    return math.log2(top) if top > 0 else -INF


def d_pinched(
    rho: StateLike, sigma: StateLike, alpha: float, rank_tol: float = DEFAULT_RANK_TOL
) -> float:
    """Classical divergence between pinch(ρ, σ) and σ in a common eigenbasis.

    A lower bound on the measured divergence, hence on D̃_α and D#_α.
    """
    alpha = check_alpha(alpha)
    r, s = _pair(rho, sigma)
    if not subset_check(r, s):
        return INF
    p, q = pinched_spectra(r, s)
    scale = float(np.max(q, initial=0.0))
    null = q <= rank_tol * scale
    p = np.where(null, 0.0, np.clip(p, 0, None))
    q = np.where(null, 0.0, q)
    return d_classical(p, q, alpha)


@dataclass
class BracketSolve:
    """One solve of the geometric-mean program at a dyadic weight."""

    weight: DyadicWeight
    alpha_eff: float
    value_Q: float
    value_D: float
    solution: ConicSolution
    witness: Optional[np.ndarray] = None
    witness_residual: Optional[float] = None


def effective_alpha(weight: DyadicWeight, alpha: float) -> float:
    """1/β for the weight actually used; falls back to alpha when β rounds to 1."""
    return 1 / weight.value if weight.value < 1 else alpha


def solve_bracket(
    alpha: float,
    bits: int,
    solve_one: Callable[[DyadicWeight], BracketSolve],
) -> Tuple[Tuple[DyadicWeight, DyadicWeight], List[BracketSolve]]:
    """Solve at the floor and ceiling dyadic weights of 1/α (once if equal)."""
    lo, hi = dyadic_approx(1 / alpha, bits)
    solves = [solve_one(lo)]
    solves.append(solves[0] if hi == lo else solve_one(hi))
    return (lo, hi), solves


def ensure_acceptable(solution: ConicSolution, what: str) -> None:
    if not solution.acceptable:
        raise SolverFailureError(
            f"{what}: solver ended with status {solution.status.value} "
            f"(residual {solution.max_residual:.2e})",
            solution.summary(),
        )


def _state_program_solve(
    rho_s: np.ndarray,
    sigma_s: np.ndarray,
    basis: np.ndarray,
    rho: np.ndarray,
    sigma: np.ndarray,
    alpha: float,
    weight: DyadicWeight,
    options: SolverConfig,
) -> BracketSolve:
    r = rho_s.shape[0]
    builder = ProgramBuilder(f"state-div alpha={alpha:g} beta={weight}")
    a = builder.variable("A", r)
    build_mean_constraint(
        builder, builder.constant(sigma_s), a, builder.constant(rho_s), weight
    )
    builder.minimize(a.map(Trace(r)))
    program = builder.build()
    solution = solve(program, options)
    ensure_acceptable(solution, program.name)

    alpha_eff = effective_alpha(weight, alpha)
    witness = herm(basis @ solution.primal_blocks["A"] @ basis.conj().T)
    q = float(np.trace(witness).real)
    mean = as_matrix(mean_eval(sigma, witness, weight.value))
    residual = float(np.linalg.eigvalsh(herm(mean - rho))[0])
    if residual < -WITNESS_TOL * (1 + float(np.linalg.norm(rho, 2))):
        logger.warning(
            f"{program.name}: witness violates ρ ⪯ σ #_β A by {-residual:.2e}"
        )
    if abs(q - solution.primal_obj) > WITNESS_TOL * (1 + abs(q)):
        logger.warning(
            f"{program.name}: tr A = {q:.10g} differs from objective "
            f"{solution.primal_obj:.10g}"
        )
    return BracketSolve(
        weight=weight,
        alpha_eff=alpha_eff,
        value_Q=q,
        value_D=d_from_q(q, alpha),
        solution=solution,
        witness=witness,
        witness_residual=residual,
    )


def d_sharp_state(
    rho: StateLike,
    sigma: StateLike,
    alpha: float,
    options: Optional[SolverConfig] = None,
    bits: Optional[int] = None,
) -> DivergenceResult:
    """D#_α(ρ‖σ) = (1/(α−1)) log2 min{tr A : A ⪰ 0, ρ ⪯ σ #_{1/α} A}.

    1/α is replaced by its floor and ceiling on the 2^-bits grid; the
    ceiling solve is the headline value and both are kept in d_bracket.
    Every D value is log2(Q)/(α−1) for the requested α; the exponent 1/β
    of the headline weight is reported as alpha_effective.

    Raises:
        OutOfRangeError: If alpha is not above one
        SolverFailureError: If a solve does not reach an acceptable status
    """
    alpha = check_alpha(alpha)
    options = options or SolverConfig()
    bits = bits or options.bits
    r, s = _pair(rho, sigma)
    lo, hi = dyadic_approx(1 / alpha, bits)

    if not subset_check(r, s):
        logger.info("rho is not supported inside supp(sigma); D# is infinite")
        return DivergenceResult(
            value_D=INF,
            value_Q=INF,
            alpha=alpha,
            beta_bracket=(lo, hi),
            beta_used=hi,
            d_bracket=(INF, INF),
        )

    basis, rho_s, sigma_s = _on_support(r, s)
    if basis.shape[1] == 0:
        logger.info("sigma is zero; D# of the zero pair is -inf")
        return DivergenceResult(
            value_D=-INF,
            value_Q=0.0,
            alpha=alpha,
            alpha_effective=effective_alpha(hi, alpha),
            beta_bracket=(lo, hi),
            beta_used=hi,
            d_bracket=(-INF, -INF),
            witness_A=HermitianOperator.from_matrix(np.zeros_like(r)),
            witness_residual=0.0,
        )

    bracket, solves = solve_bracket(
        alpha,
        bits,
        lambda w: _state_program_solve(rho_s, sigma_s, basis, r, s, alpha, w, options),
    )
    headline = solves[1]
    iterations = solves[0].solution.iterations
    if solves[1] is not solves[0]:
        iterations += solves[1].solution.iterations

    return DivergenceResult(
        value_D=headline.value_D,
        value_Q=headline.value_Q,
        alpha=alpha,
        alpha_effective=headline.alpha_eff,
        beta_bracket=bracket,
        beta_used=headline.weight,
        d_bracket=(solves[0].value_D, solves[1].value_D),
        witness_A=HermitianOperator.from_matrix(headline.witness),
        witness_residual=headline.witness_residual,
        support_rank=basis.shape[1],
        solver=headline.solution.summary(),
        iterations=iterations,
    )


def d_sharp_bounds(rho: StateLike, sigma: StateLike, alpha: float) -> SharpBounds:
    """Closed-form bracket D̃_α ≤ D#_α ≤ min(D̂_α, D_max + log2(tr ρ)/(α−1))."""
    alpha = check_alpha(alpha)
    r, s = _pair(rho, sigma)
    if not subset_check(r, s):
        return SharpBounds(lower=INF, upper=INF)
    lower = d_sandwiched(r, s, alpha)
    trace_rho = float(np.trace(r).real)
    trivial = -INF
    if trace_rho > 0:
        trivial = d_max(r, s) + math.log2(trace_rho) / (alpha - 1)
    return SharpBounds(lower=lower, upper=min(d_geometric(r, s, alpha), trivial))
