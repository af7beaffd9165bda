"""Channel divergences, the tensor-power hierarchy and capacity bounds.

Choi matrices live on X⊗Y (input first). Every ‖·‖∞ objective is an epigraph
t·I − H ⪰ 0, and ‖Θ∘M‖⋄ ≤ 1 (Θ the transpose on Y) is the two-block diamond
program on the partially transposed Choi matrix.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from hermitian_ops import (
    DimensionMismatchError,
    HermitianOperator,
    as_matrix,
    subset_check,
    support_basis,
)

from .concurrency import CellOutcome, run_cells
from .config import SolverConfig
from .divergence import (
    INF,
    WITNESS_TOL,
    BracketSolve,
    check_alpha,
    d_from_q,
    d_geometric,
    d_sandwiched,
    effective_alpha,
    ensure_acceptable,
    solve_bracket,
)
from .errors import OutOfRangeError, SizeBudgetError, SolverFailureError
from .meanrep import build_mean_constraint, dyadic_approx, mean_eval
from .models import (
    CapacityResult,
    CapacityRow,
    CellStatus,
    ChannelDivResult,
    DyadicWeight,
    ExponentRow,
    HierarchyBound,
    RateBound,
)
from .quantum import (
    QChannel,
    amplitude_damping,
    herm,
    partial_trace,
    random_density,
    sandwich_choi,
    tensor_power,
)
from .sdp import (
    AffineExpr,
    PartialTrace,
    PartialTranspose,
    ProgramBuilder,
    Sandwich,
    block_selector,
    solve,
)

logger = logging.getLogger(__name__)

ChannelFamily = Callable[[float], QChannel]

DIAMOND_TOL = 1e-5


def _check_pair(n: QChannel, m: QChannel) -> None:
    if (n.dim_in, n.dim_out) != (m.dim_in, m.dim_out):
        raise DimensionMismatchError(
            f"Channels act {n.dim_in}->{n.dim_out} and {m.dim_in}->{m.dim_out}"
        )


def _trace_out_output(dim_in: int, dim_out: int) -> PartialTrace:
    return PartialTrace([dim_in, dim_out], [True, False])


def _channel_program_solve(
    choi_n: np.ndarray,
    choi_m: np.ndarray,
    basis: np.ndarray,
    dim_in: int,
    dim_out: int,
    alpha: float,
    weight: DyadicWeight,
    options: SolverConfig,
) -> BracketSolve:
    r = basis.shape[1]
    jn = herm(basis.conj().T @ choi_n @ basis)
    jm = herm(basis.conj().T @ choi_m @ basis)

    builder = ProgramBuilder(f"channel-div alpha={alpha:g} beta={weight}")
    a = builder.variable("A", r)
    t = builder.variable("t", 1)
    build_mean_constraint(
        builder, builder.constant(jm), a, builder.constant(jn), weight
    )
    lifted_marginal = a.map(Sandwich(basis)).map(_trace_out_output(dim_in, dim_out))
    builder.add_epigraph(t, lifted_marginal, "epi")
    builder.minimize(t)
    program = builder.build()
    solution = solve(program, options)
    ensure_acceptable(solution, program.name)

    witness = herm(basis @ solution.primal_blocks["A"] @ basis.conj().T)
    q = float(solution.primal_blocks["t"][0, 0].real)
    mean = as_matrix(mean_eval(choi_m, witness, weight.value))
    residual = float(np.linalg.eigvalsh(herm(mean - choi_n))[0])
    marginal = partial_trace(witness, [dim_in, dim_out], [True, False])
    epigraph_gap = float(np.linalg.eigvalsh(marginal.entries)[-1]) - q
    if residual < -WITNESS_TOL * (1 + float(np.linalg.norm(choi_n, 2))):
        logger.warning(
            f"{program.name}: witness violates J^N ⪯ J^M #_β A by {-residual:.2e}"
        )
    if epigraph_gap > WITNESS_TOL * (1 + q):
        logger.warning(
            f"{program.name}: λ_max(tr_Y A) exceeds t by {epigraph_gap:.2e}"
        )

    return BracketSolve(
        weight=weight,
        alpha_eff=effective_alpha(weight, alpha),
        value_Q=q,
        value_D=d_from_q(q, alpha),
        solution=solution,
        witness=witness,
        witness_residual=residual,
    )


def d_sharp_channel(
    n: QChannel,
    m: QChannel,
    alpha: float,
    options: Optional[SolverConfig] = None,
    bits: Optional[int] = None,
    power: int = 1,
) -> ChannelDivResult:
    """D#_α(N‖M) = (1/(α−1)) log2 min{‖tr_Y A‖∞ : A ⪰ 0, J^N ⪯ J^M #_{1/α} A}.

    With power > 1 the program runs on N^⊗power and M^⊗power (not divided by
    power). A is restricted to supp(J^M).

    Raises:
        DimensionMismatchError: If the channels act on different systems
        SizeBudgetError: If a tensor power or the program is too large
        SolverFailureError: If a solve does not reach an acceptable status
    """
    alpha = check_alpha(alpha)
    _check_pair(n, m)
    options = options or SolverConfig()
    bits = bits or options.bits
    if power > 1:
        n = tensor_power(n, power, options.size_budget)
        m = tensor_power(m, power, options.size_budget)
    choi_n, choi_m = n.choi.entries, m.choi.entries
    lo, hi = dyadic_approx(1 / alpha, bits)

    if not subset_check(choi_n, choi_m):
        logger.info("J^N is not supported inside supp(J^M); D# is infinite")
        return ChannelDivResult(
            value_D=INF,
            value_Q=INF,
            alpha=alpha,
            m=power,
            beta_bracket=(lo, hi),
            beta_used=hi,
            d_bracket=(INF, INF),
            epigraph_t=INF,
        )

    basis = support_basis(choi_m)
    bracket, solves = solve_bracket(
        alpha,
        bits,
        lambda w: _channel_program_solve(
            choi_n, choi_m, basis, n.dim_in, n.dim_out, alpha, w, options
        ),
    )
    headline = solves[1]
    iterations = solves[0].solution.iterations
    if solves[1] is not solves[0]:
        iterations += solves[1].solution.iterations
    return ChannelDivResult(
        value_D=headline.value_D,
        value_Q=headline.value_Q,
        alpha=alpha,
        m=power,
        alpha_effective=headline.alpha_eff,
        beta_bracket=bracket,
        beta_used=headline.weight,
        d_bracket=(solves[0].value_D, solves[1].value_D),
        epigraph_t=headline.value_Q,
        witness_A_XY=HermitianOperator.from_matrix(headline.witness),
        witness_residual=headline.witness_residual,
        solver=headline.solution.summary(),
        iterations=iterations,
    )


def hierarchy_correction(alpha: float, d: int, m: int) -> float:
    """(1/m)(α/(α−1))(d²+d) log2(m+d)."""
    return (alpha / (alpha - 1)) * (d * d + d) * math.log2(m + d) / m


def hierarchy_bound(
    n: QChannel,
    m_channel: QChannel,
    alpha: float,
    m: int,
    options: Optional[SolverConfig] = None,
    bits: Optional[int] = None,
) -> HierarchyBound:
    """Upper and lower members of the m-th level of the tensor-power hierarchy."""
    alpha = check_alpha(alpha)
    if m < 1:
        raise OutOfRangeError(f"tensor power m must be >= 1, got {m}")
    result = d_sharp_channel(n, m_channel, alpha, options, bits, power=m)
    d = n.dim_in * n.dim_out
    correction = hierarchy_correction(alpha, d, m)
    upper = result.value_D / m
    return HierarchyBound(
        m=m,
        alpha=alpha,
        d=d,
        upper=upper,
        lower=upper - correction,
        correction=correction,
        status=result.status,
    )


def copies_for_accuracy(alpha: float, d: int, delta: float, m_max: int = 10**12) -> int:
    """Smallest m whose hierarchy correction falls below delta."""
    alpha = check_alpha(alpha)
    if delta <= 0:
        raise OutOfRangeError(f"delta must be positive, got {delta}")
    if d < 2:
        raise OutOfRangeError(f"d must be at least 2, got {d}")
    high = 1
    while hierarchy_correction(alpha, d, high) >= delta:
        high *= 2
        if high > m_max:
            raise OutOfRangeError(f"more than {m_max} copies needed for delta={delta}")
    low = high // 2
    # correction is decreasing in m for d >= 2
    while high - low > 1:
        mid = (low + high) // 2
        if hierarchy_correction(alpha, d, mid) < delta:
            high = mid
        else:
            low = mid
    return high


def _add_diamond_constraint(
    builder: ProgramBuilder,
    choi_expr: AffineExpr,
    dim_in: int,
    dim_out: int,
    name: str,
) -> Tuple[AffineExpr, AffineExpr]:
    """s0, s1 with ‖Θ∘M‖⋄ ≤ (s0 + s1)/2 for the map whose Choi is choi_expr."""
    d = dim_in * dim_out
    transposed = choi_expr.map(PartialTranspose([dim_in, dim_out], [False, True]))
    block = builder.variable(f"{name}.D", 2 * d)
    first, second = block_selector(d, 0), block_selector(d, 1)
    builder.add_equality(
        block.map(Sandwich(first, second)) + transposed, f"{name}.offdiag"
    )
    builder.add_equality(block.map(Sandwich(first, second, -1j)), f"{name}.herm")

    marginal = _trace_out_output(dim_in, dim_out)
    s0 = builder.variable(f"{name}.s0", 1)
    s1 = builder.variable(f"{name}.s1", 1)
    builder.add_epigraph(
        s0, block.map(Sandwich(first)).map(marginal), f"{name}.epi0"
    )
    builder.add_epigraph(
        s1, block.map(Sandwich(second)).map(marginal), f"{name}.epi1"
    )
    return s0, s1


def _capacity_solve(
    channel: QChannel, alpha: float, weight: DyadicWeight, options: SolverConfig
) -> BracketSolve:
    dx, dy = channel.dim_in, channel.dim_out
    d = dx * dy
    builder = ProgramBuilder(f"capacity alpha={alpha:g} beta={weight}")
    jm = builder.variable("JM", d)
    a = builder.variable("A", d)
    t = builder.variable("t", 1)
    build_mean_constraint(
        builder, jm, a, builder.constant(channel.choi.entries), weight
    )
    builder.add_epigraph(t, a.map(_trace_out_output(dx, dy)), "epi")
    s0, s1 = _add_diamond_constraint(builder, jm, dx, dy, "diamond")
    builder.add_psd(builder.scalar(1.0) - (s0 + s1) * 0.5, "diamond.budget")
    builder.minimize(t)
    program = builder.build()
    solution = solve(program, options)
    ensure_acceptable(solution, program.name)

    q = float(solution.primal_blocks["t"][0, 0].real)
    return BracketSolve(
        weight=weight,
        alpha_eff=effective_alpha(weight, alpha),
        value_Q=q,
        value_D=d_from_q(q, alpha),
        solution=solution,
        witness=solution.primal_blocks["JM"],
    )


def capacity_bound(
    channel: QChannel,
    alpha: float,
    options: Optional[SolverConfig] = None,
    bits: Optional[int] = None,
) -> CapacityResult:
    """min over M with ‖Θ∘M‖⋄ ≤ 1 of D#_α(N‖M), as one joint program."""
    alpha = check_alpha(alpha)
    options = options or SolverConfig()
    bits = bits or options.bits
    _, solves = solve_bracket(
        alpha, bits, lambda w: _capacity_solve(channel, alpha, w, options)
    )
    headline = solves[1]
    minimizer = herm(headline.witness)
    diamond, feasible = _check_minimizer(
        minimizer, channel.dim_in, channel.dim_out, options, f"alpha={alpha:g}"
    )
    return CapacityResult(
        alpha=alpha,
        alpha_effective=headline.alpha_eff,
        value=headline.value_D,
        value_Q=headline.value_Q,
        beta_used=headline.weight,
        d_bracket=(solves[0].value_D, solves[1].value_D),
        minimizer_choi=HermitianOperator.from_matrix(minimizer),
        minimizer_diamond=diamond,
        minimizer_feasible=feasible,
        solver=headline.solution.summary(),
    )


def _check_minimizer(
    choi: np.ndarray, dim_in: int, dim_out: int, options: SolverConfig, label: str
) -> Tuple[Optional[float], bool]:
    """Re-solve ‖Θ∘M‖⋄ for a capacity minimizer on its own."""
    try:
        diamond = diamond_norm_transposed(choi, dim_in, dim_out, options)
    except SolverFailureError as e:
        logger.warning(f"capacity {label}: minimizer diamond check failed: {e}")
        return None, False
    if diamond > 1 + DIAMOND_TOL:
        logger.warning(
            f"capacity {label}: minimizer has ‖Θ∘M‖⋄ = {diamond:.8f} > 1"
        )
        return diamond, False
    return diamond, True


def diamond_norm_transposed(
    choi: np.ndarray, dim_in: int, dim_out: int, options: Optional[SolverConfig] = None
) -> float:
    """‖Θ∘M‖⋄ for the map with Choi matrix choi."""
    builder = ProgramBuilder("diamond")
    s0, s1 = _add_diamond_constraint(
        builder, builder.constant(choi), dim_in, dim_out, "diamond"
    )
    builder.minimize((s0 + s1) * 0.5)
    program = builder.build()
    solution = solve(program, options)
    ensure_acceptable(solution, program.name)
    return float(solution.primal_obj)


def max_rains_bound(channel: QChannel, options: Optional[SolverConfig] = None) -> float:
    """log2 min{‖Θ∘R‖⋄ : R ⪰ J^N}, i.e. min over V_Θ of D_max(N‖M)."""
    dx, dy = channel.dim_in, channel.dim_out
    builder = ProgramBuilder("max-rains")
    r = builder.variable("R", dx * dy)
    builder.add_psd(r - builder.constant(channel.choi.entries), "dominates")
    s0, s1 = _add_diamond_constraint(builder, r, dx, dy, "diamond")
    builder.minimize((s0 + s1) * 0.5)
    program = builder.build()
    solution = solve(program, options)
    ensure_acceptable(solution, program.name)
    return math.log2(solution.primal_obj)


def d_geometric_channel(
    n: QChannel, m: QChannel, alpha: float, omega: Optional[np.ndarray] = None
) -> float:
    """D̂_α of the Choi matrices sandwiched by ω^{1/2}; ω = I/d_X by default."""
    _check_pair(n, m)
    if omega is None:
        omega = np.eye(n.dim_in) / n.dim_in
    return d_geometric(
        sandwich_choi(omega, n.choi, n.dim_out),
        sandwich_choi(omega, m.choi, m.dim_out),
        alpha,
    )


def sandwiched_channel_lower_bound(
    n: QChannel,
    m: QChannel,
    alpha: float,
    samples: int = 32,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """max over sampled full-rank ω of D̃_α(ω^{1/2}J^Nω^{1/2}‖ω^{1/2}J^Mω^{1/2})."""
    _check_pair(n, m)
    rng = rng or np.random.default_rng(0)
    omegas = [np.eye(n.dim_in) / n.dim_in]
    omegas += [random_density(n.dim_in, rng) for _ in range(samples)]
    return max(
        d_sandwiched(
            sandwich_choi(omega, n.choi, n.dim_out),
            sandwich_choi(omega, m.choi, m.dim_out),
            alpha,
        )
        for omega in omegas
    )


def _raise_budget_errors(outcomes: List[CellOutcome]) -> None:
    for outcome in outcomes:
        if isinstance(outcome.error, SizeBudgetError):
            raise outcome.error


def _split_outcomes(
    outcomes: List[CellOutcome],
) -> Tuple[List[CellOutcome], List[float]]:
    """Good outcomes and failed alphas; anything but a solver failure propagates."""
    _raise_budget_errors(outcomes)
    good: List[CellOutcome] = []
    failed: List[float] = []
    for outcome in outcomes:
        if outcome.ok:
            good.append(outcome)
        elif isinstance(outcome.error, SolverFailureError):
            failed.append(outcome.key[0])
        else:
            raise outcome.error  # type: ignore[misc]
    return good, failed


def _grid_status(good: List[CellOutcome], failed: List[float]) -> CellStatus:
    if not good:
        return CellStatus.FAILED
    return CellStatus.PARTIAL if failed else CellStatus.OK


def capacity_curve(
    gammas: Sequence[float],
    alphas: Sequence[float],
    options: Optional[SolverConfig] = None,
    bits: Optional[int] = None,
    jobs: Optional[int] = None,
    family: ChannelFamily = amplitude_damping,
) -> List[CapacityRow]:
    """Per channel parameter, the minimum of capacity_bound over the alpha grid."""
    options = options or SolverConfig()
    alphas = [check_alpha(a) for a in alphas]
    cells: Dict[Tuple, Callable[[], CapacityResult]] = {}
    for gamma in gammas:
        channel = family(gamma)
        for alpha in alphas:
            cells[(gamma, alpha)] = (
                lambda c=channel, a=alpha: capacity_bound(c, a, options, bits)
            )
    outcomes = run_cells(cells, jobs)
    _raise_budget_errors(outcomes)

    by_gamma: Dict[float, List[CellOutcome]] = {}
    for outcome in outcomes:
        by_gamma.setdefault(outcome.key[0], []).append(outcome)

    rows: List[CapacityRow] = []
    for gamma in sorted(by_gamma):
        cell_outcomes = by_gamma[gamma]
        good = [o for o in cell_outcomes if o.ok]
        failed = [o.key[1] for o in cell_outcomes if not o.ok]
        if not good:
            rows.append(
                CapacityRow(
                    gamma=gamma,
                    best_alpha=None,
                    value=math.nan,
                    status=CellStatus.FAILED,
                    failed_alphas=failed,
                )
            )
            continue
        best = min(good, key=lambda o: (o.value.value, o.key[1]))
        rows.append(
            CapacityRow(
                gamma=gamma,
                best_alpha=best.key[1],
                value=best.value.value,
                status=CellStatus.PARTIAL if failed else CellStatus.OK,
                failed_alphas=failed,
            )
        )
    return rows


def strong_converse_curve(
    n: QChannel,
    m_channel: QChannel,
    r_values: Sequence[float],
    alphas: Sequence[float],
    m: int = 1,
    options: Optional[SolverConfig] = None,
    bits: Optional[int] = None,
    jobs: Optional[int] = None,
) -> List[ExponentRow]:
    """Certified lower bounds max_α (α−1)/α (r − U_α), clamped at 0.

    U_α is the hierarchy upper member, an upper bound on the regularized
    sandwiched divergence.
    """
    alphas = [check_alpha(a) for a in alphas]
    cells = {
        (alpha,): (lambda a=alpha: hierarchy_bound(n, m_channel, a, m, options, bits))
        for alpha in alphas
    }
    good, failed = _split_outcomes(run_cells(cells, jobs))
    status = _grid_status(good, failed)
    uppers = {outcome.key[0]: outcome.value.upper for outcome in good}

    rows: List[ExponentRow] = []
    for r in sorted(r_values):
        if not uppers:
            rows.append(
                ExponentRow(
                    r=r,
                    exponent=math.nan,
                    best_alpha=None,
                    status=status,
                    failed_alphas=failed,
                )
            )
            continue
        best_value, best_alpha = 0.0, None
        for alpha in sorted(uppers):
            value = (alpha - 1) / alpha * (r - uppers[alpha])
            if value > best_value:
                best_value, best_alpha = value, alpha
        rows.append(
            ExponentRow(
                r=r,
                exponent=best_value,
                best_alpha=best_alpha,
                status=status,
                failed_alphas=failed,
            )
        )
    return rows


def rate_correction(alpha: float, epsilon: float, n: int) -> float:
    """−(α/(n(α−1))) log2(1−ε)."""
    return -(alpha / (n * (alpha - 1))) * math.log2(1 - epsilon)


def two_way_rate_bound(
    channel: QChannel,
    alphas: Sequence[float],
    epsilon: float,
    n: int,
    options: Optional[SolverConfig] = None,
    bits: Optional[int] = None,
    jobs: Optional[int] = None,
) -> RateBound:
    """min over α of capacity_bound(N, α) − (α/(n(α−1))) log2(1−ε)."""
    if not 0 <= epsilon < 1:
        raise OutOfRangeError(f"epsilon must lie in [0, 1), got {epsilon}")
    if n < 1:
        raise OutOfRangeError(f"n must be >= 1, got {n}")
    alphas = [check_alpha(a) for a in alphas]
    if not alphas:
        raise OutOfRangeError("alpha grid is empty")
    cells = {
        (alpha,): (lambda a=alpha: capacity_bound(channel, a, options, bits))
        for alpha in alphas
    }
    good, failed = _split_outcomes(run_cells(cells, jobs))
    status = _grid_status(good, failed)
    if not good:
        return RateBound(
            value=math.nan,
            best_alpha=None,
            correction=math.nan,
            status=status,
            failed_alphas=failed,
        )

    best: Optional[RateBound] = None
    for outcome in good:
        alpha = outcome.key[0]
        correction = rate_correction(alpha, epsilon, n)
        value = outcome.value.value + correction
        if best is None or value < best.value:
            best = RateBound(
                value=value,
                best_alpha=alpha,
                correction=correction,
                status=status,
                failed_alphas=failed,
            )
    assert best is not None
    return best


def capacity_refinement(
    channel: QChannel,
    alpha: float,
    m: int,
    options: Optional[SolverConfig] = None,
    bits: Optional[int] = None,
) -> HierarchyBound:
    """(1/m) D#_α(N^⊗m‖M^⊗m) with M fixed to the capacity_bound minimizer at alpha.

    Any fixed M in V_Θ keeps the bound valid, so this only refines the
    single-copy value; m=1 reproduces capacity_bound.
    """
    options = options or SolverConfig()
    single = capacity_bound(channel, alpha, options, bits)
    assert single.minimizer_choi is not None
    minimizer = QChannel.from_choi(
        single.minimizer_choi,
        channel.dim_in,
        channel.dim_out,
        name="capacity-minimizer",
    )
    logger.info(
        f"Refining {channel.name} at alpha={alpha:g} with m={m} "
        f"(single-copy bound {single.value:.6f})"
    )
    return hierarchy_bound(channel, minimizer, alpha, m, options, bits)
