"""Property and golden-value suites run by ``renyi-sharp selftest``.

Every suite draws from ``np.random.default_rng([seed, index])`` where index
is the suite's fixed position in SUITES, so filtering with ``--suite`` does
not change the instances a suite sees. Reports carry no timings and are
byte-identical for a fixed seed.
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from hermitian_ops import as_matrix
from pydantic import BaseModel, Field
from scipy.linalg import block_diag

from .channel_div import d_sharp_channel, hierarchy_bound, max_rains_bound
from .config import SolverConfig
from .divergence import (
    d_binary,
    d_classical,
    d_from_q,
    d_geometric,
    d_max,
    d_pinched,
    d_sandwiched,
    d_sharp_state,
)
from .meanrep import dyadic_approx, mean_eval
from .quantum import (
    QChannel,
    amplitude_damping,
    apply_channel,
    classical_channel,
    depolarizing,
    entangled_pair,
    herm,
    pinch,
    random_channel,
    random_density,
    random_psd,
    random_unitary,
    replacer,
    spec_count,
    tensor_product,
)
from .sdp import ProgramBuilder, check_certificate, solve

logger = logging.getLogger(__name__)

SLACK = 2e-3
MEAN_TOL = 1e-8
RELATIVE_TOL = 1e-4
SUITE_BITS = 12
COARSE_BITS = 10
ALPHAS = (1.25, 1.5, 2.0, 3.0)
# 1/alpha has a short binary expansion, which keeps the channel programs small.
CHANNEL_ALPHAS = (4 / 3, 2.0, 4.0)
ENVELOPE_ALPHA = 64.0
ENVELOPE_MIX = 0.02

Rng = np.random.Generator


class SuiteReport(BaseModel):
    """Outcome of one suite."""

    name: str
    passed: bool
    instances: int
    max_violation: Optional[float] = None
    failures: List[str] = Field(default_factory=list)


class SelftestReport(BaseModel):
    seed: int
    passed: bool
    suites: List[SuiteReport]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


class _Tally:
    """Collects violations of ``value ≤ bound`` style checks."""

    def __init__(self, name: str) -> None:
        self.name = name
        self.instances = 0
        self.worst = 0.0
        self.failures: List[str] = []

    def check(self, violation: float, tolerance: float, what: str) -> None:
        if math.isnan(violation):
            self.failures.append(f"{what}: nan")
            return
        self.worst = max(self.worst, violation)
        if violation > tolerance:
            self.failures.append(f"{what}: violation {violation:.3e} > {tolerance:.0e}")

    def report(self) -> SuiteReport:
        return SuiteReport(
            name=self.name,
            passed=not self.failures,
            instances=self.instances,
            max_violation=self.worst if math.isfinite(self.worst) else None,
            failures=self.failures,
        )


def _pair(rng: Rng, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    return random_density(dim, rng), random_density(dim, rng)


def _suite_ordering(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """D̃_α ≤ D#_α ≤ D̂_α, with the witness re-checked on every solve."""
    tally = _Tally("ordering")
    for k in range(count):
        dim = int(rng.integers(2, 4))
        alpha = float(rng.choice(ALPHAS))
        rho, sigma = _pair(rng, dim)
        result = d_sharp_state(rho, sigma, alpha, options)
        d_upper, d_lower = result.d_bracket
        sandwiched = d_sandwiched(rho, sigma, alpha)
        geometric = d_geometric(rho, sigma, alpha)
        tally.check(sandwiched - d_upper, SLACK, f"#{k} D~ <= D#")
        tally.check(d_lower - geometric, SLACK, f"#{k} D# <= D^")
        tally.check(-(result.witness_residual or 0.0), 1e-6, f"#{k} witness")
        tally.instances += 1
    return tally.report()


def _suite_commuting(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """Diagonal pairs reduce to the classical Rényi divergence."""
    tally = _Tally("commuting")
    for k in range(count):
        dim = int(rng.integers(2, 5))
        alpha = float(rng.choice(ALPHAS))
        p = rng.dirichlet(np.ones(dim))
        q = rng.dirichlet(np.ones(dim))
        result = d_sharp_state(np.diag(p), np.diag(q), alpha, options)
        expected = d_classical(p, q, alpha)
        tally.check(
            abs(result.value_D - expected), SLACK, f"#{k} dim={dim} alpha={alpha}"
        )
        tally.instances += 1
    return tally.report()


def _suite_dpi(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """D#_α(N(ρ)‖N(σ)) ≤ D#_α(ρ‖σ) for random CPTP maps."""
    tally = _Tally("dpi")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        rho, sigma = _pair(rng, 2)
        channel = random_channel(2, int(rng.integers(2, 4)), rng)
        before = d_sharp_state(rho, sigma, alpha, options)
        after = d_sharp_state(
            apply_channel(channel, rho), apply_channel(channel, sigma), alpha, options
        )
        tally.check(after.value_D - before.value_D, SLACK, f"#{k} alpha={alpha}")
        tally.instances += 1
    return tally.report()


def _suite_subadditivity(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """D#_α(ρ1⊗ρ2‖σ1⊗σ2) ≤ D#_α(ρ1‖σ1) + D#_α(ρ2‖σ2)."""
    tally = _Tally("subadditivity")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        rho1, sigma1 = _pair(rng, 2)
        rho2, sigma2 = _pair(rng, 2)
        joint = d_sharp_state(
            np.kron(rho1, rho2), np.kron(sigma1, sigma2), alpha, options
        )
        first = d_sharp_state(rho1, sigma1, alpha, options)
        second = d_sharp_state(rho2, sigma2, alpha, options)
        tally.check(
            joint.value_D - first.value_D - second.value_D, SLACK, f"#{k} alpha={alpha}"
        )
        tally.instances += 1
    return tally.report()


def _suite_invariance(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """Isometric invariance and D(ρ‖cσ) = D(ρ‖σ) − log2 c."""
    tally = _Tally("invariance")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        rho, sigma = _pair(rng, 2)
        isometry = random_unitary(3, rng)[:, :2]
        scale = float(rng.uniform(0.5, 2.0))
        base = d_sharp_state(rho, sigma, alpha, options).value_D
        embedded = d_sharp_state(
            isometry @ rho @ isometry.conj().T,
            isometry @ sigma @ isometry.conj().T,
            alpha,
            options,
        ).value_D
        scaled = d_sharp_state(rho, scale * sigma, alpha, options)
        # σ ↦ cσ multiplies Q by c^{1−α'} at the solved exponent α'
        exponent = scaled.alpha_effective or alpha
        shift = math.log2(scale) * (exponent - 1) / (alpha - 1)
        size = RELATIVE_TOL * (1 + abs(base))
        tally.check(abs(embedded - base), size, f"#{k} isometry")
        tally.check(abs(scaled.value_D - base + shift), size, f"#{k} scaling")
        tally.instances += 1
    return tally.report()


def _suite_additivity(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """Q#_α is additive over direct sums (cq states included)."""
    tally = _Tally("additivity")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        rho1, sigma1 = _pair(rng, 2)
        rho2, sigma2 = _pair(rng, 2)
        weight = float(rng.uniform(0.2, 0.8))
        rho1, rho2 = weight * rho1, (1 - weight) * rho2
        zeros = np.zeros((2, 2))
        rho = np.block([[rho1, zeros], [zeros, rho2]])
        sigma = np.block([[sigma1, zeros], [zeros, sigma2]])
        joint = d_sharp_state(rho, sigma, alpha, options).value_Q
        parts = (
            d_sharp_state(rho1, sigma1, alpha, options).value_Q
            + d_sharp_state(rho2, sigma2, alpha, options).value_Q
        )
        tolerance = RELATIVE_TOL * (1 + abs(parts))
        tally.check(abs(joint - parts), tolerance, f"#{k} alpha={alpha}")
        tally.instances += 1
    return tally.report()


def _mean(a: np.ndarray, b: np.ndarray, beta: float) -> np.ndarray:
    return as_matrix(mean_eval(a, b, beta))


def _max_abs(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix)))


def _min_eig(matrix: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(herm(matrix))[0])


def _suite_mean_identities(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """Transformer, symmetry, homogeneity, tensor and concavity identities of #_β."""
    tally = _Tally("mean_identities")
    dim = 3
    for k in range(count):
        a = random_psd(dim, rng) + np.eye(dim)
        b = random_psd(dim, rng) + np.eye(dim)
        beta = float(rng.uniform(0.05, 0.95))
        base = _mean(a, b, beta)
        scale = 1 + float(np.linalg.norm(base, 2))

        c = random_unitary(dim, rng) @ np.diag(rng.uniform(0.5, 2.0, dim))
        transformed = _mean(herm(c @ a @ c.conj().T), herm(c @ b @ c.conj().T), beta)
        tally.check(
            _max_abs(transformed - c @ base @ c.conj().T) / scale,
            MEAN_TOL * 10,
            f"#{k} transformer",
        )
        tally.check(
            _max_abs(_mean(b, a, 1 - beta) - base) / scale, MEAN_TOL, f"#{k} symmetry"
        )
        s, t = rng.uniform(0.5, 2.0, 2)
        expected = s ** (1 - beta) * t**beta * base
        tally.check(
            _max_abs(_mean(s * a, t * b, beta) - expected) / scale,
            MEAN_TOL,
            f"#{k} homogeneity",
        )

        a2 = random_psd(2, rng) + np.eye(2)
        b2 = random_psd(2, rng) + np.eye(2)
        tensor = _mean(np.kron(a, a2), np.kron(b, b2), beta)
        tally.check(
            _max_abs(tensor - np.kron(base, _mean(a2, b2, beta)))
            / (scale * (1 + float(np.linalg.norm(a2, 2)))),
            MEAN_TOL * 10,
            f"#{k} tensor",
        )

        a3 = random_psd(dim, rng) + np.eye(dim)
        b3 = random_psd(dim, rng) + np.eye(dim)
        lam = float(rng.uniform(0.1, 0.9))
        mixed = _mean(lam * a + (1 - lam) * a3, lam * b + (1 - lam) * b3, beta)
        gap = mixed - lam * base - (1 - lam) * _mean(a3, b3, beta)
        tally.check(-_min_eig(gap) / scale, MEAN_TOL, f"#{k} concavity")

        channel = random_channel(dim, 2, rng)
        mapped = _mean(
            as_matrix(apply_channel(channel, a)),
            as_matrix(apply_channel(channel, b)),
            beta,
        )
        gap = mapped - as_matrix(apply_channel(channel, base))
        tally.check(-_min_eig(gap) / scale, MEAN_TOL, f"#{k} cp-monotone")
        tally.instances += 1
    return tally.report()


def _suite_pinching(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """ρ ⪯ |spec σ|·pinch_σ(ρ) and D_pinched ≤ D̃_α."""
    tally = _Tally("pinching")
    for k in range(count):
        dim = int(rng.integers(2, 5))
        alpha = float(rng.choice(ALPHAS))
        rho = random_density(dim, rng)
        # repeated eigenvalues exercise the cluster grouping
        levels = rng.choice([0.2, 0.5, 1.0], size=dim)
        u = random_unitary(dim, rng)
        sigma = herm(u @ np.diag(levels / levels.sum()) @ u.conj().T)
        pinched = as_matrix(pinch(rho, sigma))
        gap = spec_count(sigma) * pinched - rho
        tally.check(-float(np.linalg.eigvalsh(herm(gap))[0]), 1e-8, f"#{k} inequality")
        tally.check(
            d_pinched(rho, sigma, alpha) - d_sandwiched(rho, sigma, alpha),
            1e-8,
            f"#{k} pinched <= sandwiched",
        )
        tally.instances += 1
    return tally.report()


def _suite_solver(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """λ_max epigraphs and simplex LPs with known optima, certificates re-checked."""
    tally = _Tally("solver")
    for k in range(count):
        dim = int(rng.integers(2, 5))
        builder = ProgramBuilder(f"selftest-lmax-{k}")
        h = random_psd(dim, rng, real=bool(k % 2))
        t = builder.variable("t", 1)
        builder.add_epigraph(t, builder.constant(h), "epi")
        builder.minimize(t)
        program = builder.build()
        solution = solve(program, options)
        expected = float(np.linalg.eigvalsh(h)[-1])
        tally.check(
            abs(solution.primal_obj - expected) / (1 + expected),
            1e-6,
            f"#{k} lambda_max",
        )
        if not check_certificate(program, solution).passed(options.tol):
            tally.failures.append(f"#{k} certificate")

        costs = rng.normal(size=dim)
        builder = ProgramBuilder(f"selftest-lp-{k}")
        xs = [builder.variable(f"x{i}", 1) for i in range(dim)]
        total = xs[0]
        objective = xs[0] * float(costs[0])
        for i in range(1, dim):
            total = total + xs[i]
            objective = objective + xs[i] * float(costs[i])
        builder.add_equality(total - builder.scalar(1.0), "simplex")
        builder.minimize(objective)
        program = builder.build()
        solution = solve(program, options)
        tally.check(
            abs(solution.primal_obj - float(np.min(costs))), 1e-6, f"#{k} simplex lp"
        )
        tally.instances += 1
    return tally.report()


def _full_rank_channel(rng: Rng, dim: int = 2) -> QChannel:
    """Random channel mixed with complete depolarization so J^M is invertible."""
    mixed = 0.5 * random_channel(dim, dim, rng, n_kraus=dim * dim).choi.entries
    mixed = mixed + 0.5 * depolarizing(1.0, dim).choi.entries
    return QChannel.from_choi(mixed, dim, dim, name="mixed")


def _suite_channel_subadditivity(
    rng: Rng, count: int, options: SolverConfig
) -> SuiteReport:
    """D#_α(N1⊗N2‖M1⊗M2) ≤ D#_α(N1‖M1) + D#_α(N2‖M2)."""
    tally = _Tally("channel_subadditivity")
    for k in range(count):
        alpha = float(rng.choice(CHANNEL_ALPHAS))
        n1, m1 = random_channel(2, 2, rng), _full_rank_channel(rng)
        n2, m2 = random_channel(2, 2, rng), _full_rank_channel(rng)
        joint = d_sharp_channel(
            tensor_product(n1, n2), tensor_product(m1, m2), alpha, options
        )
        first = d_sharp_channel(n1, m1, alpha, options)
        second = d_sharp_channel(n2, m2, alpha, options)
        tally.check(
            joint.value_D - first.value_D - second.value_D,
            SLACK,
            f"#{k} alpha={alpha:g}",
        )
        tally.instances += 1
    return tally.report()


def _suite_chain_rule(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """D#_α(N(ρ)‖M(σ)) ≤ D#_α(ρ‖σ) + D#_α(N‖M)."""
    tally = _Tally("chain_rule")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        rho, sigma = _pair(rng, 2)
        n, m = random_channel(2, 2, rng), _full_rank_channel(rng)
        after = d_sharp_state(
            apply_channel(n, rho), apply_channel(m, sigma), alpha, options
        )
        states = d_sharp_state(rho, sigma, alpha, options)
        channels = d_sharp_channel(n, m, alpha, options)
        tally.check(
            after.value_D - states.value_D - channels.value_D,
            SLACK,
            f"#{k} alpha={alpha:g}",
        )
        tally.instances += 1
    return tally.report()


def _suite_replacer(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """Replacer channels W ↦ tr(W)ρ and W ↦ tr(W)σ give D#_α(ρ‖σ)."""
    tally = _Tally("replacer")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        dim_in = int(rng.integers(1, 4))
        rho, sigma = _pair(rng, 2)
        state = d_sharp_state(rho, sigma, alpha, options).value_D
        channel = d_sharp_channel(
            replacer(rho, dim_in), replacer(sigma, dim_in), alpha, options
        ).value_D
        tally.check(
            abs(channel - state),
            RELATIVE_TOL * (1 + abs(state)),
            f"#{k} dim_in={dim_in} alpha={alpha:g}",
        )
        tally.instances += 1
    return tally.report()


def _suite_hierarchy(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """The m=2 upper member never exceeds the m=1 member."""
    tally = _Tally("hierarchy")
    for k in range(count):
        alpha = float(rng.choice(CHANNEL_ALPHAS))
        n = amplitude_damping(float(rng.uniform(0.1, 0.9)))
        m = depolarizing(float(rng.uniform(0.2, 0.8)))
        single = hierarchy_bound(n, m, alpha, 1, options)
        double = hierarchy_bound(n, m, alpha, 2, options)
        tally.check(double.upper - single.upper, SLACK, f"#{k} alpha={alpha:g}")
        tally.instances += 1
    return tally.report()


def _suite_convergence(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """The bracket at COARSE_BITS contains the bracket at SUITE_BITS."""
    tally = _Tally("convergence")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        rho, sigma = _pair(rng, 2)
        coarse = d_sharp_state(rho, sigma, alpha, options, bits=COARSE_BITS)
        fine = d_sharp_state(rho, sigma, alpha, options, bits=SUITE_BITS)
        tolerance = RELATIVE_TOL * (1 + abs(coarse.value_D))
        tally.check(
            fine.d_bracket[0] - coarse.d_bracket[0], tolerance, f"#{k} upper end"
        )
        tally.check(
            coarse.d_bracket[1] - fine.d_bracket[1], tolerance, f"#{k} lower end"
        )
        tally.instances += 1
    return tally.report()


def _suite_envelope(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """D̃_α ≤ D#_α ≤ D_max at a large alpha, for ρ close to σ."""
    tally = _Tally("envelope")
    for k in range(count):
        dim = int(rng.integers(2, 4))
        sigma = 0.5 * np.eye(dim) / dim + 0.5 * random_density(dim, rng)
        rho = (1 - ENVELOPE_MIX) * sigma + ENVELOPE_MIX * random_density(dim, rng)
        result = d_sharp_state(rho, sigma, ENVELOPE_ALPHA, options)
        tally.check(
            d_sandwiched(rho, sigma, ENVELOPE_ALPHA) - result.value_D,
            SLACK,
            f"#{k} D~ <= D#",
        )
        tally.check(result.value_D - d_max(rho, sigma), SLACK, f"#{k} D# <= Dmax")
        tally.instances += 1
    return tally.report()


def _suite_homogeneity(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """Q#_α(λρ‖λσ) = λ Q#_α(ρ‖σ)."""
    tally = _Tally("homogeneity")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        rho, sigma = _pair(rng, int(rng.integers(2, 4)))
        scale = float(rng.uniform(0.2, 5.0))
        base = d_sharp_state(rho, sigma, alpha, options).value_Q
        scaled = d_sharp_state(scale * rho, scale * sigma, alpha, options).value_Q
        tally.check(
            abs(scaled - scale * base),
            RELATIVE_TOL * (1 + abs(scale * base)),
            f"#{k} scale={scale:.3f}",
        )
        tally.instances += 1
    return tally.report()


def _suite_cq_direct_sum(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """Q#_α(⊕ p_x ρ_x‖⊕ p_x σ_x) = Σ p_x Q#_α(ρ_x‖σ_x)."""
    tally = _Tally("cq_direct_sum")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        letters = int(rng.integers(2, 4))
        p = rng.dirichlet(np.ones(letters))
        pairs = [_pair(rng, 2) for _ in range(letters)]
        rho = block_diag(*[px * r for px, (r, _) in zip(p, pairs)])
        sigma = block_diag(*[px * s for px, (_, s) in zip(p, pairs)])
        joint = d_sharp_state(rho, sigma, alpha, options).value_Q
        parts = sum(
            px * d_sharp_state(r, s, alpha, options).value_Q
            for px, (r, s) in zip(p, pairs)
        )
        tally.check(
            abs(joint - parts),
            RELATIVE_TOL * (1 + abs(parts)),
            f"#{k} letters={letters} alpha={alpha:g}",
        )
        tally.instances += 1
    return tally.report()


def _suite_classical_channels(
    rng: Rng, count: int, options: SolverConfig
) -> SuiteReport:
    """Classical channels: D#_α(N‖M) is the worst input's classical divergence."""
    tally = _Tally("classical_channels")
    for k in range(count):
        alpha = float(rng.choice(ALPHAS))
        dim_in, dim_out = (int(v) for v in rng.integers(2, 4, size=2))
        w_n = rng.dirichlet(np.ones(dim_out), size=dim_in).T
        w_m = rng.dirichlet(np.ones(dim_out), size=dim_in).T
        result = d_sharp_channel(
            classical_channel(w_n), classical_channel(w_m), alpha, options
        )
        exponent = result.alpha_effective or alpha
        worst = float(np.max(np.sum(w_n**exponent * w_m ** (1 - exponent), axis=0)))
        expected = d_from_q(worst, alpha)
        tally.check(
            abs(result.value_D - expected),
            RELATIVE_TOL * (1 + abs(expected)),
            f"#{k} {dim_in}->{dim_out} alpha={alpha:g}",
        )
        tally.instances += 1
    return tally.report()


@dataclass(frozen=True)
class _Golden:
    what: str
    compute: Callable[[SolverConfig], float]
    expected: float
    tolerance: float


def _entangled(eps: float, alpha: float, which: str, options: SolverConfig) -> float:
    rho, sigma = entangled_pair(eps)
    if which == "sandwiched":
        return d_sandwiched(rho, sigma, alpha)
    if which == "geometric":
        return d_geometric(rho, sigma, alpha)
    return d_sharp_state(rho, sigma, alpha, options, bits=10).value_D


# (eps, D~, D#) of the entangled pair at alpha=3/2
ENTANGLED_TABLE = (
    (0.000010000000000, 0.001979612414616, 0.064948649461560),
    (0.000965195713735, 0.039306255352663, 0.327500956788360),
    (0.012223047153898, 0.190081968858065, 0.670575651286053),
    (0.093160276581255, 0.576168429788131, 0.949099672925276),
    (0.199526231496888, 0.801956430936513, 0.993528519561780),
)


def _entangled_table() -> Tuple[_Golden, ...]:
    rows: List[_Golden] = []
    for eps, sandwiched, sharp in ENTANGLED_TABLE:
        rows.append(
            _Golden(
                f"entangled D# alpha=1.5 eps={eps:.3g}",
                lambda o, e=eps: _entangled(e, 1.5, "sharp", o),
                sharp,
                1e-2,
            )
        )
        rows.append(
            _Golden(
                f"entangled D~ alpha=1.5 eps={eps:.3g}",
                lambda o, e=eps: _entangled(e, 1.5, "sandwiched", o),
                sandwiched,
                1e-6,
            )
        )
    return tuple(rows)


GOLDEN = _entangled_table() + (
    _Golden(
        "entangled D^ alpha=1.5 eps=1e-5",
        lambda o: _entangled(1e-5, 1.5, "geometric", o),
        1.0,
        1e-8,
    ),
    _Golden(
        "entangled D# alpha=2 eps=1e-3",
        lambda o: _entangled(1e-3, 2.0, "sharp", o),
        0.362156516791363,
        5e-3,
    ),
    _Golden(
        "entangled D# alpha=4 eps=1e-3",
        lambda o: _entangled(1e-3, 4.0, "sharp", o),
        0.523877,
        5e-3,
    ),
    _Golden(
        "entangled D~ alpha=2 eps=1e-3",
        lambda o: _entangled(1e-3, 2.0, "sandwiched", o),
        0.088431901576697,
        1e-6,
    ),
    _Golden(
        "max-rains ad gamma=0.5",
        lambda o: max_rains_bound(amplitude_damping(0.5), o),
        math.log2(1.5),
        1e-3,
    ),
    _Golden(
        "hierarchy m=1 N=M",
        lambda o: hierarchy_bound(
            amplitude_damping(0.3), amplitude_damping(0.3), 1.5, 1, o
        ).upper,
        0.0,
        1e-4,
    ),
    _Golden(
        "dyadic floor of 2/3 at 8 bits",
        lambda o: dyadic_approx(2 / 3, 8)[0].value,
        170 / 256,
        0.0,
    ),
    _Golden(
        "binary divergence (0.9, 0.5) alpha=2",
        lambda o: d_binary(0.9, 0.5, 2),
        math.log2(1.64),
        1e-12,
    ),
)


def _suite_golden(rng: Rng, count: int, options: SolverConfig) -> SuiteReport:
    """Reference values that do not depend on the seed."""
    tally = _Tally("golden")
    for golden in GOLDEN:
        value = golden.compute(options)
        tally.check(abs(value - golden.expected), golden.tolerance, golden.what)
        tally.instances += 1
    return tally.report()


Suite = Callable[[Rng, int, SolverConfig], SuiteReport]

# Order fixes each suite's random stream; append new suites at the end.
SUITES: Dict[str, Suite] = {
    "ordering": _suite_ordering,
    "commuting": _suite_commuting,
    "dpi": _suite_dpi,
    "subadditivity": _suite_subadditivity,
    "invariance": _suite_invariance,
    "additivity": _suite_additivity,
    "mean_identities": _suite_mean_identities,
    "pinching": _suite_pinching,
    "solver": _suite_solver,
    "golden": _suite_golden,
    "channel_subadditivity": _suite_channel_subadditivity,
    "chain_rule": _suite_chain_rule,
    "replacer": _suite_replacer,
    "hierarchy": _suite_hierarchy,
    "convergence": _suite_convergence,
    "envelope": _suite_envelope,
    "homogeneity": _suite_homogeneity,
    "cq_direct_sum": _suite_cq_direct_sum,
    "classical_channels": _suite_classical_channels,
}

DEFAULT_COUNTS: Dict[str, int] = {
    "ordering": 30,
    "commuting": 50,
    "dpi": 30,
    "subadditivity": 30,
    "invariance": 30,
    "additivity": 30,
    "mean_identities": 30,
    "pinching": 30,
    "solver": 100,
    "golden": len(GOLDEN),
    "channel_subadditivity": 3,
    "chain_rule": 10,
    "replacer": 10,
    "hierarchy": 3,
    "convergence": 10,
    "envelope": 10,
    "homogeneity": 20,
    "cq_direct_sum": 20,
    "classical_channels": 20,
}


def run_selftest(
    seed: int = 0,
    suites: Optional[List[str]] = None,
    count: Optional[int] = None,
    options: Optional[SolverConfig] = None,
) -> SelftestReport:
    """Run the named suites (all by default) and collect a report.

    Suite errors are recorded as failures, never raised.

    Raises:
        KeyError: If a suite name is unknown
    """
    names = list(SUITES)
    selected = suites or names
    unknown = [name for name in selected if name not in SUITES]
    if unknown:
        raise KeyError(
            f"Unknown suite(s) {', '.join(unknown)}. Available: {', '.join(names)}"
        )
    options = (options or SolverConfig()).model_copy(update={"bits": SUITE_BITS})

    reports: List[SuiteReport] = []
    for index, name in enumerate(names):
        if name not in selected:
            continue
        rng = np.random.default_rng([seed, index])
        instances = DEFAULT_COUNTS[name] if count is None else count
        logger.info(f"Running suite '{name}' ({instances} instances)")
        try:
            report = SUITES[name](rng, instances, options)
        except Exception as e:
            logger.warning(f"Suite '{name}' raised: {e}")
            report = SuiteReport(
                name=name,
                passed=False,
                instances=0,
                failures=[f"{type(e).__name__}: {e}"],
            )
        reports.append(report)

    return SelftestReport(
        seed=seed, passed=all(r.passed for r in reports), suites=reports
    )
