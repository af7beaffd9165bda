"""Primal-dual interior-point solver for ConicProgram.

Complex Hermitian blocks are realified, H = P + iQ ↦ [[P, −Q], [Q, P]], and
solved by a single real symmetric kernel: Nesterov-Todd scaling, Mehrotra
predictor-corrector steps and a dense Cholesky factorization of the Schur
complement.
"""

import itertools
import logging
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg as la

from ..config import SolverConfig
from ..errors import SizeBudgetError
from ..models import SolverStatus, SolverSummary
from .dump import dump_program
from .program import AffineExpr, ConicProgram, hvec, imaginary_mask, smat

logger = logging.getLogger(__name__)

MIN_STEP = 1e-12
ACCEPT_FACTOR = 1e3
# Pivots of the row Gram matrix below this (relative) mark dependent rows.
DEPENDENT_ROW_TOL = 1e-10
CONSISTENCY_TOL = 1e-7
REFINE_STEPS = 3
BACKOFF_STEPS = 8

_dump_counter = itertools.count(1)
_dump_lock = threading.Lock()


def realify_matrix(matrix: np.ndarray) -> np.ndarray:
    """[[P, −Q], [Q, P]] for H = P + iQ; works on stacks."""
    matrix = np.asarray(matrix)
    p, q = matrix.real, matrix.imag
    top = np.concatenate([p, -q], axis=-1)
    bottom = np.concatenate([q, p], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def derealify_matrix(matrix: np.ndarray) -> np.ndarray:
    """Inverse of realify_matrix, averaging the redundant blocks."""
    n = matrix.shape[-1] // 2
    x11, x12 = matrix[..., :n, :n], matrix[..., :n, n:]
    x21, x22 = matrix[..., n:, :n], matrix[..., n:, n:]
    return (x11 + x22) / 2 + 1j * (x21 - x12) / 2


@dataclass
class RealBlock:
    """One real symmetric block: coefficient stack over the rows touching it."""

    name: str
    dim: int
    rows: np.ndarray
    coeffs: np.ndarray
    objective: np.ndarray


@dataclass
class RealProgram:
    """min Σ ⟨C_b, X_b⟩  s.t.  Σ_b ⟨A_kb, X_b⟩ = b_k,  X_b ⪰ 0 (all real)."""

    blocks: List[RealBlock]
    rhs: np.ndarray
    row_index: np.ndarray
    row_scale: np.ndarray
    num_original_rows: int
    is_real: bool
    objective_offset: float = 0.0

    @property
    def total_dim(self) -> int:
        return sum(block.dim for block in self.blocks)


class _Infeasible(Exception):
    pass


def is_conjugation_invariant(program: ConicProgram, tol: float = 1e-14) -> bool:
    """Whether conj(X) is feasible whenever X is, with the same objective.

    Holds when every row is either even (no imaginary-coordinate coefficients)
    or odd (no real-coordinate coefficients and zero right-hand side), and the
    objective has no imaginary-coordinate part.
    """
    real_part = np.zeros(program.num_rows)
    imag_part = np.zeros(program.num_rows)
    for block, rows in zip(program.blocks, program.rows):
        mask = imaginary_mask(block.dim)
        coo = rows.tocoo()
        imag_cols = mask[coo.col]
        np.add.at(imag_part, coo.row[imag_cols], np.abs(coo.data[imag_cols]))
        np.add.at(real_part, coo.row[~imag_cols], np.abs(coo.data[~imag_cols]))
    for block, objective in zip(program.blocks, program.objective):
        if np.any(np.abs(objective[imaginary_mask(block.dim)]) > tol):
            return False
    even = imag_part <= tol
    odd = (real_part <= tol) & (np.abs(program.rhs) <= tol)
    return bool(np.all(even | odd))


def realify(program: ConicProgram, exploit_real: bool = True) -> RealProgram:
    """Real symmetric form of a complex Hermitian program.

    When exploit_real is set and the program is conjugation invariant, blocks
    stay n×n real and the odd rows vanish; otherwise each block becomes 2n×2n
    with pairings scaled by 1/2 so optimal values are unchanged.
    """
    is_real = exploit_real and is_conjugation_invariant(program)
    keep = np.ones(program.num_rows, dtype=bool)
    if is_real:
        for block, rows in zip(program.blocks, program.rows):
            coo = rows.tocoo()
            imag_cols = imaginary_mask(block.dim)[coo.col]
            keep[coo.row[imag_cols & (np.abs(coo.data) > 0)]] = False

    row_norm_sq = np.zeros(program.num_rows)
    for rows in program.rows:
        coo = rows.tocoo()
        np.add.at(row_norm_sq, coo.row, coo.data**2)
    nonzero = row_norm_sq > 0

    zero_rows = keep & ~nonzero
    if np.any(np.abs(program.rhs[zero_rows]) > 0):
        bad = int(np.flatnonzero(zero_rows & (np.abs(program.rhs) > 0))[0])
        label = program.labels[bad] if program.labels else str(bad)
        raise _Infeasible(f"row {label} reads 0 = {program.rhs[bad]:.3e}")

    kept = np.flatnonzero(keep & nonzero)
    dropped = program.num_rows - len(kept)
    if dropped:
        logger.debug(f"Presolve dropped {dropped} of {program.num_rows} rows")
    scale = np.sqrt(row_norm_sq[kept])

    blocks: List[RealBlock] = []
    for spec, rows, objective in zip(program.blocks, program.rows, program.objective):
        sub = rows[kept]
        touching = np.flatnonzero(sub.getnnz(axis=1))
        dense = sub[touching].toarray() / scale[touching, None]
        coeffs = smat(dense, spec.dim)
        c = smat(objective, spec.dim)
        if is_real:
            block = RealBlock(spec.name, spec.dim, touching, coeffs.real, c.real)
        else:
            block = RealBlock(
                spec.name,
                2 * spec.dim,
                touching,
                realify_matrix(coeffs) / 2,
                realify_matrix(c) / 2,
            )
        blocks.append(block)

    problem = RealProgram(
        blocks=blocks,
        rhs=program.rhs[kept] / scale,
        row_index=kept,
        row_scale=scale,
        num_original_rows=program.num_rows,
        is_real=is_real,
        objective_offset=program.objective_offset,
    )
    return _drop_dependent_rows(problem, program.labels)


def _row_gram(problem: RealProgram) -> np.ndarray:
    m = len(problem.rhs)
    gram = np.zeros((m, m))
    for block in problem.blocks:
        k = len(block.rows)
        if k:
            flat = block.coeffs.reshape(k, -1)
            gram[np.ix_(block.rows, block.rows)] += flat @ flat.T
    return gram


def _drop_dependent_rows(problem: RealProgram, labels: List[str]) -> RealProgram:
    """Remove rows that are combinations of others; inconsistent ones are infeasible.

    Dependent rows make the Schur complement singular, so they are found once
    by a pivoted QR of the row Gram matrix.
    """
    m = len(problem.rhs)
    if m < 2:
        return problem
    gram = _row_gram(problem)
    _, r, perm = la.qr(gram, mode="economic", pivoting=True)
    pivots = np.abs(np.diag(r))
    rank = int(np.sum(pivots > DEPENDENT_ROW_TOL * max(pivots[0], 1e-300)))
    if rank == m:
        return problem

    kept = np.sort(perm[:rank])
    dropped = np.sort(perm[rank:])
    coeffs = la.solve(
        gram[np.ix_(kept, kept)], gram[np.ix_(kept, dropped)], assume_a="pos"
    )
    mismatch = np.abs(problem.rhs[dropped] - coeffs.T @ problem.rhs[kept])
    scale = 1 + float(np.max(np.abs(problem.rhs), initial=0.0))
    if np.any(mismatch > CONSISTENCY_TOL * scale):
        worst = int(dropped[np.argmax(mismatch)])
        original = int(problem.row_index[worst])
        label = labels[original] if labels else str(original)
        raise _Infeasible(
            f"row {label} contradicts the rows it depends on "
            f"(mismatch {float(np.max(mismatch)):.3e})"
        )
    logger.debug(f"Presolve dropped {m - rank} dependent rows")

    remap = np.full(m, -1)
    remap[kept] = np.arange(rank)
    blocks = []
    for block in problem.blocks:
        live = remap[block.rows] >= 0
        blocks.append(
            RealBlock(
                block.name,
                block.dim,
                remap[block.rows[live]],
                block.coeffs[live],
                block.objective,
            )
        )
    return RealProgram(
        blocks=blocks,
        rhs=problem.rhs[kept],
        row_index=problem.row_index[kept],
        row_scale=problem.row_scale[kept],
        num_original_rows=problem.num_original_rows,
        is_real=problem.is_real,
        objective_offset=problem.objective_offset,
    )


@dataclass
class ConicSolution:
    """Outcome of solve(): status, primal blocks by name, dual vector, residuals."""

    status: SolverStatus
    primal_blocks: Dict[str, np.ndarray] = field(default_factory=dict)
    dual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    primal_obj: float = float("nan")
    dual_obj: float = float("nan")
    primal_res: float = float("inf")
    dual_res: float = float("inf")
    gap: float = float("inf")
    iterations: int = 0
    dimension: int = 0
    rows: int = 0
    tol: float = 1e-8

    def summary(self) -> SolverSummary:
        return SolverSummary(
            status=self.status,
            primal_obj=self.primal_obj,
            dual_obj=self.dual_obj,
            primal_res=self.primal_res,
            dual_res=self.dual_res,
            gap=self.gap,
            iterations=self.iterations,
            dimension=self.dimension,
            rows=self.rows,
        )

    @property
    def max_residual(self) -> float:
        return max(self.primal_res, self.dual_res, self.gap)

    @property
    def acceptable(self) -> bool:
        """Optimal, or stalled close enough to optimal to be used."""
        if self.status == SolverStatus.OPTIMAL:
            return True
        if self.status in (SolverStatus.MAX_ITER, SolverStatus.NUMERICAL_FAILURE):
            if self.max_residual <= ACCEPT_FACTOR * self.tol:
                logger.warning(
                    f"Accepting {self.status.value} solution with residual "
                    f"{self.max_residual:.2e}"
                )
                return True
        return False

    def value(self, expr: AffineExpr) -> np.ndarray:
        return expr.evaluate(self.primal_blocks)


@dataclass
class _Scaling:
    chol_x: np.ndarray
    chol_s: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    w: np.ndarray
    lam: np.ndarray


def _sym(matrix: np.ndarray) -> np.ndarray:
    return (matrix + np.swapaxes(matrix, -1, -2)) / 2


def _nt_scaling(x: np.ndarray, s: np.ndarray) -> _Scaling:
    lx = np.linalg.cholesky(x)
    ls = np.linalg.cholesky(s)
    u, sigma, vt = np.linalg.svd(ls.T @ lx)
    lx_inv = la.solve_triangular(lx, np.eye(len(x)), lower=True)
    root = np.sqrt(sigma)
    g = lx @ vt.T / root
    g_inv = (root[:, None] * vt) @ lx_inv
    return _Scaling(lx, ls, g, g_inv, g @ g.T, sigma)


def _is_pd(matrices: List[np.ndarray]) -> bool:
    try:
        for matrix in matrices:
            np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return True


class _SchurSystem:
    """Factored M + reg·I, with refinement against the unshifted M.

    The static shift keeps the factorization alive; refinement restores
    A·dX = r_p, which a shifted solve alone would miss.
    """

    def __init__(
        self, schur: np.ndarray, factor: Tuple[np.ndarray, bool], reg: float
    ) -> None:
        self.schur = schur
        self.factor = factor
        self.reg = reg

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        dy = la.cho_solve(self.factor, rhs)
        if self.reg == 0:
            return dy
        residual = rhs - self.schur @ dy
        norm = float(np.linalg.norm(residual))
        for _ in range(REFINE_STEPS):
            if norm <= 1e-15 * (1 + float(np.linalg.norm(rhs))):
                break
            candidate = dy + la.cho_solve(self.factor, residual)
            candidate_residual = rhs - self.schur @ candidate
            candidate_norm = float(np.linalg.norm(candidate_residual))
            if candidate_norm >= norm:
                break
            dy, residual, norm = candidate, candidate_residual, candidate_norm
        return dy


def _max_step(chol: np.ndarray, delta: np.ndarray) -> float:
    """Largest a with L Lᵀ + a·Δ ⪰ 0."""
    inv = la.solve_triangular(chol, np.eye(len(chol)), lower=True)
    smallest = float(np.linalg.eigvalsh(_sym(inv @ delta @ inv.T))[0])
    return np.inf if smallest >= 0 else -1.0 / smallest


class _Kernel:
    """Dense real NT predictor-corrector iteration over a RealProgram."""

    def __init__(self, problem: RealProgram, options: SolverConfig) -> None:
        self.problem = problem
        self.options = options
        self.blocks = problem.blocks
        self.b = problem.rhs
        self.m = len(self.b)
        self.n_total = problem.total_dim

    def a_apply(self, xs: List[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.m)
        for block, x in zip(self.blocks, xs):
            if len(block.rows):
                out[block.rows] += np.einsum("kij,ij->k", block.coeffs, x)
        return out

    def a_adjoint(self, y: np.ndarray) -> List[np.ndarray]:
        return [
            np.einsum("k,kij->ij", y[block.rows], block.coeffs)
            if len(block.rows)
            else np.zeros((block.dim, block.dim))
            for block in self.blocks
        ]

    def schur(self, scalings: List[_Scaling]) -> np.ndarray:
        schur = np.zeros((self.m, self.m))
        for block, scaling in zip(self.blocks, scalings):
            k = len(block.rows)
            if not k:
                continue
            wdw = scaling.w @ block.coeffs @ scaling.w
            part = block.coeffs.reshape(k, -1) @ wdw.reshape(k, -1).T
            schur[np.ix_(block.rows, block.rows)] += part
        return _sym(schur)

    def factor(self, schur: np.ndarray) -> "_SchurSystem":
        """Cholesky of M + reg·I; the shift grows only while factoring fails."""
        peak = max(1.0, float(np.max(np.diag(schur), initial=0.0)))
        reg = self.options.regularization
        for _ in range(5):
            try:
                factor = la.cho_factor(schur + reg * np.eye(self.m), lower=True)
                return _SchurSystem(schur, factor, reg)
            except la.LinAlgError:
                reg = max(reg * 1e3, 1e-14 * peak)
        raise la.LinAlgError("Schur complement is not positive definite")

    def initial_point(self) -> Tuple[List[np.ndarray], np.ndarray, List[np.ndarray]]:
        xs, ss = [], []
        for block in self.blocks:
            n = block.dim
            root_n = np.sqrt(n)
            norms = (
                np.linalg.norm(block.coeffs.reshape(len(block.rows), -1), axis=1)
                if len(block.rows)
                else np.zeros(0)
            )
            xi = max(10.0, root_n)
            if len(norms):
                ratios = root_n * (1 + np.abs(self.b[block.rows])) / (1 + norms)
                xi = max(xi, float(np.max(ratios)))
            eta = max(10.0, root_n, float(np.linalg.norm(block.objective)))
            if len(norms):
                eta = max(eta, float(np.max(norms)))
            xs.append(xi * np.eye(n))
            ss.append(eta * np.eye(n))
        return xs, np.zeros(self.m), ss

    def direction(
        self,
        system: "_SchurSystem",
        scalings: List[_Scaling],
        rp: np.ndarray,
        rd: List[np.ndarray],
        rc: List[np.ndarray],
    ) -> Tuple[List[np.ndarray], np.ndarray, List[np.ndarray]]:
        ghg, wrdw = [], []
        for scaling, rd_b, rc_b in zip(scalings, rd, rc):
            lam = scaling.lam
            h = 2 * rc_b / (lam[:, None] + lam[None, :])
            ghg.append(scaling.g @ h @ scaling.g.T)
            wrdw.append(scaling.w @ rd_b @ scaling.w)
        rhs = rp - self.a_apply([a - b for a, b in zip(ghg, wrdw)])
        dy = system.solve(rhs)
        aty = self.a_adjoint(dy)
        ds = [rd_b - aty_b for rd_b, aty_b in zip(rd, aty)]
        dx = [_sym(g - s.w @ d @ s.w) for g, s, d in zip(ghg, scalings, ds)]
        return dx, dy, ds

    def step_lengths(
        self,
        scalings: List[_Scaling],
        dx: List[np.ndarray],
        ds: List[np.ndarray],
    ) -> Tuple[float, float]:
        ap = min(_max_step(s.chol_x, d) for s, d in zip(scalings, dx))
        ad = min(_max_step(s.chol_s, d) for s, d in zip(scalings, ds))
        return ap, ad


def _inner(xs: List[np.ndarray], ys: List[np.ndarray]) -> float:
    return float(sum(np.sum(x * y) for x, y in zip(xs, ys)))


def _norm(xs: List[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.sum(x * x) for x in xs)))


def _max_eig(xs: List[np.ndarray]) -> float:
    return max(float(np.linalg.eigvalsh(x)[-1]) for x in xs)


@dataclass
class _RealResult:
    status: SolverStatus
    xs: List[np.ndarray]
    y: np.ndarray
    ss: List[np.ndarray]
    primal_obj: float
    dual_obj: float
    primal_res: float
    dual_res: float
    gap: float
    iterations: int

    @property
    def max_residual(self) -> float:
        return max(self.primal_res, self.dual_res, self.gap)


def _iterate(problem: RealProgram, options: SolverConfig) -> _RealResult:
    """Run the NT predictor-corrector loop.

    A run that ends early returns its best iterate (smallest max residual),
    not the last one, so a late breakdown near the boundary loses nothing.
    """
    kernel = _Kernel(problem, options)
    tol = options.tol
    frac = options.step_fraction
    b = kernel.b
    cs = [block.objective for block in kernel.blocks]
    norm_b = float(np.linalg.norm(b))
    norm_c = _norm(cs)

    xs, y, ss = kernel.initial_point()
    status = SolverStatus.MAX_ITER
    best: Optional[_RealResult] = None
    current: Optional[_RealResult] = None
    iteration = 0

    for iteration in range(1, options.max_iter + 1):
        aty = kernel.a_adjoint(y)
        rp = b - kernel.a_apply(xs)
        rd = [c - a - s for c, a, s in zip(cs, aty, ss)]
        pobj = _inner(cs, xs)
        dobj = float(b @ y)
        complementarity = _inner(xs, ss)
        mu = complementarity / kernel.n_total

        rel_p = float(np.linalg.norm(rp)) / (1 + norm_b)
        rel_d = _norm(rd) / (1 + norm_c)
        gap = max(abs(pobj - dobj), complementarity) / (1 + abs(pobj))
        logger.debug(
            f"iter {iteration:3d}: pobj {pobj:+.8e} dobj {dobj:+.8e} "
            f"pres {rel_p:.2e} dres {rel_d:.2e} gap {gap:.2e} mu {mu:.2e}"
        )
        current = _RealResult(
            status, xs, y, ss, pobj, dobj, rel_p, rel_d, gap, iteration
        )
        if best is None or current.max_residual <= best.max_residual:
            best = current

        if rel_p <= tol and rel_d <= tol and gap <= tol:
            status = SolverStatus.OPTIMAL
            break
        if dobj > 0 and rel_p > tol:
            # y is a Farkas ray once A*y is negative semidefinite
            certificate = min(
                _norm([a + s for a, s in zip(aty, ss)]), max(_max_eig(aty), 0.0)
            ) / dobj
            if certificate <= tol:
                status = SolverStatus.INFEASIBLE
                break
        if pobj < 0 and rel_d > tol:
            certificate = float(np.linalg.norm(kernel.a_apply(xs))) / -pobj
            if certificate <= tol:
                status = SolverStatus.UNBOUNDED
                break

        try:
            scalings = [_nt_scaling(x, s) for x, s in zip(xs, ss)]
            system = kernel.factor(kernel.schur(scalings))

            rc = [-np.diag(s.lam**2) for s in scalings]
            dx, dy, ds = kernel.direction(system, scalings, rp, rd, rc)
            ap, ad = kernel.step_lengths(scalings, dx, ds)
            ap, ad = min(1.0, ap), min(1.0, ad)
            mu_aff = (
                _inner(
                    [x + ap * d for x, d in zip(xs, dx)],
                    [s + ad * d for s, d in zip(ss, ds)],
                )
                / kernel.n_total
            )
            sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

            rc = []
            for s, dx_b, ds_b in zip(scalings, dx, ds):
                dx_t = s.g_inv @ dx_b @ s.g_inv.T
                ds_t = s.g.T @ ds_b @ s.g
                n = len(s.lam)
                rc.append(
                    sigma * mu * np.eye(n)
                    - np.diag(s.lam**2)
                    - _sym(dx_t @ ds_t)
                )
            dx, dy, ds = kernel.direction(system, scalings, rp, rd, rc)
            ap, ad = kernel.step_lengths(scalings, dx, ds)
        except (np.linalg.LinAlgError, la.LinAlgError) as e:
            logger.warning(f"Numerical failure at iteration {iteration}: {e}")
            status = SolverStatus.NUMERICAL_FAILURE
            break

        ap, ad = min(1.0, frac * ap), min(1.0, frac * ad)
        accepted = False
        new_xs, new_ss = xs, ss
        for _ in range(BACKOFF_STEPS):
            if max(ap, ad) < MIN_STEP:
                break
            new_xs = [_sym(x + ap * d) for x, d in zip(xs, dx)]
            new_ss = [_sym(s + ad * d) for s, d in zip(ss, ds)]
            if _is_pd(new_xs) and _is_pd(new_ss):
                accepted = True
                break
            ap, ad = ap / 2, ad / 2
        if not accepted:
            logger.warning(f"Step length collapsed at iteration {iteration}")
            status = SolverStatus.NUMERICAL_FAILURE
            break
        xs, ss = new_xs, new_ss
        y = y + ad * dy

    assert current is not None and best is not None
    final = current
    stalled = status in (SolverStatus.MAX_ITER, SolverStatus.NUMERICAL_FAILURE)
    if stalled and best.max_residual < current.max_residual:
        logger.debug(
            f"Returning iterate {best.iterations} "
            f"(residual {best.max_residual:.2e}) instead of the last one"
        )
        final = best
    final.status = status
    final.iterations = iteration
    return final


def _project_psd(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    return (vectors * np.clip(values, 0, None)) @ vectors.conj().T


def _dump_before_solve(program: ConicProgram, directory: Path) -> Path:
    """Dump to directory/NNNN-<name>.sdp; the counter keeps sweep cells apart."""
    slug = re.sub(r"[^A-Za-z0-9.=-]+", "_", program.name).strip("_") or "program"
    with _dump_lock:
        index = next(_dump_counter)
    directory.mkdir(parents=True, exist_ok=True)
    return dump_program(program, directory / f"{index:04d}-{slug}.sdp")


def solve(
    program: ConicProgram,
    options: Optional[SolverConfig] = None,
    *,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> ConicSolution:
    """Solve a ConicProgram; the status field reports how the run ended.

    Raises:
        SizeBudgetError: If the realified dimension exceeds the size budget
    """
    options = options or SolverConfig()
    overrides = {}
    if tol is not None:
        overrides["tol"] = tol
    if max_iter is not None:
        overrides["max_iter"] = max_iter
    if overrides:
        options = options.model_copy(update=overrides)
    if options.dump_dir is not None:
        _dump_before_solve(program, options.dump_dir)

    try:
        problem = realify(program, options.exploit_real)
    except _Infeasible as e:
        logger.info(f"Program '{program.name}' infeasible in presolve: {e}")
        return ConicSolution(
            status=SolverStatus.INFEASIBLE, rows=program.num_rows, tol=options.tol
        )

    if problem.total_dim > options.size_budget:
        raise SizeBudgetError(
            problem.total_dim, options.size_budget, what=f"realified {program.name}"
        )

    logger.debug(
        f"Solving '{program.name}': {'real' if problem.is_real else 'realified'} "
        f"dim {problem.total_dim}, {len(problem.rhs)} rows"
    )
    result = _iterate(problem, options)

    primal_blocks: Dict[str, np.ndarray] = {}
    for block, x in zip(problem.blocks, result.xs):
        matrix = x.astype(complex) if problem.is_real else derealify_matrix(x)
        primal_blocks[block.name] = _project_psd(matrix)

    dual = np.zeros(problem.num_original_rows)
    dual[problem.row_index] = result.y / problem.row_scale

    solution = ConicSolution(
        status=result.status,
        primal_blocks=primal_blocks,
        dual=dual,
        primal_obj=result.primal_obj + problem.objective_offset,
        dual_obj=result.dual_obj + problem.objective_offset,
        primal_res=result.primal_res,
        dual_res=result.dual_res,
        gap=result.gap,
        iterations=result.iterations,
        dimension=problem.total_dim,
        rows=len(problem.rhs),
        tol=options.tol,
    )
    log = logger.info if result.status == SolverStatus.OPTIMAL else logger.warning
    log(
        f"'{program.name}': {result.status.value} "
        f"after {result.iterations} iterations, "
        f"obj {solution.primal_obj:.10g}, residual {solution.max_residual:.2e}"
    )
    return solution


@dataclass
class CertificateCheck:
    """Independent re-verification of a primal point."""

    min_eigenvalues: Dict[str, float]
    equality_residual: float

    def passed(self, tol: float) -> bool:
        return (
            min(self.min_eigenvalues.values(), default=0.0) >= -10 * tol
            and self.equality_residual <= 10 * tol
        )


def check_certificate(
    program: ConicProgram, solution: ConicSolution
) -> CertificateCheck:
    """Min eigenvalue per block and max relative equality residual of a solution."""
    min_eigenvalues = {
        name: float(np.linalg.eigvalsh(matrix)[0])
        for name, matrix in solution.primal_blocks.items()
    }
    lhs = np.zeros(program.num_rows)
    for block, rows in zip(program.blocks, program.rows):
        lhs += rows @ hvec(solution.primal_blocks[block.name])
    scale = 1 + float(np.max(np.abs(program.rhs), initial=0.0))
    residual = float(np.max(np.abs(lhs - program.rhs), initial=0.0)) / scale
    return CertificateCheck(min_eigenvalues, residual)
