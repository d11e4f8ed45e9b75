"""Infeasible primal-dual path-following solver for the augmented decoding LPs.

An LP with parity cuts ``A_std u <= b_std`` and one-sided boxes (``u_i >= 0``
where the LLR is nonnegative, ``u_i <= 1`` otherwise) is rewritten in the
flipped variables ``x_i = u_i`` or ``x_i = 1 - u_i`` so that every box reads
``x_i >= 0`` and the costs ``c_i = |gamma_i|`` are nonnegative; a slack column
per row turns it into ``min c^T x, A x = b, x >= 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .linsolve import (IdentityPreconditioner, KrylovBreakdown, KrylovTrace, NormalOperator,
                       SparseMatrix, TriangularFactor, pcg_solve)
from .precond import find_triangular_set, triangulation_step

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Interior-point failure.

    ``status`` holds diagnostics at the last iterate and ``records`` the
    per-iteration history up to the failure.
    """

    def __init__(self, message: str, status: "SolveStatus", records: Optional[list] = None):
        super().__init__(message)
        self.status = status
        self.records = records if records is not None else []


class IterationLimit(SolverError):
    pass


class NumericalBreakdown(SolverError):
    pass


class LinearSolveError(ArithmeticError):
    """Normal system not solved to tolerance; ``x`` is the best iterate, if any."""

    def __init__(self, message: str, residual: float, x=None, iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.x = x
        self.iterations = iterations


@dataclass
class AugmentedLp:
    """``min c^T x  s.t.  A x = b, x >= 0`` with the last ``p`` columns as slacks."""

    a: SparseMatrix
    b: np.ndarray
    c: np.ndarray
    flip: np.ndarray
    origin: tuple
    offset: float = 0.0

    @property
    def n(self) -> int:
        return self.flip.size

    @property
    def p(self) -> int:
        return self.b.size

    @property
    def q(self) -> int:
        return self.c.size

    def to_point(self, x) -> np.ndarray:
        """Decoder coordinates ``u`` of an augmented primal vector."""
        xs = np.asarray(x, dtype=float)[: self.n]
        return np.where(self.flip, 1.0 - xs, xs)

    def from_point(self, u) -> np.ndarray:
        """Augmented primal vector (slacks included) of a decoder point ``u``."""
        u = np.asarray(u, dtype=float)
        xs = np.where(self.flip, 1.0 - u, u)
        slack = self.b - self.a.csr[:, : self.n] @ xs
        return np.concatenate([xs, slack])

    def objective(self, x) -> float:
        """``gamma^T u`` for the point encoded by ``x``."""
        return float(self.c @ x) + self.offset


def to_augmented_form(cuts: Sequence, gamma, n: Optional[int] = None) -> AugmentedLp:
    """Build the augmented LP for the given parity inequalities and LLRs.

    ``cuts`` is an ordered sequence of :class:`~lpdecode.relaxation.ParityInequality`;
    row ``k`` of the result comes from ``cuts[k]``.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.size if n is None else n
    flip = gamma < 0
    p = len(cuts)
    rows, cols, vals = [], [], []
    b = np.empty(p)
    for k, cut in enumerate(cuts):
        idx, coef = cut.coefficients()
        coef = np.where(flip[idx], -coef, coef)
        b[k] = cut.rhs - float(np.sum(-coef[flip[idx]]))
        rows.extend([k] * idx.size)
        cols.extend(idx.tolist())
        vals.extend(coef.tolist())
        rows.append(k)
        cols.append(n + k)
        vals.append(1.0)
    a = sp.csr_matrix((vals, (rows, cols)), shape=(p, n + p))
    c = np.concatenate([np.abs(gamma), np.zeros(p)])
    offset = float(gamma[flip].sum())
    return AugmentedLp(SparseMatrix(a), b, c, flip, tuple(cut.check for cut in cuts), offset)


# ---------------------------------------------------------------------------
# Newton machinery
# ---------------------------------------------------------------------------

@dataclass
class IpmIterate:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    mu: float = 0.0

    @property
    def gap(self) -> float:
        return float(self.x @ self.z)


def compute_residuals(lp: AugmentedLp, it: IpmIterate):
    """``rb = b - A x``, ``rc = c - A^T y - z``, ``re = mu e - X Z e``."""
    rb = lp.b - lp.a.matvec(it.x)
    rc = lp.c - lp.a.rmatvec(it.y) - it.z
    re = it.mu - it.x * it.z
    return rb, rc, re


def update_mu(x, z, sigma: float = 0.1) -> float:
    """Barrier parameter ``sigma * x^T z / q``."""
    x = np.asarray(x, dtype=float)
    return float(sigma * (x @ np.asarray(z, dtype=float)) / x.size)


def step_lengths(x, z, dx, dz, damping: float = 0.99):
    """Damped ratio tests keeping ``x`` and ``z`` strictly positive."""

    def ratio(v, dv):
        neg = dv < 0
        if not neg.any():
            return 1.0
        return min(1.0, damping * float(np.min(-v[neg] / dv[neg])))

    return ratio(np.asarray(x), np.asarray(dx)), ratio(np.asarray(z), np.asarray(dz))


class NormalSolver:
    """Solves ``(A D^2 A^T) dy = rhs``. Subclasses implement :meth:`solve`."""

    def solve(self, a: SparseMatrix, d2, rhs, tol: float, x0=None):
        raise NotImplementedError


@dataclass
class PcgNormalSolver(NormalSolver):
    """Matrix-free PCG with an optional greedy triangular preconditioner.

    ``preconditioner`` is ``"none"`` or a search name accepted by
    :func:`lpdecode.precond.find_triangular_set`. ``weight`` selects the
    column weights for the search: ``"d"`` (``sqrt(x/z)``) or ``"x"``.
    With ``direct_fallback`` a system PCG cannot solve within ``maxit`` is
    handed to :class:`DenseNormalSolver`; ``fallbacks`` counts such hand-offs.
    A stagnated solve is first restarted once with ``retry_preconditioner``
    (``retries`` counts these); None disables the restart.
    When ``trace_sink`` is a list, every Krylov trace is appended to it.
    """

    preconditioner: str = "columnwise"
    maxit: Optional[int] = None
    weight: str = "d"
    direct_fallback: bool = False
    retry_preconditioner: Optional[str] = None
    last_set: object = field(default=None, repr=False)
    fallbacks: int = field(default=0, repr=False)
    retries: int = field(default=0, repr=False)
    trace_sink: Optional[list] = field(default=None, repr=False)

    def _precond(self, a, d2, x, method):
        if method == "none":
            self.last_set = None
            return IdentityPreconditioner()
        weights = np.sqrt(d2) if self.weight == "d" or x is None else x
        tset = find_triangular_set(a, weights, method)
        self.last_set = tset
        return tset.preconditioner(a, d2)

    def _run(self, op, m, rhs, x0, tol_sq, maxit):
        try:
            dy, trace = pcg_solve(op, m, rhs, x0=x0, tol=tol_sq, maxit=maxit)
        except KrylovBreakdown as exc:
            # loss of conjugacy from roundoff; keep the partial solution
            dy, trace = exc.x, exc.trace
        if self.trace_sink is not None:
            self.trace_sink.append(trace)
        return dy, trace

    def solve(self, a, d2, rhs, tol, x0=None, x=None):
        op = NormalOperator(a, d2)
        p = a.shape[0]
        nrm = float(np.linalg.norm(rhs))
        if nrm == 0:
            if self.trace_sink is not None:
                self.trace_sink.append(KrylovTrace([0.0], 0, True))
            return np.zeros(p), 0
        maxit = self.maxit if self.maxit is not None else max(1000, 10 * p)
        tol_sq = (tol / nrm) ** 2
        m = self._precond(a, d2, x, self.preconditioner)
        dy, trace = self._run(op, m, rhs, x0, tol_sq, maxit)
        if (not trace.converged and self.retry_preconditioner
                and self.retry_preconditioner != self.preconditioner):
            # restart from the stagnated iterate with a stronger preconditioner
            self.retries += 1
            spent = trace.iterations
            m = self._precond(a, d2, x, self.retry_preconditioner)
            dy, trace = self._run(op, m, rhs, dy, tol_sq, maxit)
            trace.iterations += spent
        if not trace.converged and self.direct_fallback:
            self.fallbacks += 1
            dy, _ = DenseNormalSolver().solve(a, d2, rhs, tol)
            return dy, trace.iterations
        if not trace.converged:
            # normal-equation error turns directly into primal infeasibility
            res = float(np.linalg.norm(rhs - op.matvec(dy)))
            if not np.isfinite(res) or res > 10 * tol:
                raise LinearSolveError(f"PCG stopped at residual {res:.3g} > {tol:.3g}", res,
                                       dy if np.isfinite(res) else None,
                                       trace.iterations)
        return dy, trace.iterations


class DenseNormalSolver(NormalSolver):
    """Dense Cholesky of the assembled normal matrix. Small problems and tests only."""

    def solve(self, a, d2, rhs, tol, x0=None, x=None):
        dense = a.toarray()
        q = (dense * d2) @ dense.T
        shift = 0.0
        scale = float(np.max(np.diag(q))) if q.size else 1.0
        for _ in range(8):
            try:
                cho = sla.cho_factor(q + shift * np.eye(q.shape[0]))
                return sla.cho_solve(cho, rhs), 0
            except np.linalg.LinAlgError:
                # roundoff near the optimum; a tiny diagonal shift restores definiteness
                shift = scale * (1e-14 if shift == 0 else 100 * shift / scale)
        raise LinearSolveError("normal matrix is not positive definite", float("inf"))


def normal_system(lp: AugmentedLp, it: IpmIterate):
    """Weights ``D^2 = X Z^-1`` and right-hand side of the normal equations at ``it``."""
    rb, rc, re = compute_residuals(lp, it)
    d2 = it.x / it.z
    rhs = rb + lp.a.matvec(d2 * rc) - lp.a.matvec(re / it.z)
    return d2, rhs


def newton_direction(lp: AugmentedLp, it: IpmIterate, lin: NormalSolver,
                     rel_tol: float = 1e-12, abs_floor: float = 1e-10, dy0=None,
                     abs_cap: float = np.inf):
    """Newton step from the normal equations.

    The normal system is solved to residual
    ``max(min(rel_tol * ||rhs||, abs_cap), abs_floor)``.
    Returns ``(dx, dy, dz, info)``, ``info`` being the linear solver's
    iteration count.
    """
    rb, rc, re = compute_residuals(lp, it)
    d2 = it.x / it.z
    a = lp.a
    if lp.p:
        rhs = rb + a.matvec(d2 * rc) - a.matvec(re / it.z)
        tol = max(min(rel_tol * float(np.linalg.norm(rhs)), abs_cap), abs_floor)
        dy, info = lin.solve(a, d2, rhs, tol, x0=dy0, x=it.x)
    else:
        dy, info = np.zeros(0), 0
    dx, dz = complete_direction(lp, it, dy)
    return dx, dy, dz, info


def complete_direction(lp: AugmentedLp, it: IpmIterate, dy):
    """Recover ``(dx, dz)`` from the dual step ``dy``."""
    _, rc, re = compute_residuals(lp, it)
    d2 = it.x / it.z
    dx = d2 * lp.a.rmatvec(dy) - d2 * rc + re / it.z
    dz = (re - it.z * dx) / it.x
    return dx, dz


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

@dataclass
class IpmParams:
    """Path-following controls.

    Termination needs ``x.z < gap_tol * q`` and primal/dual residual norms
    below ``feas_tol * (1 + ||b||)`` and ``feas_tol * (1 + ||c||)``. If the
    linear solver breaks down once the gap is below ``stall_gap_tol * q`` and
    the residual norms are below ``stall_feas_tol`` in the same relative sense,
    the current iterate is returned and flagged as stalled. With ``purify``
    the final iterate is replaced by the exact vertex of its basis when that
    vertex checks out as optimal (see :func:`purify_vertex`); a breakdown
    outside the stall band also ends the solve if that vertex carries a dual
    certificate (see :func:`certify_vertex`). A stagnated linear solve whose
    residual is a tenth of the loose band is still used. Each normal system
    is solved to relative residual ``min(cg_tol_cap, gap / q)``, but never
    below the absolute ``cg_tol_floor``.
    """

    sigma: float = 0.1
    damping: float = 0.99
    max_iter: int = 200
    gap_tol: float = 1e-8
    stall_gap_tol: float = 1e-7
    stall_feas_tol: float = 1e-6
    feas_tol: float = 1e-8
    cg_tol_cap: float = 1e-2
    cg_tol_floor: float = 1e-10
    tie_tol: float = 1e-6
    cg_warm_start: bool = False
    purify: bool = True
    purify_tol: float = 1e-9


@dataclass
class SolveStatus:
    converged: bool
    iterations: int
    final_gap: float
    final_rb_norm: float
    final_rc_norm: float
    d_weights: np.ndarray
    degenerate: bool = False
    near_tie: bool = False
    linear_iterations: int = 0
    stalled: bool = False
    purified: bool = False
    certified: bool = False


@dataclass
class IterationRecord:
    iteration: int
    gap: float
    mu: float
    rb_norm: float
    rc_norm: float
    beta_p: float
    beta_d: float
    linear_iterations: int


@dataclass
class LpSolution:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    status: SolveStatus
    records: list = field(default_factory=list)


class InteriorPointSolver:
    """Path-following LP solver with a pluggable normal-equation solver.

    Parameters
    ----------
    params : IpmParams, optional
    normal_solver : NormalSolver, optional
        Defaults to PCG with the column-wise triangular preconditioner.
    callback : callable, optional
        Called as ``callback(lp, iterate, k)`` before each Newton step;
        used by the benchmark to capture normal systems.
    """

    def __init__(self, params: Optional[IpmParams] = None,
                 normal_solver: Optional[NormalSolver] = None,
                 callback: Optional[Callable] = None):
        self.params = params or IpmParams()
        self.normal_solver = normal_solver or PcgNormalSolver()
        self.callback = callback

    def solve(self, lp: AugmentedLp, start: Optional[IpmIterate] = None) -> LpSolution:
        return solve_lp(lp, self.params, self.normal_solver, start=start,
                        callback=self.callback)


def initial_point(lp: AugmentedLp) -> IpmIterate:
    scale = max(1.0,
                float(np.abs(lp.b).max()) if lp.p else 0.0,
                float(np.abs(lp.c).max()) if lp.q else 0.0)
    return IpmIterate(np.full(lp.q, scale), np.zeros(lp.p), np.full(lp.q, scale))


def _status(lp, it, k, converged, params, lin_iters) -> SolveStatus:
    rb, rc, _ = compute_residuals(lp, IpmIterate(it.x, it.y, it.z, 0.0))
    basic = it.x > it.z
    nonbasic = ~basic
    near_tie = bool(np.any(nonbasic & (it.z < params.tie_tol)))
    return SolveStatus(
        converged=converged, iterations=k, final_gap=it.gap,
        final_rb_norm=float(np.linalg.norm(rb)), final_rc_norm=float(np.linalg.norm(rc)),
        d_weights=np.sqrt(it.x / it.z), degenerate=bool(basic.sum() < lp.p),
        near_tie=near_tie, linear_iterations=lin_iters)


def _support_vertex(lp: AugmentedLp, basic: np.ndarray, tol: float):
    x = np.zeros(lp.q)
    tri = triangulation_step(lp.a, basic.tolist())
    if tri.success:
        used = set(tri.rows)
        free = [j for j in range(lp.p) if j not in used]
        rows = list(tri.rows) + free
        cols = list(tri.columns) + [lp.n + j for j in free]
        if lp.p:
            factor = TriangularFactor(lp.a, rows, cols, lower=True)
            x[cols] = factor.solve(lp.b)
        return x
    # a fractional vertex's basis may hold a stopping set; solve A_B x_B = b directly
    a_b = lp.a.csc[:, basic].toarray()
    x_b, _, rank, _ = np.linalg.lstsq(a_b, lp.b, rcond=None)
    scale = 1 + np.abs(lp.b).max(initial=0.0)
    if rank < basic.size or np.linalg.norm(a_b @ x_b - lp.b) > tol * scale:
        return None
    x[basic] = x_b
    return x


def _greedy_basis(a: np.ndarray, order) -> list:
    """First columns of ``order`` that are linearly independent, up to a full basis."""
    p = a.shape[0]
    q_basis = np.zeros((p, p))
    chosen = []
    for i in order:
        col = a[:, i]
        span = q_basis[:, :len(chosen)]
        res = col - span @ (span.T @ col)
        res -= span @ (span.T @ res)
        norm = np.linalg.norm(res)
        if norm > 1e-8 * np.linalg.norm(col):
            q_basis[:, len(chosen)] = res / norm
            chosen.append(int(i))
            if len(chosen) == p:
                break
    return chosen


def _ranked_basis_vertex(lp: AugmentedLp, it: IpmIterate):
    # greedy basis: columns by decreasing x/z, skipping linearly dependent ones
    a = lp.a.toarray()
    chosen = _greedy_basis(a, np.argsort(-(it.x / it.z), kind="stable"))
    if len(chosen) < lp.p:
        return None
    x = np.zeros(lp.q)
    x[chosen] = np.linalg.solve(a[:, chosen], lp.b)
    return x


def certify_vertex(lp: AugmentedLp, x, ranking, tol: float = 1e-9,
                   max_pivots: int = 200):
    """Optimal vertex with a dual certificate, reached from ``x``, or None.

    The starting basis holds the support of the vertex ``x`` and is completed
    by the remaining columns in decreasing ``ranking``. Primal simplex pivots
    (Bland's rule, so degenerate pivots cannot cycle) then run until every
    reduced cost is nonnegative, which proves optimality with no reference
    to a duality gap. Returns None if the start is not a feasible basis or
    the pivot budget runs out.
    """
    if lp.p == 0:
        return np.zeros(lp.q) if (lp.c >= -tol).all() else None
    a = lp.a.toarray()
    c_tol = tol * (1 + np.abs(lp.c).max())
    b_tol = tol * (1 + np.abs(lp.b).max())
    support = np.flatnonzero(x > tol)
    rest = np.setdiff1d(np.arange(lp.q), support)
    by_rank = lambda idx: idx[np.argsort(-ranking[idx], kind="stable")]
    basis = _greedy_basis(a, np.concatenate([by_rank(support), by_rank(rest)]))
    if len(basis) < lp.p or not set(support.tolist()) <= set(basis):
        return None
    for _ in range(max_pivots + 1):
        a_b = a[:, basis]
        x_b = np.linalg.solve(a_b, lp.b)
        if x_b.min() < -b_tol:
            return None
        y = np.linalg.solve(a_b.T, lp.c[basis])
        reduced = lp.c - a.T @ y
        reduced[basis] = 0.0
        entering = np.flatnonzero(reduced < -c_tol)
        if entering.size == 0:
            out = np.zeros(lp.q)
            out[basis] = np.maximum(x_b, 0.0)
            return out
        j = int(entering[0])
        direction = np.linalg.solve(a_b, a[:, j])
        rising = np.flatnonzero(direction > 1e-12)
        if rising.size == 0:
            return None
        ratios = np.maximum(x_b[rising], 0.0) / direction[rising]
        best = ratios.min()
        ties = rising[ratios <= best + 1e-12]
        leave = min(ties, key=lambda r: basis[r])
        basis[leave] = j
    return None


def purify_vertex(lp: AugmentedLp, it: IpmIterate, tol: float = 1e-9):
    """Exact vertex for the basis an interior iterate points at, or None.

    The support estimate ``B = {i : x_i > z_i}`` is triangulated and padded
    with the slack columns of the rows it leaves unused, which keeps the
    block lower triangular; ``A_M x_M = b`` is then solved by substitution.
    If ``B`` holds a stopping set (fractional vertices), ``A_B x_B = b`` is
    solved by dense least squares and must be consistent with full column
    rank. When that fails, for instance because a nearly flat objective
    direction leaves extra coordinates above their duals, a basis is picked
    greedily by decreasing ``x_i / z_i`` among linearly independent columns.

    A vertex is returned only if it is feasible within ``tol`` and its cost
    is no worse than the iterate's, so it is optimal whenever the iterate is.
    Only ``x`` changes; the dual iterate is kept.
    """
    scale = 1 + np.abs(lp.b).max(initial=0.0)
    slack = max(it.gap, tol * (1 + abs(float(lp.c @ it.x))))

    def acceptable(x):
        return (x is not None and np.isfinite(x).all() and x.min() >= -tol * scale
                and lp.c @ x <= lp.c @ it.x + slack)

    basic = np.flatnonzero(it.x > it.z)
    x = _support_vertex(lp, basic, tol) if basic.size <= lp.p else None
    if not acceptable(x):
        x = _ranked_basis_vertex(lp, it) if lp.p else None
        if not acceptable(x):
            return None
    return IpmIterate(np.maximum(x, 0.0), it.y, it.z)


def _finish(lp, it, k, params, lin_total, records, stalled=False) -> LpSolution:
    status = _status(lp, it, k, True, params, lin_total)
    status.stalled = stalled
    if params.purify:
        vertex = purify_vertex(lp, it, params.purify_tol)
        if vertex is not None:
            status.purified = True
            return LpSolution(vertex.x, vertex.y, vertex.z, status, records)
    return LpSolution(it.x, it.y, it.z, status, records)


def solve_lp(lp: AugmentedLp, params: Optional[IpmParams] = None,
             normal_solver: Optional[NormalSolver] = None, *,
             start: Optional[IpmIterate] = None, callback=None) -> LpSolution:
    """Run the infeasible path-following method on ``lp``.

    Raises
    ------
    IterationLimit, NumericalBreakdown
    """
    params = params or IpmParams()
    lin = normal_solver or PcgNormalSolver()
    it = start if start is not None else initial_point(lp)
    q = lp.q
    eps = params.gap_tol * q
    delta_p = params.feas_tol * (1 + float(np.linalg.norm(lp.b)))
    delta_d = params.feas_tol * (1 + float(np.linalg.norm(lp.c)))
    records = []
    lin_total = 0
    dy_prev = None
    for k in range(params.max_iter + 1):
        rb, rc, _ = compute_residuals(lp, IpmIterate(it.x, it.y, it.z, 0.0))
        gap = it.gap
        rb_n, rc_n = float(np.linalg.norm(rb)), float(np.linalg.norm(rc))
        if gap < eps and rb_n < delta_p and rc_n < delta_d:
            return _finish(lp, it, k, params, lin_total, records)
        if k == params.max_iter:
            break
        it.mu = update_mu(it.x, it.z, params.sigma)
        rel_tol = min(params.cg_tol_cap, gap / q)
        # the normal-equation error becomes primal infeasibility, so keep it
        # below the infeasibility still to be removed
        abs_cap = 0.1 * max(rb_n, delta_p)
        if callback is not None:
            callback(lp, it, k)
        try:
            dx, dy, dz, info = newton_direction(lp, it, lin, rel_tol=rel_tol,
                                                abs_floor=params.cg_tol_floor, dy0=dy_prev,
                                                abs_cap=abs_cap)
        except (LinearSolveError, KrylovBreakdown) as exc:
            # the endgame can be too ill-conditioned for the linear solver;
            # accept the iterate if it already meets the looser gap
            loose = params.stall_feas_tol / params.feas_tol
            if (gap < params.stall_gap_tol * q and rb_n < loose * delta_p
                    and rc_n < loose * delta_d):
                return _finish(lp, it, k, params, lin_total, records, stalled=True)
            # near the end, an exact vertex with a dual certificate is as good
            # as convergence
            if params.purify and gap < 100 * params.stall_gap_tol * q:
                vertex = purify_vertex(lp, it, params.purify_tol)
                if vertex is not None:
                    x_opt = certify_vertex(lp, vertex.x, it.x / it.z, params.purify_tol)
                    if x_opt is not None:
                        status = _status(lp, it, k, True, params, lin_total)
                        status.stalled = status.purified = status.certified = True
                        return LpSolution(x_opt, it.y, it.z, status, records)
            # a stagnated solve is still usable if its error stays well inside
            # the loose feasibility band
            res = getattr(exc, "residual", np.inf)
            if getattr(exc, "x", None) is None or res > 0.1 * loose * delta_p:
                status = _status(lp, it, k, False, params, lin_total)
                raise NumericalBreakdown(f"linear solve failed: {exc}", status,
                                         records) from exc
            dy = exc.x
            dx, dz = complete_direction(lp, it, dy)
            info = exc.iterations
        lin_total += info
        if params.cg_warm_start:
            dy_prev = dy
        beta_p, beta_d = step_lengths(it.x, it.z, dx, dz, params.damping)
        x = it.x + beta_p * dx
        y = it.y + beta_d * dy
        z = it.z + beta_d * dz
        records.append(IterationRecord(k, gap, it.mu, rb_n, rc_n, beta_p, beta_d, info))
        if not (np.isfinite(x).all() and np.isfinite(z).all()) or x.min() <= 0 or z.min() <= 0:
            status = _status(lp, it, k, False, params, lin_total)
            raise NumericalBreakdown("iterate lost positivity or finiteness", status, records)
        it = IpmIterate(x, y, z)
    status = _status(lp, it, params.max_iter, False, params, lin_total)
    raise IterationLimit(f"no convergence in {params.max_iter} iterations "
                         f"(gap {status.final_gap:.3g})", status, records)
