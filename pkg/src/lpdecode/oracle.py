"""Slow reference implementations: dense Bland-rule simplex and exhaustive decoders.

Used by the test-suite as ground truth. Nothing here is tuned for speed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .relaxation import as_llr, parity_matrix
from .tanner import TannerGraph

MAX_DIM = 500
MAX_ENUM_N = 20
FEAS_TOL = 1e-9


class Unbounded(ArithmeticError):
    pass


class Infeasible(ArithmeticError):
    pass


class CycleGuard(RuntimeError):
    pass


@dataclass
class DenseLp:
    """``min c^T x`` s.t. ``a_ub x <= b_ub``, ``a_eq x = b_eq``, ``lower <= x <= upper``.

    ``lower`` must be finite; ``upper`` may contain ``inf``.
    """

    c: np.ndarray
    a_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    a_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        q = self.c.size
        self.a_ub = np.zeros((0, q)) if self.a_ub is None else np.atleast_2d(
            np.asarray(self.a_ub, dtype=float)).reshape(-1, q)
        self.b_ub = np.zeros(0) if self.b_ub is None else np.asarray(self.b_ub, dtype=float)
        self.a_eq = np.zeros((0, q)) if self.a_eq is None else np.atleast_2d(
            np.asarray(self.a_eq, dtype=float)).reshape(-1, q)
        self.b_eq = np.zeros(0) if self.b_eq is None else np.asarray(self.b_eq, dtype=float)
        self.lower = np.zeros(q) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(q, np.inf) if self.upper is None else np.asarray(
            self.upper, dtype=float)
        if self.a_ub.shape[0] != self.b_ub.size or self.a_eq.shape[0] != self.b_eq.size:
            raise ValueError("constraint matrix and rhs lengths differ")
        if not np.isfinite(self.lower).all():
            raise ValueError("lower bounds must be finite")
        rows = self.a_ub.shape[0] + self.a_eq.shape[0]
        if q > MAX_DIM or rows > MAX_DIM:
            raise ValueError(f"oracle LP limited to {MAX_DIM} rows/columns")
        for arr in (self.c, self.a_ub, self.b_ub, self.a_eq, self.b_eq):
            if not np.isfinite(arr).all():
                raise ValueError("LP data must be finite")


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    tie: bool
    pivots: int


def _pivot(t, row, col):
    t[row] /= t[row, col]
    others = np.flatnonzero(t[:, col])
    others = others[others != row]
    t[others] -= np.outer(t[others, col], t[row])


def _bland(t, basis, ncols, max_pivots, tol):
    """Minimize the last tableau row over columns ``< ncols``; returns pivot count."""
    pivots = 0
    m = t.shape[0] - 1
    while True:
        red = t[-1, :ncols]
        enter = next((j for j in range(ncols) if red[j] < -tol), None)
        if enter is None:
            return pivots
        col = t[:m, enter]
        best, leave = None, None
        for i in range(m):
            if col[i] > tol:
                ratio = t[i, -1] / col[i]
                if best is None or ratio < best - tol or (
                        abs(ratio - best) <= tol and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise Unbounded("objective unbounded below")
        _pivot(t, leave, enter)
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise CycleGuard(f"more than {max_pivots} pivots")


def simplex_solve(lp: DenseLp, tol: float = FEAS_TOL, max_pivots: int = 50000) -> SimplexResult:
    """Two-phase tableau simplex with Bland's rule.

    Raises
    ------
    Infeasible, Unbounded, CycleGuard
    """
    q = lp.c.size
    shift = lp.lower
    # x = lower + x', x' >= 0
    rows_ub = [lp.a_ub, np.eye(q)[np.isfinite(lp.upper)]]
    rhs_ub = [lp.b_ub - lp.a_ub @ shift, (lp.upper - shift)[np.isfinite(lp.upper)]]
    a_ub = np.vstack(rows_ub)
    b_ub = np.concatenate(rhs_ub)
    a_eq = lp.a_eq
    b_eq = lp.b_eq - lp.a_eq @ shift
    n_ub, n_eq = a_ub.shape[0], a_eq.shape[0]
    # standard form columns: x' | slack(ub) | artificial
    a = np.zeros((n_ub + n_eq, q + n_ub))
    a[:n_ub, :q] = a_ub
    a[:n_ub, q:] = np.eye(n_ub)
    a[n_ub:, :q] = a_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    a[neg] *= -1
    b[neg] *= -1
    m, nstd = a.shape
    t = np.zeros((m + 1, nstd + m + 1))
    t[:m, :nstd] = a
    t[:m, nstd:nstd + m] = np.eye(m)
    t[:m, -1] = b
    basis = list(range(nstd, nstd + m))
    # phase 1 objective: sum of artificials, expressed in nonbasic terms
    t[-1, :nstd] = -a.sum(axis=0)
    t[-1, -1] = -b.sum()
    pivots = _bland(t, basis, nstd + m, max_pivots, tol)
    if -t[-1, -1] > 1e-7 * max(1.0, np.abs(b).max(initial=0.0)):
        raise Infeasible("phase-one optimum is positive")
    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] >= nstd:
            cand = next((j for j in range(nstd) if abs(t[i, j]) > tol), None)
            if cand is not None:
                _pivot(t, i, cand)
                basis[i] = cand
    keep = [i for i in range(m) if basis[i] < nstd]
    t = np.vstack([t[keep], t[-1:]])
    basis = [basis[i] for i in keep]
    t = np.delete(t, np.s_[nstd:nstd + m], axis=1)
    cost = np.concatenate([lp.c, np.zeros(n_ub)])
    t[-1, :] = 0.0
    t[-1, :nstd] = cost
    t[-1, -1] = 0.0
    for i, j in enumerate(basis):
        if t[-1, j] != 0:
            t[-1] -= t[-1, j] * t[i]
    pivots += _bland(t, basis, nstd, max_pivots, tol)
    xs = np.zeros(nstd)
    for i, j in enumerate(basis):
        xs[j] = t[i, -1]
    x = xs[:q] + shift
    red = t[-1, :nstd]
    nonbasic = np.ones(nstd, dtype=bool)
    nonbasic[basis] = False
    tie = bool(np.any(np.abs(red[nonbasic]) <= 1e-9))
    return SimplexResult(x, float(lp.c @ x), tie, pivots)


# ---------------------------------------------------------------------------
# Exhaustive decoders
# ---------------------------------------------------------------------------

def enumerate_codewords(g: TannerGraph) -> np.ndarray:
    """All codewords as rows of a 0/1 array (brute force over ``2**n`` words)."""
    if g.n > MAX_ENUM_N:
        raise ValueError(f"codeword enumeration limited to n <= {MAX_ENUM_N}")
    words = np.array(list(itertools.product((0, 1), repeat=g.n)), dtype=np.int8)
    if g.m == 0:
        return words
    h = g.to_dense().astype(np.int64)
    ok = ((words.astype(np.int64) @ h.T) % 2 == 0).all(axis=1)
    return words[ok]


@dataclass
class MlResult:
    codeword: np.ndarray
    cost: float
    ties: list


def ml_decode_exhaustive(g: TannerGraph, gamma, tie_tol: float = 1e-12) -> MlResult:
    """Minimum-cost codeword; every codeword within ``tie_tol`` of the minimum is in ``ties``."""
    gamma = as_llr(gamma, g.n)
    words = enumerate_codewords(g)
    costs = words @ gamma
    best = float(costs.min())
    tied = np.flatnonzero(costs <= best + tie_tol)
    return MlResult(words[tied[0]].astype(float), best,
                    [words[k].astype(float) for k in tied] if tied.size > 1 else [])


@dataclass
class LpDecodeResult:
    u: np.ndarray
    objective: float
    tie: bool
    active: int


def full_relaxation_lp(g: TannerGraph, gamma) -> tuple[DenseLp, np.ndarray, np.ndarray]:
    a, b = parity_matrix(g)
    lp = DenseLp(np.asarray(gamma, dtype=float), a_ub=a, b_ub=b,
                 lower=np.zeros(g.n), upper=np.ones(g.n))
    return lp, a, b


def lp_decode_exhaustive(g: TannerGraph, gamma) -> LpDecodeResult:
    """LP decoding with every parity inequality and both box sides, by simplex."""
    if g.n > 12:
        raise ValueError("exhaustive LP decoding limited to n <= 12")
    if any(len(r) > 10 for r in g.check_adj):
        raise ValueError("exhaustive LP decoding limited to check degree <= 10")
    gamma = as_llr(gamma, g.n)
    lp, a, b = full_relaxation_lp(g, gamma)
    res = simplex_solve(lp)
    u = np.clip(res.x, 0.0, 1.0)
    tol = 1e-9
    active = int(np.sum(np.abs(a @ u - b) <= tol) + np.sum(u <= tol) + np.sum(u >= 1 - tol))
    return LpDecodeResult(u, float(gamma @ u), res.tie, active)


class SimplexLpSolver:
    """Adapter exposing :func:`simplex_solve` with the interior-point solver's interface."""

    def solve(self, lp, start=None):
        from .ipm import LpSolution, SolveStatus

        dense = DenseLp(lp.c, a_eq=lp.a.toarray(), b_eq=lp.b)
        res = simplex_solve(dense)
        x = np.maximum(res.x, 0.0)
        status = SolveStatus(True, res.pivots, 0.0, 0.0, 0.0, np.ones(lp.q), near_tie=res.tie)
        return LpSolution(x, np.zeros(lp.p), None, status)
