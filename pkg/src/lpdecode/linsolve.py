"""Sparse kernels, the matrix-free normal operator, CG/PCG and triangular preconditioners."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from numba import njit

RESIDUAL_REFRESH = 50


class KrylovBreakdown(ArithmeticError):
    """Search direction with nonpositive curvature; operator not SPD.

    ``x`` and ``trace`` hold the iterate and history reached before the
    breakdown, so callers may still use a partial solution.
    """

    def __init__(self, message: str, x=None, trace=None):
        super().__init__(message)
        self.x = x
        self.trace = trace


class ZeroPivotError(ArithmeticError):
    """Permuted submatrix is not triangular with a nonzero diagonal."""


class SparseMatrix:
    """Row-major sparse matrix with a column-major companion for transposed products."""

    def __init__(self, matrix):
        csr = sp.csr_matrix(matrix, dtype=float)
        csr.eliminate_zeros()
        csr.sort_indices()
        self.csr = csr
        self.csc = csr.tocsc()
        self.csc.sort_indices()

    @property
    def shape(self) -> tuple[int, int]:
        return self.csr.shape

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.csr @ v

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        return self.csc.T @ v

    def row(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.csr.indptr[j], self.csr.indptr[j + 1]
        return self.csr.indices[lo:hi], self.csr.data[lo:hi]

    def col(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.csc.indptr[i], self.csc.indptr[i + 1]
        return self.csc.indices[lo:hi], self.csc.data[lo:hi]

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()


class NormalOperator:
    """Matrix-free ``Q = A diag(d2) A^T``."""

    def __init__(self, a: SparseMatrix, d2):
        d2 = np.asarray(d2, dtype=float)
        if d2.shape != (a.shape[1],):
            raise ValueError("weight vector length must equal the column count")
        if not (d2 > 0).all():
            raise ValueError("weights must be strictly positive")
        self.a = a
        self.d2 = d2

    @property
    def shape(self) -> tuple[int, int]:
        p = self.a.shape[0]
        return p, p

    def matvec(self, v):
        return matvec_normal(self, v)

    def todense(self) -> np.ndarray:
        dense = self.a.toarray()
        return (dense * self.d2) @ dense.T


def matvec_normal(op: NormalOperator, v) -> np.ndarray:
    """``A (D^2 (A^T v))`` with two sparse products and a scaling."""
    return op.a.matvec(op.d2 * op.a.rmatvec(np.asarray(v, dtype=float)))


@dataclass
class KrylovTrace:
    """Squared relative residuals ``||r_i||^2 / ||w||^2``, entry 0 at the initial guess."""

    residual_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    def to_csv(self, path_or_file) -> None:
        def _write(fh):
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "relative_residual"])
            for k, val in enumerate(self.residual_history):
                writer.writerow([k, repr(float(val))])

        if hasattr(path_or_file, "write"):
            _write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                _write(fh)


def _as_apply(op) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(op, NormalOperator):
        return op.matvec
    if hasattr(op, "matvec"):
        return op.matvec
    if callable(op):
        return op
    arr = np.asarray(op, dtype=float)
    return lambda v: arr @ v


def _rel(rr: float, ww: float) -> float:
    return rr / ww if ww > 0 else 0.0


def cg_solve(op, w, x0=None, tol: float = 1e-10, maxit: Optional[int] = None):
    """Plain conjugate gradient for an SPD operator.

    ``tol`` bounds the squared relative residual ``||r||^2 / ||w||^2``.
    Returns ``(x, KrylovTrace)``.
    """
    apply_q = _as_apply(op)
    w = np.asarray(w, dtype=float)
    maxit = w.size if maxit is None else maxit
    x = np.zeros_like(w) if x0 is None else np.array(x0, dtype=float)
    ww = float(w @ w)
    r = w - apply_q(x)
    rr = float(r @ r)
    h = r.copy()
    trace = KrylovTrace([_rel(rr, ww)])
    if trace.residual_history[-1] <= tol:
        trace.converged = True
        return x, trace
    for i in range(maxit):
        l = apply_q(h)
        curv = float(h @ l)
        if curv <= 0:
            raise KrylovBreakdown(f"h^T Q h = {curv:g} at iteration {i}", x, trace)
        alpha = rr / curv
        x = x + alpha * h
        if (i + 1) % RESIDUAL_REFRESH == 0:
            r = w - apply_q(x)
        else:
            r = r - alpha * l
        rr_new = float(r @ r)
        trace.iterations = i + 1
        trace.residual_history.append(_rel(rr_new, ww))
        if trace.residual_history[-1] <= tol:
            trace.converged = True
            break
        nu = rr_new / rr
        h = r + nu * h
        rr = rr_new
    return x, trace


def pcg_solve(op, precond, w, x0=None, tol: float = 1e-10, maxit: Optional[int] = None):
    """Preconditioned conjugate gradient.

    ``precond`` applies ``M^{-1}`` (object with ``apply`` or a callable). The
    recursion residual is replaced by ``w - Q x`` every ``RESIDUAL_REFRESH``
    iterations.
    """
    apply_q = _as_apply(op)
    apply_m = precond.apply if hasattr(precond, "apply") else precond
    w = np.asarray(w, dtype=float)
    maxit = w.size if maxit is None else maxit
    x = np.zeros_like(w) if x0 is None else np.array(x0, dtype=float)
    ww = float(w @ w)
    r = w - apply_q(x)
    trace = KrylovTrace([_rel(float(r @ r), ww)])
    if trace.residual_history[-1] <= tol:
        trace.converged = True
        return x, trace
    z = apply_m(r)
    zr = float(z @ r)
    h = z.copy()
    for i in range(maxit):
        l = apply_q(h)
        curv = float(h @ l)
        if curv <= 0:
            raise KrylovBreakdown(f"h^T Q h = {curv:g} at iteration {i}", x, trace)
        alpha = zr / curv
        x = x + alpha * h
        if (i + 1) % RESIDUAL_REFRESH == 0:
            r = w - apply_q(x)
        else:
            r = r - alpha * l
        trace.iterations = i + 1
        trace.residual_history.append(_rel(float(r @ r), ww))
        if trace.residual_history[-1] <= tol:
            trace.converged = True
            break
        z = apply_m(r)
        zr_new = float(z @ r)
        if zr == 0.0:
            raise KrylovBreakdown(f"z^T r vanished at iteration {i}", x, trace)
        nu = zr_new / zr
        h = z + nu * h
        zr = zr_new
    return x, trace


# ---------------------------------------------------------------------------
# Triangular factors
# ---------------------------------------------------------------------------

@njit(cache=True)
def _forward(indptr, indices, data, rhs):
    # lower-triangular CSR, diagonal stored last in each row
    n = rhs.shape[0]
    out = np.empty(n)
    for k in range(n):
        acc = rhs[k]
        end = indptr[k + 1] - 1
        for t in range(indptr[k], end):
            acc -= data[t] * out[indices[t]]
        out[k] = acc / data[end]
    return out


@njit(cache=True)
def _backward(indptr, indices, data, rhs):
    # upper-triangular CSR, diagonal stored first in each row
    n = rhs.shape[0]
    out = np.empty(n)
    for k in range(n - 1, -1, -1):
        start = indptr[k]
        acc = rhs[k]
        for t in range(start + 1, indptr[k + 1]):
            acc -= data[t] * out[indices[t]]
        out[k] = acc / data[start]
    return out


class TriangularFactor:
    """``A_M`` permuted to triangular form ``T[k, l] = A[rows[k], cols[l]]``.

    Parameters
    ----------
    a : SparseMatrix
    rows, cols : sequences of int
        Pivot order; ``(rows[k], cols[k])`` is the k-th diagonal entry.
    lower : bool
        Whether ``T`` is lower (True) or upper (False) triangular.

    Raises
    ------
    ZeroPivotError
        If ``T`` has a zero diagonal entry or a nonzero on the wrong side.
    """

    def __init__(self, a: SparseMatrix, rows: Sequence[int], cols: Sequence[int],
                 lower: bool = True):
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        p = a.shape[0]
        if rows.size != cols.size:
            raise ValueError("rows and cols must have equal length")
        if rows.size != p:
            raise ValueError(f"triangular factor needs {p} pivots, got {rows.size}")
        if len(set(rows.tolist())) != p or len(set(cols.tolist())) != p:
            raise ValueError("pivot rows/cols must be duplicate-free")
        t = a.csr[rows][:, cols].tocsr()
        t.sort_indices()
        coo = t.tocoo()
        bad = coo.col > coo.row if lower else coo.col < coo.row
        if bad.any():
            k = int(coo.row[bad][0])
            raise ZeroPivotError(f"entry off the triangle in permuted row {k}")
        diag = t.diagonal()
        if (diag == 0).any():
            k = int(np.flatnonzero(diag == 0)[0])
            raise ZeroPivotError(f"zero diagonal at pivot {k}")
        self.rows = rows
        self.cols = cols
        self.lower = lower
        self.t = t
        self.tt = t.T.tocsr()
        self.tt.sort_indices()
        self.nnz = t.nnz

    def _solve_tri(self, mat, rhs, lower):
        rhs = np.ascontiguousarray(rhs, dtype=float)
        if lower:
            return _forward(mat.indptr, mat.indices, mat.data, rhs)
        return _backward(mat.indptr, mat.indices, mat.data, rhs)

    def solve(self, rhs) -> np.ndarray:
        """Solve ``A_M f = rhs``; ``rhs`` is indexed by row, ``f`` by position in ``cols``."""
        return self._solve_tri(self.t, np.asarray(rhs)[self.rows], self.lower)

    def solve_transpose(self, rhs) -> np.ndarray:
        """Solve ``A_M^T z = rhs``; ``rhs`` indexed by position in ``cols``, ``z`` by row."""
        zp = self._solve_tri(self.tt, rhs, not self.lower)
        z = np.empty_like(zp)
        z[self.rows] = zp
        return z


def triangular_solve(t: TriangularFactor, rhs, transpose: bool = False) -> np.ndarray:
    """Substitution with ``A_M`` (or ``A_M^T``) in the factor's pivot order.

    ``transpose=False`` returns the solution ordered like ``t.cols``;
    ``transpose=True`` takes the rhs in ``t.cols`` order and returns a vector
    indexed by row.
    """
    return t.solve_transpose(rhs) if transpose else t.solve(rhs)


class TriangularPreconditioner:
    """Applies ``(A_M D_M^2 A_M^T)^{-1}`` by three sequential solves."""

    def __init__(self, factor: TriangularFactor, d2):
        d2 = np.asarray(d2, dtype=float)
        self.factor = factor
        self.d2_m = d2[factor.cols]
        if not (self.d2_m > 0).all():
            raise ValueError("preconditioner weights must be positive")

    def apply(self, r) -> np.ndarray:
        f1 = self.factor.solve(r)
        f2 = f1 / self.d2_m
        return self.factor.solve_transpose(f2)

    def matrix(self) -> np.ndarray:
        """Dense ``A_M D_M^2 A_M^T`` in original row order (for checks)."""
        p = self.factor.rows.size
        am = np.zeros((p, p))
        tt = self.factor.t.toarray()
        am[np.ix_(self.factor.rows, np.arange(p))] = tt
        return (am * self.d2_m) @ am.T


def apply_preconditioner(factor: TriangularFactor, d2, r) -> np.ndarray:
    """``z = (A_M D_M^2 A_M^T)^{-1} r`` via ``A_M f1 = r``, ``D_M^2 f2 = f1``, ``A_M^T z = f2``."""
    return TriangularPreconditioner(factor, d2).apply(r)


class IdentityPreconditioner:
    def apply(self, r):
        return np.array(r, dtype=float)


class DensePreconditioner:
    """Exact ``M^{-1}`` from a dense SPD matrix; test use only."""

    def __init__(self, m):
        import scipy.linalg as sla

        self._cho = sla.cho_factor(np.asarray(m, dtype=float))

    def apply(self, r):
        import scipy.linalg as sla

        return sla.cho_solve(self._cho, r)


def estimate_extreme_eigenvalues(op, iters: int = 100, seed: int = 0,
                                 cg_tol: float = 1e-20):
    """Power iteration for the largest eigenvalue, inverse iteration for the smallest.

    Returns ``(lam_max, lam_min, reliable)``; ``lam_max / lam_min`` is a lower
    bound on the spectral condition number. ``reliable`` is False if any inner
    CG solve failed to converge.
    """
    apply_q = _as_apply(op)
    p = op.shape[0] if hasattr(op, "shape") else np.asarray(op).shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(p)
    v /= np.linalg.norm(v)
    lam_max = 0.0
    for _ in range(iters):
        qv = apply_q(v)
        lam_max = float(v @ qv)
        nrm = np.linalg.norm(qv)
        if nrm == 0:
            break
        v = qv / nrm
    v = rng.standard_normal(p)
    v /= np.linalg.norm(v)
    lam_min = math.inf
    reliable = True
    for _ in range(iters):
        y, trace = cg_solve(op, v, tol=cg_tol, maxit=10 * p)
        reliable &= trace.converged
        nrm = np.linalg.norm(y)
        if nrm == 0:
            break
        lam_min = float(v @ v) / float(v @ y)
        v_new = y / nrm
        if np.linalg.norm(v_new - v) < 1e-12:
            v = v_new
            break
        v = v_new
    return lam_max, lam_min, reliable
