"""Parity inequalities (cuts) of the fundamental polytope and the per-check cut search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .tanner import TannerGraph

ACTIVE_TOL = 1e-7
BOX_TOL = 1e-9
MAX_ENUM_DEGREE = 25


def as_point(u, n: Optional[int] = None, tol: float = BOX_TOL) -> np.ndarray:
    """Validate a decoder point: a real vector in [0, 1]^n (within ``tol``)."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise ValueError("decoder point must be a vector")
    if n is not None and u.size != n:
        raise ValueError(f"decoder point has length {u.size}, expected {n}")
    if u.size and (u.min() < -tol or u.max() > 1 + tol):
        raise ValueError("decoder point leaves [0, 1]")
    return u


def as_llr(gamma, n: Optional[int] = None) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 1:
        raise ValueError("LLR vector must be 1-D")
    if n is not None and gamma.size != n:
        raise ValueError(f"LLR vector has length {gamma.size}, expected {n}")
    if not np.isfinite(gamma).all():
        raise ValueError("LLR vector has non-finite entries")
    return gamma


@dataclass(frozen=True)
class ParityInequality:
    """The cut ``sum_{V}(1 - u_i) + sum_{N(j) minus V} u_i >= 1`` of check ``check``.

    Only the odd set ``v_set`` is stored; ``neighbors`` is N(j).
    """

    check: int
    v_set: frozenset
    neighbors: tuple

    def __post_init__(self):
        if len(self.v_set) % 2 != 1:
            raise ValueError("|V| must be odd")
        if not self.v_set <= set(self.neighbors):
            raise ValueError("V must be a subset of N(j)")

    @property
    def rhs(self) -> int:
        """Right-hand side of the ``<=`` form ``sum_V u - sum_{N minus V} u <= |V| - 1``."""
        return len(self.v_set) - 1

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Column indices and +-1 coefficients of the ``<=`` form."""
        cols = np.asarray(self.neighbors, dtype=np.intp)
        coef = np.array([1.0 if i in self.v_set else -1.0 for i in self.neighbors])
        return cols, coef

    def lhs(self, u) -> float:
        """Value of ``sum_V (1 - u_i) + sum_{N minus V} u_i``."""
        return float(sum((1.0 - u[i]) if i in self.v_set else u[i]
                         for i in self.neighbors))


def hard_decision_init(gamma) -> np.ndarray:
    """Bit-wise hard decision: 0 where the LLR is nonnegative, 1 otherwise."""
    gamma = as_llr(gamma)
    return (gamma < 0).astype(float)


def evaluate_slack(ineq: ParityInequality, u) -> float:
    """``lhs - 1``; negative means violated, (near) zero means active."""
    return ineq.lhs(u) - 1.0


def find_violated_cut(g: TannerGraph, j: int, u, tol: float = 0.0) -> Optional[ParityInequality]:
    """Return the violated parity inequality of check ``j`` at ``u``, or None.

    The candidate odd set is the minimizer of the cut's left-hand side, so at
    most one candidate needs testing. Ties in the closest-to-one-half search
    go to the smallest variable index. A cut counts as violated only when
    its left-hand side is below ``1 - tol``.
    """
    nbrs = g.check_adj[j]
    if not nbrs:
        return None
    s = {i for i in nbrs if u[i] > 0.5}
    if len(s) % 2 == 0:
        # toggling i costs |1 - 2 u_i|; this form keeps tiny u_i distinguishable from 0
        i_star = min(nbrs, key=lambda i: (abs(1.0 - 2.0 * u[i]), i))
        s ^= {i_star}
    lhs = sum((1.0 - u[i]) if i in s else u[i] for i in nbrs)
    if lhs >= 1.0 - tol:
        return None
    return ParityInequality(j, frozenset(s), nbrs)


def find_all_cuts(g: TannerGraph, u, exclude: Iterable[int] = (),
                  tol: float = 0.0) -> list[ParityInequality]:
    """Violated cuts over all checks not in ``exclude``; at most one per check."""
    exclude = set(exclude)
    cuts = []
    for j in range(g.m):
        if j in exclude:
            continue
        cut = find_violated_cut(g, j, u, tol)
        if cut is not None:
            cuts.append(cut)
    return cuts


def enumerate_all_parity_inequalities(g: TannerGraph, j: int) -> list[ParityInequality]:
    """All ``2**(d_j - 1)`` parity inequalities of check ``j``."""
    nbrs = g.check_adj[j]
    if len(nbrs) > MAX_ENUM_DEGREE:
        raise ValueError(f"check degree {len(nbrs)} exceeds enumeration limit "
                         f"{MAX_ENUM_DEGREE}")
    out = []
    for size in range(1, len(nbrs) + 1, 2):
        for v in itertools.combinations(nbrs, size):
            out.append(ParityInequality(j, frozenset(v), nbrs))
    return out


def parity_matrix(g: TannerGraph, checks: Optional[Iterable[int]] = None):
    """Dense ``(A, b)`` with every parity inequality ``A u <= b`` of the given checks."""
    checks = range(g.m) if checks is None else checks
    rows, rhs = [], []
    for j in checks:
        for ineq in enumerate_all_parity_inequalities(g, j):
            row = np.zeros(g.n)
            cols, coef = ineq.coefficients()
            row[cols] = coef
            rows.append(row)
            rhs.append(ineq.rhs)
    if not rows:
        return np.zeros((0, g.n)), np.zeros(0)
    return np.array(rows), np.array(rhs, dtype=float)
