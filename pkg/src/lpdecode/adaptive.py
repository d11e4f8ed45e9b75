"""Adaptive cutting-plane LP decoders (ALP, MALP-A, MALP-B)."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ipm import (AugmentedLp, InteriorPointSolver, IpmIterate, SolverError,
                  to_augmented_form)
from .relaxation import (ACTIVE_TOL, ParityInequality, as_llr, evaluate_slack,
                         find_violated_cut, hard_decision_init)
from .tanner import TannerGraph, contains_stopping_set

log = logging.getLogger(__name__)

INTEGRAL_TOL = 1e-5
# LP points are only accurate to the IPM stopping tolerance, so a cut must
# be violated by more than this to count
CUT_TOL = 1e-6


class Status(str, enum.Enum):
    INTEGRAL = "integral"
    FRACTIONAL = "fractional"
    SOLVER_FAILURE = "solver_failure"


class InconsistentSolution(ArithmeticError):
    """Point is integral within tolerance but violates a parity check."""


ALP = "alp"
MALP_A = "malp-a"
MALP_B = "malp-b"
ALGORITHMS = (ALP, MALP_A, MALP_B)


class ConstraintPool:
    """Parity inequalities of the current LP, keyed by check.

    In the MALP modes each check holds at most one cut.
    """

    def __init__(self, single: bool):
        self.single = single
        self.entries: dict[int, list] = {}
        self.active: dict[int, list] = {}

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def cuts(self) -> list:
        return [cut for j in sorted(self.entries) for cut in self.entries[j]]

    def add(self, cut: ParityInequality) -> None:
        lst = self.entries.setdefault(cut.check, [])
        if self.single and lst:
            raise AssertionError(f"check {cut.check} already holds a cut")
        lst.append(cut)
        self.active.setdefault(cut.check, []).append(False)

    def remove_check(self, j: int) -> int:
        removed = len(self.entries.pop(j, []))
        self.active.pop(j, None)
        return removed

    def has_active(self, j: int) -> bool:
        return any(self.active.get(j, ()))

    def remove_inactive(self) -> int:
        removed = 0
        for j in list(self.entries):
            keep = [(c, a) for c, a in zip(self.entries[j], self.active[j]) if a]
            removed += len(self.entries[j]) - len(keep)
            if keep:
                self.entries[j] = [c for c, _ in keep]
                self.active[j] = [True] * len(keep)
            else:
                del self.entries[j]
                del self.active[j]
        return removed

    def mark(self, flags: dict) -> None:
        """Set activity flags; ``flags[j]`` lists one bool per cut of check ``j``."""
        for j, fl in flags.items():
            self.active[j] = list(fl)

    def max_per_check(self) -> int:
        return max((len(v) for v in self.entries.values()), default=0)


@dataclass
class IterationTrace:
    iteration: int
    cuts_added: int
    cuts_removed: int
    objective: float
    lp_rows: int
    ipm_iterations: int = 0
    linear_iterations: int = 0
    near_tie: bool = False
    point: Optional[np.ndarray] = field(default=None, repr=False)
    active_checks: tuple = ()
    pool_checks: tuple = ()
    max_cuts_per_check: int = 0
    linear_per_ipm: tuple = ()

    def as_record(self) -> dict:
        return {
            "iteration": self.iteration, "cuts_added": self.cuts_added,
            "cuts_removed": self.cuts_removed, "objective": self.objective,
            "lp_rows": self.lp_rows, "ipm_iterations": self.ipm_iterations,
            "linear_iterations": self.linear_iterations,
            "linear_per_ipm": list(self.linear_per_ipm),
        }


@dataclass
class DecodeOutcome:
    status: Status
    point: np.ndarray
    iterations: int
    trace: list
    message: str = ""

    @property
    def near_tie(self) -> bool:
        return any(t.near_tie for t in self.trace)

    @property
    def objectives(self) -> list:
        return [t.objective for t in self.trace]

    @property
    def max_lp_rows(self) -> int:
        return max((t.lp_rows for t in self.trace), default=0)


def classify_solution(u, g: TannerGraph, tol: float = INTEGRAL_TOL) -> Status:
    """Integral iff every coordinate is within ``tol`` of {0, 1} and the rounding is a codeword.

    Raises
    ------
    InconsistentSolution
        If ``u`` is integral within ``tol`` but its rounding fails a check.
    """
    u = np.asarray(u, dtype=float)
    if u.size and np.minimum(u, 1.0 - u).max() > tol:
        return Status.FRACTIONAL
    bits = np.rint(u).astype(np.int8)
    if not g.is_codeword(bits):
        raise InconsistentSolution("integral point violates a parity check")
    return Status.INTEGRAL


def _activity(pool: ConstraintPool, lp: AugmentedLp, sol, u) -> dict:
    # active: slack (near) zero, or slack primal below its dual (complementarity side)
    flags = {}
    k = 0
    for j in sorted(pool.entries):
        fl = []
        for cut in pool.entries[j]:
            act = evaluate_slack(cut, u) <= ACTIVE_TOL
            if not act and sol is not None and sol.z is not None:
                xs, zs = sol.x[lp.n + k], sol.z[lp.n + k]
                act = xs <= zs
            fl.append(bool(act))
            k += 1
        flags[j] = fl
    return flags


def _warm_start(prev, prev_lp: AugmentedLp, lp: AugmentedLp, floor: float = 1e-2):
    if prev is None or prev_lp is None:
        return None
    n = lp.n
    old_rows = {c: k for k, c in enumerate(prev_lp.origin)}
    x = np.ones(lp.q)
    z = np.ones(lp.q)
    y = np.zeros(lp.p)
    x[:n] = np.maximum(prev.x[:n], floor)
    z[:n] = np.maximum(prev.z[:n], floor)
    for k, c in enumerate(lp.origin):
        if c in old_rows:
            r = old_rows[c]
            x[n + k] = max(prev.x[n + r], floor)
            z[n + k] = max(prev.z[n + r], floor)
            y[k] = prev.y[r]
    return IpmIterate(x, y, z)


def _decode(g: TannerGraph, gamma, solver, mode: str, keep_points: bool = True,
            warm_start: bool = False, cut_tol: float = CUT_TOL) -> DecodeOutcome:
    if mode not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {mode!r}")
    gamma = as_llr(gamma, g.n)
    solver = solver or InteriorPointSolver()
    u = hard_decision_init(gamma)
    pool = ConstraintPool(single=mode != ALP)
    trace = [IterationTrace(0, 0, 0, float(gamma @ u), 0,
                            point=u.copy() if keep_points else None)]
    prev_sol, prev_lp = None, None
    for k in range(1, g.n + 2):
        removed = 0
        if mode == MALP_B:
            removed += pool.remove_inactive()
        added = 0
        if mode == ALP:
            for j in range(g.m):
                cut = find_violated_cut(g, j, u, cut_tol)
                if cut is not None and cut not in pool.entries.get(j, ()):
                    pool.add(cut)
                    added += 1
        else:
            for j in range(g.m):
                if pool.has_active(j):
                    continue
                cut = find_violated_cut(g, j, u, cut_tol)
                if cut is not None:
                    removed += pool.remove_check(j)
                    pool.add(cut)
                    added += 1
        if added == 0:
            try:
                status = classify_solution(u, g)
            except InconsistentSolution as exc:
                return DecodeOutcome(Status.SOLVER_FAILURE, u, len(trace), trace, str(exc))
            return DecodeOutcome(status, u, len(trace), trace)
        if k > g.n:
            break
        cuts = pool.cuts()
        lp = to_augmented_form(cuts, gamma, g.n)
        start = _warm_start(prev_sol, prev_lp, lp) if warm_start else None
        try:
            sol = solver.solve(lp, start=start) if start is not None else solver.solve(lp)
        except SolverError as exc:
            log.warning("LP %d failed: %s", k, exc)
            return DecodeOutcome(Status.SOLVER_FAILURE, u, len(trace), trace, str(exc))
        u = lp.to_point(sol.x)
        pool.mark(_activity(pool, lp, sol, u))
        st = getattr(sol, "status", None)
        trace.append(IterationTrace(
            k, added, removed, lp.objective(sol.x), lp.p,
            ipm_iterations=getattr(st, "iterations", 0),
            linear_iterations=getattr(st, "linear_iterations", 0),
            near_tie=bool(getattr(st, "near_tie", False)),
            point=u.copy() if keep_points else None,
            active_checks=tuple(j for j in sorted(pool.entries) if pool.has_active(j)),
            pool_checks=tuple(sorted(pool.entries)),
            max_cuts_per_check=pool.max_per_check(),
            linear_per_ipm=tuple(r.linear_iterations for r in getattr(sol, "records", ())),
        ))
        prev_sol, prev_lp = sol, lp
    return DecodeOutcome(Status.SOLVER_FAILURE, u, len(trace), trace,
                         f"no convergence within {g.n + 1} cut rounds")


def alp_decode(g: TannerGraph, gamma, solver=None, **kw) -> DecodeOutcome:
    """Adaptive LP decoding: add every violated cut each round, never remove."""
    return _decode(g, gamma, solver, ALP, **kw)


def malp_a_decode(g: TannerGraph, gamma, solver=None, **kw) -> DecodeOutcome:
    """MALP-A: skip checks with an active cut; replace a check's inactive cut when a new one is found."""
    return _decode(g, gamma, solver, MALP_A, **kw)


def malp_b_decode(g: TannerGraph, gamma, solver=None, **kw) -> DecodeOutcome:
    """MALP-B: drop every inactive cut before each cut search, then proceed as MALP-A."""
    return _decode(g, gamma, solver, MALP_B, **kw)


DECODERS = {ALP: alp_decode, MALP_A: malp_a_decode, MALP_B: malp_b_decode}


def decode(g: TannerGraph, gamma, algorithm: str = MALP_B, solver=None, **kw) -> DecodeOutcome:
    try:
        fn = DECODERS[algorithm.lower()]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}") from None
    return fn(g, gamma, solver, **kw)


BOX_SLACK = 1e-7


def outcome_violations(g: TannerGraph, gamma, out: DecodeOutcome, algorithm: str) -> list:
    """Structural guarantees of a finished decode that fail to hold; empty when all pass.

    Checks strictly increasing costs, at most ``n`` LPs, intermediate points
    in the unit box, the one-cut-per-check pool bound for the MALP modes,
    the MALP-B survivor rule, the fractional-support bound, at most ``m``
    coordinates away from the hard decision and, for integral outcomes without a near tie, that the
    flipped positions hold no stopping set. Needs a trace recorded with
    ``keep_points=True``.
    """
    gamma = as_llr(gamma, g.n)
    bad = []
    if out.status == Status.SOLVER_FAILURE:
        return bad
    obj = out.objectives
    for k in range(1, len(obj)):
        if not obj[k] > obj[k - 1]:
            bad.append(f"cost not increasing at LP {k}: {obj[k - 1]!r} -> {obj[k]!r}")
    if out.iterations - 1 > g.n:
        bad.append(f"{out.iterations - 1} LPs solved, more than n = {g.n}")
    for t in out.trace:
        if t.point is not None and (t.point.min() < -BOX_SLACK or t.point.max() > 1 + BOX_SLACK):
            bad.append(f"LP {t.iteration} point leaves the unit box")
    if algorithm != ALP:
        for t in out.trace:
            if t.max_cuts_per_check > 1 or t.lp_rows > g.m:
                bad.append(f"LP {t.iteration} holds {t.lp_rows} cuts, "
                           f"{t.max_cuts_per_check} on one check")
    if algorithm == MALP_B:
        for prev, cur in zip(out.trace[1:], out.trace[2:]):
            survivors = len(cur.pool_checks) - cur.cuts_added
            if survivors != len(prev.active_checks) or cur.cuts_removed != (
                    len(prev.pool_checks) - len(prev.active_checks)):
                bad.append(f"LP {cur.iteration} kept a cut that was inactive")
    u = out.point
    frac = np.minimum(u, 1.0 - u) > INTEGRAL_TOL
    if frac.sum() > g.m:
        bad.append(f"{int(frac.sum())} fractional entries, more than m = {g.m}")
    hard = hard_decision_init(gamma)
    # a vertex has n active constraints and at most m of them are cuts, so
    # at least n - m coordinates sit on their hard-decision box side
    moved = int(np.sum(np.abs(u - hard) > INTEGRAL_TOL))
    if moved > g.m:
        bad.append(f"{moved} coordinates leave the hard decision, more than m = {g.m}")
    flipped = np.flatnonzero(np.abs(np.rint(u) - hard) > 0.5)
    if out.status == Status.INTEGRAL and not out.near_tie:
        if contains_stopping_set(g, flipped.tolist()):
            bad.append("flipped positions contain a stopping set")
    return bad
