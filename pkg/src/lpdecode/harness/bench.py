"""Capture normal systems from real decodes and race CG against PCG.

A decode is run with a callback that snapshots the normal equations at the
first interior-point iterate whose duality gap falls below each requested
threshold. The snapshot from the largest LP of the first integral decode is
kept, and plain CG plus every triangular preconditioner are run on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..adaptive import Status, decode
from ..ipm import DenseNormalSolver, InteriorPointSolver, IpmParams, normal_system
from ..linsolve import KrylovTrace, NormalOperator, SparseMatrix, cg_solve, pcg_solve
from ..precond import SEARCHES, find_triangular_set
from .channel import code_rate, noise_variance_from_snr, transmit_awgn
from .codes import generate_regular_code

LATE_GAP = 0.5
EARLY_GAP = 50.0


@dataclass
class NormalSystem:
    """Normal equations ``A D^2 A^T dy = rhs`` frozen at one iterate."""

    a: SparseMatrix
    d2: np.ndarray
    rhs: np.ndarray
    gap: float
    lp_rows: int
    trial: int = -1

    @property
    def weights(self) -> np.ndarray:
        return np.sqrt(self.d2)

    def operator(self) -> NormalOperator:
        return NormalOperator(self.a, self.d2)


class _Capture:
    def __init__(self, thresholds):
        self.thresholds = sorted(thresholds, reverse=True)
        self.per_lp = []
        self._lp = None

    def __call__(self, lp, it, k):
        if lp is not self._lp:
            self._lp = lp
            self.per_lp.append({})
        slot = self.per_lp[-1]
        gap = it.gap
        for thr in self.thresholds:
            if thr not in slot and gap <= thr:
                d2, rhs = normal_system(lp, it)
                slot[thr] = NormalSystem(lp.a, d2, rhs, gap, lp.p)


def capture_systems(g=None, *, n: int = 480, snr_db: float = 1.5, seed: int = 0,
                    code_seed: int = 0, algorithm: str = "malp-b",
                    thresholds: Sequence[float] = (LATE_GAP, EARLY_GAP),
                    max_trials: int = 200) -> dict:
    """Snapshots keyed by gap threshold from the first integral decode.

    The snapshots come from the decode's largest LP (the earliest one on
    ties). The capture runs use a dense direct solver so the snapshots do
    not depend on the Krylov method being benchmarked.
    """
    g = g if g is not None else generate_regular_code(3, 6, n, code_seed)
    var = noise_variance_from_snr(snr_db, code_rate(g.m, g.n))
    streams = np.random.SeedSequence(seed).spawn(max_trials)
    for t, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        gamma = transmit_awgn(np.zeros(g.n, dtype=np.uint8), var, rng)
        cap = _Capture(thresholds)
        solver = InteriorPointSolver(IpmParams(), DenseNormalSolver(), callback=cap)
        out = decode(g, gamma, algorithm, solver=solver, keep_points=False)
        if out.status != Status.INTEGRAL or not cap.per_lp:
            continue
        best = max(range(len(cap.per_lp)),
                   key=lambda k: (max((s.lp_rows for s in cap.per_lp[k].values()), default=0), -k))
        slot = cap.per_lp[best]
        if all(thr in slot for thr in thresholds):
            for s in slot.values():
                s.trial = t
            return dict(slot)
    raise RuntimeError(f"no integral decode with all captures in {max_trials} trials")


def run_solvers(system: NormalSystem, methods: Optional[Sequence[str]] = None,
                maxit: int = 200, tol: float = 1e-12) -> dict:
    """Residual traces of plain CG (``"cg"``) and PCG with each named preconditioner."""
    methods = list(methods) if methods is not None else ["cg", *SEARCHES]
    op = system.operator()
    traces = {}
    for name in methods:
        if name == "cg":
            _, tr = cg_solve(op, system.rhs, tol=tol, maxit=maxit)
        else:
            tset = find_triangular_set(system.a, system.weights, name)
            m = tset.preconditioner(system.a, system.d2)
            _, tr = pcg_solve(op, m, system.rhs, tol=tol, maxit=maxit)
        traces[name] = tr
    return traces


def iterations_to(trace: KrylovTrace, threshold: float) -> Optional[int]:
    """First iteration whose relative residual ``||r|| / ||b||`` is at most ``threshold``.

    The trace stores squared residuals, so the threshold is squared here.
    """
    for k, val in enumerate(trace.residual_history):
        if val <= threshold * threshold:
            return k
    return None


def write_bench(captures: dict, traces: dict, directory, thresholds=(1e-4,)) -> Path:
    """One CSV per (regime, method) plus a JSON digest."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    digest = {}
    for gap_thr, per_method in traces.items():
        sysm = captures[gap_thr]
        tag = f"gap{gap_thr:g}"
        entry = {"gap": sysm.gap, "lp_rows": sysm.lp_rows, "trial": sysm.trial, "methods": {}}
        for name, tr in per_method.items():
            tr.to_csv(out / f"{tag}_{name}.csv")
            entry["methods"][name] = {
                "iterations": tr.iterations,
                "final": tr.residual_history[-1] ** 0.5,
                **{f"iters_to_{t:g}": iterations_to(tr, t) for t in thresholds},
            }
        digest[tag] = entry
    (out / "bench.json").write_text(json.dumps(digest, indent=2, sort_keys=True) + "\n")
    return out
