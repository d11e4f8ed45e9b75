"""Monte-Carlo decoding experiments and their on-disk records."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from ..adaptive import Status, decode
from ..oracle import lp_decode_exhaustive
from ..tanner import TannerGraph, load_alist
from .channel import code_rate, noise_variance_from_snr, transmit_awgn, transmit_bsc
from .codes import Encoder, generate_regular_code
from .config import ExperimentConfig

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ORACLE_MAX_N = 12
ORACLE_TOL = 1e-6


@dataclass
class TrialRecord:
    trial: int
    codeword_id: str
    status: str
    outer_iterations: int
    lp_sizes: list
    ipm_iterations: list
    linear_iterations: list
    bit_errors: int
    near_tie: bool
    oracle_match: Optional[bool] = None
    message: str = ""
    residual_traces: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("residual_traces")
        return json.dumps(d, sort_keys=True)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    summary: dict
    wall_times: list


def load_code(cfg: ExperimentConfig) -> TannerGraph:
    if cfg.code_path:
        return load_alist(cfg.code_path)
    return generate_regular_code(cfg.code_dv, cfg.code_dc, cfg.code_n, cfg.code_seed)


def _codeword_id(info: Optional[np.ndarray]) -> str:
    if info is None or not info.any():
        return "0"
    return np.packbits(info).tobytes().hex()


def _oracle_selected(trial: int, fraction: float) -> bool:
    return math.floor((trial + 1) * fraction) > math.floor(trial * fraction)


def upper_confidence(values, level: float = 0.95) -> Optional[float]:
    """One-sided Student-t upper confidence bound on the mean."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()) if v.size else None
    half = stats.t.ppf(level, v.size - 1) * v.std(ddof=1) / math.sqrt(v.size)
    return float(v.mean() + half)


def summarize(records: list) -> dict:
    """Mean and 95% one-sided upper bound of outer iterations per outcome class."""
    out = {"trials": len(records), "schema_version": SCHEMA_VERSION, "classes": {}}
    for status in Status:
        its = [r.outer_iterations for r in records if r.status == status.value]
        out["classes"][status.value] = {
            "count": len(its),
            "mean_iterations": float(np.mean(its)) if its else None,
            "upper95_iterations": upper_confidence(its),
            "max_iterations": max(its) if its else None,
        }
    out["frame_errors"] = sum(1 for r in records if r.bit_errors or r.status != Status.INTEGRAL.value)
    checked = [r.oracle_match for r in records if r.oracle_match is not None]
    out["oracle_checked"] = len(checked)
    out["oracle_mismatches"] = sum(1 for ok in checked if not ok)
    return out


def histogram(records: list) -> list:
    """Rows ``(outer_iterations, frequency, outcome)`` sorted by outcome then count."""
    counts = Counter((r.status, r.outer_iterations) for r in records)
    return [(its, freq, status) for (status, its), freq in sorted(counts.items())]


def run_trial(g: TannerGraph, cfg: ExperimentConfig, trial: int, rng: np.random.Generator,
              solver, encoder: Optional[Encoder] = None) -> TrialRecord:
    info = None
    if cfg.codeword == "random":
        info, cw = encoder.random_codeword(rng)
    else:
        cw = np.zeros(g.n, dtype=np.uint8)
    if cfg.channel == "awgn":
        var = noise_variance_from_snr(cfg.snr_db, code_rate(g.m, g.n))
        gamma = transmit_awgn(cw, var, rng)
    else:
        gamma = transmit_bsc(cw, cfg.crossover, cfg.jitter, rng)
    sink = getattr(solver.normal_solver, "trace_sink", None)
    if sink is not None:
        sink.clear()
    out = decode(g, gamma, cfg.decoder, solver=solver, keep_points=False)
    lps = out.trace[1:]
    bits = np.rint(np.clip(out.point, 0, 1)).astype(np.uint8)
    rec = TrialRecord(
        trial=trial, codeword_id=_codeword_id(info), status=out.status.value,
        outer_iterations=out.iterations,
        lp_sizes=[t.lp_rows for t in lps],
        ipm_iterations=[t.ipm_iterations for t in lps],
        linear_iterations=[list(t.linear_per_ipm) for t in lps],
        bit_errors=int(np.count_nonzero(bits != cw)),
        near_tie=out.near_tie, message=out.message,
    )
    if sink is not None:
        rec.residual_traces = list(sink)
    if g.n <= ORACLE_MAX_N and _oracle_selected(trial, cfg.oracle_fraction):
        ref = lp_decode_exhaustive(g, gamma)
        if not ref.tie and out.status != Status.SOLVER_FAILURE:
            rec.oracle_match = bool(np.abs(out.point - ref.u).max() <= ORACLE_TOL)
    return rec


def run_experiment(cfg: ExperimentConfig, write: bool = True,
                   graph: Optional[TannerGraph] = None) -> ExperimentResult:
    """Run ``cfg.trials`` independent decodes and optionally persist them.

    Each trial draws from its own generator spawned from ``cfg.seed``, so
    records do not depend on timing or on how many trials came before.
    Solver failures are recorded and do not stop the run.
    """
    cfg.validate()
    g = graph if graph is not None else load_code(cfg)
    solver = cfg.make_solver()
    if cfg.record_traces and cfg.linear_solver == "pcg":
        solver.normal_solver.trace_sink = []
    encoder = Encoder(g) if cfg.codeword == "random" else None
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    records, times = [], []
    for t, ss in enumerate(streams):
        t0 = time.perf_counter()
        rec = run_trial(g, cfg, t, np.random.default_rng(ss), solver, encoder)
        times.append(time.perf_counter() - t0)
        records.append(rec)
        if rec.status == Status.SOLVER_FAILURE.value:
            log.warning("trial %d: solver failure: %s", t, rec.message)
    summary = summarize(records)
    summary.update(code_n=g.n, code_m=g.m, decoder=cfg.decoder, channel=cfg.channel)
    result = ExperimentResult(cfg, records, summary, times)
    if write:
        write_outputs(result, cfg.output_dir)
    return result


def write_outputs(result: ExperimentResult, directory) -> Path:
    """Write records, summary, histogram and traces under ``directory``.

    Everything except ``timings.csv`` is a deterministic function of the
    configuration.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(result.config.to_text())
    with open(out / "records.jsonl", "w") as fh:
        for rec in result.records:
            fh.write(rec.to_json() + "\n")
    (out / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    with open(out / "histogram.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["outer_iterations", "frequency", "outcome"])
        w.writerows(histogram(result.records))
    with open(out / "timings.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "wall_time_s"])
        for t, sec in enumerate(result.wall_times):
            w.writerow([t, f"{sec:.6f}"])
    traced = [r for r in result.records if r.residual_traces]
    if traced:
        tdir = out / "traces"
        tdir.mkdir(exist_ok=True)
        for rec in traced:
            for k, tr in enumerate(rec.residual_traces):
                tr.to_csv(tdir / f"trial{rec.trial:05d}_solve{k:04d}.csv")
    return out
