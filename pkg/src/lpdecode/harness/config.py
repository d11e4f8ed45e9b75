"""Experiment configuration in a flat ``key = value`` text format.

Blank lines and lines starting with ``#`` are ignored. Unknown keys are
rejected so that typos do not silently fall back to defaults.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from ..adaptive import ALGORITHMS
from ..ipm import DenseNormalSolver, InteriorPointSolver, IpmParams, PcgNormalSolver
from ..precond import SEARCHES

CHANNELS = ("awgn", "bsc")
CODEWORDS = ("zero", "random")
LINEAR_SOLVERS = ("pcg", "dense")
PRECONDITIONERS = ("none",) + tuple(SEARCHES)


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    The code is read from ``code_path`` when set, otherwise generated from
    ``code_dv``, ``code_dc``, ``code_n`` and ``code_seed``.
    """

    code_path: Optional[str] = None
    code_dv: int = 3
    code_dc: int = 6
    code_n: int = 96
    code_seed: int = 0
    channel: str = "awgn"
    snr_db: float = 2.0
    crossover: float = 0.05
    jitter: float = 1e-6
    decoder: str = "malp-b"
    trials: int = 100
    seed: int = 0
    codeword: str = "zero"
    linear_solver: str = "pcg"
    preconditioner: str = "columnwise"
    sigma: float = 0.1
    damping: float = 0.99
    gap_tol: float = IpmParams.gap_tol
    feas_tol: float = IpmParams.feas_tol
    max_iter: int = IpmParams.max_iter
    oracle_fraction: float = 0.0
    record_traces: bool = False
    output_dir: str = "results"

    def validate(self) -> "ExperimentConfig":
        if self.channel not in CHANNELS:
            raise ConfigError(f"channel must be one of {CHANNELS}")
        if self.channel == "awgn" and not math.isfinite(self.snr_db):
            raise ConfigError("snr_db must be finite")
        if self.channel == "bsc" and not 0 < self.crossover < 0.5:
            raise ConfigError("crossover must lie in (0, 1/2)")
        if self.jitter < 0:
            raise ConfigError("jitter must be nonnegative")
        if self.decoder not in ALGORITHMS:
            raise ConfigError(f"decoder must be one of {ALGORITHMS}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.codeword not in CODEWORDS:
            raise ConfigError(f"codeword must be one of {CODEWORDS}")
        if self.linear_solver not in LINEAR_SOLVERS:
            raise ConfigError(f"linear_solver must be one of {LINEAR_SOLVERS}")
        if self.preconditioner not in PRECONDITIONERS:
            raise ConfigError(f"preconditioner must be one of {PRECONDITIONERS}")
        if not 0 <= self.oracle_fraction <= 1:
            raise ConfigError("oracle_fraction must lie in [0, 1]")
        if not 0 < self.sigma < 1 or not 0 < self.damping < 1:
            raise ConfigError("sigma and damping must lie in (0, 1)")
        return self

    def ipm_params(self) -> IpmParams:
        return IpmParams(sigma=self.sigma, damping=self.damping, max_iter=self.max_iter,
                         gap_tol=self.gap_tol, feas_tol=self.feas_tol)

    def make_solver(self) -> InteriorPointSolver:
        if self.linear_solver == "dense":
            lin = DenseNormalSolver()
        else:
            lin = PcgNormalSolver(preconditioner=self.preconditioner)
        return InteriorPointSolver(self.ipm_params(), lin)

    def to_text(self) -> str:
        lines = []
        for key, val in asdict(self).items():
            if val is None:
                continue
            if isinstance(val, bool):
                val = "true" if val else "false"
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str, lineno: int):
    kind = _TYPES[key]
    try:
        if kind in ("int",):
            return int(raw)
        if kind in ("float",):
            return float(raw)
        if kind in ("bool",):
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if kind == "Optional[str]" and raw.lower() in ("", "none"):
            return None
        return raw
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value {raw!r} for {key}") from None


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse the flat format; keyword ``overrides`` win over file values."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw, lineno)
    for key, val in overrides.items():
        if key not in _TYPES:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = val
    return ExperimentConfig(**values).validate()


def load_config(path, **overrides) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), **overrides)
