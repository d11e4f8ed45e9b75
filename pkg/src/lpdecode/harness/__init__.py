"""Channels, code generation, experiments and the command-line interface."""

from .channel import (code_rate, llr_awgn, llr_bsc, noise_variance_from_snr,
                      transmit_awgn, transmit_bsc)
from .codes import CodeConstructionError, Encoder, generate_regular_code, girth_at_least_six
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiment import TrialRecord, run_experiment, summarize

__all__ = [
    "CodeConstructionError", "ConfigError", "Encoder", "ExperimentConfig", "TrialRecord",
    "code_rate", "generate_regular_code", "girth_at_least_six", "llr_awgn", "llr_bsc",
    "load_config", "noise_variance_from_snr", "parse_config", "run_experiment",
    "summarize", "transmit_awgn", "transmit_bsc",
]
