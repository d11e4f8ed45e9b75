"""Channel models producing log-likelihood ratios.

BPSK maps bit 0 to +1 and bit 1 to -1, so a positive LLR favours 0.
"""

from __future__ import annotations

import math
import warnings

import numpy as np


def llr_awgn(received, noise_variance: float) -> np.ndarray:
    """LLRs ``2 r / sigma^2`` of BPSK over additive white Gaussian noise."""
    if not noise_variance > 0:
        raise ValueError("noise_variance must be positive")
    return 2.0 * np.asarray(received, dtype=float) / noise_variance


def llr_bsc(bits, crossover: float, jitter: float = 0.0,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """LLRs of a binary symmetric channel with optional uniform jitter.

    The jitter, drawn from ``[-jitter, jitter]``, breaks exact ties between
    LP vertices. ``jitter = 0`` is allowed but warns, since ties then occur
    with positive probability.
    """
    if not 0 < crossover < 0.5:
        raise ValueError("crossover must lie in (0, 1/2)")
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")
    bits = np.asarray(bits)
    mag = math.log((1 - crossover) / crossover)
    gamma = np.where(bits % 2 == 0, mag, -mag).astype(float)
    if jitter == 0:
        warnings.warn("BSC LLRs without jitter admit tied LP optima", RuntimeWarning,
                      stacklevel=2)
        return gamma
    rng = rng if rng is not None else np.random.default_rng()
    return gamma + rng.uniform(-jitter, jitter, gamma.shape)


def code_rate(m: int, n: int) -> float:
    """Design rate ``1 - m/n``."""
    return 1.0 - m / n


def noise_variance_from_snr(snr_db: float, rate: float) -> float:
    """Noise variance for Eb/N0 of ``snr_db`` dB at code rate ``rate``."""
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    if not 0 < rate <= 1:
        raise ValueError("rate must lie in (0, 1]")
    return 1.0 / (2.0 * rate * 10.0 ** (snr_db / 10.0))


def bpsk(codeword) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(codeword, dtype=float)


def transmit_awgn(codeword, noise_variance: float, rng: np.random.Generator) -> np.ndarray:
    """Send ``codeword`` over AWGN and return the channel LLRs."""
    x = bpsk(codeword)
    r = x + rng.normal(0.0, math.sqrt(noise_variance), x.shape)
    return llr_awgn(r, noise_variance)


def transmit_bsc(codeword, crossover: float, jitter: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Send ``codeword`` over a BSC and return the jittered LLRs."""
    cw = np.asarray(codeword) % 2
    flips = rng.random(cw.shape) < crossover
    return llr_bsc(cw ^ flips, crossover, jitter, rng)
