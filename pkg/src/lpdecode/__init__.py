"""Adaptive LP decoding of LDPC codes with an interior-point solver and triangular preconditioners."""

from .adaptive import (ALGORITHMS, DecodeOutcome, Status, alp_decode, classify_solution,
                       decode, malp_a_decode, malp_b_decode)
from .ipm import InteriorPointSolver, IpmParams, PcgNormalSolver, DenseNormalSolver
from .tanner import TannerGraph, load_alist, peel_erasures, save_alist

from .estimator import LPDecoder

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "DecodeOutcome", "Status", "alp_decode", "malp_a_decode", "malp_b_decode",
    "decode", "classify_solution", "InteriorPointSolver", "IpmParams", "PcgNormalSolver",
    "DenseNormalSolver", "TannerGraph", "load_alist", "save_alist", "peel_erasures",
]
