"""scikit-learn style wrapper around the adaptive LP decoders."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .adaptive import ALGORITHMS, Status, decode
from .ipm import DenseNormalSolver, InteriorPointSolver, IpmParams, PcgNormalSolver
from .tanner import TannerGraph, load_alist


class LPDecoder(TransformerMixin, BaseEstimator):
    """Decode rows of channel LLRs with ALP, MALP-A or MALP-B.

    ``fit`` takes the parity-check matrix (dense 0/1 array, a
    :class:`TannerGraph` or an alist path). ``transform`` returns the LP
    optimum for each row of LLRs and ``predict`` its rounding to bits.

    Parameters
    ----------
    algorithm : str
        One of ``"alp"``, ``"malp-a"``, ``"malp-b"``.
    linear_solver : str
        ``"pcg"`` or ``"dense"``.
    preconditioner : str
        Triangular-set search used by PCG, or ``"none"``.
    gap_tol : float
        Interior-point duality-gap tolerance per variable.

    Attributes
    ----------
    graph_ : TannerGraph
    n_features_in_ : int
        Code length.
    outcomes_ : list of DecodeOutcome
        Outcomes of the most recent ``transform`` call.
    """

    def __init__(self, algorithm: str = "malp-b", linear_solver: str = "pcg",
                 preconditioner: str = "columnwise", gap_tol: float = IpmParams.gap_tol):
        self.algorithm = algorithm
        self.linear_solver = linear_solver
        self.preconditioner = preconditioner
        self.gap_tol = gap_tol

    def fit(self, H, y=None):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.linear_solver not in ("pcg", "dense"):
            raise ValueError("linear_solver must be 'pcg' or 'dense'")
        if isinstance(H, TannerGraph):
            g = H
        elif isinstance(H, str):
            g = load_alist(H)
        else:
            h = check_array(H, dtype=np.int8, ensure_min_samples=1)
            if not np.isin(h, (0, 1)).all():
                raise ValueError("parity-check matrix must be binary")
            g = TannerGraph.from_dense(h)
        self.graph_ = g
        self.n_features_in_ = g.n
        return self

    def _solver(self) -> InteriorPointSolver:
        lin = (DenseNormalSolver() if self.linear_solver == "dense"
               else PcgNormalSolver(preconditioner=self.preconditioner))
        return InteriorPointSolver(IpmParams(gap_tol=self.gap_tol), lin)

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "graph_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} LLRs per row, got {X.shape[1]}")
        solver = self._solver()
        self.outcomes_ = [decode(self.graph_, row, self.algorithm, solver=solver,
                                 keep_points=False) for row in X]
        return np.vstack([o.point for o in self.outcomes_])

    def predict(self, X) -> np.ndarray:
        u = self.transform(X)
        return np.rint(np.clip(u, 0.0, 1.0)).astype(np.int8)

    def certified(self) -> np.ndarray:
        """True where the last outputs are integral, hence maximum likelihood."""
        check_is_fitted(self, "outcomes_")
        return np.array([o.status == Status.INTEGRAL for o in self.outcomes_])
