import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from lpdecode import TannerGraph
from lpdecode.oracle import (DenseLp, Infeasible, Unbounded, enumerate_codewords,
                             full_relaxation_lp, lp_decode_exhaustive, ml_decode_exhaustive,
                             simplex_solve)
from lpdecode.tanner import rank_gf2

from conftest import random_graph

# a column order of the (7,4,3) Hamming code in which [1, 1/2, 0, 1/2, 0, 0, 1/2]
# is a vertex of the relaxation; found by searching column permutations
HAMMING_PSEUDO = [[1, 1, 1, 1, 0, 0, 0],
                  [1, 1, 0, 0, 1, 0, 1],
                  [1, 0, 0, 1, 0, 1, 1]]
# interior of the vertex's normal cone, checked against the simplex oracle
GAMMA_PSEUDO = [-7.0, 0.1, 3.0, 0.1, 3.0, 3.0, 0.1]
PSEUDOCODEWORD = [1.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.5]


class TestSimplex:
    def test_one_variable(self):
        res = simplex_solve(DenseLp([1.0], a_ub=[[-1.0]], b_ub=[-1.0]))
        assert res.x.tolist() == pytest.approx([1.0])

    def test_zero_objective(self):
        res = simplex_solve(DenseLp([0.0, 0.0], a_eq=[[1.0, 1.0]], b_eq=[1.0]))
        assert res.objective == 0.0
        assert res.x.sum() == pytest.approx(1.0)
        assert res.tie

    def test_h1_relaxation(self, h1):
        lp, _, _ = full_relaxation_lp(h1, [-3.0, 1.0, 2.0, -1.0])
        res = simplex_solve(lp)
        assert res.x == pytest.approx([1.0, 1.0, 0.0, 1.0])
        assert res.objective == pytest.approx(-3.0)

    def test_infeasible(self):
        with pytest.raises(Infeasible):
            simplex_solve(DenseLp([1.0], a_ub=[[1.0]], b_ub=[-1.0]))

    def test_unbounded(self):
        with pytest.raises(Unbounded):
            simplex_solve(DenseLp([-1.0], a_ub=[[-1.0]], b_ub=[0.0]))

    def test_cycling_example_terminates(self):
        # Beale's LP cycles under the textbook largest-coefficient rule
        c = [-0.75, 150.0, -0.02, 6.0]
        a = [[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]]
        res = simplex_solve(DenseLp(c, a_ub=a, b_ub=[0.0, 0.0, 1.0]))
        assert res.objective == pytest.approx(-0.05)

    def test_rejects_large(self):
        with pytest.raises(ValueError):
            DenseLp(np.zeros(501))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_agrees_with_linprog(self, seed):
        rng = np.random.default_rng(seed)
        q, k = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        a = rng.normal(size=(k, q))
        b = a @ rng.random(q) + rng.random(k)
        c = rng.normal(size=q)
        ref = linprog(c, A_ub=a, b_ub=b, bounds=[(0, 1)] * q, method="highs")
        res = simplex_solve(DenseLp(c, a_ub=a, b_ub=b, upper=np.ones(q)))
        assert res.objective == pytest.approx(ref.fun, abs=1e-7)


class TestCodewords:
    def test_h1(self, h1):
        words = {"".join(map(str, w)) for w in enumerate_codewords(h1)}
        assert words == {"0000", "0110", "1011", "1101"}

    def test_repetition(self):
        assert enumerate_codewords(TannerGraph.from_dense([[1, 1]])).tolist() == [[0, 0], [1, 1]]

    def test_identity(self):
        assert enumerate_codewords(TannerGraph.from_dense(np.eye(3))).tolist() == [[0, 0, 0]]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_count_matches_rank(self, seed):
        g = random_graph(np.random.default_rng(seed), 4, 9)
        assert len(enumerate_codewords(g)) == 2 ** (g.n - rank_gf2(g.to_dense()))


class TestMl:
    def test_all_positive(self, h1):
        assert ml_decode_exhaustive(h1, [1.0, 1.0, 1.0, 1.0]).codeword.tolist() == [0, 0, 0, 0]

    def test_unique(self, h1):
        res = ml_decode_exhaustive(h1, [-3.0, 1.0, 2.0, -1.0])
        assert res.codeword.tolist() == [1, 1, 0, 1]
        assert res.cost == -3.0
        assert res.ties == []

    def test_tie_reported(self, h1):
        res = ml_decode_exhaustive(h1, [-3.0, 1.0, 1.0, -1.0])
        assert sorted(w.tolist() for w in res.ties) == [[1, 0, 1, 1], [1, 1, 0, 1]]


class TestLpDecode:
    def test_all_positive(self, h1):
        assert lp_decode_exhaustive(h1, [1.0, 1.0, 1.0, 1.0]).u.tolist() == [0, 0, 0, 0]

    def test_h1_integral(self, h1):
        assert lp_decode_exhaustive(h1, [-3.0, 1.0, 2.0, -1.0]).u == pytest.approx([1, 1, 0, 1])

    def test_hamming_pseudocodeword(self):
        res = lp_decode_exhaustive(TannerGraph.from_dense(HAMMING_PSEUDO), GAMMA_PSEUDO)
        assert res.u == pytest.approx(PSEUDOCODEWORD, abs=1e-9)
        assert not res.tie

    def test_size_limits(self):
        with pytest.raises(ValueError):
            lp_decode_exhaustive(TannerGraph.from_dense(np.ones((1, 13))), np.ones(13))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_relaxation_properties(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, int(rng.integers(1, 5)), int(rng.integers(3, 10)))
        gamma = rng.normal(0.3, 1.0, g.n)
        res = lp_decode_exhaustive(g, gamma)
        if res.tie:
            return
        # vertex: at least n active constraints
        assert res.active >= g.n
        frac = np.minimum(res.u, 1 - res.u) > 1e-7
        assert frac.sum() <= g.m
        if not frac.any():
            ml = ml_decode_exhaustive(g, gamma)
            assert res.u == pytest.approx(ml.codeword)
