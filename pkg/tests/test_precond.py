import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpdecode.linsolve import SparseMatrix
from lpdecode.precond import (SEARCHES, TriangularSet, check_slack_structure,
                              extended_tanner_graph, find_triangular_set, greedy_columnwise,
                              greedy_incremental, greedy_rowwise, triangulation_step)
from lpdecode.tanner import contains_stopping_set

# rows {0,1,2} and {1,2,3} with slack columns 4 and 5
H1_AUG = np.array([[1, 1, 1, 0, 1, 0],
                   [0, 1, 1, 1, 0, 1]], dtype=float)
SMALL = np.array([[1, 1, 1, 0],
                  [1, 0, 0, 1]], dtype=float)
D_SMALL = np.array([5.0, 4.0, 1.0, 2.0])


def ldpc_like(rng, p, n, col_degree=3):
    """Random +-1 matrix with column degree ``col_degree`` plus an identity block."""
    std = np.zeros((p, n))
    for i in range(n):
        rows = rng.choice(p, size=min(col_degree, p), replace=False)
        std[rows, i] = rng.choice([-1.0, 1.0], rows.size)
    return np.hstack([std, np.eye(p)])


def brute_force_triangulable(a, s):
    return not contains_stopping_set(extended_tanner_graph(a), s)


class TestTriangulationStep:
    def test_slacks(self):
        tri = triangulation_step(H1_AUG, [4, 5])
        assert tri.success and set(tri.columns) == {4, 5}

    def test_two_standard_columns(self):
        tri = triangulation_step(H1_AUG, [0, 3])
        assert tri.success and set(tri.columns) == {0, 3}

    def test_failure_residual(self):
        tri = triangulation_step(H1_AUG, [1, 2])
        assert not tri.success
        assert tri.residual == frozenset({1, 2})

    def test_too_many_columns(self):
        with pytest.raises(ValueError):
            triangulation_step(H1_AUG, [0, 1, 2])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_matches_stopping_set_oracle(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(2, 7))
        a = ldpc_like(rng, p, int(rng.integers(2, 9)), col_degree=2)
        k = int(rng.integers(1, p + 1))
        s = rng.choice(a.shape[1], size=k, replace=False).tolist()
        assert triangulation_step(a, s).success == brute_force_triangulable(a, s)


class TestIncremental:
    def test_hand_trace(self):
        ts = greedy_incremental(SMALL, D_SMALL)
        assert set(ts.columns) == {0, 1}
        assert ts.weight == 9.0

    def test_slacks_first(self):
        ts = greedy_incremental(SMALL, np.array([1.0, 1.0, 9.0, 9.0]))
        assert set(ts.columns) == {2, 3}

    @pytest.mark.parametrize("batch,seed_size", [(4, 0), (1, 2), (3, 1)])
    def test_accelerations_do_not_change_output(self, batch, seed_size):
        rng = np.random.default_rng(7)
        for _ in range(10):
            a = ldpc_like(rng, 20, 30)
            d = rng.exponential(size=a.shape[1])
            plain = greedy_incremental(a, d)
            fast = greedy_incremental(a, d, batch=batch, seed_size=seed_size)
            assert set(fast.columns) == set(plain.columns)


class TestColumnwise:
    def test_hand_trace(self):
        ts = greedy_columnwise(SMALL, D_SMALL)
        assert ts.columns == (1, 0)
        assert ts.rows == (0, 1)

    def test_slack_fallback(self):
        a = np.array([[1, 1, 1, 0], [1, 1, 0, 1]], dtype=float)
        ts = greedy_columnwise(a, np.array([1.0, 1.0, 5.0, 5.0]))
        assert set(ts.columns) == {2, 3}

    def test_single_row(self):
        assert greedy_columnwise(np.array([[1.0, 1.0]]), np.array([3.0, 7.0])).columns == (1,)


class TestRowwise:
    def test_hand_trace(self):
        ts = greedy_rowwise(SMALL, D_SMALL)
        assert ts.columns == (0, 1)
        assert ts.rows == (1, 0)

    def test_identity(self):
        ts = greedy_rowwise(np.eye(3), np.array([1.0, 2.0, 3.0]))
        assert set(ts.columns) == {0, 1, 2}

    def test_diagonal_expansion(self):
        # three rows over the same two standard columns; the main loop
        # represents rows 0 and 2 only, so row 1 gets its slack column 3
        a = np.hstack([np.ones((3, 2)), np.eye(3)])
        ts = greedy_rowwise(a, np.array([4.0, 3.0, 1.0, 2.0, 5.0]))
        assert ts.columns == (0, 4, 3)
        assert ts.rows == (0, 2, 1)
        assert ts.is_valid(SparseMatrix(a))

    def test_triangular_expansion_valid(self):
        a = np.hstack([np.ones((3, 2)), np.eye(3)])
        ts = greedy_rowwise(a, np.array([4.0, 3.0, 1.0, 2.0, 5.0]), "triangular")
        assert ts.is_valid(SparseMatrix(a))

    def test_unknown_expansion(self):
        with pytest.raises(ValueError):
            greedy_rowwise(SMALL, D_SMALL, "sideways")


@pytest.mark.parametrize("method", sorted(SEARCHES))
def test_sets_are_valid_on_random_matrices(method):
    rng = np.random.default_rng(sorted(SEARCHES).index(method))
    for p in (5, 40, 200):
        a = ldpc_like(rng, p, 2 * p)
        d = np.exp(rng.normal(0, 3, a.shape[1]))
        ts = find_triangular_set(a, d, method)
        assert len(ts.columns) == p and len(set(ts.columns)) == p
        assert ts.is_valid(SparseMatrix(a))
        assert ts.weight == pytest.approx(d[list(ts.columns)].sum())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_top_prefix_is_kept(seed):
    # if the heaviest s columns are triangulable, incremental and row-wise keep them
    rng = np.random.default_rng(seed)
    a = ldpc_like(rng, 8, 12, col_degree=2)
    d = rng.permutation(a.shape[1]).astype(float) + 1.0
    order = np.argsort(-d, kind="stable")
    s = 0
    while s < 8 and triangulation_step(a, order[:s + 1]).success:
        s += 1
    top = set(order[:s].tolist())
    assert top <= set(greedy_incremental(a, d).columns)
    assert top <= set(greedy_rowwise(a, d, "triangular").columns)


def test_invalid_set_detected():
    bad = TriangularSet((1, 2), (0, 1), "lower", 0.0)
    assert not bad.is_valid(SparseMatrix(H1_AUG))


def test_slack_structure():
    check_slack_structure(H1_AUG)
    with pytest.raises(ValueError):
        check_slack_structure(SMALL[:, [0, 1, 3, 2]])


def test_unknown_search():
    with pytest.raises(ValueError):
        find_triangular_set(SMALL, D_SMALL, "best")
