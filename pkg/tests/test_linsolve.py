import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpdecode.linsolve import (DensePreconditioner, IdentityPreconditioner, KrylovBreakdown,
                               KrylovTrace, NormalOperator, SparseMatrix, TriangularFactor,
                               ZeroPivotError, apply_preconditioner, cg_solve,
                               estimate_extreme_eigenvalues, matvec_normal, pcg_solve,
                               triangular_solve)

A2 = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
LOWER2 = np.array([[1.0, 0.0], [1.0, 1.0]])


def normal_op(a, d2=None):
    a = np.asarray(a, dtype=float)
    return NormalOperator(SparseMatrix(a), np.ones(a.shape[1]) if d2 is None else d2)


def random_system(rng, p, q, density=0.3):
    a = (rng.random((p, q)) < density) * rng.choice([-1.0, 1.0], (p, q))
    a = np.hstack([a, np.eye(p)])
    d2 = np.exp(rng.uniform(-3, 3, q + p))
    return a, d2


class TestNormalOperator:
    def test_example(self):
        assert matvec_normal(normal_op(A2), np.array([1.0, 0.0])).tolist() == [2.0, 1.0]

    def test_vanishing_weight(self):
        d2 = np.array([1.0, 1.0, 1e-30])
        out = matvec_normal(normal_op(A2, d2), np.array([0.0, 1.0]))
        assert np.allclose(out, [1.0, 1.0])

    def test_zero_vector(self):
        assert (matvec_normal(normal_op(A2), np.zeros(2)) == 0).all()

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            normal_op(A2, np.array([1.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            normal_op(A2, np.ones(2))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_matches_dense(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(1, 25))
        a, d2 = random_system(rng, p, int(rng.integers(1, 25)))
        v = rng.normal(size=p)
        dense = (a * d2) @ a.T @ v
        got = matvec_normal(normal_op(a, d2), v)
        assert np.allclose(got, dense, rtol=1e-12, atol=1e-12 * np.abs(dense).max())


class TestCg:
    def test_identity(self):
        w = np.array([3.0, -1.0, 2.0])
        x, trace = cg_solve(normal_op(np.eye(3)), w)
        assert trace.iterations == 1 and trace.converged
        assert np.allclose(x, w)

    def test_two_by_two(self):
        x, trace = cg_solve(normal_op(A2), np.array([3.0, 3.0]), tol=1e-24)
        assert trace.iterations <= 2
        assert np.allclose(x, [1.0, 1.0])

    def test_history_starts_at_one(self):
        _, trace = cg_solve(normal_op(A2), np.array([3.0, 1.0]))
        assert trace.residual_history[0] == pytest.approx(1.0)
        assert len(trace.residual_history) == trace.iterations + 1

    def test_condition_bound(self):
        lam = np.linspace(1.0, 1e4, 60)
        q = np.diag(lam)
        tol = 1e-6
        _, trace = cg_solve(q, np.ones(60), tol=tol ** 2, maxit=1000)
        kappa = lam[-1] / lam[0]
        assert trace.converged
        assert trace.iterations <= math.ceil(0.5 * math.sqrt(kappa) * math.log(2 / tol))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_small_spd_finishes(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(1, 21))
        m = rng.normal(size=(p, p))
        q = m @ m.T + p * np.eye(p)
        w = rng.normal(size=p)
        _, trace = cg_solve(q, w, tol=1e-24, maxit=p + 5)
        assert trace.converged

    def test_breakdown_on_indefinite(self):
        with pytest.raises(KrylovBreakdown) as err:
            cg_solve(np.diag([1.0, -1.0]), np.array([1.0, 1.0]))
        assert err.value.x is not None

    def test_zero_rhs(self):
        x, trace = cg_solve(np.eye(2), np.zeros(2))
        assert trace.converged and trace.iterations == 0
        assert (x == 0).all()


class TestPcg:
    def test_identity_matches_cg_bitwise(self):
        rng = np.random.default_rng(4)
        a, d2 = random_system(rng, 15, 30)
        op = normal_op(a, d2)
        w = rng.normal(size=15)
        x1, t1 = cg_solve(op, w, tol=1e-20, maxit=200)
        x2, t2 = pcg_solve(op, IdentityPreconditioner(), w, tol=1e-20, maxit=200)
        assert t1.residual_history == t2.residual_history
        assert (x1 == x2).all()

    def test_exact_preconditioner(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(5, 5))
        q = m @ m.T + np.eye(5)
        x, trace = pcg_solve(q, DensePreconditioner(q), rng.normal(size=5), tol=1e-20)
        assert trace.iterations == 1

    def test_refresh_records_true_residual(self):
        q = np.diag(np.geomspace(1.0, 1e6, 200))
        w = np.ones(200)
        x, trace = pcg_solve(q, IdentityPreconditioner(), w, tol=0.0, maxit=50)
        true = float(np.sum((w - q @ x) ** 2) / (w @ w))
        assert trace.iterations == 50
        assert trace.residual_history[50] == pytest.approx(true, rel=1e-12)

    def test_callable_preconditioner(self):
        q = np.diag([2.0, 8.0])
        x, trace = pcg_solve(q, lambda r: r / np.diag(q), np.array([2.0, 8.0]), tol=1e-20)
        assert trace.iterations == 1
        assert np.allclose(x, [1.0, 1.0])


class TestTriangular:
    def test_lower_example(self):
        t = TriangularFactor(SparseMatrix(LOWER2), [0, 1], [0, 1], lower=True)
        assert triangular_solve(t, np.array([1.0, 2.0])).tolist() == [1.0, 1.0]

    def test_identity(self):
        t = TriangularFactor(SparseMatrix(np.eye(3)), [0, 1, 2], [0, 1, 2])
        assert triangular_solve(t, np.array([4.0, 5.0, 6.0])).tolist() == [4.0, 5.0, 6.0]

    def test_transposed_example(self):
        t = TriangularFactor(SparseMatrix(LOWER2), [0, 1], [0, 1], lower=True)
        assert triangular_solve(t, np.array([1.0, 1.0]), transpose=True).tolist() == [0.0, 1.0]

    def test_permuted_upper(self):
        # columns (2, 0) of [[1, 0, 1], [1, 1, 0]] with rows (0, 1) are upper triangular
        a = SparseMatrix(np.array([[1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]))
        t = TriangularFactor(a, [0, 1], [2, 0], lower=False)
        f = triangular_solve(t, np.array([3.0, 5.0]))
        sub = a.toarray()[:, [2, 0]]
        assert np.allclose(sub @ f, [3.0, 5.0])

    def test_zero_pivot(self):
        with pytest.raises(ZeroPivotError):
            TriangularFactor(SparseMatrix(np.array([[0.0, 1.0], [1.0, 1.0]])), [0, 1], [0, 1])

    def test_off_triangle(self):
        with pytest.raises(ZeroPivotError):
            TriangularFactor(SparseMatrix(np.array([[1.0, 1.0], [1.0, 1.0]])), [0, 1], [0, 1])

    def test_wrong_pivot_count(self):
        with pytest.raises(ValueError):
            TriangularFactor(SparseMatrix(np.eye(2)), [0], [0])


class TestPreconditioner:
    def test_hand_example(self):
        t = TriangularFactor(SparseMatrix(LOWER2), [0, 1], [0, 1])
        z = apply_preconditioner(t, np.ones(2), np.array([1.0, 2.0]))
        assert np.allclose(z, [0.0, 1.0])

    def test_diagonal(self):
        t = TriangularFactor(SparseMatrix(np.eye(2)), [0, 1], [0, 1])
        assert np.allclose(apply_preconditioner(t, np.array([4.0, 9.0]),
                                                np.array([4.0, 9.0])), [1.0, 1.0])

    def test_zero(self):
        t = TriangularFactor(SparseMatrix(LOWER2), [0, 1], [0, 1])
        assert (apply_preconditioner(t, np.ones(2), np.zeros(2)) == 0).all()

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_multiply_back(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(1, 20))
        # random unit lower-triangular block, scrambled by a row and column permutation
        low = np.tril((rng.random((p, p)) < 0.3) * rng.choice([-1.0, 1.0], (p, p)), -1)
        low += np.eye(p)
        rows, cols = rng.permutation(p), rng.permutation(p)
        a = np.zeros((p, p))
        a[np.ix_(rows, cols)] = low
        d2 = np.exp(rng.uniform(-2, 2, p))
        t = TriangularFactor(SparseMatrix(a), rows, cols)
        r = rng.normal(size=p)
        z = apply_preconditioner(t, d2, r)
        m = (a * d2) @ a.T
        assert np.linalg.norm(m @ z - r) <= 1e-10 * np.linalg.norm(r)


class TestEigenvalues:
    @pytest.mark.parametrize("q,hi,lo", [
        (np.diag([1.0, 100.0]), 100.0, 1.0),
        (np.eye(3), 1.0, 1.0),
        (np.array([[2.0, 1.0], [1.0, 2.0]]), 3.0, 1.0),
    ])
    def test_examples(self, q, hi, lo):
        lam_max, lam_min, reliable = estimate_extreme_eigenvalues(q)
        assert lam_max == pytest.approx(hi, rel=1e-6)
        assert lam_min == pytest.approx(lo, rel=1e-6)
        assert reliable

    def test_bounds_are_inside_spectrum(self):
        rng = np.random.default_rng(1)
        m = rng.normal(size=(12, 12))
        q = m @ m.T + 0.1 * np.eye(12)
        lam = np.linalg.eigvalsh(q)
        lam_max, lam_min, _ = estimate_extreme_eigenvalues(q, iters=30)
        assert lam_max <= lam[-1] * (1 + 1e-9)
        assert lam_min >= lam[0] * (1 - 1e-9)


def test_trace_csv():
    buf = io.StringIO()
    KrylovTrace([1.0, 0.25], 1, True).to_csv(buf)
    assert buf.getvalue() == "iteration,relative_residual\n0,1.0\n1,0.25\n"
