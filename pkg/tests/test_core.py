import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pgadmm import (
    ConfigurationError,
    LinearMap,
    Problem,
    SelfAdjointOperator,
    UnsupportedOperationError,
    adjoint_check,
    aug_lagrangian,
    lagrangian,
    make_oracle,
    primal_residual,
)
from pgadmm.core import ProxOracle, power_iteration
from pgadmm.oracle import solve_oracle

from conftest import build


def zero_problem(n=2):
    z = make_oracle("zero", n)
    return Problem(z, make_oracle("zero", n), LinearMap(np.eye(n)), LinearMap(-np.eye(n)), np.zeros(n))


class TestAdjointCheck:
    def test_identity(self):
        assert adjoint_check(LinearMap.identity(5), trials=7) == 0.0

    def test_transpose_is_exact(self):
        assert adjoint_check(LinearMap(np.array([[1.0, 2.0], [3.0, 4.0]]))) <= 1e-14

    def test_wrong_adjoint_is_caught(self):
        M = np.array([[1.0, 2.0], [3.0, 4.0]])
        bad = LinearMap.from_callables(lambda x: M @ x, lambda y: M @ y, (2, 2))
        assert adjoint_check(bad) > 0.1

    def test_by_hand_on_basis_probes(self):
        # <M e1, e2> = 3 while <e1, M e2> = 2 if the adjoint is M itself
        M = np.array([[1.0, 2.0], [3.0, 4.0]])
        e1, e2 = np.eye(2)
        assert (M @ e1) @ e2 == 3.0 and e1 @ (M @ e2) == 2.0

    def test_dimension_mismatch(self):
        A = LinearMap(np.ones((3, 2)))
        with pytest.raises(ConfigurationError):
            A.forward(np.ones(3))
        with pytest.raises(ConfigurationError):
            A.adjoint(np.ones(2))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**16))
    def test_shipped_maps(self, m, n, seed):
        M = np.random.default_rng(seed).standard_normal((m, n))
        assert adjoint_check(LinearMap(M), seed=seed) <= 1e-12

    @pytest.mark.parametrize("family,dims", [("lasso", 6), ("sep_qp", (5, 4, 3)), ("basis_pursuit", (4, 9))])
    def test_generated_problems(self, family, dims):
        p = build(family, dims, 3)
        assert adjoint_check(p.A) <= 1e-12 and adjoint_check(p.B) <= 1e-12


class TestSelfAdjointOperator:
    def test_classification(self):
        assert SelfAdjointOperator(np.zeros((2, 2))).definiteness == "zero"
        assert SelfAdjointOperator(np.eye(2)).definiteness == "positive-definite"
        assert SelfAdjointOperator(np.diag([1.0, 0.0])).definiteness == "positive-semidefinite"

    def test_rejects_indefinite_and_asymmetric(self):
        with pytest.raises(ConfigurationError):
            SelfAdjointOperator(np.diag([1.0, -1.0]))
        with pytest.raises(ConfigurationError):
            SelfAdjointOperator(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_norm_matches_power_iteration(self):
        M = np.array([[2.0, 1.0], [1.0, 3.0]])
        op = SelfAdjointOperator(M)
        lam = power_iteration(lambda v: M @ v, 2)
        assert abs(op.norm - lam) <= 1e-9 * lam


class TestLagrangian:
    def test_zero_data(self):
        p = zero_problem()
        y = np.array([0.3, -1.2])
        assert lagrangian(p, y, y, np.ones(2)) == 0.0

    def test_toy_values(self, toy):
        one = np.ones(1)
        assert lagrangian(toy, one, one, one) == pytest.approx(1.0, abs=1e-15)
        assert lagrangian(toy, one, one, np.zeros(1)) == pytest.approx(1.0, abs=1e-15)
        assert aug_lagrangian(toy, 1.0, np.zeros(1), np.zeros(1), np.zeros(1)) == pytest.approx(2.0, abs=1e-15)

    def test_sigma_must_be_positive(self, toy):
        with pytest.raises(ConfigurationError):
            aug_lagrangian(toy, 0.0, np.zeros(1), np.zeros(1), np.zeros(1))

    def test_missing_value_evaluator(self):
        f = ProxOracle(1, prox=lambda v, t: v)
        p = Problem(f, make_oracle("zero", 1), LinearMap(np.eye(1)), LinearMap(np.eye(1)), np.zeros(1))
        with pytest.raises(UnsupportedOperationError):
            lagrangian(p, np.zeros(1), np.zeros(1), np.zeros(1))

    def test_primal_residual(self, toy):
        assert primal_residual(toy, np.zeros(1), np.zeros(1))[0] == -2.0
        assert primal_residual(toy, np.ones(1), np.ones(1))[0] == 0.0
        p = build("sep_qp", (5, 4, 3), 1)
        sol = solve_oracle(p)
        assert np.linalg.norm(primal_residual(p, sol.y, sol.z)) <= 1e-10


class TestProblem:
    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            Problem(make_oracle("zero", 2), make_oracle("zero", 2), LinearMap(np.eye(2)),
                    LinearMap(np.ones((2, 3))), np.zeros(2))

    @pytest.mark.parametrize("family,dims", [("lasso", 6), ("sep_qp", (6, 5, 4))])
    def test_quadratic_description_matches_prox(self, family, dims):
        assert build(family, dims, 2).cross_check_quadratic() <= 1e-8

    @pytest.mark.parametrize("family,dims", [("lasso", 6), ("sep_qp", (6, 5, 4)), ("scalar_toy", None)])
    def test_monotonicity_with_modulus(self, family, dims, rng):
        # xi = v - prox_f(v) is a subgradient of f at prox_f(v)
        p = build(family, dims, 4)
        for _ in range(200):
            v1, v2 = rng.standard_normal((2, p.Y.dim)) * 3
            y1, y2 = p.f(v1), p.f(v2)
            lhs = (v2 - y2 - v1 + y1) @ (y2 - y1)
            assert lhs >= (y2 - y1) @ p.sigma_f @ (y2 - y1) - 1e-10


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 3, elements=st.floats(-50, 50)), st.floats(0.01, 20))
def test_aug_lagrangian_exceeds_lagrangian_by_penalty(v, sigma):
    p = build("sep_qp", (3, 3, 3), 0)
    y, z, x = v, v[::-1].copy(), v * 0.5
    r = primal_residual(p, y, z)
    gap = aug_lagrangian(p, sigma, y, z, x) - lagrangian(p, y, z, x)
    assert gap == pytest.approx(0.5 * sigma * r @ r, rel=1e-9, abs=1e-9)
