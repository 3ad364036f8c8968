import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pgadmm import ConfigurationError, NumericalError, make_oracle, prox_indicator, prox_l1, prox_quadratic
from pgadmm.prox import UNBOUNDED, oracle_from_spec, prox_squared_l2, spec_to_json

from helpers import firm_nonexpansive_slack, grid_prox_1d, moreau_defect, prox_cases, separable_value

vectors = arrays(np.float64, 4, elements=st.floats(-1e3, 1e3))
scales = st.floats(1e-3, 1e3)


class TestExamples:
    def test_soft_threshold(self):
        assert prox_l1(np.zeros(3), 1.0, 1.0).tolist() == [0.0, 0.0, 0.0]
        assert prox_l1(np.array([2.0]), 1.0, 1.0)[0] == 1.0
        assert prox_l1(np.array([0.5]), 1.0, 1.0)[0] == 0.0

    def test_soft_threshold_against_grid(self):
        h = separable_value("l1", weight=1.0)
        assert abs(grid_prox_1d(h, 2.0, 1.0) - 1.0) <= 1e-4
        assert abs(grid_prox_1d(h, 0.5, 1.0)) <= 1e-4

    def test_quadratic(self):
        v = np.array([2.0, 4.0])
        assert np.array_equal(prox_quadratic(v, 1.0, np.zeros((2, 2)), np.zeros(2)), v)
        assert np.allclose(prox_quadratic(v, 1.0, np.eye(2), np.zeros(2)), [1.0, 2.0], atol=1e-15)
        e1 = np.eye(3)[0]
        assert np.allclose(prox_quadratic(np.zeros(3), 1.0, np.zeros((3, 3)), e1), -e1, atol=1e-15)

    def test_quadratic_ill_conditioned(self):
        with pytest.raises(NumericalError):
            prox_quadratic(np.ones(2), 1.0, np.diag([1e16, 0.0]), np.zeros(2))

    def test_projection(self):
        v = np.array([0.2, -0.3])
        assert np.array_equal(prox_indicator(v, 1.0, -np.ones(2), np.ones(2)), v)
        assert prox_indicator(np.array([-1.0, 2.0]), 1.0, np.zeros(2), np.full(2, np.inf)).tolist() == [0.0, 2.0]
        assert prox_indicator(np.array([3.0, -3.0]), 1.0, -np.ones(2), np.ones(2)).tolist() == [1.0, -1.0]

    def test_projection_against_grid(self):
        h = separable_value("box", lo=-1.0, hi=1.0)
        assert abs(grid_prox_1d(h, 3.0, 1.0) - 1.0) <= 1e-4
        assert abs(grid_prox_1d(h, -3.0, 1.0) + 1.0) <= 1e-4


class TestErrors:
    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_nonpositive_scale(self, t):
        with pytest.raises(ConfigurationError):
            prox_l1(np.ones(2), t, 1.0)
        with pytest.raises(ConfigurationError):
            make_oracle("l1", 2)(np.ones(2), t)

    def test_bad_params(self):
        with pytest.raises(ConfigurationError):
            prox_indicator(np.ones(2), 1.0, np.ones(2), np.zeros(2))
        with pytest.raises(ConfigurationError):
            make_oracle("l1", 2, weight=-1.0)
        with pytest.raises(ConfigurationError):
            make_oracle("quadratic", 2, Q=-np.eye(2), q=np.zeros(2))
        with pytest.raises(ConfigurationError):
            make_oracle("huber", 2)


class TestSpecs:
    def test_unbounded_sentinel_roundtrip(self):
        spec = spec_to_json("box", lo=[0.0, -np.inf], hi=[np.inf, 1.0])
        assert spec["lo"] == [0.0, UNBOUNDED] and spec["hi"] == [UNBOUNDED, 1.0]
        h = oracle_from_spec(spec, 2)
        assert h(np.array([-5.0, 5.0])).tolist() == [0.0, 1.0]

    def test_spec_attached(self):
        assert make_oracle("l1", 3, weight=0.5).spec == {"kind": "l1", "weight": 0.5}


@pytest.mark.parametrize("kind,params", prox_cases(), ids=lambda c: c if isinstance(c, str) else "")
class TestAgainstIndependentOracles:
    def test_firmly_nonexpansive(self, kind, params):
        assert firm_nonexpansive_slack(kind, params) >= -1e-10

    def test_moreau_identity(self, kind, params):
        assert moreau_defect(kind, params) <= 1e-12

    def test_brute_force_minimizer(self, kind, params, rng):
        dim = 4
        h = make_oracle(kind, dim, **params)
        for t in (0.5, 1.0, 2.0):
            v = rng.standard_normal(dim) * 2
            got = h(v, t)
            if kind == "quadratic":
                Q, q = params["Q"], params["q"]
                obj = lambda u: 0.5 * u @ Q @ u + q @ u + (u - v) @ (u - v) / (2 * t)
                ref = scipy.optimize.minimize(obj, v, method="BFGS", options={"gtol": 1e-10}).x
            else:
                kw = dict(params)
                ref = np.empty(dim)
                for i in range(dim):
                    if kind == "box":
                        kw = {"lo": params["lo"][i], "hi": params["hi"][i]}
                    ref[i] = grid_prox_1d(separable_value(kind, **kw), v[i], t)
            assert np.max(np.abs(got - ref)) <= 1e-4


@settings(max_examples=100, deadline=None)
@given(vectors, vectors, scales, st.floats(0.0, 100.0))
def test_soft_threshold_is_one_lipschitz(v1, v2, t, mu):
    d = prox_l1(v1, t, mu) - prox_l1(v2, t, mu)
    assert np.linalg.norm(d) <= np.linalg.norm(v1 - v2) * (1 + 1e-12) + 1e-12


@settings(max_examples=100, deadline=None)
@given(vectors, scales, st.floats(0.0, 100.0))
def test_squared_l2_optimality(v, t, mu):
    u = prox_squared_l2(v, t, mu)
    assert np.allclose(mu * u + (u - v) / t, 0.0, atol=1e-9 * (1 + np.abs(v).max() / t))


@settings(max_examples=100, deadline=None)
@given(vectors, vectors)
def test_projection_is_idempotent_and_one_lipschitz(v1, v2):
    lo, hi = -np.ones(4), np.array([0.5, 1.0, 2.0, 3.0])
    p1, p2 = prox_indicator(v1, 1.0, lo, hi), prox_indicator(v2, 1.0, lo, hi)
    assert np.array_equal(prox_indicator(p1, 1.0, lo, hi), p1)
    assert np.linalg.norm(p1 - p2) <= np.linalg.norm(v1 - v2) + 1e-12
