import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstatics._exact import QStaticsError, SingularMatrixError
from qstatics.ensemble import convex_mix
from qstatics.experiments import (
    W_GRID_STEPS,
    classical_positivity_check,
    convergence_study,
    hadamard_change,
    two_slit_demo,
)
from qstatics.numeric import ONE, ZERO, I, PairNumber
from qstatics.statespace import BasisChange

from .conftest import probability_vectors

F = Fraction
HALF = (F(1, 2), F(1, 2))


class TestTwoSlit:
    def test_quantum_zero(self):
        r = two_slit_demo(hadamard_change(), (ONE, ONE))
        obs = r.observations
        assert obs["superposed_nu"] == [1, 0]
        assert obs["component_nu"] == [list(HALF), list(HALF)]
        assert obs["quantum_zero"] and obs["zero_outcomes"] == [1]
        assert not obs["grid_contains_zero"]
        assert not obs["superposition_is_grid_mixture"]
        assert r.passed and r.verdict == "pass"

    def test_single_slit_no_interference(self):
        obs = two_slit_demo(hadamard_change(), (ONE, ZERO)).observations
        assert obs["superposed_nu"] == obs["component_nu"][0] == list(HALF)
        assert not obs["quantum_zero"]

    def test_phase_shift_has_no_zero(self):
        r = two_slit_demo(hadamard_change(), (ONE, I))
        assert r.observations["superposed_nu"] == list(HALF)
        assert not r.observations["quantum_zero"]
        assert r.passed

    def test_opposite_phase_moves_the_zero(self):
        obs = two_slit_demo(hadamard_change(), (ONE, -ONE)).observations
        assert obs["superposed_nu"] == [0, 1]
        assert obs["zero_outcomes"] == [0]

    def test_singular_change_rejected(self):
        with pytest.raises(SingularMatrixError):
            BasisChange("slits", "screen", ((ONE, ONE), (ONE, ONE)))

    def test_bad_inputs(self):
        with pytest.raises(QStaticsError):
            two_slit_demo(hadamard_change(), (ZERO, ZERO))
        with pytest.raises(QStaticsError):
            two_slit_demo(hadamard_change(), (ONE,))

    @settings(max_examples=50)
    @given(
        n=st.integers(-5, 5).filter(bool),
        m=st.integers(-5, 5),
    )
    def test_zero_never_a_grid_mixture(self, n, m):
        r = two_slit_demo(hadamard_change(), (ONE, PairNumber(n, m)))
        obs = r.observations
        assert not obs["grid_contains_zero"]
        if obs["quantum_zero"]:
            assert not obs["superposition_is_grid_mixture"]
        assert r.passed

    def test_report_serializes(self):
        r = two_slit_demo()
        doc = json.loads(json.dumps(r.to_json()))
        assert doc["kind"] == "experiment" and doc["verdict"] == "pass"
        assert doc["observations"]["superposed_nu"][1] == {"num": "0", "den": "1"}
        text = r.to_text()
        assert "verdict" in text and "two_slit" in text


class TestPositivity:
    def test_trivial_example(self):
        for w in (F(0), F(1, 3), F(1)):
            assert convex_mix(HALF, HALF, w) == HALF

    def test_boundary_w_zero_returns_s2(self):
        s1, s2 = (F(1, 5), F(4, 5)), (F(2, 3), F(1, 3))
        assert convex_mix(s1, s2, 0) == s2

    def test_thousand_samples(self):
        r = classical_positivity_check(1000, 3)
        assert r.passed
        assert r.observations["zeros_observed"] == 0
        assert r.observations["min_component"] > 0

    @given(s1=probability_vectors(3, positive=True), s2=probability_vectors(3, positive=True),
           k=st.integers(0, W_GRID_STEPS))
    def test_property(self, s1, s2, k):
        assert min(convex_mix(s1, s2, F(k, W_GRID_STEPS))) > 0

    def test_guard(self):
        with pytest.raises(QStaticsError):
            classical_positivity_check(0, 1)


class TestConvergence:
    def test_bound_at_one_million(self):
        r = convergence_study((F(3, 10), F(7, 10)), [10**6], 11)
        assert r.passed
        assert r.observations["max_error"][0] <= 3 * math.sqrt(0.21 / 10**6)
        assert r.observations["bound_3sigma"][0] == pytest.approx(1.3748e-3, rel=1e-3)

    def test_degenerate_is_exact(self):
        r = convergence_study((1, 0), [10, 1000, 10**5], 0)
        assert r.observations["max_error"] == [0.0, 0.0, 0.0]
        assert r.passed

    def test_bound_shrinks_along_schedule(self):
        r = convergence_study((0.3, 0.7), [100, 1000, 10**4, 10**5, 10**6], 2)
        bounds = r.observations["bound_3sigma"]
        assert all(b < a for a, b in zip(bounds, bounds[1:]))
        assert all(r.observations["within_bound"])

    def test_deterministic(self):
        a = convergence_study((0.2, 0.5, 0.3), [500, 5000], 9)
        b = convergence_study((0.2, 0.5, 0.3), [500, 5000], 9)
        assert a.to_json() == b.to_json()

    @pytest.mark.parametrize("schedule", [[], [100, 100], [1000, 100], [0, 10]])
    def test_bad_schedule(self, schedule):
        with pytest.raises(QStaticsError):
            convergence_study((0.5, 0.5), schedule, 0)
