import threading
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from sympy import QQ_I
from sympy.polys.matrices import DomainMatrix

from qstatics._exact import BasisMismatchError, QStaticsError, SingularMatrixError, ZeroVectorError
from qstatics.ensemble import ClickSpec, convex_mix, extract_stats, ingest_clicks, simulate_clicks
from qstatics.numeric import ONE, ZERO, I, PairNumber
from qstatics.statespace import (
    BasisChange,
    DimensionConfig,
    InstrumentRep,
    MixtureState,
    Session,
    StateVector,
    change_basis,
    coarse_grain,
    decode_phases,
    eigenstate,
    encode_statistics,
    matrix_inverse,
    measure,
    measure_mixture,
    ray_equivalent,
    superpose,
    verify_lvs_axioms,
    zero_vector,
)

from .conftest import nonzero_pairs, nonzero_state_vectors, pairs, state_vectors

P = PairNumber
F = Fraction


def vec(*coords, basis="A"):
    return StateVector(basis, tuple(P(*c) if isinstance(c, tuple) else c for c in coords))


def _qqi(x):
    return QQ_I.from_sympy(sympy.Rational(x.n) + sympy.I * sympy.Rational(x.m))


HADAMARD = ((P(1), P(1)), (P(1), P(-1)))


class TestTypes:
    def test_dimension_bounds(self):
        with pytest.raises(QStaticsError):
            DimensionConfig(1)
        with pytest.raises(QStaticsError):
            DimensionConfig(65)
        assert DimensionConfig(64).D == 64

    def test_instrument_validation(self):
        with pytest.raises(QStaticsError, match="repeats"):
            InstrumentRep("A", ("x", "x"), (1, 2))
        with pytest.raises(QStaticsError):
            InstrumentRep("A", ("x", "y"), (1,))
        # degenerate labels are allowed
        assert InstrumentRep("A", ("x", "y", "z"), (1, 1, 2)).distinct_labels() == [1, 2]

    def test_padding(self):
        inst = InstrumentRep("A", ("x", "y"), (1, 2)).padded(4)
        assert inst.dimension == 4
        assert inst.spectral_labels == (1, 2, 2, 2)
        v = eigenstate(inst, 0)
        assert measure(v, inst).label_stats == {1: 1, 2: 0}

    def test_json_round_trips(self):
        inst = InstrumentRep("A", ("x", "y"), (F(1, 2), 3))
        assert InstrumentRep.from_json(inst.to_json()) == inst
        v = vec((1, 2), (F(-1, 3), 0))
        assert StateVector.from_json(v.to_json()) == v
        u = BasisChange("A", "B", HADAMARD)
        assert BasisChange.from_json(u.to_json()) == u


class TestSuperpose:
    def test_identity_and_zero_scalars(self):
        v, w = vec((1, 2), (3, 4)), vec((5, 6), (7, 8))
        assert superpose([(ONE, v), (ZERO, w)]) == v

    @given(a=pairs, b=pairs, v=state_vectors(3))
    def test_scalar_sum(self, a, b, v):
        assert superpose([(a, v), (b, v)]) == (a + b) * v

    def test_quantum_zero(self):
        e = vec((1, 0), (0, 0))
        assert superpose([(ONE, e), (-ONE, e)]).is_zero()

    def test_mixed_bases_rejected_without_session(self):
        with pytest.raises(BasisMismatchError):
            superpose([(ONE, vec((1, 0), (0, 0))), (ONE, vec((1, 0), (0, 0), basis="B"))])

    def test_mixed_bases_with_session(self):
        s = Session(2, basis_changes=[BasisChange("B", "A", HADAMARD)])
        r = superpose([(ONE, vec((1, 0), (0, 0))), (ONE, vec((1, 0), (0, 0), basis="B"))], session=s)
        assert r == vec((2, 0), (1, 0))

    def test_empty(self):
        with pytest.raises(QStaticsError):
            superpose([])


class TestChangeBasis:
    def test_identity(self):
        u = BasisChange("A", "B", ((ONE, ZERO), (ZERO, ONE)))
        assert change_basis(vec((1, 2), (3, 4)), u).coords == vec((1, 2), (3, 4)).coords

    def test_hand_example(self):
        u = BasisChange("A", "B", HADAMARD)
        assert change_basis(vec((1, 0), (1, 0)), u) == vec((2, 0), (0, 0), basis="B")

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            BasisChange("A", "B", ((ONE, ONE), (ONE, ONE)))
        with pytest.raises(SingularMatrixError):
            BasisChange("A", "B", ((ONE, I), (I, -ONE)))  # det = -1 - i^2 = 0

    def test_wrong_basis(self):
        with pytest.raises(BasisMismatchError):
            change_basis(vec((1, 0), (0, 0), basis="C"), BasisChange("A", "B", HADAMARD))

    @settings(max_examples=60)
    @given(m=st.lists(pairs, min_size=9, max_size=9), v=state_vectors(3))
    def test_round_trip_and_gaussian_rational_oracle(self, m, v):
        dm = DomainMatrix([[_qqi(x) for x in m[3 * i : 3 * i + 3]] for i in range(3)], (3, 3), QQ_I)
        assume(dm.det() != QQ_I.zero)
        rows = (tuple(m[0:3]), tuple(m[3:6]), tuple(m[6:9]))
        u = BasisChange("A", "B", rows)
        assert change_basis(change_basis(v, u), u.inverse()) == v
        expected = dm.inv().to_Matrix()
        inv = matrix_inverse(rows)
        for i in range(3):
            for j in range(3):
                re, im = sympy.expand(expected[i, j]).as_real_imag()
                assert inv[i][j] == P(F(str(re)), F(str(im)))


class TestRay:
    def test_constructed(self):
        v = vec((1, 2), (3, -1))
        assert ray_equivalent(v, I * v) == I

    def test_independent(self):
        assert ray_equivalent(vec((1, 0), (0, 0)), vec((0, 0), (1, 0))) is None

    def test_zero_rejected(self):
        with pytest.raises(ZeroVectorError):
            ray_equivalent(zero_vector("A", 2), vec((1, 0), (0, 0)))

    @given(v=nonzero_state_vectors(3), c=nonzero_pairs)
    def test_recovers_scalar(self, v, c):
        assert ray_equivalent(v, c * v) == c


class TestMeasure:
    def test_eigenstate(self, instrument_a):
        assert measure(vec((1, 0), (0, 0)), instrument_a).nu == (1, 0)

    def test_balanced(self, instrument_a):
        assert measure(vec((1, 0), (1, 0)), instrument_a).nu == (F(1, 2), F(1, 2))

    def test_balanced_against_click_round_trip(self, instrument_a):
        nu = measure(vec((1, 0), (0, 1)), instrument_a).nu
        sigma = 100_000
        stream = simulate_clicks(ClickSpec(nu, sigma, "A"), 17)
        est = extract_stats(ingest_clicks(stream, instrument_a, [F(1, 2)] * 2)).nu_for(instrument_a.eigen_symbols)
        assert all(abs(float(a - b)) <= 3 * (0.25 / sigma) ** 0.5 for a, b in zip(est, nu))

    def test_zero_vector(self, instrument_a):
        with pytest.raises(ZeroVectorError, match="no statistics"):
            measure(zero_vector("A", 2), instrument_a)

    def test_basis_mismatch(self, instrument_a):
        with pytest.raises(BasisMismatchError):
            measure(vec((1, 0), (0, 0), basis="B"), instrument_a)

    def test_via_session(self):
        screen = InstrumentRep.default("B", 2)
        s = Session(2, [screen], [BasisChange("A", "B", HADAMARD)])
        assert measure(vec((1, 0), (1, 0)), screen, s).nu == (1, 0)
        # reverse direction resolved through the inverse
        slits = InstrumentRep.default("A", 2)
        assert measure(vec((1, 0), (0, 0), basis="B"), slits, s).nu == (F(1, 2), F(1, 2))

    @given(v=nonzero_state_vectors(3), c=nonzero_pairs)
    def test_ray_invariance(self, v, c):
        inst = InstrumentRep.default("A", 3)
        assert measure(c * v, inst) == measure(v, inst)

    @given(v=nonzero_state_vectors(3))
    def test_involution_invariance(self, v):
        inst = InstrumentRep.default("A", 3)
        base = measure(v, inst).nu
        assert measure(v.map_coords(lambda a: a.conj()), inst).nu == base
        assert measure(v.map_coords(lambda a: a.swap()), inst).nu == base

    @given(v=nonzero_state_vectors(4))
    def test_label_pushforward(self, v):
        inst = InstrumentRep("A", ("w", "x", "y", "z"), (F(1, 2), 3, F(1, 2), 7))
        r = measure(v, inst)
        assert sum(r.nu) == 1
        assert r.label_stats[F(1, 2)] == r.nu[0] + r.nu[2]
        assert sum(r.label_stats.values()) == 1


class TestEigenstate:
    def test_coords(self, instrument_a):
        assert eigenstate(instrument_a, 0) == vec((1, 0), (0, 0))

    @pytest.mark.parametrize("s", range(4))
    def test_indicator(self, s):
        inst = InstrumentRep.default("A", 4)
        assert measure(eigenstate(inst, s), inst).nu == tuple(int(k == s) for k in range(4))

    def test_out_of_range(self, instrument_a):
        with pytest.raises(QStaticsError):
            eigenstate(instrument_a, 2)

    def test_superposition_not_ray_equivalent(self, instrument_a):
        e0, e1 = eigenstate(instrument_a, 0), eigenstate(instrument_a, 1)
        s = superpose([(ONE, e0), (ONE, e1)])
        assert ray_equivalent(e0, s) is None
        assert ray_equivalent(e1, s) is None


class TestCoarseGrain:
    def test_merge_all(self):
        inst = InstrumentRep("A", ("x", "y", "z"), (1, 2, 3))
        coarse = coarse_grain(inst, {1: 0, 2: 0, 3: 0})
        assert measure(vec((1, 0), (2, 0), (0, 1)), coarse).label_stats == {0: 1}

    def test_identity_merge(self):
        inst = InstrumentRep("A", ("x", "y", "z"), (1, 2, 3))
        v = vec((1, 0), (2, 0), (0, 1))
        assert measure(v, coarse_grain(inst, {1: 1, 2: 2, 3: 3})) == measure(v, inst)

    def test_not_total(self):
        with pytest.raises(QStaticsError):
            coarse_grain(InstrumentRep("A", ("x", "y"), (1, 2)), {1: 0})

    @given(v=nonzero_state_vectors(4), targets=st.lists(st.integers(0, 2), min_size=4, max_size=4))
    def test_aggregation_identity(self, v, targets):
        inst = InstrumentRep("A", ("w", "x", "y", "z"), (1, 2, 3, 4))
        merge = {lab: t for lab, t in zip((1, 2, 3, 4), targets)}
        fine = measure(v, inst).label_stats
        expected = {}
        for lab, p in fine.items():
            expected[merge[lab]] = expected.get(merge[lab], 0) + p
        assert measure(v, coarse_grain(inst, merge)).label_stats == expected


class TestMixture:
    def test_single(self, instrument_a):
        v = vec((1, 2), (3, 4))
        assert measure_mixture(MixtureState(((v, 1),)), instrument_a) == measure(v, instrument_a)

    def test_equal_eigen_mixture(self):
        inst = InstrumentRep.default("A", 3)
        m = MixtureState(((eigenstate(inst, 0), F(1, 2)), (eigenstate(inst, 1), F(1, 2))))
        assert measure_mixture(m, inst).nu == (F(1, 2), F(1, 2), 0)

    def test_weight_sum(self):
        with pytest.raises(QStaticsError):
            MixtureState(((vec((1, 0), (0, 0)), F(1, 2)),))

    @given(w=st.fractions(min_value=0, max_value=1, max_denominator=64).filter(lambda x: 0 < x < 1),
           v1=nonzero_state_vectors(3), v2=nonzero_state_vectors(3))
    def test_matches_convex_mix(self, w, v1, v2):
        inst = InstrumentRep.default("A", 3)
        m = MixtureState(((v1, w), (v2, 1 - w)))
        chained = convex_mix(measure(v1, inst).nu, measure(v2, inst).nu, w)
        assert measure_mixture(m, inst).nu == chained


class TestLVSAxioms:
    @pytest.mark.parametrize("d", [2, 3, 8])
    def test_passes(self, d):
        assert verify_lvs_axioms(seed=d, trials=200, dimension=d).passed

    def test_detects_dropped_imaginary_part(self):
        def corrupted(c, v):
            first = P(c.n, 0) * v.coords[0]
            return StateVector(v.basis_id, (first,) + tuple(c * a for a in v.coords[1:]))

        report = verify_lvs_axioms(seed=1, trials=50, dimension=3, scalar_action=corrupted)
        assert not report.passed
        assert "scalar_compatible" in report.failures
        assert "scalar_identity" not in report.failures

    def test_detects_affine_action(self):
        report = verify_lvs_axioms(seed=1, trials=20, scalar_action=lambda c, v: v.map_coords(lambda a: c * a + ONE))
        assert {"scalar_identity", "distributive_over_scalars"} <= set(report.failures)

    def test_detects_broken_addition(self):
        report = verify_lvs_axioms(seed=1, trials=20, vector_add=lambda v, w: StateVector(v.basis_id, tuple(a * b for a, b in zip(v.coords, w.coords))))
        assert not report.passed


class TestSession:
    def test_round_trip(self):
        s = Session(2, [InstrumentRep.default("A", 2), InstrumentRep.default("B", 2)], [BasisChange("A", "B", HADAMARD)], 9)
        t = Session.from_json(s.to_json())
        assert t.to_json() == s.to_json()
        assert t.change("B", "A") == BasisChange("A", "B", HADAMARD).inverse()

    def test_dimension_checked(self):
        with pytest.raises(QStaticsError):
            Session(3, [InstrumentRep.default("A", 2)])

    def test_duplicate_instrument(self):
        s = Session(2, [InstrumentRep.default("A", 2)])
        with pytest.raises(QStaticsError):
            s.register_instrument(InstrumentRep.default("A", 2))

    def test_concurrent_registration(self):
        s = Session(2)

        def reg(i):
            s.register_instrument(InstrumentRep.default(f"I{i}", 2))

        threads = [threading.Thread(target=reg, args=(i,)) for i in range(32)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(s.instruments) == 32


def test_encode_decode_statistics():
    nu, kappa = (F(1, 4), F(3, 4)), (F(1, 8), F(1, 2))
    v = encode_statistics(nu, kappa, "A", max_denominator=10**9)
    got = measure(v, InstrumentRep.default("A", 2)).nu
    assert all(abs(float(a - b)) < 1e-8 for a, b in zip(got, nu))
    phases = decode_phases(v)
    assert phases[0] == pytest.approx(0.125)
    assert phases[1] == pytest.approx(0.5)
