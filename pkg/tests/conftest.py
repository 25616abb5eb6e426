from fractions import Fraction

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from qstatics.ensemble import EnsembleBrace
from qstatics.numeric import PairNumber
from qstatics.statespace import InstrumentRep, StateVector

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)
pairs = st.builds(PairNumber, rationals, rationals)
nonzero_pairs = pairs.filter(bool)

SYMBOLS = ["a1", "a2", "a3", "a4", "a5"]


@st.composite
def braces(draw, min_outcomes=0, max_outcomes=5, max_count=10**6):
    syms = draw(st.lists(st.sampled_from(SYMBOLS), min_size=min_outcomes, max_size=max_outcomes, unique=True))
    counts = st.integers(0, max_count)
    return EnsembleBrace({s: (draw(counts), draw(counts)) for s in syms})


nonempty_braces = braces(min_outcomes=1).filter(lambda b: not b.is_zero_class)


@st.composite
def state_vectors(draw, dimension=2, basis_id="A"):
    coords = draw(st.lists(pairs, min_size=dimension, max_size=dimension))
    return StateVector(basis_id, tuple(coords))


@st.composite
def nonzero_state_vectors(draw, dimension=2, basis_id="A"):
    v = draw(state_vectors(dimension, basis_id))
    if v.is_zero():
        coords = (PairNumber(1, 0),) + v.coords[1:]
        v = StateVector(basis_id, coords)
    return v


@st.composite
def probability_vectors(draw, length=2, positive=False):
    low = 1 if positive else 0
    weights = draw(st.lists(st.integers(low, 1000), min_size=length, max_size=length).filter(lambda w: sum(w) > 0))
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


@pytest.fixture
def instrument_a():
    return InstrumentRep.default("A", 2)
