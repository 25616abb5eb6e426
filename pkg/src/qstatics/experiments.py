"""Desk-scale demonstrations: interference zeros, convex positivity, convergence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from ._exact import QStaticsError, check_probability_vector, fraction_to_json
from .ensemble import ClickSpec, convex_mix, extract_stats, ingest_clicks, simulate_clicks
from .numeric import ONE, PairNumber
from .statespace import (
    BasisChange,
    InstrumentRep,
    Session,
    change_basis,
    eigenstate,
    measure,
    superpose,
)

__all__ = [
    "ExperimentReport",
    "hadamard_change",
    "two_slit_demo",
    "classical_positivity_check",
    "convergence_study",
    "W_GRID_STEPS",
]

W_GRID_STEPS = 128


def _jsonable(x: Any):
    if isinstance(x, Fraction):
        return fraction_to_json(x)
    if isinstance(x, PairNumber):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _fmt(x: Any) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


@dataclass
class ExperimentReport:
    name: str
    inputs: dict
    observations: dict
    expectations: dict = field(default_factory=dict)
    passed: bool = True

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        return {
            "kind": "experiment",
            "name": self.name,
            "inputs": _jsonable(self.inputs),
            "observations": _jsonable(self.observations),
            "expectations": _jsonable(self.expectations),
            "verdict": self.verdict,
        }

    def to_text(self) -> str:
        rows = [("experiment", self.name)]
        rows += [(f"input.{k}", _fmt(v)) for k, v in self.inputs.items()]
        rows += [(f"obs.{k}", _fmt(v)) for k, v in self.observations.items()]
        rows += [(f"expect.{k}", _fmt(v)) for k, v in self.expectations.items()]
        rows.append(("verdict", self.verdict))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def hadamard_change(from_id: str = "slits", to_id: str = "screen") -> BasisChange:
    """Unnormalized 2x2 rows ((1,1),(1,-1)); the measurement map absorbs the scale."""
    p, n = ONE, -ONE
    return BasisChange(from_id, to_id, ((p, p), (p, n)))


def _w_grid(steps: int = W_GRID_STEPS) -> list[Fraction]:
    return [Fraction(k, steps) for k in range(steps + 1)]


def two_slit_demo(
    u: BasisChange | None = None,
    coeffs: Sequence = (ONE, ONE),
    session: Session | None = None,
) -> ExperimentReport:
    """Compare the superposition ``sum_j c_j |slit_j>`` with convex mixtures of
    the single-slit statistics, all measured on the screen instrument ``u.to_id``.
    """
    u = hadamard_change() if u is None else u
    if u.dimension != 2:
        raise QStaticsError("the two-slit demo needs D = 2", "dimension-match")
    coeffs = tuple(c if isinstance(c, PairNumber) else PairNumber.from_json(c) for c in coeffs)
    if len(coeffs) != 2:
        raise QStaticsError("two coefficients are required", "coefficient-count")
    if not any(coeffs):
        raise QStaticsError("at least one coefficient must be nonzero", "nonzero-state")

    if session is not None and u.to_id in session.instruments:
        screen = session.instrument(u.to_id)
    else:
        screen = InstrumentRep.default(u.to_id, 2)
    slits = InstrumentRep.default(u.from_id, 2)

    components = [(c, eigenstate(slits, j)) for j, c in enumerate(coeffs) if c]
    superposed = change_basis(superpose(components), u)
    nu_super = measure(superposed, screen).nu
    nu_parts = [measure(change_basis(c * v, u), screen).nu for c, v in components]

    positive_everywhere = [all(nu[s] > 0 for nu in nu_parts) for s in range(2)]
    zero_outcomes = [s for s in range(2) if nu_super[s] == 0 and positive_everywhere[s]]

    # classical composition of the component statistics on a w grid
    if len(nu_parts) == 2:
        mixes = [convex_mix(nu_parts[0], nu_parts[1], w) for w in _w_grid()]
    else:
        mixes = [tuple(nu_parts[0])]
    grid_zero = any(mix[s] == 0 for mix in mixes for s in range(2) if positive_everywhere[s])
    reproduced = any(tuple(mix) == tuple(nu_super) for mix in mixes)

    observations = {
        "superposed_nu": list(nu_super),
        "component_nu": [list(nu) for nu in nu_parts],
        "quantum_zero": bool(zero_outcomes),
        "zero_outcomes": zero_outcomes,
        "grid_steps": W_GRID_STEPS,
        "grid_contains_zero": grid_zero,
        "superposition_is_grid_mixture": reproduced,
    }
    expectations = {
        "grid_contains_zero": False,
        "quantum_zero_implies_not_mixture": True,
    }
    passed = not grid_zero and not (zero_outcomes and reproduced)
    return ExperimentReport(
        "two_slit",
        {
            "basis_change": f"{u.from_id}->{u.to_id}",
            "matrix": [list(row) for row in u.matrix],
            "coeffs": list(coeffs),
        },
        observations,
        expectations,
        passed,
    )


def _random_positive_nu(rng: np.random.Generator, d: int) -> tuple[Fraction, ...]:
    weights = [int(x) for x in rng.integers(1, 1001, size=d)]
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def classical_positivity_check(trials: int, seed: int, dimension: int = 2) -> ExperimentReport:
    """Convex combinations of strictly positive statistics stay strictly positive."""
    if trials < 1:
        raise QStaticsError("trials must be >= 1", "trial-count-positive")
    rng = np.random.default_rng(seed)
    zeros = 0
    smallest = Fraction(1)
    witness = None
    for _ in range(trials):
        s1, s2 = _random_positive_nu(rng, dimension), _random_positive_nu(rng, dimension)
        w = Fraction(int(rng.integers(1, 10**6)), 10**6)
        for weight in (w, Fraction(0), Fraction(1)):
            mix = convex_mix(s1, s2, weight)
            low = min(mix)
            smallest = min(smallest, low)
            if low <= 0:
                zeros += 1
                if witness is None:
                    witness = {"s1": list(s1), "s2": list(s2), "w": weight}
    observations = {"samples": 3 * trials, "zeros_observed": zeros, "min_component": smallest}
    if witness is not None:
        observations["witness"] = witness
    return ExperimentReport(
        "classical_positivity",
        {"trials": trials, "seed": seed, "dimension": dimension},
        observations,
        {"zeros_observed": 0},
        zeros == 0,
    )


def _max_error(nu_hat: Sequence[Fraction], nu: Sequence[Fraction]) -> Fraction:
    return max(abs(a - b) for a, b in zip(nu_hat, nu))


def _within_3sigma(error: Fraction, nu: Sequence[Fraction], sigma: int) -> bool:
    # error <= 3 sqrt(max nu(1-nu) / sigma), squared to stay exact
    var = max(p * (1 - p) for p in nu)
    return error * error <= 9 * var / sigma


def convergence_study(
    nu: Sequence,
    sigma_schedule: Sequence[int],
    seed: int,
    kappa: Sequence | None = None,
    instrument_id: str = "A",
) -> ExperimentReport:
    """simulate -> ingest -> extract at each sigma; compare max|nu_hat - nu| with the 3-sigma binomial bound."""
    nu = check_probability_vector(nu)
    schedule = [int(s) for s in sigma_schedule]
    if not schedule or any(s < 1 for s in schedule):
        raise QStaticsError("sigma schedule must hold positive integers", "positive-sigma")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise QStaticsError("sigma schedule must be strictly increasing", "increasing-schedule")
    d = len(nu)
    if d < 2:
        raise QStaticsError("need at least two outcomes", "dimension-range")
    kappa = tuple(kappa) if kappa is not None else (Fraction(1, 2),) * d
    instrument = InstrumentRep.default(instrument_id, d)
    children = np.random.SeedSequence(seed).spawn(len(schedule))

    errors, bounds, ok = [], [], []
    var = max(p * (1 - p) for p in nu)
    for sigma, child in zip(schedule, children):
        stream = simulate_clicks(ClickSpec(nu, sigma, instrument_id), child)
        stats = extract_stats(ingest_clicks(stream, instrument, kappa))
        err = _max_error(stats.nu_for(instrument.eigen_symbols), nu)
        errors.append(err)
        bounds.append(3 * math.sqrt(float(var) / sigma))
        ok.append(_within_3sigma(err, nu, sigma))

    return ExperimentReport(
        "convergence",
        {"nu": list(nu), "sigma_schedule": schedule, "seed": seed},
        {
            "max_error": [float(e) for e in errors],
            "bound_3sigma": bounds,
            "within_bound": ok,
        },
        {"within_bound": "all"},
        all(ok),
    )
