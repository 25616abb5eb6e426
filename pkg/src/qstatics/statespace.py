"""State vectors over pair numbers, instruments, basis changes and measurement.

Everything here is exact: coordinates are :class:`~qstatics.numeric.PairNumber`
values and statistics are :class:`~fractions.Fraction` values that sum to
exactly one.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from os import PathLike
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ._exact import (
    BasisMismatchError,
    QStaticsError,
    SingularMatrixError,
    ZeroVectorError,
    check_weights,
    fraction_to_json,
    random_fractions,
    to_fraction,
)
from .numeric import ONE, ZERO, PairNumber

__all__ = [
    "MIN_DIMENSION",
    "MAX_DIMENSION",
    "DimensionConfig",
    "InstrumentRep",
    "StateVector",
    "BasisChange",
    "MeasurementResult",
    "MixtureState",
    "Session",
    "zero_vector",
    "scale",
    "superpose",
    "change_basis",
    "ray_equivalent",
    "born_map",
    "measure",
    "eigenstate",
    "coarse_grain",
    "measure_mixture",
    "LVSReport",
    "verify_lvs_axioms",
    "encode_statistics",
    "decode_phases",
    "matrix_inverse",
    "determinant",
]

MIN_DIMENSION = 2
MAX_DIMENSION = 64


def _check_dimension(d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, int):
        raise QStaticsError(f"dimension must be an integer, got {d!r}", "dimension-range")
    if not (MIN_DIMENSION <= d <= MAX_DIMENSION):
        raise QStaticsError(
            f"dimension {d} outside [{MIN_DIMENSION}, {MAX_DIMENSION}]", "dimension-range"
        )
    return d


@dataclass(frozen=True)
class DimensionConfig:
    D: int = 2

    def __post_init__(self):
        _check_dimension(self.D)


@dataclass(frozen=True)
class InstrumentRep:
    """An instrument: D distinct eigen symbols, each carrying a rational spectral label.

    Repeated labels encode degeneracy.
    """

    id: str
    eigen_symbols: tuple[str, ...]
    spectral_labels: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "eigen_symbols", tuple(str(s) for s in self.eigen_symbols))
        object.__setattr__(self, "spectral_labels", tuple(to_fraction(x) for x in self.spectral_labels))
        _check_dimension(len(self.eigen_symbols))
        if len(set(self.eigen_symbols)) != len(self.eigen_symbols):
            raise QStaticsError(f"instrument {self.id!r} repeats an eigen symbol", "distinct-eigen-symbols")
        if len(self.spectral_labels) != len(self.eigen_symbols):
            raise QStaticsError(
                f"instrument {self.id!r}: {len(self.spectral_labels)} labels for "
                f"{len(self.eigen_symbols)} eigen symbols",
                "label-count",
            )

    @classmethod
    def default(cls, id: str, dimension: int) -> InstrumentRep:
        """Symbols ``<id>1 .. <id>D`` with labels ``1 .. D``."""
        return cls(id, tuple(f"{id}{s + 1}" for s in range(dimension)), tuple(range(1, dimension + 1)))

    @property
    def dimension(self) -> int:
        return len(self.eigen_symbols)

    def distinct_labels(self) -> list[Fraction]:
        return list(dict.fromkeys(self.spectral_labels))

    def padded(self, dimension: int) -> InstrumentRep:
        """Extend to ``dimension`` eigen symbols by repeating the last spectral label.

        The added symbols are indistinguishable by label from the last real one,
        so label statistics are unchanged for states with no weight on them.
        """
        if dimension < self.dimension:
            raise QStaticsError("cannot pad to a smaller dimension", "dimension-range")
        extra = dimension - self.dimension
        symbols = self.eigen_symbols + tuple(f"{self.eigen_symbols[-1]}~{k + 1}" for k in range(extra))
        labels = self.spectral_labels + (self.spectral_labels[-1],) * extra
        return InstrumentRep(self.id, symbols, labels)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "eigen_symbols": list(self.eigen_symbols),
            "spectral_labels": [fraction_to_json(x) for x in self.spectral_labels],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> InstrumentRep:
        return cls(str(obj["id"]), tuple(obj["eigen_symbols"]), tuple(obj["spectral_labels"]))


@dataclass(frozen=True)
class StateVector:
    basis_id: str
    coords: tuple[PairNumber, ...]

    def __post_init__(self):
        coords = tuple(c if isinstance(c, PairNumber) else PairNumber.from_json(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        _check_dimension(len(coords))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def _check_compatible(self, other: StateVector):
        if self.basis_id != other.basis_id:
            raise BasisMismatchError(
                f"cannot combine vectors in bases {self.basis_id!r} and {other.basis_id!r}"
            )
        if self.dimension != other.dimension:
            raise QStaticsError("vectors differ in dimension", "dimension-match")

    def __add__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        self._check_compatible(other)
        return StateVector(self.basis_id, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return StateVector(self.basis_id, tuple(-a for a in self.coords))

    def __sub__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self + (-other)

    def __rmul__(self, scalar):
        if not isinstance(scalar, PairNumber):
            return NotImplemented
        return StateVector(self.basis_id, tuple(scalar * a for a in self.coords))

    def map_coords(self, fn: Callable[[PairNumber], PairNumber]) -> StateVector:
        return StateVector(self.basis_id, tuple(fn(a) for a in self.coords))

    def to_json(self) -> dict:
        return {"basis_id": self.basis_id, "coords": [c.to_json() for c in self.coords]}

    @classmethod
    def from_json(cls, obj: Mapping) -> StateVector:
        return cls(str(obj["basis_id"]), tuple(PairNumber.from_json(c) for c in obj["coords"]))


def zero_vector(basis_id: str, dimension: int) -> StateVector:
    return StateVector(basis_id, (ZERO,) * dimension)


def scale(c: PairNumber, v: StateVector) -> StateVector:
    return c * v


# --------------------------------------------------------------------------
# Exact linear algebra over pair numbers


def _gauss_jordan(matrix: Sequence[Sequence[PairNumber]]):
    """Return (determinant, inverse or None)."""
    n = len(matrix)
    a = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(matrix)]
    det = ONE
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c]), None)
        if p is None:
            return ZERO, None
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        piv = a[c][c]
        det = det * piv
        inv = piv.inverse()
        a[c] = [inv * x for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det, [row[n:] for row in a]


def determinant(matrix: Sequence[Sequence[PairNumber]]) -> PairNumber:
    return _gauss_jordan(matrix)[0]


def matrix_inverse(matrix: Sequence[Sequence[PairNumber]]) -> list[list[PairNumber]]:
    det, inv = _gauss_jordan(matrix)
    if inv is None:
        raise SingularMatrixError("matrix is singular over the pair-number field")
    return inv


def _matvec(matrix, coords):
    out = []
    for row in matrix:
        acc = ZERO
        for a, x in zip(row, coords):
            acc = acc + a * x
        out.append(acc)
    return tuple(out)


@dataclass(frozen=True)
class BasisChange:
    """``coords_to = matrix @ coords_from``; rejected at construction if singular."""

    from_id: str
    to_id: str
    matrix: tuple[tuple[PairNumber, ...], ...]

    def __post_init__(self):
        rows = tuple(
            tuple(x if isinstance(x, PairNumber) else PairNumber.from_json(x) for x in row)
            for row in self.matrix
        )
        object.__setattr__(self, "matrix", rows)
        n = len(rows)
        _check_dimension(n)
        if any(len(r) != n for r in rows):
            raise QStaticsError("basis-change matrix must be square", "square-matrix")
        if not determinant(rows):
            raise SingularMatrixError(
                f"basis change {self.from_id!r}->{self.to_id!r} has zero determinant"
            )

    @property
    def dimension(self) -> int:
        return len(self.matrix)

    def inverse(self) -> BasisChange:
        inv = matrix_inverse(self.matrix)
        return BasisChange(self.to_id, self.from_id, tuple(tuple(r) for r in inv))

    def apply(self, v: StateVector) -> StateVector:
        return change_basis(v, self)

    def to_json(self) -> dict:
        return {
            "from": self.from_id,
            "to": self.to_id,
            "matrix": [[x.to_json() for x in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> BasisChange:
        return cls(
            str(obj["from"]),
            str(obj["to"]),
            tuple(tuple(PairNumber.from_json(x) for x in row) for row in obj["matrix"]),
        )


def change_basis(v: StateVector, u: BasisChange) -> StateVector:
    if v.basis_id != u.from_id:
        raise BasisMismatchError(f"state is in basis {v.basis_id!r}, change expects {u.from_id!r}")
    if v.dimension != u.dimension:
        raise QStaticsError("state and basis change differ in dimension", "dimension-match")
    return StateVector(u.to_id, _matvec(u.matrix, v.coords))


# --------------------------------------------------------------------------
# Session registry


class Session:
    """Dimension plus registries of instruments and basis changes.

    Readers may look things up concurrently; registration takes a lock.
    """

    def __init__(
        self,
        dimension: int = 2,
        instruments: Iterable[InstrumentRep] = (),
        basis_changes: Iterable[BasisChange] = (),
        default_seed: int = 0,
    ):
        self.config = DimensionConfig(dimension)
        self.default_seed = int(default_seed)
        self._lock = threading.Lock()
        self._instruments: dict[str, InstrumentRep] = {}
        self._changes: dict[tuple[str, str], BasisChange] = {}
        for inst in instruments:
            self.register_instrument(inst)
        for u in basis_changes:
            self.register_change(u)

    @property
    def dimension(self) -> int:
        return self.config.D

    @property
    def instruments(self) -> dict[str, InstrumentRep]:
        return dict(self._instruments)

    @property
    def basis_changes(self) -> list[BasisChange]:
        return list(self._changes.values())

    def register_instrument(self, inst: InstrumentRep) -> None:
        if inst.dimension != self.dimension:
            raise QStaticsError(
                f"instrument {inst.id!r} has {inst.dimension} eigen symbols, session D={self.dimension}",
                "dimension-match",
            )
        with self._lock:
            if inst.id in self._instruments:
                raise QStaticsError(f"instrument {inst.id!r} already registered", "unique-instrument-id")
            self._instruments = {**self._instruments, inst.id: inst}

    def register_change(self, u: BasisChange) -> None:
        if u.dimension != self.dimension:
            raise QStaticsError("basis change dimension differs from session D", "dimension-match")
        with self._lock:
            self._changes = {**self._changes, (u.from_id, u.to_id): u}

    def instrument(self, id: str) -> InstrumentRep:
        try:
            return self._instruments[id]
        except KeyError:
            raise QStaticsError(f"unknown instrument {id!r}", "known-instrument") from None

    def change(self, from_id: str, to_id: str) -> BasisChange | None:
        """Registered change, or the inverse of a registered reverse change."""
        u = self._changes.get((from_id, to_id))
        if u is not None:
            return u
        back = self._changes.get((to_id, from_id))
        return None if back is None else back.inverse()

    def express(self, v: StateVector, basis_id: str) -> StateVector:
        if v.basis_id == basis_id:
            return v
        u = self.change(v.basis_id, basis_id)
        if u is None:
            raise BasisMismatchError(f"no registered basis change {v.basis_id!r}->{basis_id!r}")
        return change_basis(v, u)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "default_seed": self.default_seed,
            "instruments": [i.to_json() for i in self._instruments.values()],
            "basis_changes": [u.to_json() for u in self._changes.values()],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> Session:
        if not isinstance(obj, Mapping) or "dimension" not in obj:
            raise QStaticsError("session document needs a 'dimension' field", "session-schema")
        return cls(
            dimension=obj["dimension"],
            instruments=[InstrumentRep.from_json(i) for i in obj.get("instruments", [])],
            basis_changes=[BasisChange.from_json(u) for u in obj.get("basis_changes", [])],
            default_seed=obj.get("default_seed", 0),
        )

    @classmethod
    def load(cls, path: str | PathLike) -> Session:
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _express(v: StateVector, basis_id: str, session: Session | None) -> StateVector:
    if v.basis_id == basis_id:
        return v
    if session is None:
        raise BasisMismatchError(
            f"state is in basis {v.basis_id!r}, needed {basis_id!r}, and no session was given"
        )
    return session.express(v, basis_id)


def superpose(
    terms: Sequence[tuple[PairNumber, StateVector]], session: Session | None = None
) -> StateVector:
    """``sum_i c_i * v_i``; vectors in other bases are converted to the first term's basis."""
    if not terms:
        raise QStaticsError("superposition needs at least one term", "non-empty-terms")
    basis = terms[0][1].basis_id
    acc = None
    for c, v in terms:
        term = c * _express(v, basis, session)
        acc = term if acc is None else acc + term
    return acc


def ray_equivalent(v: StateVector, w: StateVector) -> PairNumber | None:
    """The scalar ``c`` with ``w == c * v``, or None when the rays differ."""
    if v.is_zero() or w.is_zero():
        raise ZeroVectorError("ray equivalence is undefined for the zero vector")
    v._check_compatible(w)
    k = next(i for i, a in enumerate(v.coords) if a)
    c = w.coords[k] * v.coords[k].inverse()
    return c if c * v == w else None


# --------------------------------------------------------------------------
# Measurement

MeasurementMap = Callable[[Sequence[PairNumber]], tuple[Fraction, ...]]


def born_map(coords: Sequence[PairNumber]) -> tuple[Fraction, ...]:
    """``nu_s = |a_s|^2 / sum_k |a_k|^2`` with ``|a|^2 = n^2 + m^2``."""
    weights = [a.norm2() for a in coords]
    total = sum(weights)
    if total == 0:
        raise ZeroVectorError("zero vector has no statistics")
    return tuple(w / total for w in weights)


@dataclass(frozen=True)
class MeasurementResult:
    instrument_id: str
    eigen_symbols: tuple[str, ...]
    nu: tuple[Fraction, ...]
    label_stats: dict[Fraction, Fraction] = field(hash=False)

    def to_json(self) -> dict:
        return {
            "kind": "measurement",
            "instrument": self.instrument_id,
            "eigen_symbols": list(self.eigen_symbols),
            "nu": [fraction_to_json(x) for x in self.nu],
            "label_stats": [
                {"label": fraction_to_json(k), "nu": fraction_to_json(v)} for k, v in self.label_stats.items()
            ],
        }


def _label_stats(instrument: InstrumentRep, nu: Sequence[Fraction]) -> dict[Fraction, Fraction]:
    stats = {label: Fraction(0) for label in instrument.distinct_labels()}
    for label, p in zip(instrument.spectral_labels, nu):
        stats[label] += p
    return stats


def _result(instrument: InstrumentRep, nu: Sequence[Fraction]) -> MeasurementResult:
    return MeasurementResult(instrument.id, instrument.eigen_symbols, tuple(nu), _label_stats(instrument, nu))


def measure(
    v: StateVector,
    instrument: InstrumentRep,
    session: Session | None = None,
    measurement_map: MeasurementMap = born_map,
) -> MeasurementResult:
    """Statistics of ``v`` on ``instrument``.

    The state is first converted to the instrument's basis through ``session``
    if needed. ``measurement_map`` is pluggable; the default is :func:`born_map`.
    """
    if v.is_zero():
        raise ZeroVectorError("zero vector has no statistics")
    v = _express(v, instrument.id, session)
    if v.dimension != instrument.dimension:
        raise QStaticsError("state and instrument differ in dimension", "dimension-match")
    return _result(instrument, measurement_map(v.coords))


def eigenstate(instrument: InstrumentRep, index: int) -> StateVector:
    if not (0 <= index < instrument.dimension):
        raise QStaticsError(
            f"eigen index {index} outside [0, {instrument.dimension})", "eigen-index-range"
        )
    return StateVector(instrument.id, tuple(ONE if s == index else ZERO for s in range(instrument.dimension)))


def coarse_grain(instrument: InstrumentRep, merge: Mapping) -> InstrumentRep:
    """Relabel spectra through ``merge`` (old label -> new label); symbols are kept."""
    merge = {to_fraction(k): to_fraction(v) for k, v in merge.items()}
    missing = [lab for lab in instrument.distinct_labels() if lab not in merge]
    if missing:
        raise QStaticsError(f"merge does not cover labels {missing}", "total-merge")
    return InstrumentRep(
        instrument.id, instrument.eigen_symbols, tuple(merge[lab] for lab in instrument.spectral_labels)
    )


@dataclass(frozen=True)
class MixtureState:
    components: tuple[tuple[StateVector, Fraction], ...]

    def __post_init__(self):
        comps = tuple((v, to_fraction(w)) for v, w in self.components)
        check_weights([w for _, w in comps])
        object.__setattr__(self, "components", comps)


def measure_mixture(
    m: MixtureState,
    instrument: InstrumentRep,
    session: Session | None = None,
    measurement_map: MeasurementMap = born_map,
) -> MeasurementResult:
    """``nu = sum_i rho_i * measure(v_i).nu``; mixing is convex, never a superposition."""
    if not isinstance(m, MixtureState):
        m = MixtureState(tuple(m))
    nu = [Fraction(0)] * instrument.dimension
    for v, w in m.components:
        part = measure(v, instrument, session, measurement_map).nu
        nu = [a + w * b for a, b in zip(nu, part)]
    return _result(instrument, nu)


# --------------------------------------------------------------------------
# Linear-vector-space axioms


@dataclass
class LVSReport:
    trials: int
    seed: int
    dimension: int
    failures: dict[str, dict]
    checks: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "kind": "lvs_report",
            "trials": self.trials,
            "seed": self.seed,
            "dimension": self.dimension,
            "checks": {c: ("fail" if c in self.failures else "pass") for c in self.checks},
            "witnesses": self.failures,
            "verdict": "pass" if self.passed else "fail",
        }


def _default_add(v: StateVector, w: StateVector) -> StateVector:
    return v + w


LVS_CHECKS = (
    "add_closed",
    "add_commutative",
    "add_associative",
    "add_identity",
    "add_inverse",
    "scalar_closed",
    "scalar_compatible",
    "scalar_identity",
    "distributive_over_vectors",
    "distributive_over_scalars",
)


def verify_lvs_axioms(
    seed: int,
    trials: int,
    dimension: int = 2,
    scalar_action: Callable[[PairNumber, StateVector], StateVector] = scale,
    vector_add: Callable[[StateVector, StateVector], StateVector] = _default_add,
    basis_id: str = "A",
) -> LVSReport:
    """Check group laws for vector addition and the scalar-action identities.

    ``scalar_action`` and ``vector_add`` can be replaced to check that a
    planted defect is detected. The first failing sample of each identity is
    kept as a witness.
    """
    if trials < 1:
        raise QStaticsError("trials must be >= 1", "trial-count-positive")
    _check_dimension(dimension)
    rng = np.random.default_rng(seed)
    zero = zero_vector(basis_id, dimension)
    act, add = scalar_action, vector_add
    failures: dict[str, dict] = {}
    per_trial = 3 * dimension + 2
    for _ in range(trials):
        vals = random_fractions(rng, 2 * per_trial)
        pairs = [PairNumber._raw(vals[2 * i], vals[2 * i + 1]) for i in range(per_trial)]
        u = StateVector(basis_id, tuple(pairs[:dimension]))
        v = StateVector(basis_id, tuple(pairs[dimension : 2 * dimension]))
        w = StateVector(basis_id, tuple(pairs[2 * dimension : 3 * dimension]))
        a, b = pairs[-2], pairs[-1]

        uv, au = add(u, v), act(a, u)
        results = {
            "add_closed": isinstance(uv, StateVector) and uv.dimension == dimension and uv.basis_id == basis_id,
            "add_commutative": uv == add(v, u),
            "add_associative": add(uv, w) == add(u, add(v, w)),
            "add_identity": add(u, zero) == u,
            "add_inverse": add(u, act(-ONE, u)) == zero,
            "scalar_closed": isinstance(au, StateVector) and au.dimension == dimension and au.basis_id == basis_id,
            "scalar_compatible": act(a, act(b, u)) == act(a * b, u),
            "scalar_identity": act(ONE, u) == u,
            "distributive_over_vectors": act(a, uv) == add(au, act(a, v)),
            "distributive_over_scalars": add(au, act(b, u)) == act(a + b, u),
        }
        for name, ok in results.items():
            if not ok and name not in failures:
                failures[name] = {
                    "u": u.to_json(),
                    "v": v.to_json(),
                    "w": w.to_json(),
                    "a": a.to_json(),
                    "b": b.to_json(),
                }
        if len(failures) == len(LVS_CHECKS):
            break
    return LVSReport(trials, seed, dimension, failures, list(LVS_CHECKS))


# --------------------------------------------------------------------------
# (nu, kappa) <-> coordinates, for demos and round trips only


def encode_statistics(
    nu: Sequence, kappa: Sequence, basis_id: str, max_denominator: int = 10**6
) -> StateVector:
    """Coordinates ``sqrt(nu) * (cos 2 pi kappa, sin 2 pi kappa)`` rounded to rationals."""
    if len(nu) != len(kappa):
        raise QStaticsError("nu and kappa differ in length", "length-match")
    coords = []
    for p, k in zip(nu, kappa):
        r = math.sqrt(float(to_fraction(p)))
        phi = 2 * math.pi * float(to_fraction(k))
        coords.append(
            PairNumber(
                Fraction(r * math.cos(phi)).limit_denominator(max_denominator),
                Fraction(r * math.sin(phi)).limit_denominator(max_denominator),
            )
        )
    return StateVector(basis_id, tuple(coords))


def decode_phases(v: StateVector) -> tuple[float | None, ...]:
    """Phase fraction in [0, 1) of each coordinate; None for zero coordinates."""
    out = []
    for a in v.coords:
        if not a:
            out.append(None)
        else:
            out.append((math.atan2(float(a.m), float(a.n)) / (2 * math.pi)) % 1.0)
    return tuple(out)
