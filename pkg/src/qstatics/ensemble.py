"""Click streams, ensemble braces and the statistics extracted from them.

A brace records, for every outcome symbol, how many copies of the two upper
primitives ended up there: ``(count_psi, count_phi)``. Relative frequencies
``nu`` come from the per-outcome totals; the phase-like ratio ``kappa`` comes
from the split inside one outcome. Counts are Python integers and every ratio
is a :class:`~fractions.Fraction`, so scale invariance holds exactly.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence as SequenceABC
from dataclasses import dataclass
from fractions import Fraction
from os import PathLike
from typing import IO, Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from ._exact import (
    QStaticsError,
    RealizabilityError,
    ZeroClassError,
    check_probability_vector,
    check_weights,
    fraction_to_json,
    to_fraction,
    to_fractions,
)
from .statespace import InstrumentRep

logger = logging.getLogger(__name__)

__all__ = [
    "Primitive",
    "ClickRecord",
    "ClickStream",
    "ClickSpec",
    "UnitaryBrace",
    "EnsembleBrace",
    "BraceStatistics",
    "KappaSigmaPair",
    "BraceMixture",
    "union_braces",
    "replicate_brace",
    "extract_stats",
    "compose_kappa",
    "convex_mix",
    "simulate_clicks",
    "ingest_clicks",
    "mix_braces",
    "read_clicks_jsonl",
    "write_clicks_jsonl",
]

# Opaque outcome identifiers; only equality is ever used.
Primitive = str


class ClickRecord(NamedTuple):
    instrument_id: str
    outcome_index: int

    def to_json(self) -> dict:
        return {"instrument": self.instrument_id, "outcome": self.outcome_index}


class ClickStream(SequenceABC):
    """A sequence of :class:`ClickRecord` from one instrument, stored as an index array."""

    def __init__(self, instrument_id: str, outcomes):
        self.instrument_id = str(instrument_id)
        arr = np.asarray(outcomes, dtype=np.int64).reshape(-1)
        if arr.size and arr.min() < 0:
            raise QStaticsError("outcome indices must be non-negative", "outcome-index-range")
        arr.setflags(write=False)
        self.outcomes = arr

    def __len__(self) -> int:
        return int(self.outcomes.size)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return ClickStream(self.instrument_id, self.outcomes[i])
        return ClickRecord(self.instrument_id, int(self.outcomes[i]))

    def __iter__(self) -> Iterator[ClickRecord]:
        iid = self.instrument_id
        for k in self.outcomes.tolist():
            yield ClickRecord(iid, k)

    def __eq__(self, other):
        if isinstance(other, ClickStream):
            return self.instrument_id == other.instrument_id and np.array_equal(self.outcomes, other.outcomes)
        if isinstance(other, SequenceABC):
            return list(self) == list(other)
        return NotImplemented

    def __repr__(self):
        return f"ClickStream({self.instrument_id!r}, n={len(self)})"

    def counts(self, arity: int) -> np.ndarray:
        return np.bincount(self.outcomes, minlength=arity)


def write_clicks_jsonl(stream: Iterable[ClickRecord], fh: IO[str]) -> None:
    """One ``{"instrument": .., "outcome": ..}`` object per line."""
    if isinstance(stream, ClickStream):
        prefix = '{"instrument": ' + json.dumps(stream.instrument_id) + ', "outcome": '
        fh.writelines(f"{prefix}{k}}}\n" for k in stream.outcomes.tolist())
        return
    for rec in stream:
        fh.write(json.dumps(ClickRecord(*rec).to_json()) + "\n")


def read_clicks_jsonl(source: str | PathLike | IO[str]) -> list[ClickRecord] | ClickStream:
    """Parse JSON Lines; returns a :class:`ClickStream` when a single instrument is present."""
    if isinstance(source, (str, PathLike)):
        with open(source, encoding="utf-8") as fh:
            return read_clicks_jsonl(fh)
    ids, outcomes = [], []
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            iid, k = str(obj["instrument"]), obj["outcome"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise QStaticsError(f"line {lineno}: not a click record", "click-record-schema") from None
        if isinstance(k, bool) or not isinstance(k, int) or k < 0:
            raise QStaticsError(f"line {lineno}: outcome must be a non-negative integer", "outcome-index-range")
        ids.append(iid)
        outcomes.append(k)
    distinct = set(ids)
    if len(distinct) <= 1:
        return ClickStream(ids[0] if ids else "", outcomes)
    return [ClickRecord(i, k) for i, k in zip(ids, outcomes)]


# --------------------------------------------------------------------------
# Braces


@dataclass(frozen=True)
class UnitaryBrace:
    outcome: Primitive
    count_psi: int
    count_phi: int

    def __post_init__(self):
        for c in (self.count_psi, self.count_phi):
            if isinstance(c, bool) or not isinstance(c, int) or c < 0:
                raise QStaticsError("brace counts must be non-negative integers", "non-negative-counts")

    @property
    def total(self) -> int:
        return self.count_psi + self.count_phi

    @property
    def kappa(self) -> Fraction:
        if self.total == 0:
            raise ZeroClassError(f"outcome {self.outcome!r} has no counts; kappa is undefined")
        return Fraction(self.count_psi, self.total)


class EnsembleBrace:
    """Per-outcome ``(count_psi, count_phi)`` pairs.

    Outcomes with zero counts carry no primitives and are not stored, so the
    empty brace is the unique zero class. Equality ignores entry order.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Iterable[UnitaryBrace] | Mapping[Primitive, tuple[int, int]] = ()):
        if isinstance(entries, Mapping):
            entries = [UnitaryBrace(k, *v) for k, v in entries.items()]
        table: dict[Primitive, UnitaryBrace] = {}
        for e in entries:
            if not isinstance(e, UnitaryBrace):
                e = UnitaryBrace(*e)
            if e.outcome in table:
                raise QStaticsError(f"outcome {e.outcome!r} appears twice", "distinct-outcomes")
            if e.total:
                table[e.outcome] = e
            else:
                table[e.outcome] = None
        self._entries = tuple(e for e in table.values() if e is not None)

    @property
    def entries(self) -> tuple[UnitaryBrace, ...]:
        return self._entries

    @property
    def sigma(self) -> int:
        return sum(e.total for e in self._entries)

    @property
    def outcome_symbols(self) -> tuple[Primitive, ...]:
        return tuple(e.outcome for e in self._entries)

    @property
    def is_zero_class(self) -> bool:
        return not self._entries

    def as_dict(self) -> dict[Primitive, tuple[int, int]]:
        return {e.outcome: (e.count_psi, e.count_phi) for e in self._entries}

    def counts(self, outcome: Primitive) -> tuple[int, int]:
        return self.as_dict().get(outcome, (0, 0))

    def __eq__(self, other):
        if not isinstance(other, EnsembleBrace):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(frozenset(self.as_dict().items()))

    def __or__(self, other):
        if not isinstance(other, EnsembleBrace):
            return NotImplemented
        return union_braces(self, other)

    def __repr__(self):
        body = ", ".join(f"{e.outcome}:({e.count_psi},{e.count_phi})" for e in self._entries)
        return f"EnsembleBrace({{{body}}})"

    def to_json(self) -> dict:
        return {
            "kind": "brace",
            "entries": [
                {"outcome": e.outcome, "count_psi": str(e.count_psi), "count_phi": str(e.count_phi)}
                for e in self._entries
            ],
            "sigma": str(self.sigma),
            "zero_class": self.is_zero_class,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> EnsembleBrace:
        try:
            return cls(
                UnitaryBrace(str(e["outcome"]), int(e["count_psi"]), int(e["count_phi"]))
                for e in obj["entries"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise QStaticsError(f"malformed brace document: {exc}", "brace-schema") from None


def union_braces(a: EnsembleBrace, b: EnsembleBrace) -> EnsembleBrace:
    """Componentwise addition of counts; outcomes missing on one side count as (0, 0)."""
    table = a.as_dict()
    for e in b.entries:
        psi, phi = table.get(e.outcome, (0, 0))
        table[e.outcome] = (psi + e.count_psi, phi + e.count_phi)
    return EnsembleBrace(table)


def replicate_brace(b: EnsembleBrace, k) -> EnsembleBrace:
    """Multiply every count by the positive rational ``k``.

    Raises :class:`RealizabilityError` when some scaled count is not an integer.
    """
    k = to_fraction(k)
    if k <= 0:
        raise RealizabilityError(f"replication factor must be positive, got {k}")
    table = {}
    for e in b.entries:
        psi, phi = e.count_psi * k, e.count_phi * k
        if psi.denominator != 1 or phi.denominator != 1:
            raise RealizabilityError(
                f"replicating outcome {e.outcome!r} ({e.count_psi},{e.count_phi}) by {k} "
                "gives fractional counts"
            )
        table[e.outcome] = (int(psi), int(phi))
    return EnsembleBrace(table)


@dataclass(frozen=True)
class BraceStatistics:
    outcome_symbols: tuple[Primitive, ...]
    nu: tuple[Fraction, ...]
    kappa: tuple[Fraction, ...]

    def __post_init__(self):
        if not (len(self.outcome_symbols) == len(self.nu) == len(self.kappa)):
            raise QStaticsError("statistics sequences differ in length", "length-match")

    def nu_for(self, symbols: Sequence[Primitive]) -> tuple[Fraction, ...]:
        """Frequencies in the order of ``symbols``; unseen outcomes get 0."""
        table = dict(zip(self.outcome_symbols, self.nu))
        return tuple(table.get(s, Fraction(0)) for s in symbols)

    def to_json(self) -> dict:
        return {
            "kind": "statistics",
            "outcome_symbols": list(self.outcome_symbols),
            "nu": [fraction_to_json(x) for x in self.nu],
            "kappa": [fraction_to_json(x) for x in self.kappa],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> BraceStatistics:
        return cls(tuple(obj["outcome_symbols"]), to_fractions(obj["nu"]), to_fractions(obj["kappa"]))


def extract_stats(b: EnsembleBrace) -> BraceStatistics:
    """``nu_s = total_s / sigma`` and ``kappa_s = count_psi_s / total_s``, exactly."""
    sigma = b.sigma
    if sigma == 0:
        raise ZeroClassError("zero-class brace: no statistics can be extracted from an empty ensemble")
    return BraceStatistics(
        b.outcome_symbols,
        tuple(Fraction(e.total, sigma) for e in b.entries),
        tuple(e.kappa for e in b.entries),
    )


# --------------------------------------------------------------------------
# Composition laws


@dataclass(frozen=True)
class KappaSigmaPair:
    kappa: Fraction
    sigma: int

    def __post_init__(self):
        object.__setattr__(self, "kappa", to_fraction(self.kappa))
        if isinstance(self.sigma, bool) or not isinstance(self.sigma, int) or self.sigma <= 0:
            raise QStaticsError("sigma must be a positive integer", "positive-sigma")
        if not (0 <= self.kappa <= 1):
            raise QStaticsError("kappa must lie in [0, 1]", "kappa-range")
        if (self.kappa * self.sigma).denominator != 1:
            raise RealizabilityError(f"kappa*sigma = {self.kappa * self.sigma} is not an integer")

    @property
    def cardinals(self) -> tuple[int, int]:
        """The integer pair ``(kappa*sigma, (1-kappa)*sigma)``."""
        first = int(self.kappa * self.sigma)
        return first, self.sigma - first


def compose_kappa(p: KappaSigmaPair, q: KappaSigmaPair) -> KappaSigmaPair:
    """Pool two splits: ``((k' S' + k'' S'') / (S' + S''), S' + S'')``."""
    s = p.sigma + q.sigma
    return KappaSigmaPair((p.kappa * p.sigma + q.kappa * q.sigma) / s, s)


def convex_mix(s1: Sequence, s2: Sequence, w) -> tuple[Fraction, ...]:
    """``w * s1 + (1 - w) * s2`` for two frequency vectors."""
    s1, s2 = check_probability_vector(s1, "s1"), check_probability_vector(s2, "s2")
    if len(s1) != len(s2):
        raise QStaticsError(f"cannot mix statistics of lengths {len(s1)} and {len(s2)}", "length-match")
    w = to_fraction(w)
    if not (0 <= w <= 1):
        raise QStaticsError("mixing weight must lie in [0, 1]", "weight-range")
    return tuple(w * a + (1 - w) * b for a, b in zip(s1, s2))


@dataclass(frozen=True)
class BraceMixture:
    components: tuple[tuple[EnsembleBrace, Fraction], ...]

    def __post_init__(self):
        comps = tuple((b, to_fraction(w)) for b, w in self.components)
        check_weights([w for _, w in comps])
        object.__setattr__(self, "components", comps)

    @property
    def outcome_symbols(self) -> tuple[Primitive, ...]:
        seen: dict[Primitive, None] = {}
        for b, _ in self.components:
            seen.update(dict.fromkeys(b.outcome_symbols))
        return tuple(seen)


def mix_braces(m: BraceMixture, outcome_symbols: Sequence[Primitive] | None = None) -> tuple[Fraction, ...]:
    """``sum_i rho_i * nu_i`` over the shared outcome universe.

    The universe defaults to all outcomes in order of first appearance;
    outcomes a component never produced contribute 0 for that component.
    """
    if not isinstance(m, BraceMixture):
        m = BraceMixture(tuple(m))
    symbols = tuple(outcome_symbols) if outcome_symbols is not None else m.outcome_symbols
    mixed = [Fraction(0)] * len(symbols)
    for b, rho in m.components:
        nu = extract_stats(b).nu_for(symbols)
        mixed = [acc + rho * x for acc, x in zip(mixed, nu)]
    if sum(mixed) != 1:
        raise QStaticsError("outcome_symbols does not cover every component outcome", "shared-universe")
    return tuple(mixed)


# --------------------------------------------------------------------------
# Simulation and ingestion


@dataclass(frozen=True)
class ClickSpec:
    nu: tuple[Fraction, ...]
    sigma: int
    instrument_id: str = "A"

    def __post_init__(self):
        object.__setattr__(self, "nu", check_probability_vector(self.nu))
        if isinstance(self.sigma, bool) or not isinstance(self.sigma, int) or self.sigma < 1:
            raise QStaticsError("sigma must be a positive integer", "positive-sigma")


def _as_spec(spec) -> ClickSpec:
    if isinstance(spec, ClickSpec):
        return spec
    return ClickSpec(tuple(spec["nu"]), spec["sigma"], spec.get("instrument_id", spec.get("instrument", "A")))


def simulate_clicks(spec: ClickSpec | Mapping, seed: int, chunks: int = 1) -> ClickStream:
    """Draw ``sigma`` outcome indices, each with probability ``nu_s``.

    With ``chunks > 1`` the stream is produced from independent child seeds of
    ``SeedSequence(seed)`` (one per chunk), which can be generated in parallel;
    the output depends only on ``(spec, seed, chunks)``.
    """
    spec = _as_spec(spec)
    p = np.array([float(x) for x in spec.nu])
    p /= p.sum()
    k = len(p)
    if chunks <= 1:
        rng = np.random.default_rng(seed)
        outcomes = rng.choice(k, size=spec.sigma, p=p)
    else:
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        children = root.spawn(chunks)
        sizes = [spec.sigma // chunks + (i < spec.sigma % chunks) for i in range(chunks)]
        outcomes = np.concatenate(
            [np.random.default_rng(c).choice(k, size=n, p=p) for c, n in zip(children, sizes)]
        )
    return ClickStream(spec.instrument_id, outcomes)


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def ingest_clicks(
    stream: Iterable[ClickRecord], instrument: InstrumentRep, kappa_spec: Sequence
) -> EnsembleBrace:
    """Build a brace from clicks; ``kappa_spec`` apportions each outcome's total.

    ``count_psi = round_half_up(kappa_s * total_s)`` and ``count_phi`` takes the
    remainder, so totals are exactly the click counts. An empty stream yields
    the (flagged) zero-class brace.
    """
    kappa = to_fractions(kappa_spec)
    arity = instrument.dimension
    if len(kappa) != arity:
        raise QStaticsError(
            f"kappa_spec has {len(kappa)} entries, instrument {instrument.id!r} has {arity} outcomes",
            "kappa-length",
        )
    if any(not (0 <= k <= 1) for k in kappa):
        raise QStaticsError("kappa_spec entries must lie in [0, 1]", "kappa-range")

    if isinstance(stream, ClickStream):
        if len(stream) and stream.instrument_id != instrument.id:
            raise QStaticsError(
                f"record 0 references instrument {stream.instrument_id!r}, expected {instrument.id!r}",
                "instrument-match",
            )
        bad = np.flatnonzero(stream.outcomes >= arity)
        if bad.size:
            pos = int(bad[0])
            raise QStaticsError(
                f"record {pos} has unknown outcome index {int(stream.outcomes[pos])}", "outcome-index-range"
            )
        totals = [int(c) for c in stream.counts(arity)]
    else:
        totals = [0] * arity
        for pos, rec in enumerate(stream):
            iid, k = rec
            if iid != instrument.id:
                raise QStaticsError(
                    f"record {pos} references instrument {iid!r}, expected {instrument.id!r}",
                    "instrument-match",
                )
            if not (0 <= k < arity):
                raise QStaticsError(f"record {pos} has unknown outcome index {k}", "outcome-index-range")
            totals[k] += 1

    table = {}
    for sym, total, k in zip(instrument.eigen_symbols, totals, kappa):
        psi = _round_half_up(k * total)
        table[sym] = (psi, total - psi)
    brace = EnsembleBrace(table)
    if brace.is_zero_class:
        logger.warning("ingested an empty click stream: zero-class brace")
    return brace
