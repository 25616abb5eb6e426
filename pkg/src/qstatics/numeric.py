"""Pair numbers, the sign-Ansatz elimination and von Neumann ordinals.

A :class:`PairNumber` is an ordered pair of exact rationals ``(n, m)`` with
componentwise addition and the multiplication

    (N, M) * (n, m) = (N n - M m, N m + M n)

i.e. the complex numbers written as pairs. :func:`ansatz_search` shows by
exhaustive enumeration why this multiplication, out of the 16 sign variants of
``(±N n ± M m, ±N m ± M n)``, is the only one (up to isomorphism) that yields
a field.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Literal, NamedTuple, Sequence

import numpy as np

from ._exact import QStaticsError, fraction_to_json, random_fractions, to_fraction

__all__ = [
    "PairNumber",
    "ZERO",
    "ONE",
    "I",
    "pair_add",
    "pair_neg",
    "pair_mul",
    "pair_inverse",
    "involution",
    "conj",
    "swap",
    "SignAssignment",
    "STANDARD_SIGNS",
    "all_sign_assignments",
    "CandidateAlgebra",
    "SurvivorReport",
    "ansatz_search",
    "AlgebraReport",
    "verify_field_axioms",
    "ordinal_encode",
    "ordinal_successor",
    "render_ordinal",
    "MAX_ORDINAL",
]


def _coerce(x) -> Fraction:
    return x if type(x) is Fraction else to_fraction(x)


class PairNumber:
    """Exact pair ``(n, m)``; immutable, hashable, equality componentwise."""

    __slots__ = ("n", "m")

    def __init__(self, n=0, m=0):
        object.__setattr__(self, "n", _coerce(n))
        object.__setattr__(self, "m", _coerce(m))

    @classmethod
    def _raw(cls, n: Fraction, m: Fraction) -> PairNumber:
        p = object.__new__(cls)
        object.__setattr__(p, "n", n)
        object.__setattr__(p, "m", m)
        return p

    def __setattr__(self, name, value):
        raise AttributeError("PairNumber is immutable")

    def __reduce__(self):
        return (PairNumber, (self.n, self.m))

    def __eq__(self, other):
        if isinstance(other, PairNumber):
            return self.n == other.n and self.m == other.m
        return NotImplemented

    def __hash__(self):
        return hash((self.n, self.m))

    def __repr__(self):
        return f"PairNumber({self.n}, {self.m})"

    def __str__(self):
        return f"({self.n}, {self.m})"

    def __iter__(self) -> Iterator[Fraction]:
        yield self.n
        yield self.m

    def __bool__(self):
        return bool(self.n) or bool(self.m)

    def __add__(self, other):
        if not isinstance(other, PairNumber):
            return NotImplemented
        return PairNumber._raw(self.n + other.n, self.m + other.m)

    def __sub__(self, other):
        if not isinstance(other, PairNumber):
            return NotImplemented
        return PairNumber._raw(self.n - other.n, self.m - other.m)

    def __neg__(self):
        return PairNumber._raw(-self.n, -self.m)

    def __mul__(self, other):
        if not isinstance(other, PairNumber):
            return NotImplemented
        N, M, n, m = self.n, self.m, other.n, other.m
        return PairNumber._raw(N * n - M * m, N * m + M * n)

    def __truediv__(self, other):
        if not isinstance(other, PairNumber):
            return NotImplemented
        return self * other.inverse()

    def norm2(self) -> Fraction:
        """``n**2 + m**2``; the denominator of the inverse."""
        return self.n * self.n + self.m * self.m

    def inverse(self) -> PairNumber:
        delta = self.norm2()
        if delta == 0:
            raise ZeroDivisionError("(0, 0) has no multiplicative inverse")
        return PairNumber._raw(self.n / delta, -self.m / delta)

    def conj(self) -> PairNumber:
        return PairNumber._raw(self.n, -self.m)

    def swap(self) -> PairNumber:
        return PairNumber._raw(self.m, self.n)

    def to_complex(self) -> complex:
        return complex(float(self.n), float(self.m))

    def to_json(self) -> dict:
        return {"n": fraction_to_json(self.n), "m": fraction_to_json(self.m)}

    @classmethod
    def from_json(cls, obj) -> PairNumber:
        if isinstance(obj, PairNumber):
            return obj
        if isinstance(obj, dict):
            return cls(to_fraction(obj["n"]), to_fraction(obj["m"]))
        if isinstance(obj, (list, tuple)) and len(obj) == 2:
            return cls(to_fraction(obj[0]), to_fraction(obj[1]))
        if isinstance(obj, (int, str, Fraction)):
            return cls(to_fraction(obj), 0)
        raise QStaticsError(f"cannot read a pair number from {obj!r}", "pair-syntax")


ZERO = PairNumber(0, 0)
ONE = PairNumber(1, 0)
I = PairNumber(0, 1)


def pair_add(a: PairNumber, b: PairNumber) -> PairNumber:
    return a + b


def pair_neg(a: PairNumber) -> PairNumber:
    return -a


def pair_mul(a: PairNumber, b: PairNumber) -> PairNumber:
    return a * b


def pair_inverse(a: PairNumber) -> PairNumber:
    """Multiplicative inverse ``(n/Δ, -m/Δ)`` with ``Δ = n² + m²``."""
    return a.inverse()


def conj(a: PairNumber) -> PairNumber:
    return a.conj()


def swap(a: PairNumber) -> PairNumber:
    return a.swap()


def involution(a: PairNumber, kind: Literal["conj", "swap"]) -> PairNumber:
    if kind == "conj":
        return a.conj()
    if kind == "swap":
        return a.swap()
    raise QStaticsError(f"unknown involution {kind!r}; expected 'conj' or 'swap'", "involution-kind")


# --------------------------------------------------------------------------
# Ansatz elimination


class SignAssignment(NamedTuple):
    """Signs of ``(s1 N n + s2 M m, s3 N m + s4 M n)``."""

    s1: int
    s2: int
    s3: int
    s4: int

    def label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self)


STANDARD_SIGNS = SignAssignment(1, -1, 1, 1)


def all_sign_assignments() -> list[SignAssignment]:
    return [SignAssignment(*s) for s in itertools.product((1, -1), repeat=4)]


def _solve_exact(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """One solution of ``rows @ x = rhs`` over the rationals, or None if inconsistent.

    Free variables are set to zero. Works for over- and under-determined systems.
    """
    n_vars = len(rows[0])
    aug = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n_vars):
        p = next((i for i in range(r, len(aug)) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        piv = aug[r][c]
        aug[r] = [v / piv for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == len(aug):
            break
    if any(all(v == 0 for v in row[:-1]) and row[-1] != 0 for row in aug):
        return None
    x = [Fraction(0)] * n_vars
    for i, c in enumerate(pivots):
        x[c] = aug[i][-1]
    return x


@dataclass(frozen=True)
class CandidateAlgebra:
    """One of the 16 sign variants of pair multiplication."""

    signs: SignAssignment

    def multiply(self, a: PairNumber, b: PairNumber) -> PairNumber:
        s1, s2, s3, s4 = self.signs
        N, M, n, m = a.n, a.m, b.n, b.m
        # s1 Nn + s2 Mm == s1 (Nn + s1 s2 Mm); avoids int * Fraction products
        x = N * n + M * m if s1 == s2 else N * n - M * m
        y = N * m + M * n if s3 == s4 else N * m - M * n
        return PairNumber._raw(x if s1 > 0 else -x, y if s3 > 0 else -y)

    def structure(self) -> list[list[list[int]]]:
        """``T[k][i][j]``: component k of ``e_i * e_j`` for basis pairs e_0=(1,0), e_1=(0,1)."""
        basis = (PairNumber(1, 0), PairNumber(0, 1))
        t = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
        for i, j in itertools.product(range(2), repeat=2):
            prod = self.multiply(basis[i], basis[j])
            t[0][i][j] = int(prod.n)
            t[1][i][j] = int(prod.m)
        return t

    def unity(self) -> PairNumber | None:
        """Solve exactly for a two-sided unity; None when none exists."""
        t = self.structure()
        rows, rhs = [], []
        # left: sum_i e_i T[k][i][j] = delta_kj ; right: sum_i e_i T[k][j][i] = delta_kj
        for k, j in itertools.product(range(2), repeat=2):
            rows.append([t[k][0][j], t[k][1][j]])
            rhs.append(int(k == j))
            rows.append([t[k][j][0], t[k][j][1]])
            rhs.append(int(k == j))
        sol = _solve_exact(rows, rhs)
        return None if sol is None else PairNumber(*sol)

    def inverse(self, x: PairNumber, unity: PairNumber) -> PairNumber | None:
        """Two-sided inverse of ``x`` relative to ``unity``, or None."""
        s1, s2, s3, s4 = self.signs
        # x * y as a linear map of y = (p, q)
        rows = [[s1 * x.n, s2 * x.m], [s4 * x.m, s3 * x.n]]
        sol = _solve_exact(rows, [unity.n, unity.m])
        if sol is None:
            return None
        y = PairNumber(*sol)
        if self.multiply(y, x) != unity:
            return None
        return y

    def sign_map_to(self, other: CandidateAlgebra) -> tuple[int, int] | None:
        """A componentwise sign map ``phi`` with ``phi(a*b) = phi(a) *' phi(b)``, if any.

        Checked on the structure tensors, so the answer is exact for all inputs.
        """
        t, u = self.structure(), other.structure()
        for d in itertools.product((1, -1), repeat=2):
            if all(
                d[k] * t[k][i][j] == d[i] * d[j] * u[k][i][j]
                for k, i, j in itertools.product(range(2), repeat=3)
            ):
                return d
        return None


@dataclass
class CandidateVerdict:
    signs: SignAssignment
    distributive: bool
    associative: bool
    commutative: bool
    unity: PairNumber | None
    invertible: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def passes_associativity_unity(self) -> bool:
        return self.distributive and self.associative and self.unity is not None

    def to_json(self) -> dict:
        return {
            "signs": list(self.signs),
            "label": self.signs.label(),
            "distributive": self.distributive,
            "associative": self.associative,
            "commutative": self.commutative,
            "unity": None if self.unity is None else self.unity.to_json(),
            "invertible": self.invertible,
            "witnesses": self.witnesses,
        }


@dataclass
class SurvivorReport:
    total_candidates: int
    pass_associativity_unity: list[SignAssignment]
    pass_invertibility: list[SignAssignment]
    isomorphism_classes: int
    classes: list[list[SignAssignment]]
    verdicts: list[CandidateVerdict]
    trial_count: int
    seed: int

    @property
    def witness_failures(self) -> dict[str, dict]:
        return {v.signs.label(): v.witnesses for v in self.verdicts if v.witnesses}

    @property
    def standard_survives(self) -> bool:
        return STANDARD_SIGNS in self.pass_invertibility

    @property
    def passed(self) -> bool:
        return self.standard_survives and self.isomorphism_classes == 1

    def to_json(self) -> dict:
        return {
            "kind": "survivor_report",
            "trial_count": self.trial_count,
            "seed": self.seed,
            "total_candidates": self.total_candidates,
            "pass_associativity_unity": [list(s) for s in self.pass_associativity_unity],
            "pass_invertibility": [list(s) for s in self.pass_invertibility],
            "isomorphism_classes": self.isomorphism_classes,
            "classes": [[list(s) for s in c] for c in self.classes],
            "standard_survives": self.standard_survives,
            "candidates": [v.to_json() for v in self.verdicts],
            "verdict": "pass" if self.passed else "fail",
        }


def _pairs_json(*ps: PairNumber) -> list[dict]:
    return [p.to_json() for p in ps]


def _random_pairs(rng: np.random.Generator, count: int) -> list[PairNumber]:
    vals = random_fractions(rng, 2 * count)
    return [PairNumber._raw(vals[2 * i], vals[2 * i + 1]) for i in range(count)]


WITNESS = PairNumber(1, 1)


def _examine_candidate(signs: SignAssignment, trial_count: int, seed_seq) -> CandidateVerdict:
    alg = CandidateAlgebra(signs)
    mul = alg.multiply
    rng = np.random.default_rng(seed_seq)
    triples = [(WITNESS, WITNESS, WITNESS)]
    flat = _random_pairs(rng, 3 * trial_count)
    triples += [tuple(flat[3 * i : 3 * i + 3]) for i in range(trial_count)]

    witnesses: dict = {}
    distributive = associative = commutative = True
    for a, b, c in triples:
        if distributive and (
            mul(c, a + b) != mul(c, a) + mul(c, b) or mul(a + b, c) != mul(a, c) + mul(b, c)
        ):
            distributive = False
            witnesses["distributivity"] = _pairs_json(a, b, c)
        if associative and mul(mul(a, b), c) != mul(a, mul(b, c)):
            associative = False
            witnesses["associativity"] = _pairs_json(a, b, c)
        if commutative and mul(a, b) != mul(b, a):
            commutative = False
            witnesses["commutativity"] = _pairs_json(a, b)
        if not (distributive or associative or commutative):
            break

    unity = alg.unity()
    if unity is None:
        witnesses["unity"] = "no two-sided unity exists"

    invertible = False
    if associative and distributive and unity is not None:
        invertible = True
        for x in [WITNESS] + [t[0] for t in triples[1:]]:
            if not x:
                continue
            if alg.inverse(x, unity) is None:
                invertible = False
                witnesses["invertibility"] = _pairs_json(x)
                break
    elif "invertibility" not in witnesses:
        witnesses["invertibility"] = "not examined: associativity/unity filter failed"

    return CandidateVerdict(signs, distributive, associative, commutative, unity, invertible, witnesses)


def ansatz_search(trial_count: int, seed: int, n_jobs: int = 1) -> SurvivorReport:
    """Run every sign assignment through the distributivity, associativity,
    unity and invertibility filters, then group the survivors into
    isomorphism classes under componentwise sign maps.

    Randomized checks draw exact rationals from a per-candidate child of
    ``SeedSequence(seed)``, so the report does not depend on ``n_jobs``.
    The witness ``(1, 1)`` is always examined.
    """
    if trial_count < 1:
        raise QStaticsError("trial_count must be >= 1", "trial-count-positive")
    candidates = all_sign_assignments()
    children = np.random.SeedSequence(seed).spawn(len(candidates))
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            verdicts = list(
                pool.map(_examine_candidate, candidates, [trial_count] * len(candidates), children)
            )
    else:
        verdicts = [_examine_candidate(s, trial_count, c) for s, c in zip(candidates, children)]

    assoc_unity = [v.signs for v in verdicts if v.passes_associativity_unity]
    survivors = [v.signs for v in verdicts if v.passes_associativity_unity and v.invertible]

    classes: list[list[SignAssignment]] = []
    for s in survivors:
        for cls in classes:
            if CandidateAlgebra(s).sign_map_to(CandidateAlgebra(cls[0])) is not None:
                cls.append(s)
                break
        else:
            classes.append([s])

    return SurvivorReport(
        total_candidates=len(candidates),
        pass_associativity_unity=assoc_unity,
        pass_invertibility=survivors,
        isomorphism_classes=len(classes),
        classes=classes,
        verdicts=verdicts,
        trial_count=trial_count,
        seed=seed,
    )


# --------------------------------------------------------------------------
# Field-axiom verification


@dataclass
class AlgebraReport:
    trials: int
    seed: int
    failures: dict[str, list[dict]]
    checks: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "kind": "algebra_report",
            "trials": self.trials,
            "seed": self.seed,
            "checks": {c: ("fail" if c in self.failures else "pass") for c in self.checks},
            "witnesses": self.failures,
            "verdict": "pass" if self.passed else "fail",
        }


def _hand_expanded_product(a: PairNumber, b: PairNumber) -> tuple[Fraction, Fraction]:
    # (an + i am)(bn + i bm) = an bn + i an bm + i am bn + i^2 am bm
    re = a.n * b.n + (-1) * (a.m * b.m)
    im = a.n * b.m + a.m * b.n
    return re, im


def verify_field_axioms(
    trials: int,
    seed: int,
    mul: Callable[[PairNumber, PairNumber], PairNumber] = pair_mul,
) -> AlgebraReport:
    """Check the field axioms, inverse formula and involution laws on random exact samples."""
    if trials < 1:
        raise QStaticsError("trials must be >= 1", "trial-count-positive")
    rng = np.random.default_rng(seed)
    flat = _random_pairs(rng, 3 * trials)
    checks = {
        "add_commutative": lambda a, b, c: a + b == b + a,
        "add_associative": lambda a, b, c: (a + b) + c == a + (b + c),
        "add_identity": lambda a, b, c: a + ZERO == a,
        "add_inverse": lambda a, b, c: a + (-a) == ZERO,
        "mul_commutative": lambda a, b, c: mul(a, b) == mul(b, a),
        "mul_associative": lambda a, b, c: mul(mul(a, b), c) == mul(a, mul(b, c)),
        "mul_identity": lambda a, b, c: mul(a, ONE) == a and mul(ONE, a) == a,
        "mul_inverse": lambda a, b, c: not a or mul(a, a.inverse()) == ONE,
        "inverse_formula": lambda a, b, c: not a
        or a.inverse() == PairNumber(a.n / (a.n**2 + a.m**2), -a.m / (a.n**2 + a.m**2)),
        "distributive": lambda a, b, c: mul(c, a + b) == mul(c, a) + mul(c, b),
        "hand_expanded_oracle": lambda a, b, c: tuple(mul(a, b)) == _hand_expanded_product(a, b),
        "conj_involution": lambda a, b, c: a.conj().conj() == a,
        "swap_involution": lambda a, b, c: a.swap().swap() == a,
        "conj_swap_squared_is_negation": lambda a, b, c: a.swap().conj().swap().conj() == -a,
    }
    failures: dict[str, list[dict]] = {}
    for t in range(trials):
        a, b, c = flat[3 * t : 3 * t + 3]
        for name, check in checks.items():
            if name not in failures and not check(a, b, c):
                failures[name] = _pairs_json(a, b, c)
    if mul(I, I) != -ONE:
        failures["i_squared"] = _pairs_json(I)
    return AlgebraReport(trials, seed, failures, list(checks) + ["i_squared"])


# --------------------------------------------------------------------------
# Ordinals

MAX_ORDINAL = 12


def ordinal_successor(x: frozenset) -> frozenset:
    return x | frozenset([x])


def ordinal_encode(n: int) -> frozenset:
    """von Neumann ordinal: 0 = {}, n+1 = n ∪ {n}."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise QStaticsError(f"ordinal index must be a non-negative integer, got {n!r}", "ordinal-range")
    if n > MAX_ORDINAL:
        raise QStaticsError(f"ordinal {n} exceeds the nesting guard {MAX_ORDINAL}", "ordinal-range")
    x: frozenset = frozenset()
    for _ in range(n):
        x = ordinal_successor(x)
    return x


def render_ordinal(x: frozenset) -> str:
    if not x:
        return "∅"
    # members of a von Neumann ordinal are ordinals, ordered by cardinality
    return "{" + ",".join(render_ordinal(e) for e in sorted(x, key=len)) + "}"
