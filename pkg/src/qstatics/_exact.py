"""Exact-rational coercion, validation helpers and the package's exception types."""

from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


class QStaticsError(ValueError):
    """Base class for input/invariant violations.

    ``invariant`` is a short machine-friendly name of the violated rule; the
    CLI prints it in its one-line diagnostic.
    """

    invariant = "invalid-input"

    def __init__(self, message: str, invariant: str | None = None):
        super().__init__(message)
        if invariant is not None:
            self.invariant = invariant


class ZeroClassError(QStaticsError):
    invariant = "zero-class-brace"


class RealizabilityError(QStaticsError):
    invariant = "realizability"


class ZeroVectorError(QStaticsError):
    invariant = "nonzero-state"


class BasisMismatchError(QStaticsError):
    invariant = "basis-match"


class SingularMatrixError(QStaticsError):
    invariant = "invertible-basis-change"


def to_fraction(x) -> Fraction:
    """Coerce ``x`` to an exact :class:`Fraction`.

    Floats go through their shortest repr, so ``0.3`` becomes ``3/10`` rather
    than the binary expansion. Strings accept ``"3/10"``, ``"0.3"``, ``"2"``.
    Dicts of the serialized form ``{"num": .., "den": ..}`` are accepted too.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise QStaticsError(f"non-finite value {x!r}", "finite-rational")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            raise QStaticsError(f"cannot parse {x!r} as a rational", "rational-syntax") from None
    if isinstance(x, dict) and "num" in x and "den" in x:
        den = int(x["den"])
        if den == 0:
            raise QStaticsError("zero denominator", "rational-syntax")
        return Fraction(int(x["num"]), den)
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def to_fractions(xs: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x) for x in xs)


def check_probability_vector(nu: Sequence, name: str = "nu") -> tuple[Fraction, ...]:
    """Return ``nu`` as exact fractions, rejecting negatives and sums other than 1."""
    nu = to_fractions(nu)
    if not nu:
        raise QStaticsError(f"{name} is empty", "nu-sums-to-one")
    if any(v < 0 for v in nu):
        raise QStaticsError(f"{name} has a negative entry", "nu-non-negative")
    if sum(nu) != 1:
        raise QStaticsError(f"{name} sums to {sum(nu)}, not 1", "nu-sums-to-one")
    return nu


def check_weights(weights: Sequence, name: str = "weights") -> tuple[Fraction, ...]:
    weights = to_fractions(weights)
    if not weights:
        raise QStaticsError(f"{name} is empty", "weights-sum-to-one")
    if any(not (0 < w <= 1) for w in weights):
        raise QStaticsError(f"{name} must lie in (0, 1]", "weight-range")
    if sum(weights) != 1:
        raise QStaticsError(f"{name} sum to {sum(weights)}, not 1", "weights-sum-to-one")
    return weights


def random_fractions(rng: np.random.Generator, size: int, bound: int = 1000) -> list[Fraction]:
    """Draw ``size`` rationals with numerator in [-bound, bound] and denominator in [1, bound]."""
    nums = rng.integers(-bound, bound + 1, size=size)
    dens = rng.integers(1, bound + 1, size=size)
    return [Fraction(int(a), int(b)) for a, b in zip(nums, dens)]


def fraction_to_json(x: Fraction) -> dict:
    x = to_fraction(x)
    return {"num": str(x.numerator), "den": str(x.denominator)}
