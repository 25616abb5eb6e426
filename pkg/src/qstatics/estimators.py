"""scikit-learn compatible wrappers around extraction and measurement.

These let click histograms and state coordinates flow through ordinary
``Pipeline`` / ``get_params`` machinery. The exact core lives in
:mod:`qstatics.ensemble` and :mod:`qstatics.statespace`; the estimators only
validate arrays and convert at the boundary.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._exact import QStaticsError, ZeroClassError, to_fraction
from .ensemble import ClickSpec, ClickStream, extract_stats, ingest_clicks, simulate_clicks
from .numeric import PairNumber
from .statespace import InstrumentRep, StateVector, born_map, measure

__all__ = ["FrequencyTransformer", "ClickEnsembleEstimator", "MeasurementTransformer"]


def _check_counts(X) -> np.ndarray:
    X = check_array(X, dtype=np.int64, ensure_min_features=1)
    if (X < 0).any():
        raise QStaticsError("click counts must be non-negative", "non-negative-counts")
    return X


class FrequencyTransformer(TransformerMixin, BaseEstimator):
    """Map rows of per-outcome click counts to relative frequencies.

    Parameters
    ----------
    exact : bool, default=False
        Return an object array of :class:`~fractions.Fraction` instead of floats.
    """

    def __init__(self, exact: bool = False):
        self.exact = exact

    def fit(self, X, y=None):
        X = _check_counts(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_counts(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        totals = X.sum(axis=1)
        if (totals == 0).any():
            raise ZeroClassError("a row has no clicks (zero-class brace)")
        if not self.exact:
            return X / totals[:, None]
        out = np.empty(X.shape, dtype=object)
        for i, (row, total) in enumerate(zip(X.tolist(), totals.tolist())):
            out[i] = [Fraction(c, total) for c in row]
        return out


class ClickEnsembleEstimator(BaseEstimator):
    """Fit ensemble statistics to a stream of outcome indices.

    After ``fit`` the estimator exposes ``brace_``, ``statistics_`` and
    ``nu_`` (float array over all ``n_outcomes_`` outcomes, unseen ones 0), and
    can generate fresh click streams with :meth:`sample`.

    Parameters
    ----------
    n_outcomes : int or None, default=None
        Instrument arity. Inferred as ``max(index) + 1`` (at least 2) if None.
    kappa : sequence of rationals or None, default=None
        Per-outcome split used for ingestion; 1/2 everywhere if None.
    instrument_id : str, default="A"
    """

    def __init__(self, n_outcomes=None, kappa=None, instrument_id: str = "A"):
        self.n_outcomes = n_outcomes
        self.kappa = kappa
        self.instrument_id = instrument_id

    def fit(self, X, y=None):
        if isinstance(X, ClickStream):
            outcomes = X.outcomes
        else:
            outcomes = check_array(np.asarray(X).reshape(-1, 1), dtype=np.int64, ensure_min_samples=0).ravel()
        arity = self.n_outcomes or max(2, int(outcomes.max()) + 1 if outcomes.size else 2)
        self.instrument_ = InstrumentRep.default(self.instrument_id, arity)
        kappa = self.kappa if self.kappa is not None else [Fraction(1, 2)] * arity
        self.brace_ = ingest_clicks(ClickStream(self.instrument_id, outcomes), self.instrument_, kappa)
        self.statistics_ = extract_stats(self.brace_)
        self.n_outcomes_ = arity
        self.nu_exact_ = self.statistics_.nu_for(self.instrument_.eigen_symbols)
        self.nu_ = np.array([float(x) for x in self.nu_exact_])
        return self

    def sample(self, sigma: int, seed: int = 0) -> ClickStream:
        check_is_fitted(self, "nu_exact_")
        return simulate_clicks(ClickSpec(self.nu_exact_, sigma, self.instrument_id), seed)


def _row_to_pairs(row) -> tuple[PairNumber, ...]:
    out = []
    for a in row:
        if isinstance(a, PairNumber):
            out.append(a)
        elif isinstance(a, (complex, np.complexfloating)):
            out.append(PairNumber(to_fraction(float(a.real)), to_fraction(float(a.imag))))
        else:
            out.append(PairNumber(to_fraction(a), 0))
    return tuple(out)


class MeasurementTransformer(TransformerMixin, BaseEstimator):
    """Turn rows of state coordinates into outcome statistics.

    Rows may hold complex numbers or :class:`PairNumber` objects; float and
    complex entries are converted to exact rationals through their repr.

    Parameters
    ----------
    instrument : InstrumentRep or None, default=None
        Supplies spectral labels. A default instrument of matching arity is
        used if None.
    by_label : bool, default=False
        Report statistics per distinct spectral label instead of per eigen symbol.
    exact : bool, default=False
        Return Fractions (object array) instead of floats.
    measurement_map : callable, default=born_map
    """

    def __init__(self, instrument=None, by_label: bool = False, exact: bool = False, measurement_map=born_map):
        self.instrument = instrument
        self.by_label = by_label
        self.exact = exact
        self.measurement_map = measurement_map

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=object)
        if X.ndim != 2:
            raise ValueError("expected a 2-D array of state coordinates")
        self.n_features_in_ = X.shape[1]
        if self.instrument is None:
            self.instrument_ = InstrumentRep.default("A", self.n_features_in_)
        else:
            if self.instrument.dimension != self.n_features_in_:
                raise ValueError("instrument arity does not match the number of coordinates")
            self.instrument_ = self.instrument
        return self

    def transform(self, X):
        check_is_fitted(self, "instrument_")
        X = np.asarray(X, dtype=object)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected shape (n, {self.n_features_in_})")
        rows = []
        for row in X:
            v = StateVector(self.instrument_.id, _row_to_pairs(row))
            res = measure(v, self.instrument_, measurement_map=self.measurement_map)
            rows.append(list(res.label_stats.values()) if self.by_label else list(res.nu))
        if self.exact:
            out = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
            for i, r in enumerate(rows):
                out[i] = r
            return out
        return np.array([[float(x) for x in r] for r in rows])
