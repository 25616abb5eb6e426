"""Quantum statics from click statistics: ensembles, pair numbers, state spaces."""

__version__ = "0.1.0"

from ._exact import (
    BasisMismatchError,
    QStaticsError,
    RealizabilityError,
    SingularMatrixError,
    ZeroClassError,
    ZeroVectorError,
)
from .ensemble import (
    BraceMixture,
    BraceStatistics,
    ClickRecord,
    ClickSpec,
    ClickStream,
    EnsembleBrace,
    KappaSigmaPair,
    UnitaryBrace,
    compose_kappa,
    convex_mix,
    extract_stats,
    ingest_clicks,
    mix_braces,
    replicate_brace,
    simulate_clicks,
    union_braces,
)
from .numeric import (
    I,
    ONE,
    ZERO,
    PairNumber,
    ansatz_search,
    involution,
    ordinal_encode,
    pair_add,
    pair_inverse,
    pair_mul,
    verify_field_axioms,
)
from .statespace import (
    BasisChange,
    InstrumentRep,
    MeasurementResult,
    MixtureState,
    Session,
    StateVector,
    change_basis,
    coarse_grain,
    eigenstate,
    measure,
    measure_mixture,
    ray_equivalent,
    superpose,
    verify_lvs_axioms,
)
