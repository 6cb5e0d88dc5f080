"""Stable b-matching preference systems for peer-to-peer overlays."""

from .classify import (
    GlobalConflict,
    LovingPair,
    PeelStats,
    PreferenceCycle,
    complementary_marks,
    find_preference_cycle,
    is_acyclic,
    is_global_representable,
    linear_combine,
    loving_pairs,
    symmetrize_acyclic,
    tieless_combine,
)
from .dynamics import (
    ActivationPolicy,
    DynamicsResult,
    PolicyKind,
    StepRecord,
    apply_pair,
    blocking_pairs,
    is_stable,
    run_dynamics,
)
from .errors import (
    BMatchError,
    ContractError,
    CyclicInstanceError,
    FormatError,
    StructuralError,
    ValidationError,
)
from .prefcore import (
    INF,
    AcceptanceGraph,
    Configuration,
    GlobalMarkVector,
    MarkMatrix,
    Orientation,
    PreferenceInstance,
    QuotaVector,
    ValidationReport,
    acceptance_from_marks,
    preferences_from_marks,
    prefers,
    validate_marks,
)
from .solver import stable_configuration

__version__ = "0.1.0"
