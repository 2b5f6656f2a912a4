"""Quantum objects on a lattice: a causally explicit simulation toolkit.

State is a lattice plus quantum objects, each a rectangular table of paths
(rows) over particles (columns) with complex amplitudes.  Interactions
collapse shared tables through an explicit pipeline whose only stochastic
element is a squared-amplitude draw; conserved quantities flow additively
and are checkable at every step.  Two runtimes produce the same
statistics: a centralized driver that scans the whole object set, and a
decentralized one built from per-object engines coordinating through a
mediator board.  A small declaration language plus classifier grades model
laws as SpacePointLocal, ObjectLocal, or NonLocal.  Bundled experiments:
entangled-pair correlations against the exhaustive classical bound,
two-slit interference with and without a which-path marker, a lattice
wave automaton, and coupled pendulums as the non-local contrast case.
"""

from .engine import (
    EngineConfig,
    Law,
    RngState,
    RunTrace,
    random_draw,
    run,
    step,
)
from .errors import (
    ConfigError,
    DegenerateObjectError,
    InvariantViolation,
    ParseError,
    UnknownObjectError,
)
from .interaction import (
    InteractionCandidate,
    InteractionObject,
    OutcomeRow,
    OutcomeTable,
    apply_qft_interactions,
    create_interaction_object,
    determine_potential_interactions,
    drop_particle,
    eliminate_unaffected_paths,
    perform_interaction,
    process_interaction_object,
    select_interaction,
)
from .locality import (
    LocalityClass,
    LocalityReport,
    classify_law,
    classify_model,
    load_model_spec,
    parse_model_spec,
)
from .state import (
    FieldGrid,
    ObjectKind,
    ParticleInfo,
    Path,
    PathState,
    QuantumObject,
    Space,
    SystemState,
    build_system_state,
    normalize_amplitudes,
    reduce_to_path,
    total_conserved,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateObjectError",
    "EngineConfig",
    "FieldGrid",
    "InteractionCandidate",
    "InteractionObject",
    "InvariantViolation",
    "Law",
    "LocalityClass",
    "LocalityReport",
    "ObjectKind",
    "OutcomeRow",
    "OutcomeTable",
    "ParseError",
    "ParticleInfo",
    "Path",
    "PathState",
    "QuantumObject",
    "RngState",
    "RunTrace",
    "Space",
    "SystemState",
    "UnknownObjectError",
    "apply_qft_interactions",
    "build_system_state",
    "classify_law",
    "classify_model",
    "create_interaction_object",
    "determine_potential_interactions",
    "drop_particle",
    "eliminate_unaffected_paths",
    "load_model_spec",
    "normalize_amplitudes",
    "parse_model_spec",
    "perform_interaction",
    "process_interaction_object",
    "random_draw",
    "reduce_to_path",
    "run",
    "select_interaction",
    "step",
    "total_conserved",
]
