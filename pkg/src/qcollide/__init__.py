"""Thermalization of spin chains by repeated bath collisions and by an
eigenstate-jump Metropolis scheme, with diagnostics for the regime where
the two generate the same density-matrix dynamics.
"""

__version__ = "0.1.0"

from .analysis import (
    ComparisonReport,
    RatioPoint,
    compare_models,
    distance_to_gibbs,
    equivalence_coupling,
    occupations,
    ratio_scan,
    truncation_envelope,
)
from .bath import (
    BathSpec,
    ancilla_state,
    build_bath_spec,
    build_interaction,
    partition_function,
    ratio_za_l,
)
from .collisional import CollisionConfig, cm_evolve, cm_step_exact, cm_step_second_order
from .linalg import (
    DimensionMismatch,
    EigenSystem,
    NotHermitian,
    NotSquare,
    herm_eig,
    kron,
    partial_trace_second,
    trace_distance,
    unitary_exp,
)
from .metropolis import (
    DegenerateState,
    MetropolisConfig,
    TrajectoryState,
    acceptance,
    kernel_backend,
    mc_averaged_map,
    mc_evolve,
    mc_trajectory_step,
    omega,
)
from .model import (
    NotSorted,
    SpinChainParams,
    TransitionTable,
    build_xxz,
    gibbs_state,
    transitions,
    uniform_superposition_state,
)
from .series import TimeSeries

__all__ = [
    "BathSpec",
    "CollisionConfig",
    "ComparisonReport",
    "DegenerateState",
    "DimensionMismatch",
    "EigenSystem",
    "MetropolisConfig",
    "NotHermitian",
    "NotSorted",
    "NotSquare",
    "RatioPoint",
    "SpinChainParams",
    "TimeSeries",
    "TrajectoryState",
    "TransitionTable",
    "acceptance",
    "ancilla_state",
    "build_bath_spec",
    "build_interaction",
    "build_xxz",
    "cm_evolve",
    "cm_step_exact",
    "cm_step_second_order",
    "compare_models",
    "distance_to_gibbs",
    "equivalence_coupling",
    "gibbs_state",
    "herm_eig",
    "kernel_backend",
    "kron",
    "mc_averaged_map",
    "mc_evolve",
    "mc_trajectory_step",
    "occupations",
    "omega",
    "partial_trace_second",
    "partition_function",
    "ratio_scan",
    "ratio_za_l",
    "trace_distance",
    "transitions",
    "uniform_superposition_state",
    "unitary_exp",
]
