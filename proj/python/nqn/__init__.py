"""Rydberg-chain state preparation: Hamiltonians, propagation, NQN ramp search."""

from ._core import (
    ChainConfig,
    Phase,
    PulseSchedule,
    RampSpec,
    OptimizationProblem,
    OptimizationReport,
    OmegaEnvelope,
    blockade_basis,
    bare_crossings,
    build_full,
    classify_nqn,
    classify_phase,
    ground_state_occupations,
    landau_zener,
    landau_zener_rate,
    linear_ramp,
    make_nqn_schedule,
    measured_fidelity,
    optimize,
    propagate,
    scan,
    schedule_fidelity,
    target_state,
    __version__,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
