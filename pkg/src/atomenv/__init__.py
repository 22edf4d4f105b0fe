"""Entanglement and discord of two atoms decaying into a shared vacuum.

Quick start::

    from atomenv import GeometryConfig, InitialState, evaluate_point
    rec = evaluate_point(InitialState.from_amp2("Phi", 0.5), GeometryConfig(4.4), 1.0)
    rec.E_AB, rec.E_AE
"""
from .errors import (
    AtomEnvError,
    InvalidState,
    NoConvergence,
    NoInteriorMaximum,
    NotHermitian,
    NotXState,
    OptimizerStalled,
    StateCorrupted,
)
from .measures import (
    CorrelationRecord,
    MeasurementBasis,
    classical_correlation,
    concurrence,
    conditional_entropy,
    conditional_entropy_on_measurement,
    correlation_record,
    discord,
    environment_discord,
    environment_entanglement,
    eof,
    mutual_information,
    von_neumann_entropy,
    x_state_concurrence,
)
from .model import (
    GeometryConfig,
    InitialState,
    Liouvillian,
    build_liouvillian,
    collective_damping,
    dipole_shift,
    initial_state,
    k0r_to_wavelengths,
    propagate,
    rk4_propagate,
    wavelengths_to_k0r,
)
from .sweep import (
    CriticalDistanceResult,
    NotUnimodal,
    SweepPlan,
    evaluate_point,
    find_critical_distance,
    run_sweep,
)

__version__ = "0.1.0"
