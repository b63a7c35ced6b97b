"""Public face of the cycle: strokes, phase optimisation and closed forms."""

from .closed_form import (
    SingleSpinAnalytics,
    TwoSpinAnalytics,
    single_spin_analytics,
    single_spin_report,
    single_spin_unitary,
    two_spin_analytics,
    two_spin_ergotropy,
    two_spin_unitary,
    x_state,
)
from .cycle import (
    CycleReport,
    ErgotropyResult,
    check_report,
    disconnect_energy,
    efficiency,
    ergotropy_spectral,
    extraction_unitary,
    phase_coupling,
    phase_vector,
    reconnect_energy,
    run_cycle,
)
from .phases import PhaseCoupling, PhaseOptimum, grid_minimum, minimize_reconnect, minimize_reconnect_detailed

__all__ = [
    "CycleReport",
    "ErgotropyResult",
    "PhaseCoupling",
    "PhaseOptimum",
    "SingleSpinAnalytics",
    "TwoSpinAnalytics",
    "check_report",
    "disconnect_energy",
    "efficiency",
    "ergotropy_spectral",
    "extraction_unitary",
    "grid_minimum",
    "minimize_reconnect",
    "minimize_reconnect_detailed",
    "phase_coupling",
    "phase_vector",
    "reconnect_energy",
    "run_cycle",
    "single_spin_analytics",
    "single_spin_report",
    "single_spin_unitary",
    "two_spin_analytics",
    "two_spin_ergotropy",
    "two_spin_unitary",
    "x_state",
]
