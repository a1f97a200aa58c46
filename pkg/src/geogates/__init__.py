"""Nonadiabatic noncyclic geometric gates: path engine, control synthesis, open-system simulation."""

__version__ = "0.1.0"

from .controls import (
    ControlField, DynamicalPulse, ErrorSetting, dg_control, hamiltonian_from_controls, inject_errors,
    synthesize_controls,
)
from .dynamics import LindbladModel, StepRefinementError, lindblad_channel, propagate_lindblad, propagator
from .gates import GateSpec, cphase_operator, evolution_operator_simplified, gate_distance_up_to_phase
from .metrics import SweepGrid, gate_fidelity_F1, gate_fidelity_F2, state_fidelity
from .paths import DegenerateScheduleError, PathParams, SuperpositionLabel, dynamical_phase
from .report import GateReport
from .transmon import TransmonParams, simulate_single_qubit
from .two_qubit import InfeasibleDesignError, TwoQubitParams, design_cphase, simulate_two_qubit

__all__ = [
    "ControlField",
    "DegenerateScheduleError",
    "DynamicalPulse",
    "ErrorSetting",
    "GateReport",
    "GateSpec",
    "InfeasibleDesignError",
    "LindbladModel",
    "PathParams",
    "StepRefinementError",
    "SuperpositionLabel",
    "SweepGrid",
    "TransmonParams",
    "TwoQubitParams",
    "cphase_operator",
    "design_cphase",
    "dg_control",
    "dynamical_phase",
    "evolution_operator_simplified",
    "gate_distance_up_to_phase",
    "gate_fidelity_F1",
    "gate_fidelity_F2",
    "hamiltonian_from_controls",
    "inject_errors",
    "lindblad_channel",
    "propagate_lindblad",
    "propagator",
    "simulate_single_qubit",
    "simulate_two_qubit",
    "state_fidelity",
    "synthesize_controls",
]
