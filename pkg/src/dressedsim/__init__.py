"""Simulation and optimization toolkit for continuously driven qubits.

Models a qubit dressed by a resonant drive plus an optional second
modulation tone, under quasi-static detuning and amplitude noise.
Provides exact ensemble propagation, Floquet perturbation theory for
coherence-time prediction, one- and two-qubit gate benchmarks, and
AC-sensing / clock figure-of-merit scans.
"""

from .control import (CIRCULAR, ControlScheme, DOUBLE_DRIVE, NoiseModel,
                      NoiseRealization, PHASE_MODULATED, SINGLE_DRIVE,
                      TimeDependentHamiltonian, VARIANTS, ZERO_NOISE,
                      doubly_rotating_fourier, effective_mod_freq,
                      first_frame_bloch, lab_waveform, omega_vector,
                      optimal_detuning, rotating_frame_hamiltonian,
                      second_frame_bloch)
from .ensemble import (CoherenceCurve, THRESHOLD, extract_t2,
                       memory_fidelity, sobol_gaussian_pairs, t2_scan)
from .floquet import (FloquetConfig, FloquetModel, GapStatistics,
                      OptimumResult, build_floquet_hamiltonian, exact_gap,
                      gap_variance, global_optimum, perturbed_gap,
                      perturbed_gap_for, pt_energy, t2_app)
from .gates import (GateResult, IonGateConfig, TruncationError,
                    average_gate_fidelity, bell_fidelity,
                    fully_entangled_fraction, gate1q_infidelity,
                    gate2q_scan, gate2q_simulate)
from .propagation import (Propagator, monodromy, polar_project,
                          propagate_bloch, propagate_direct,
                          rotation_from_su2, stroboscopic, su2_from_rotvec)
from .sensing import (ClockConstraint, ClockResult, FitError, GainResult,
                      SensitivityParams, SensingScanResult, clock_comparison,
                      clock_scheme, closed_form_alpha,
                      effective_coupling_alpha, hh_reference,
                      matched_omega2, matched_scheme, matching_condition,
                      predicted_clock_omega1, sensing_scan, sensitivity_eta)

__version__ = "0.1.0"

__all__ = [
    "CIRCULAR", "ClockConstraint", "ClockResult", "CoherenceCurve",
    "ControlScheme", "DOUBLE_DRIVE", "FitError", "FloquetConfig",
    "FloquetModel", "GainResult", "GapStatistics", "GateResult",
    "IonGateConfig", "NoiseModel", "NoiseRealization", "OptimumResult",
    "PHASE_MODULATED", "Propagator", "SINGLE_DRIVE", "SensingScanResult",
    "SensitivityParams", "THRESHOLD", "TimeDependentHamiltonian",
    "TruncationError", "VARIANTS", "ZERO_NOISE", "average_gate_fidelity",
    "bell_fidelity", "build_floquet_hamiltonian", "clock_comparison",
    "clock_scheme", "closed_form_alpha", "doubly_rotating_fourier",
    "effective_coupling_alpha", "effective_mod_freq", "exact_gap",
    "extract_t2", "first_frame_bloch", "fully_entangled_fraction",
    "gap_variance", "gate1q_infidelity", "gate2q_scan", "gate2q_simulate",
    "global_optimum", "hh_reference", "lab_waveform", "matched_omega2",
    "matched_scheme", "matching_condition", "memory_fidelity", "monodromy",
    "omega_vector", "optimal_detuning", "perturbed_gap", "perturbed_gap_for",
    "polar_project", "predicted_clock_omega1", "propagate_bloch",
    "propagate_direct", "pt_energy", "rotating_frame_hamiltonian",
    "rotation_from_su2", "second_frame_bloch", "sensing_scan",
    "sensitivity_eta", "sobol_gaussian_pairs", "stroboscopic",
    "su2_from_rotvec", "t2_app", "t2_scan",
]
