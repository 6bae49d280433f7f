"""Unitary synthesis with quantum Householder reflections.

Factor U(N) matrices into standard or generalized Householder reflections,
map each reflection to sech pulses on an N-pod system and check the result by
integrating the Schrödinger equation.
"""

from .cnum import adjoint, determinant, is_unitary, l1_deviation, mat_mul, random_unitary
from .decomp import (
    GeneralizedDecomposition,
    StandardDecomposition,
    decompose_generalized,
    decompose_standard,
    parameter_count,
    reconstruct_generalized,
    reconstruct_standard,
)
from .dynamics import (
    PropagatorTrace,
    SimConfig,
    analytic_step_propagator,
    peak_ancilla_population,
    propagate_step,
    simulate_schedule,
)
from .gates import qft_fixture, qft_matrix
from .pulse import (
    PulseSchedule,
    PulseStep,
    cayley_klein_resonant,
    cayley_klein_rz,
    complex_gamma,
    factor_to_resonant_pulse,
    factor_to_rz_pulse,
    schedule_from_decomposition,
    solve_detuning,
)
from .qhr import HouseholderFactor, PhaseGate, apply_reflection, phase_gate_matrix, reflection_matrix

__version__ = "0.1.0"
