"""
Физическое ядро: гамильтонианы, диссипатор, пропагатор Линдблада, точности
"""
from .dissipator import Dissipator, build_dissipator
from .fidelity import check_density_matrix, state_fidelity
from .hamiltonian import (
    AtomRole,
    adiabaticity_margin,
    blockaded_target_hamiltonian,
    build_single_atom_hamiltonian,
    build_two_atom_hamiltonian,
    dark_states,
)
from .params import PhysicalParams, default_params
from .propagator import NumericalAccuracyError, StepResult, propagate_many, propagate_step
from .schedule import PulseSchedule, ScheduleFormatError, wrap_phase

__all__ = [
    'AtomRole',
    'Dissipator',
    'NumericalAccuracyError',
    'PhysicalParams',
    'PulseSchedule',
    'ScheduleFormatError',
    'StepResult',
    'adiabaticity_margin',
    'blockaded_target_hamiltonian',
    'build_dissipator',
    'build_single_atom_hamiltonian',
    'build_two_atom_hamiltonian',
    'check_density_matrix',
    'dark_states',
    'default_params',
    'propagate_many',
    'propagate_step',
    'state_fidelity',
    'wrap_phase',
]
