"""
Диссипатор Линдблада: спонтанный распад |e> и |r> в состояния |0>, |1>
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import List

import numpy as np

from .hamiltonian import E, G0, G1, R, SINGLE_DIM, TWO_ATOM_DIM
from .params import PhysicalParams

logger = logging.getLogger(__name__)


@dataclass
class Dissipator:
    """
    Набор операторов скачков L_kj = sqrt(γ_k/2) |j><k|
    """
    dim: int
    jump_operators: List[np.ndarray] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)

    @cached_property
    def superoperator(self) -> np.ndarray:
        """
        Диссипативная часть лиувиллиана в построчной векторизации vec(ρ) = ρ.reshape(-1)
        """
        d = self.dim
        identity = np.eye(d)
        sup = np.zeros((d * d, d * d), dtype=complex)
        for jump in self.jump_operators:
            jdj = jump.conj().T @ jump
            sup += np.kron(jump, jump.conj())
            sup -= 0.5 * np.kron(jdj, identity)
            sup -= 0.5 * np.kron(identity, jdj.T)
        return sup

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Значение 𝓛[ρ] для одной матрицы плотности"""
        out = np.zeros_like(rho, dtype=complex)
        for jump in self.jump_operators:
            jdj = jump.conj().T @ jump
            out += jump @ rho @ jump.conj().T - 0.5 * (jdj @ rho + rho @ jdj)
        return out


def _single_atom_jumps(params: PhysicalParams) -> List[tuple]:
    """Операторы скачков одного атома в порядке (e→0, e→1, r→0, r→1)"""
    jumps = []
    for level, rate, name in ((E, params.gamma_e, 'e'), (R, params.gamma_r, 'r')):
        amplitude = np.sqrt(rate / 2.0)
        for target in (G0, G1):
            op = np.zeros((SINGLE_DIM, SINGLE_DIM), dtype=complex)
            op[target, level] = amplitude
            jumps.append((op, f"{name}->{target}"))
    return jumps


def build_dissipator(params: PhysicalParams, dim: int) -> Dissipator:
    """
    Построение диссипатора для одноатомного (4) или двухатомного (16) канала

    Args:
        params: физические параметры (γ_e, γ_r)
        dim: размерность пространства, 4 или 16

    Returns:
        Dissipator с 4 или 8 операторами скачков
    """
    single = _single_atom_jumps(params)

    if dim == SINGLE_DIM:
        return Dissipator(
            dim=dim,
            jump_operators=[op for op, _ in single],
            labels=[f"target:{label}" for _, label in single],
        )

    if dim == TWO_ATOM_DIM:
        identity = np.eye(SINGLE_DIM)
        operators, labels = [], []
        # Что: каждый оператор действует только на свой множитель тензорного произведения
        for op, label in single:
            operators.append(np.kron(op, identity))
            labels.append(f"control:{label}")
        for op, label in single:
            operators.append(np.kron(identity, op))
            labels.append(f"target:{label}")
        return Dissipator(dim=dim, jump_operators=operators, labels=labels)

    raise ValueError(f"Неподдерживаемая размерность диссипатора: {dim} (ожидается 4 или 16)")
