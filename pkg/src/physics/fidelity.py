"""
Точность состояний и проверка инвариантов матрицы плотности
"""
import logging
from typing import Dict, Sequence, Union

import numpy as np
from scipy.linalg import sqrtm

from .hamiltonian import SINGLE_DIM, TWO_ATOM_DIM, two_atom_index

logger = logging.getLogger(__name__)

# Вычислительные подпространства: {|0>,|1>} для атома-мишени и {|00>,|01>,|10>,|11>} для пары
TARGET_COMP_INDICES = (0, 1)
TWO_ATOM_COMP_INDICES = tuple(two_atom_index(c, t) for c in (0, 1) for t in (0, 1))


def computational_indices(dim: int) -> Sequence[int]:
    if dim == SINGLE_DIM:
        return TARGET_COMP_INDICES
    if dim == TWO_ATOM_DIM:
        return TWO_ATOM_COMP_INDICES
    raise ValueError(f"Неподдерживаемая размерность матрицы плотности: {dim}")


def project_computational(rho: np.ndarray, comp_indices: Sequence[int]) -> np.ndarray:
    """
    Проекция на вычислительное подпространство без перенормировки
    """
    idx = np.asarray(comp_indices)
    return rho[np.ix_(idx, idx)]


def uhlmann_fidelity(sigma: np.ndarray, rho: np.ndarray) -> float:
    """
    F(σ, ρ) = (Tr sqrt(sqrt(σ) ρ sqrt(σ)))²
    """
    sqrt_sigma = sqrtm(sigma)
    inner = sqrtm(sqrt_sigma @ rho @ sqrt_sigma)
    return float(np.real(np.trace(inner)) ** 2)


def state_fidelity(
    rho: np.ndarray,
    ideal: np.ndarray,
    comp_indices: Union[Sequence[int], None] = None,
) -> float:
    """
    Точность эволюционировавшего состояния относительно идеального выхода

    Args:
        rho: матрица плотности канала (4x4 или 16x16)
        ideal: идеальное состояние в вычислительном подпространстве;
            вектор (чистое состояние) или матрица плотности
        comp_indices: индексы вычислительного подпространства
            (по умолчанию определяются по размерности rho)

    Returns:
        Точность Ульмана в [0, 1]; для чистого идеала это <ψ|ρ_com|ψ>
    """
    rho = np.asarray(rho, dtype=complex)
    if comp_indices is None:
        comp_indices = computational_indices(rho.shape[0])
    rho_com = project_computational(rho, comp_indices)
    ideal = np.asarray(ideal, dtype=complex)

    if ideal.shape[0] != rho_com.shape[0]:
        raise ValueError(
            f"Размерность идеального состояния {ideal.shape[0]} не совпадает "
            f"с вычислительным подпространством {rho_com.shape[0]}"
        )

    if ideal.ndim == 1:
        value = float(np.real(ideal.conj() @ rho_com @ ideal))
    else:
        value = uhlmann_fidelity(ideal, rho_com)
    return float(np.clip(value, 0.0, 1.0))


def check_density_matrix(
    rho: np.ndarray,
    hermiticity_tol: float = 1e-10,
    trace_tol: float = 1e-9,
    eigenvalue_tol: float = 1e-8,
) -> Dict[str, float]:
    """
    Проверка инвариантов матрицы плотности

    Returns:
        Словарь с измеренными дефектами

    Raises:
        ValueError: если хотя бы один инвариант нарушен
    """
    rho = np.asarray(rho, dtype=complex)
    herm_defect = float(np.max(np.abs(rho - rho.conj().T)))
    trace = np.trace(rho)
    min_eigenvalue = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    defects = {
        'hermiticity': herm_defect,
        'trace_real': float(trace.real),
        'trace_imag': float(abs(trace.imag)),
        'min_eigenvalue': min_eigenvalue,
    }

    problems = []
    if herm_defect > hermiticity_tol:
        problems.append(f"эрмитовость {herm_defect:.3e}")
    if defects['trace_imag'] > trace_tol or trace.real > 1.0 + trace_tol or trace.real < -trace_tol:
        problems.append(f"след {trace:.12g}")
    if min_eigenvalue < -eigenvalue_tol:
        problems.append(f"минимальное собственное значение {min_eigenvalue:.3e}")
    if problems:
        raise ValueError("Нарушены инварианты матрицы плотности: " + ", ".join(problems))
    return defects
