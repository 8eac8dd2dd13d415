"""
Пропагатор уравнения Линдблада для кусочно-постоянных управлений

На каждом управляющем шаге лиувиллиан постоянен, поэтому эволюция задаётся
точной экспонентой exp(𝓛 h) (scipy.linalg.expm, scaling-and-squaring),
применённой на `substeps` внутренних подшагах длины h = dt / substeps.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from ..config import PROPAGATOR_SUBSTEPS, TRACE_TOLERANCE
from .dissipator import Dissipator

logger = logging.getLogger(__name__)

# Допуск на антиэрмитову часть до симметризации (поэлементно)
HERMITICITY_TOLERANCE = 1e-10


class NumericalAccuracyError(RuntimeError):
    """
    Интегратор не уложился в допуск по следу или эрмитовости
    """

    def __init__(self, message: str, context: Optional[str] = None, defect: float = float('nan')):
        self.context = context
        self.defect = defect
        full = f"{message} (контекст: {context})" if context else message
        super().__init__(full)


@dataclass
class StepResult:
    """
    Результат одного управляющего шага для пачки матриц плотности

    rhos: (n, d, d) матрицы в конце шага
    populations: (n, substeps + 1, d) диагонали на сетке подшагов, включая начало шага
    substep: длина подшага, мкс
    """
    rhos: np.ndarray
    populations: np.ndarray
    substep: float


def liouvillian(hamiltonian: np.ndarray, dissipator: Dissipator) -> np.ndarray:
    """
    Лиувиллиан 𝓛 = -i[H, ·] + 𝓛_D в построчной векторизации
    """
    d = hamiltonian.shape[0]
    if dissipator.dim != d:
        raise ValueError(f"Размерность диссипатора {dissipator.dim} не совпадает с гамильтонианом {d}")
    identity = np.eye(d)
    coherent = -1j * (np.kron(hamiltonian, identity) - np.kron(identity, hamiltonian.T))
    return coherent + dissipator.superoperator


def step_propagator(
    hamiltonian: np.ndarray,
    dissipator: Dissipator,
    dt: float,
    substeps: int = PROPAGATOR_SUBSTEPS,
) -> np.ndarray:
    """
    Матрица перехода за один подшаг dt / substeps (в лиувиллевом пространстве)
    """
    if not dt > 0:
        raise ValueError(f"Шаг dt должен быть положительным, получено {dt}")
    if substeps < 1:
        raise ValueError(f"Число подшагов должно быть >= 1, получено {substeps}")
    return expm(liouvillian(hamiltonian, dissipator) * (dt / substeps))


def propagate_many(
    rhos: np.ndarray,
    hamiltonian: np.ndarray,
    dissipator: Dissipator,
    dt: float,
    substeps: int = PROPAGATOR_SUBSTEPS,
    context: Optional[str] = None,
) -> StepResult:
    """
    Эволюция нескольких матриц плотности с общим гамильтонианом за один шаг

    Args:
        rhos: (n, d, d) начальные матрицы
        hamiltonian: постоянный на шаге гамильтониан (d, d)
        dissipator: диссипатор той же размерности
        dt: длительность шага, мкс
        substeps: число внутренних подшагов
        context: описание шага для сообщений об ошибках

    Returns:
        StepResult с конечными матрицами и населённостями на подшагах
    """
    rhos = np.asarray(rhos, dtype=complex)
    n, d, _ = rhos.shape
    propagator = step_propagator(hamiltonian, dissipator, dt, substeps)

    # Что: векторы-строки vec(ρ); v_{k+1} = P v_k  =>  V_{k+1} = V_k P^T
    vectors = rhos.reshape(n, d * d)
    transposed = propagator.T
    diagonal = np.arange(d) * (d + 1)

    populations = np.empty((n, substeps + 1, d))
    populations[:, 0, :] = vectors[:, diagonal].real
    for k in range(1, substeps + 1):
        vectors = vectors @ transposed
        populations[:, k, :] = vectors[:, diagonal].real

    out = vectors.reshape(n, d, d)
    if not np.all(np.isfinite(out)):
        raise NumericalAccuracyError("Нечисловые значения в матрице плотности", context)

    # Что: след сохраняется точно (диссипатор сохраняет след)
    trace_before = np.trace(rhos, axis1=1, axis2=2)
    trace_after = np.trace(out, axis1=1, axis2=2)
    trace_defect = float(np.max(np.abs(trace_after - trace_before)))
    if trace_defect > TRACE_TOLERANCE:
        raise NumericalAccuracyError(
            f"Нарушено сохранение следа: {trace_defect:.3e}", context, trace_defect
        )

    herm_defect = float(np.max(np.abs(out - np.conj(np.swapaxes(out, 1, 2)))))
    if herm_defect > HERMITICITY_TOLERANCE:
        raise NumericalAccuracyError(
            f"Нарушена эрмитовость: {herm_defect:.3e}", context, herm_defect
        )
    out = 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))

    return StepResult(rhos=out, populations=populations, substep=dt / substeps)


def propagate_step(
    rho: np.ndarray,
    hamiltonian: np.ndarray,
    dissipator: Dissipator,
    dt: float,
    substeps: int = PROPAGATOR_SUBSTEPS,
    context: Optional[str] = None,
) -> np.ndarray:
    """
    Эволюция ρ̇ = -i[H, ρ] + 𝓛[ρ] на интервале dt при постоянном H

    Returns:
        Матрица плотности в конце шага
    """
    result = propagate_many(rho[np.newaxis], hamiltonian, dissipator, dt, substeps, context)
    return result.rhos[0]
