"""
Тесты точности состояний и проверки матриц плотности
"""
import numpy as np
import pytest

from ..fidelity import (
    TWO_ATOM_COMP_INDICES,
    check_density_matrix,
    computational_indices,
    state_fidelity,
)
from ..hamiltonian import two_atom_index


class TestStateFidelity:

    def test_perfect_overlap(self):
        rho = np.zeros((16, 16), dtype=complex)
        rho[two_atom_index(1, 1), two_atom_index(1, 1)] = 1.0
        ideal = np.array([0, 0, 0, 1], dtype=complex)

        assert state_fidelity(rho, ideal) == pytest.approx(1.0)

    def test_maximally_mixed_subspace(self):
        """
        Тест: равномерная смесь по вычислительному подпространству даёт 1/4
        """
        rho = np.zeros((16, 16), dtype=complex)
        for idx in TWO_ATOM_COMP_INDICES:
            rho[idx, idx] = 0.25
        for k in range(4):
            ideal = np.zeros(4, dtype=complex)
            ideal[k] = 1.0
            assert state_fidelity(rho, ideal) == pytest.approx(0.25)

    def test_leaked_population_not_renormalized(self):
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 0.9
        rho[3, 3] = 0.1

        assert state_fidelity(rho, np.array([1, 0])) == pytest.approx(0.9)

    def test_uhlmann_matches_pure_case(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        psi = np.array([1, 0], dtype=complex)

        pure = state_fidelity(rho, psi)
        mixed = state_fidelity(rho, np.outer(psi, psi.conj()))
        assert mixed == pytest.approx(pure, abs=1e-7)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            state_fidelity(np.eye(4) / 4, np.array([1, 0, 0, 0]))

    def test_unsupported_dimension(self):
        with pytest.raises(ValueError):
            computational_indices(9)

    def test_computational_indices(self):
        assert TWO_ATOM_COMP_INDICES == (0, 1, 4, 5)
        assert tuple(computational_indices(4)) == (0, 1)


class TestCheckDensityMatrix:

    def test_valid_state(self):
        defects = check_density_matrix(np.eye(4) / 4)
        assert defects['trace_real'] == pytest.approx(1.0)
        assert defects['hermiticity'] == 0.0

    def test_non_hermitian_rejected(self):
        rho = np.eye(4, dtype=complex) / 4
        rho[0, 1] = 0.1
        with pytest.raises(ValueError, match="эрмитовость"):
            check_density_matrix(rho)

    def test_negative_eigenvalue_rejected(self):
        rho = np.diag([1.1, -0.1, 0.0, 0.0]).astype(complex)
        with pytest.raises(ValueError, match="собственное"):
            check_density_matrix(rho)
