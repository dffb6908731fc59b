import numpy as np
import pytest

from qfpsim import (DensityMatrix, DimensionError, coherent_state, fock_state,
                    normalize_density, pure_state_fidelity, random_state,
                    thermal_state, trace_distance)
from qfpsim.fock import build_ladder


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        mat = np.array([[0.5, 0.1], [0.2, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(mat)

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.eye(4, dtype=complex))

    def test_rejects_negative(self):
        mat = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError, match="negative"):
            DensityMatrix(mat)

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            DensityMatrix(np.zeros((2, 3)))

    def test_properties(self):
        rho = fock_state(0, 5)
        assert rho.dim == 5
        assert rho.purity == pytest.approx(1.0)
        assert rho.min_eigenvalue == pytest.approx(0.0, abs=1e-14)
        assert rho.top_weight() == pytest.approx(0.0, abs=1e-14)

    def test_normalize_density_fixes_sign_and_trace(self):
        rho = normalize_density(-3.0 * np.eye(4))
        assert np.allclose(rho.matrix, np.eye(4) / 4)


class TestStateLibrary:
    def test_fock_tag_and_support(self):
        rho = fock_state(3, 8)
        assert rho.tag == "fock:3"
        assert rho.matrix[3, 3] == 1.0

    def test_fock_out_of_range(self):
        with pytest.raises(DimensionError):
            fock_state(8, 8)

    def test_coherent_moments(self):
        # ideal coherent state: <N> = |alpha|^2, <a> = alpha
        alpha = 0.8 + 0.3j
        dim = 30
        rho = coherent_state(alpha, dim)
        a, a_dag = build_ladder(dim)
        assert np.trace(rho.matrix @ (a_dag @ a)) == pytest.approx(abs(alpha) ** 2, abs=1e-10)
        assert np.trace(rho.matrix @ a) == pytest.approx(alpha, abs=1e-10)
        assert rho.purity == pytest.approx(1.0, abs=1e-12)

    def test_thermal_occupation_geometric(self):
        beta = 1.0
        rho = thermal_state(beta, 40)
        diag = np.real(np.diag(rho.matrix))
        # successive ratios e^{-beta} and <N> = 1/(e^beta - 1)
        assert np.allclose(diag[1:] / diag[:-1], np.exp(-beta), atol=1e-12)
        mean_n = float(np.arange(40) @ diag)
        assert mean_n == pytest.approx(1.0 / (np.e - 1.0), abs=1e-12)

    def test_random_state_valid(self):
        rng = np.random.default_rng(42)
        rho = random_state(12, rng)
        assert rho.min_eigenvalue >= 0
        assert np.trace(rho.matrix) == pytest.approx(1.0)
        assert rho.tag == "random"


class TestTraceDistance:
    def test_identical(self):
        rho = thermal_state(1.0, 10)
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal_pure(self):
        assert trace_distance(fock_state(0, 4), fock_state(1, 4)) == pytest.approx(1.0)

    def test_half_mixture(self):
        # eigenvalues of |0><0| - (|0><0|+|1><1|)/2 are +1/2 and -1/2
        mixed = normalize_density(np.diag([0.5, 0.5, 0.0, 0.0]))
        assert trace_distance(fock_state(0, 4), mixed) == pytest.approx(0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            trace_distance(fock_state(0, 4), fock_state(0, 5))


class TestFidelity:
    def test_pure_self_fidelity(self):
        psi = np.zeros(6)
        psi[2] = 1.0
        assert pure_state_fidelity(fock_state(2, 6), psi) == pytest.approx(1.0)

    def test_orthogonal(self):
        psi = np.zeros(6)
        psi[0] = 1.0
        assert pure_state_fidelity(fock_state(2, 6), psi) == pytest.approx(0.0)

    def test_mixture(self):
        mixed = normalize_density(np.diag([0.25, 0.75]))
        psi = np.array([1.0, 0.0])
        assert pure_state_fidelity(mixed, psi) == pytest.approx(0.25)
