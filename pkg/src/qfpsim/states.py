"""Density matrices on the truncated Fock space and a small state library."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError
from .fock import build_ladder

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = 1e-10


@dataclass
class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix plus a creation tag.

    Validation happens at construction: Hermiticity to 1e-12, trace to
    1e-12, smallest eigenvalue >= -1e-10.
    """

    matrix: np.ndarray
    tag: str = "custom"
    _eigenvalues: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"density matrix must be square, got {mat.shape}")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > HERMITICITY_TOL:
            raise ValueError(f"not Hermitian: max |rho - rho†| = {herm:.3e}")
        tr = np.trace(mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr:.15g} != 1")
        self.matrix = mat
        self._eigenvalues = np.linalg.eigvalsh(mat)
        if self._eigenvalues[0] < -EIGENVALUE_TOL:
            raise ValueError(f"negative eigenvalue {self._eigenvalues[0]:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    @property
    def min_eigenvalue(self) -> float:
        return float(self._eigenvalues[0])

    def top_weight(self, fraction=0.25) -> float:
        """Population on the highest `fraction` of levels (truncation proxy)."""
        start = self.dim - max(1, int(self.dim * fraction))
        return float(np.real(np.trace(self.matrix[start:, start:])))


def normalize_density(mat, tag="custom") -> DensityMatrix:
    """Hermitize and trace-normalize, then validate."""
    mat = np.asarray(mat, dtype=complex)
    mat = 0.5 * (mat + mat.conj().T)
    tr = np.real(np.trace(mat))
    if tr < 0:
        mat, tr = -mat, -tr
    return DensityMatrix(mat / tr, tag=tag)


def fock_state(level: int, dim: int) -> DensityMatrix:
    if not 0 <= level < dim:
        raise DimensionError(f"Fock level {level} outside [0, {dim})")
    mat = np.zeros((dim, dim), dtype=complex)
    mat[level, level] = 1.0
    return DensityMatrix(mat, tag=f"fock:{level}")


def coherent_state(alpha: complex, dim: int) -> DensityMatrix:
    """Displaced vacuum via the truncated displacement exp(alpha a† - conj(alpha) a).

    The truncated displacement generator is anti-Hermitian, so the state
    stays exactly normalized; for |alpha|^2 well below dim it coincides
    with the ideal coherent state to truncation accuracy.
    """
    a, a_dag = build_ladder(dim)
    gen = alpha * a_dag.astype(complex) - np.conj(alpha) * a
    psi = expm(gen)[:, 0]
    return DensityMatrix(np.outer(psi, psi.conj()), tag=f"coherent:{alpha}")


def thermal_state(beta: float, dim: int, omega: float = 1.0) -> DensityMatrix:
    """Gibbs state exp(-beta omega (N + 1/2))/Z on the truncated levels."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    occ = np.exp(-beta * omega * np.arange(dim))
    occ /= occ.sum()
    return DensityMatrix(np.diag(occ).astype(complex), tag=f"thermal:{beta}")


def random_state(dim: int, rng=None) -> DensityMatrix:
    """B B† / tr(B B†) for a standard complex Gaussian B."""
    rng = np.random.default_rng(rng)
    b = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    mat = b @ b.conj().T
    return normalize_density(mat, tag="random")


def _matrix(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def trace_distance(rho1, rho2) -> float:
    """(1/2) sum |eigenvalues of rho1 - rho2| (Hermitian eigendecomposition)."""
    m1, m2 = _matrix(rho1), _matrix(rho2)
    if m1.shape != m2.shape:
        raise DimensionError(f"shape mismatch {m1.shape} vs {m2.shape}")
    diff = m1 - m2
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def pure_state_fidelity(rho, psi) -> float:
    """<psi|rho|psi> for a normalized pure reference vector."""
    mat = _matrix(rho)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (mat.shape[0],):
        raise DimensionError(f"vector shape {psi.shape} vs matrix {mat.shape}")
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ mat @ psi))
