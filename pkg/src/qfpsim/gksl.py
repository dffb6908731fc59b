"""GKSL (Lindblad) form of the quantum Fokker-Planck generator.

The quadratic model is fixed by a confinement frequency omega, friction
gamma, and diffusion constants d_pp, d_qq, d_pq subject to the Lindblad
condition

    delta = d_pp*d_qq - d_pq^2 - gamma^2/4 >= 0.

The generator acts on density matrices as

    L*(rho) = -i[H, rho] + sum_l ( L_l rho L_l† - 1/2 {L_l† L_l, rho} )

with the adjusted Hamiltonian H = (p^2 + omega^2 q^2 + gamma(pq+qp))/2 + V(q)
and Lindblad operators

    L_1 = ((-2 d_pq + i gamma)/sqrt(2 d_pp)) p + sqrt(2 d_pp) q,
    L_2 = (2 sqrt(delta)/sqrt(2 d_pp)) p            (dropped when delta = 0).

Everything here follows the "truncate-then-build" rule: H and the L_l are
truncated first and the generator is assembled from the truncated matrices,
so the finite-n generator is an exact GKSL generator (completely positive,
exactly trace-annihilating), at the cost of differing from the truncated
infinite generator near the truncation edge.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .fock import PotentialSpec, build_canonical, build_potential

CLASSIFICATION_TOL = 1e-12
SUPEROP_MAX_DIM = 128


class Classification(enum.Enum):
    STRICT_LINDBLAD = "StrictLindblad"
    LIMITING_CASE = "LimitingCase"
    INVALID = "Invalid"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class QfpParams:
    """Physical parameters of the quantum Fokker-Planck model."""

    omega: float
    gamma: float
    d_pp: float
    d_qq: float
    d_pq: float = 0.0
    potential: PotentialSpec = field(default_factory=PotentialSpec.none)

    def __post_init__(self):
        for name in ("omega", "gamma", "d_pp", "d_qq", "d_pq"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.omega <= 0:
            raise ParameterError("omega must be positive")
        if self.gamma < 0:
            raise ParameterError("gamma must be nonnegative")
        if self.d_pp <= 0:
            # delta >= 0 with d_pp = 0 would force gamma = d_pq = 0; the
            # Lindblad operators divide by sqrt(2 d_pp) anyway.
            raise ParameterError("d_pp must be strictly positive")
        if self.d_qq < 0:
            raise ParameterError("d_qq must be nonnegative")

    def delta(self) -> float:
        """Lindblad-condition discriminant d_pp*d_qq - d_pq^2 - gamma^2/4."""
        return self.d_pp * self.d_qq - self.d_pq**2 - self.gamma**2 / 4.0

    def classification(self) -> Classification:
        d = self.delta()
        if d > CLASSIFICATION_TOL:
            return Classification.STRICT_LINDBLAD
        if d >= -CLASSIFICATION_TOL:
            return Classification.LIMITING_CASE
        return Classification.INVALID

    def is_admissible(self) -> bool:
        return self.classification() is not Classification.INVALID

    def require_admissible(self):
        if not self.is_admissible():
            raise ParameterError(
                f"Lindblad condition violated: delta = {self.delta():.6g} < 0"
            )

    def to_dict(self) -> dict:
        pot = {"kind": self.potential.kind}
        if self.potential.kind != "none":
            pot["lam"] = self.potential.lam
        if self.potential.kind == "cosine":
            pot["k"] = self.potential.k
        if self.potential.kind == "power":
            pot["beta"] = self.potential.beta
        return {
            "omega": self.omega,
            "gamma": self.gamma,
            "d_pp": self.d_pp,
            "d_qq": self.d_qq,
            "d_pq": self.d_pq,
            "potential": pot,
        }


def validate_params(params: QfpParams):
    """Classify the parameter set; returns (classification, delta)."""
    return params.classification(), params.delta()


def build_hamiltonian(params: QfpParams, n: int):
    """Adjusted Hamiltonian H = (p^2 + omega^2 q^2 + gamma(pq+qp))/2 + V(q)."""
    params.require_admissible()
    q, p, _ = build_canonical(n)
    h = 0.5 * (p @ p + params.omega**2 * (q @ q) + params.gamma * (p @ q + q @ p))
    if params.potential.kind != "none":
        h = h + build_potential(params.potential, n)
    return 0.5 * (h + h.conj().T)


def build_lindblad_ops(params: QfpParams, n: int):
    """Lindblad operators [L1] or [L1, L2] depending on the classification.

    In the limiting case (delta = 0) L2 vanishes identically and is dropped
    rather than kept as a zero matrix.
    """
    cls = params.classification()
    if cls is Classification.INVALID:
        raise ParameterError("refusing to build Lindblad operators: delta < 0")
    q, p, _ = build_canonical(n)
    root = np.sqrt(2.0 * params.d_pp)
    l1 = ((-2.0 * params.d_pq + 1j * params.gamma) / root) * p + root * q
    ops = [l1]
    if cls is Classification.STRICT_LINDBLAD:
        ops.append((2.0 * np.sqrt(params.delta()) / root) * p)
    return ops


def build_semigroup_generator(params: QfpParams, n: int):
    """G = -1/2 sum_l L_l† L_l - iH, generator of the one-sided contraction
    semigroup; also the efficient kernel for applying the full generator via
    L*(rho) = G rho + rho G† + sum_l L_l rho L_l†."""
    h = build_hamiltonian(params, n)
    ops = build_lindblad_ops(params, n)
    g = -1j * h
    for l in ops:
        g -= 0.5 * (l.conj().T @ l)
    return g


def _as_matrix(rho):
    mat = rho.matrix if hasattr(rho, "matrix") else np.asarray(rho)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
    return mat.astype(complex, copy=False)


def apply_generator(params: QfpParams, rho):
    """L*(rho) = -i[H,rho] + sum_l (L_l rho L_l† - 1/2 {L_l†L_l, rho}).

    Hermiticity-preserving and exactly trace-annihilating (up to roundoff)
    for every admissible parameter set.
    """
    mat = _as_matrix(rho)
    n = mat.shape[0]
    g = build_semigroup_generator(params, n)
    out = g @ mat + mat @ g.conj().T
    for l in build_lindblad_ops(params, n):
        out += l @ mat @ l.conj().T
    return out


def apply_dual(params: QfpParams, a):
    """Dual (Heisenberg) generator L(A) = i[H,A] + sum_l (L_l†AL_l - 1/2{L_l†L_l,A}).

    Exact finite-dimensional adjoint of apply_generator with respect to the
    Hilbert-Schmidt pairing: tr(A L*(rho)) = tr(L(A) rho) up to roundoff.
    The commutator form with drift rows L(p^2), L(q^2), L(pq+qp) is then
    recovered on interior indices (truncation defects live at the edge).
    """
    mat = _as_matrix(a)
    n = mat.shape[0]
    h = build_hamiltonian(params, n)
    out = 1j * (h @ mat - mat @ h)
    for l in build_lindblad_ops(params, n):
        ld = l.conj().T
        ldl = ld @ l
        out += ld @ mat @ l - 0.5 * (ldl @ mat + mat @ ldl)
    return out


def vec(mat):
    """Column-major (Fortran) vectorization; the fixed package convention."""
    return np.asarray(mat, dtype=complex).reshape(-1, order="F")


def unvec(v, n: int):
    """Inverse of vec."""
    return np.asarray(v, dtype=complex).reshape((n, n), order="F")


@dataclass(frozen=True)
class Superoperator:
    """Dense matrix of the generator on column-major vectorized matrices."""

    dim: int
    matrix: np.ndarray
    params: QfpParams | None = None

    def apply(self, rho):
        mat = _as_matrix(rho)
        if mat.shape[0] != self.dim:
            raise DimensionError(
                f"state dim {mat.shape[0]} != superoperator dim {self.dim}"
            )
        return unvec(self.matrix @ vec(mat), self.dim)


def build_superoperator(params: QfpParams, n: int) -> Superoperator:
    """Matrix M with M vec(rho) = vec(L*(rho)).

    Uses vec(AXB) = (B^T kron A) vec(X) for the column-major convention.
    Trace preservation shows up as vec(1)† M = 0.
    """
    params.require_admissible()
    if n > SUPEROP_MAX_DIM:
        raise DimensionError(
            f"superoperator guard: n = {n} > {SUPEROP_MAX_DIM} (n^2 x n^2 dense matrix)"
        )
    g = build_semigroup_generator(params, n)
    eye = np.eye(n, dtype=complex)
    # in-place accumulation keeps peak memory at two n^2 x n^2 arrays
    m = np.kron(eye, g)
    m += np.kron(g.conj(), eye)
    for l in build_lindblad_ops(params, n):
        m += np.kron(l.conj(), l)
    return Superoperator(dim=n, matrix=m, params=params)
