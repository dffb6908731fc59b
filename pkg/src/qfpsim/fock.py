"""Canonical operators and sub-quadratic potentials in a truncated Fock basis.

All operators are dense complex matrices on the first ``n`` number states
(hbar = mass = 1).  Truncation spoils operator identities only near the
highest retained levels; accuracy claims elsewhere in the package are
therefore "interior" claims, checked on states with negligible weight on
the top quarter of levels.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PotentialError

HERMITICITY_TOL = 1e-12

_POTENTIAL_KINDS = ("none", "cosine", "soft_linear", "power")


def _check_dim(n):
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DimensionError(f"Fock dimension must be an integer >= 2, got {n!r}")


def build_ladder(n: int):
    """Annihilation/creation pair on n Fock levels.

    a maps e_{j+1} -> sqrt(j+1) e_j (entry (j, j+1) = sqrt(j+1)) and kills
    e_0; a_dag is its (real) transpose.
    """
    _check_dim(n)
    a = np.diag(np.sqrt(np.arange(1.0, n)), 1)
    return a, a.T.copy()


def build_canonical(n: int):
    """Position q = (a+a†)/√2, momentum p = i(a†−a)/√2, number N = a†a.

    The sign convention makes p = -i d/dx in the position representation,
    so [q, p] = i holds exactly away from the truncation corner.
    """
    a, a_dag = build_ladder(n)
    q = ((a + a_dag) / np.sqrt(2.0)).astype(complex)
    p = 1j * (a_dag - a) / np.sqrt(2.0)
    num = (a_dag @ a).astype(complex)
    return q, p, num


def is_hermitian(mat, tol=HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(mat - mat.conj().T)) <= tol)


@dataclass(frozen=True)
class PotentialSpec:
    """Sub-quadratic perturbation potential V with a known derivative bound.

    Only closed-form families are accepted so that the growth bound and
    exponent needed by the Lyapunov certificates, |V'(x)| <= g (1+x^2)^(e/2)
    with e in [0,1), are available exactly:

    * ``none``                     V = 0
    * ``cosine(lam, k)``           V = lam*cos(k x)
    * ``soft_linear(lam)``         V = lam*sqrt(1+x^2)
    * ``power(lam, beta)``         V = lam*(1+x^2)^(beta/2), beta < 2
    """

    kind: str = "none"
    lam: float = 0.0
    k: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in _POTENTIAL_KINDS:
            raise PotentialError(f"unknown potential kind {self.kind!r}")
        if self.kind != "none" and not math.isfinite(self.lam):
            raise PotentialError("potential amplitude must be finite")
        if self.kind == "cosine" and not math.isfinite(self.k):
            raise PotentialError("cosine wavenumber must be finite")
        if self.kind == "power" and not (self.beta < 2.0 and math.isfinite(self.beta)):
            raise PotentialError("power potential requires beta < 2")

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def cosine(cls, lam, k=1.0):
        return cls("cosine", lam=lam, k=k)

    @classmethod
    def soft_linear(cls, lam):
        return cls("soft_linear", lam=lam)

    @classmethod
    def power(cls, lam, beta):
        return cls("power", lam=lam, beta=beta)

    @property
    def growth_bound(self) -> float:
        """g such that |V'(x)| <= g (1+x^2)^(growth_exponent/2)."""
        if self.kind == "none":
            return 0.0
        if self.kind == "cosine":
            return abs(self.lam * self.k)
        if self.kind == "soft_linear":
            return abs(self.lam)
        return abs(self.lam * self.beta)

    @property
    def growth_exponent(self) -> float:
        if self.kind == "power":
            return max(self.beta - 1.0, 0.0)
        return 0.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "none":
            return np.zeros_like(x)
        if self.kind == "cosine":
            return self.lam * np.cos(self.k * x)
        if self.kind == "soft_linear":
            return self.lam * np.sqrt(1.0 + x * x)
        return self.lam * (1.0 + x * x) ** (self.beta / 2.0)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "none":
            return np.zeros_like(x)
        if self.kind == "cosine":
            return -self.lam * self.k * np.sin(self.k * x)
        if self.kind == "soft_linear":
            return self.lam * x / np.sqrt(1.0 + x * x)
        return self.lam * self.beta * x * (1.0 + x * x) ** (self.beta / 2.0 - 1.0)


def position_function_matrix(fn, n: int):
    """Matrix of f(q) by spectral calculus on the truncated q.

    Diagonalizing q = U D U† and applying f to D keeps the result exactly
    Hermitian and commuting with q's truncated eigenbasis.  The eigenvalues
    of the truncated q are the n Gauss-Hermite nodes, so the (i, j) entry
    is an n-point Gauss-Hermite quadrature of the true matrix element.
    """
    _check_dim(n)
    q, _, _ = build_canonical(n)
    nodes, vecs = np.linalg.eigh(q)
    mat = (vecs * fn(nodes)) @ vecs.conj().T
    return 0.5 * (mat + mat.conj().T)


def build_potential(spec: PotentialSpec, n: int):
    """V(q) on n Fock levels (Hermitian)."""
    if not isinstance(spec, PotentialSpec):
        raise PotentialError(f"expected PotentialSpec, got {type(spec).__name__}")
    _check_dim(n)
    if spec.kind == "none":
        return np.zeros((n, n), dtype=complex)
    return position_function_matrix(spec.value, n)


def build_potential_derivative(spec: PotentialSpec, n: int):
    """V'(q) on n Fock levels, for the Lyapunov drift terms."""
    if not isinstance(spec, PotentialSpec):
        raise PotentialError(f"expected PotentialSpec, got {type(spec).__name__}")
    _check_dim(n)
    if spec.kind == "none":
        return np.zeros((n, n), dtype=complex)
    return position_function_matrix(spec.derivative, n)
