"""Steady states: numerical kernel solves and the closed-form Gaussian state.

For V = 0 the steady state has the explicit position-space kernel

    rho(x, y) = (gamma*omega / (pi*sqrt(gamma*Q22)))
                * exp(-[gamma^2 omega^2 (x+y)^2 + Q (x-y)^2] / (4 gamma Q22))
                * exp(-i omega (Q12/Q22) (x^2-y^2)/2)

with Q11 = d_pp + omega^2 d_qq, Q12 = 2 omega gamma d_qq,
Q22 = Q11 + 4 gamma (d_pq + gamma d_qq), Q = Q11 Q22 - Q12^2.  That
prefactor integrates to trace pi^{-1/2}, not 1 (recorded as
projected_trace); the Fock projection is renormalized numerically.

The state is pure exactly when Q = gamma^2 omega^2, which for gamma < omega
forces delta = 0, d_pq = -gamma*d_qq and d_pp = omega^2 d_qq; the pure
kernel is then the rank-one projector onto exp(-c x^2) with
c = (sqrt(omega^2-gamma^2) + i gamma)/2.
"""

import enum
import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, svd

from .errors import ParameterError, SteadyStateError
from .gksl import CLASSIFICATION_TOL, QfpParams, Superoperator, unvec, vec
from .states import DensityMatrix, normalize_density
from .hermite import project_kernel, project_wavefunction

SVD_MAX_DIM = 48
KERNEL_SV_FACTOR = 1e-10       # singular values below this * ||M|| count as kernel
FAITHFUL_EIG_FACTOR = 1e-12    # min eig above this * max eig counts as faithful


@dataclass(frozen=True)
class GaussianSteady:
    """Closed-form steady-state kernel parameters (V = 0)."""

    q11: float
    q12: float
    q22: float
    big_q: float
    c: complex | None = None
    projected_trace: float | None = None


@dataclass
class SteadyReport:
    """Numerical steady state plus uniqueness/faithfulness diagnostics."""

    rho_ss: DensityMatrix
    kernel_dim_estimate: int
    spectral_gap: float
    sigma_min: float
    min_eigenvalue: float
    purity: float
    faithful: bool
    method: str

    def to_dict(self) -> dict:
        return {
            "kernel_dim_estimate": self.kernel_dim_estimate,
            "spectral_gap": self.spectral_gap,
            "sigma_min": self.sigma_min,
            "min_eigenvalue": self.min_eigenvalue,
            "purity": self.purity,
            "faithful": self.faithful,
            "method": self.method,
            "dim": self.rho_ss.dim,
        }

    def to_json(self, path, matrix_path=None):
        payload = self.to_dict()
        if matrix_path is not None:
            payload["matrix_dump"] = str(matrix_path)
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)


def _finalize(vec_ss, dim, kernel_dim, gap, sigma_min, method) -> SteadyReport:
    mat = unvec(vec_ss, dim)
    raw_trace = np.trace(mat)
    if abs(raw_trace) < 1e-10 * np.linalg.norm(vec_ss):
        raise SteadyStateError(
            "degenerate kernel: near-null vector has (numerically) zero trace"
        )
    rho = normalize_density(mat, tag="steady")
    evals = np.linalg.eigvalsh(rho.matrix)
    faithful = bool(evals[0] > FAITHFUL_EIG_FACTOR * evals[-1])
    return SteadyReport(
        rho_ss=rho,
        kernel_dim_estimate=kernel_dim,
        spectral_gap=float(gap),
        sigma_min=float(sigma_min),
        min_eigenvalue=float(evals[0]),
        purity=rho.purity,
        faithful=faithful,
        method=method,
    )


def _resolve_method(dim, method):
    if method == "auto":
        # dense SVD up to 48 levels (kernel-dimension diagnostic for free),
        # shifted inverse iteration alone beyond that
        return "svd" if dim <= SVD_MAX_DIM else "inverse"
    if method not in ("svd", "inverse"):
        raise ValueError(f"unknown method {method!r}")
    return method


def _refine(factor, x, steps=2):
    for _ in range(steps):
        x = lu_solve(factor, x)
        x /= np.linalg.norm(x)
    return x


def solve_steady(superop: Superoperator, method: str = "auto") -> SteadyReport:
    """Steady state from the (near-)null space of the superoperator.

    method="svd" (default for dim <= 48) reads the kernel dimension and the
    spectral gap off the singular spectrum and refines the smallest right
    singular vector by shifted inverse iteration; method="inverse" runs
    shifted inverse iteration alone (used for larger truncations, where the
    gap is then an estimate from a single deflated pass).
    """
    method = _resolve_method(superop.dim, method)
    m = superop.matrix
    shift = 1e-8 * np.linalg.norm(m, 1)
    factor = lu_factor(m + shift * np.eye(m.shape[0], dtype=complex))

    if method == "svd":
        s = svd(m, compute_uv=True)
        sigmas, vh = s[1], s[2]
        kernel_dim = int(np.sum(sigmas < KERNEL_SV_FACTOR * sigmas[0]))
        if kernel_dim == 0:
            raise SteadyStateError(
                f"no near-null singular value (min {sigmas[-1]:.3e} vs "
                f"threshold {KERNEL_SV_FACTOR * sigmas[0]:.3e}); "
                "truncation or conditioning problem"
            )
        x = _refine(factor, vh[-1].conj())
        return _finalize(x, superop.dim, kernel_dim, sigmas[-2], sigmas[-1], "svd")

    dim2 = m.shape[0]
    x = vec(np.eye(superop.dim, dtype=complex) / superop.dim)
    x /= np.linalg.norm(x)
    x = _refine(factor, x, steps=8)
    residual = np.linalg.norm(m @ x)
    if residual > 1e-8 * np.linalg.norm(m, 1):
        raise SteadyStateError(
            f"inverse iteration did not converge (residual {residual:.3e})"
        )
    # deflated pass for a spectral-gap estimate
    rng = np.random.default_rng(0)
    y = rng.standard_normal(dim2) + 1j * rng.standard_normal(dim2)
    for _ in range(8):
        y -= (x.conj() @ y) * x
        y /= np.linalg.norm(y)
        y = lu_solve(factor, y)
    y -= (x.conj() @ y) * x
    y /= np.linalg.norm(y)
    gap = np.linalg.norm(m @ y)
    return _finalize(x, superop.dim, 1, gap, residual, "inverse")


def gaussian_steady_params(params: QfpParams) -> GaussianSteady:
    """Q-parameters of the closed-form kernel (no projection)."""
    om, ga = params.omega, params.gamma
    q11 = params.d_pp + om**2 * params.d_qq
    q12 = 2.0 * om * ga * params.d_qq
    q22 = q11 + 4.0 * ga * (params.d_pq + ga * params.d_qq)
    big_q = q11 * q22 - q12**2
    c = None
    if abs(big_q - ga**2 * om**2) <= 1e-9 * max(1.0, big_q) and ga < om:
        c = 0.5 * (np.sqrt(om**2 - ga**2) + 1j * ga)
    return GaussianSteady(q11=q11, q12=q12, q22=q22, big_q=big_q, c=c)


def _kernel_fn(params, gs):
    om, ga = params.omega, params.gamma
    pref = ga * om / (np.pi * np.sqrt(ga * gs.q22))
    denom = 4.0 * ga * gs.q22
    phase = om * gs.q12 / gs.q22

    def kernel(x, y):
        quad = (ga**2 * om**2 * (x + y) ** 2 + gs.big_q * (x - y) ** 2) / denom
        return pref * np.exp(-quad) * np.exp(-0.5j * phase * (x**2 - y**2))

    return kernel


def _require_v0_positive_friction(params, what):
    if params.potential.kind != "none":
        raise ParameterError(f"{what} requires V = 0")
    if params.gamma <= 0:
        raise ParameterError(f"{what} requires gamma > 0")
    params.require_admissible()


def gaussian_reference(params: QfpParams, n: int, quad_nodes: int | None = None):
    """Fock projection of the closed-form steady-state kernel.

    Returns (GaussianSteady, DensityMatrix); the raw projected trace
    (about pi^{-1/2} with the literature prefactor) is recorded in
    GaussianSteady.projected_trace before renormalization.
    """
    _require_v0_positive_friction(params, "gaussian_reference")
    gs = gaussian_steady_params(params)
    if quad_nodes is None:
        quad_nodes = 4 * n
    mat = project_kernel(_kernel_fn(params, gs), n, quad_nodes)
    raw_trace = float(np.real(np.trace(mat)))
    rho = normalize_density(mat, tag="gaussian-reference")
    gs = GaussianSteady(
        q11=gs.q11, q12=gs.q12, q22=gs.q22, big_q=gs.big_q, c=gs.c,
        projected_trace=raw_trace,
    )
    return gs, rho


def export_kernel_csv(params: QfpParams, x_nodes, path):
    """Closed-form steady kernel rho(x, y) sampled on a grid, as CSV."""
    _require_v0_positive_friction(params, "export_kernel_csv")
    gs = gaussian_steady_params(params)
    kernel = _kernel_fn(params, gs)
    x = np.asarray(x_nodes, dtype=float)
    values = kernel(x[:, None], x[None, :])
    with open(path, "w") as fh:
        fh.write("x,y,re,im\n")
        for i, xi in enumerate(x):
            for j, yj in enumerate(x):
                fh.write(f"{xi:.16e},{yj:.16e},"
                         f"{values[i, j].real:.16e},{values[i, j].imag:.16e}\n")


def pure_gaussian_state(params: QfpParams, n: int, quad_nodes: int | None = None):
    """Rank-one projector onto exp(-c x^2), c = (sqrt(omega^2-gamma^2)+i gamma)/2.

    The pure steady state at the limiting parameter point; requires
    gamma < omega.
    """
    om, ga = params.omega, params.gamma
    if not 0 < ga < om:
        raise ParameterError("pure Gaussian state requires 0 < gamma < omega")
    c = 0.5 * (np.sqrt(om**2 - ga**2) + 1j * ga)
    if quad_nodes is None:
        quad_nodes = 4 * n
    coeff = project_wavefunction(lambda x: np.exp(-c * x * x), n, quad_nodes)
    coeff = coeff / np.linalg.norm(coeff)
    return DensityMatrix(np.outer(coeff, coeff.conj()), tag="pure-gaussian")


class PurityClass(enum.Enum):
    PURE_STEADY = "PureSteady"
    MIXED_STEADY = "MixedSteady"
    NO_PURE_POSSIBLE = "NoPurePossible"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PurityClassification:
    kind: PurityClass
    reason: str | None = None
    forced_d_qq: float | None = None


def purity_conditions(params: QfpParams, tol: float = CLASSIFICATION_TOL):
    """Classify whether the V = 0 steady state is pure.

    Pure iff gamma < omega together with delta = 0, d_pq = -gamma*d_qq and
    d_pp = omega^2*d_qq; then d_qq is forced to gamma/(2 sqrt(omega^2-gamma^2)).
    For gamma >= omega no parameter choice gives a pure steady state.
    """
    _require_v0_positive_friction(params, "purity_conditions")
    om, ga = params.omega, params.gamma
    if abs(ga - om) <= tol:
        return PurityClassification(
            PurityClass.NO_PURE_POSSIBLE,
            reason="gamma = omega: the pure-state identity becomes a quadratic "
            "in omega with no real zero (d_pp*d_qq - d_pq^2 > 0)",
        )
    if ga > om:
        return PurityClassification(
            PurityClass.NO_PURE_POSSIBLE,
            reason="gamma > omega: the super-critical decomposition of "
            "Q - gamma^2*omega^2 is strictly positive",
        )
    pure = (
        abs(params.delta()) <= tol
        and abs(params.d_pq + ga * params.d_qq) <= tol
        and abs(params.d_pp - om**2 * params.d_qq) <= tol
    )
    if pure:
        return PurityClassification(
            PurityClass.PURE_STEADY,
            forced_d_qq=ga / (2.0 * np.sqrt(om**2 - ga**2)),
        )
    return PurityClassification(PurityClass.MIXED_STEADY)


def purity_identity_check(params: QfpParams, decomposition: str = "auto") -> float:
    """Relative residual of the algebraic decomposition of Q - gamma^2*omega^2.

    decomposition="sub_critical" checks
        (1-g^2/w^2)(d_pp-d_qq w^2)^2 + (g^2/w^2)(d_pp+2 d_pq w^2/g+d_qq w^2)^2
        + 4 w^2 delta,
    "super_critical" checks
        (d_pp+2 d_pq g+d_qq w^2)^2 + 4 g^2 delta + g^2(g^2-w^2);
    both are exact identities, "auto" picks by gamma vs omega.
    """
    if params.potential.kind != "none":
        raise ParameterError("purity identity applies to V = 0")
    om, ga = params.omega, params.gamma
    if ga <= 0:
        raise ParameterError("purity identity requires gamma > 0 (division guard)")
    if decomposition == "auto":
        decomposition = "sub_critical" if ga <= om else "super_critical"
    gs = gaussian_steady_params(params)
    lhs = gs.big_q - ga**2 * om**2
    dpp, dqq, dpq = params.d_pp, params.d_qq, params.d_pq
    if decomposition == "sub_critical":
        rhs = (
            (1.0 - ga**2 / om**2) * (dpp - dqq * om**2) ** 2
            + (ga**2 / om**2) * (dpp + 2.0 * dpq * om**2 / ga + dqq * om**2) ** 2
            + 4.0 * om**2 * params.delta()
        )
    elif decomposition == "super_critical":
        rhs = (
            (dpp + 2.0 * dpq * ga + dqq * om**2) ** 2
            + 4.0 * ga**2 * params.delta()
            + ga**2 * (ga**2 - om**2)
        )
    else:
        raise ValueError(f"unknown decomposition {decomposition!r}")
    return abs(lhs - rhs) / max(1.0, abs(lhs))
