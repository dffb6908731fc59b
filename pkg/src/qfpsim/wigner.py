"""Wigner phase-space view of truncated Fock states.

Convention (pinned by the moment tests, not negotiable elsewhere):

    w(x, v) = (1/2pi) * integral rho(x + s/2, x - s/2) exp(-i v s) ds

which is the anti-Fourier transform (factor (1/2pi)^2) of the
characteristic function phi(xi, eta) = tr(rho exp(-i(xi q + eta p))), and
normalizes so that integral w dx dv = tr rho.  With this choice the
dictionary rows hold:

    integral x w   = tr(q rho)        integral v w   = tr(p rho)
    integral x^2 w = tr(q^2 rho)      integral xv w  = tr((pq+qp) rho)/2

(the double-application "corrections" vanish under the trace by
cyclicity).
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import GridError, GuardError, ParameterError
from .fock import build_canonical
from .gksl import QfpParams
from .hermite import hermite_functions
from .states import DensityMatrix

IMAG_RESIDUE_TOL = 1e-10
ALIASING_FACTOR = 1e-6


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform symmetric rectangular grid; odd counts keep a node at 0."""

    x_max: float
    x_count: int
    v_max: float
    v_count: int

    def __post_init__(self):
        if self.x_max <= 0 or self.v_max <= 0:
            raise GridError("grid extents must be positive")
        if self.x_count < 9 or self.v_count < 9:
            raise GridError("grid needs at least 9 nodes per axis")
        if self.x_count % 2 == 0 or self.v_count % 2 == 0:
            raise GridError("node counts must be odd (a node must sit at 0)")

    @property
    def x(self):
        return np.linspace(-self.x_max, self.x_max, self.x_count)

    @property
    def v(self):
        return np.linspace(-self.v_max, self.v_max, self.v_count)

    @property
    def dx(self):
        return 2.0 * self.x_max / (self.x_count - 1)

    @property
    def dv(self):
        return 2.0 * self.v_max / (self.v_count - 1)

    def refine(self) -> "PhaseSpaceGrid":
        """Same extents, halved spacing."""
        return PhaseSpaceGrid(
            self.x_max, 2 * self.x_count - 1, self.v_max, 2 * self.v_count - 1
        )


@dataclass
class WignerGrid:
    """Real samples w(x_i, v_j), values shape (len(x), len(v))."""

    x: np.ndarray
    v: np.ndarray
    values: np.ndarray
    mass: float
    max_imag: float

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    @property
    def dv(self):
        return float(self.v[1] - self.v[0])

    def export_csv(self, path):
        with open(path, "w") as fh:
            fh.write("x,v,w\n")
            for i, xi in enumerate(self.x):
                for j, vj in enumerate(self.v):
                    fh.write(f"{xi:.16e},{vj:.16e},{self.values[i, j]:.16e}\n")

    def export_binary(self, header_path, payload_path):
        """float64 little-endian row-major payload + JSON sidecar."""
        with open(payload_path, "wb") as fh:
            fh.write(self.values.astype("<f8").tobytes(order="C"))
        header = {
            "format": "qfpsim-wigner",
            "version": 1,
            "dtype": "float64",
            "byte_order": "little-endian",
            "layout": "row-major",
            "shape": list(self.values.shape),
            "x": {"min": float(self.x[0]), "count": len(self.x), "spacing": self.dx},
            "v": {"min": float(self.v[0]), "count": len(self.v), "spacing": self.dv},
            "mass": self.mass,
            "payload": str(payload_path),
        }
        with open(header_path, "w") as fh:
            json.dump(header, fh, indent=2, sort_keys=True)


def _state_matrix(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _check_kernel_resolution(n, x):
    x = np.asarray(x, dtype=float)
    if np.max(np.abs(x + x[::-1])) > 1e-9 * max(1.0, np.max(np.abs(x))):
        raise GridError("position grid must be symmetric about 0")
    dx = x[1] - x[0]
    k_edge_sq = 2.0 * n - 1.0 - np.max(np.abs(x)) ** 2
    if k_edge_sq > 0:
        # >= 8 points per local Hermite oscillation at the grid edge
        max_dx = 2.0 * np.pi / (8.0 * np.sqrt(k_edge_sq))
        if dx > max_dx:
            raise GridError(
                f"grid too coarse for {n} Fock levels: dx = {dx:.3g} > {max_dx:.3g}"
            )


def density_kernel(rho, x):
    """Position kernel rho(x_i, x_j) = sum_mn rho_mn psi_m(x_i) psi_n(x_j)."""
    mat = _state_matrix(rho)
    _check_kernel_resolution(mat.shape[0], x)
    psi = hermite_functions(mat.shape[0], np.asarray(x, dtype=float))
    return psi.T @ mat @ psi.conj()


def _kernel_rows(mat, x, s):
    """rho(x_i + s_k/2, x_i - s_k/2), shape (len(x), len(s))."""
    n = mat.shape[0]
    xp = (x[:, None] + s[None, :] / 2.0).ravel()
    xm = (x[:, None] - s[None, :] / 2.0).ravel()
    pp = hermite_functions(n, xp)
    pm = hermite_functions(n, xm)
    rows = np.einsum("np,np->p", pp, mat @ pm)
    return rows.reshape(len(x), len(s))


def _fft_size(grid, oversample):
    nf = 1
    while nf < oversample * max(grid.x_count, grid.v_count):
        nf *= 2
    return nf


def _finish_grid(grid, values):
    max_imag = float(np.max(np.abs(values.imag)))
    if max_imag > IMAG_RESIDUE_TOL:
        raise GridError(f"imaginary residue {max_imag:.3e} exceeds {IMAG_RESIDUE_TOL}")
    w = values.real.copy()
    boundary = max(
        np.abs(w[0, :]).max(), np.abs(w[-1, :]).max(),
        np.abs(w[:, 0]).max(), np.abs(w[:, -1]).max(),
    )
    if boundary > ALIASING_FACTOR * np.abs(w).max():
        raise GridError(
            f"aliasing detected: boundary |w| = {boundary:.3e} vs "
            f"max |w| = {np.abs(w).max():.3e}; enlarge the grid"
        )
    mass = float(w.sum() * (grid.x[1] - grid.x[0]) * (grid.v[1] - grid.v[0]))
    return WignerGrid(grid.x, grid.v, w, mass, max_imag)


def wigner_transform(rho, grid: PhaseSpaceGrid, oversample: int = 4) -> WignerGrid:
    """Wigner function by FFT of the kernel over the chord coordinate s.

    The s-grid is conjugate to the requested v-grid (ds*dv = 2pi/Ns), so
    the transform lands exactly on the v nodes:
        w(x_i, v_m) = ds/(2pi) * (-1)^m' * FFT_s[rho(x_i+s/2, x_i-s/2)](m'),
    m' = m - Nv//2.
    """
    mat = _state_matrix(rho)
    _check_kernel_resolution(mat.shape[0], grid.x)
    ns = _fft_size(grid, oversample)
    ds = 2.0 * np.pi / (ns * grid.dv)
    s = (np.arange(ns) - ns / 2) * ds
    kernel = _kernel_rows(mat, grid.x, s)
    transformed = np.fft.fft(kernel, axis=1)
    m_prime = np.arange(grid.v_count) - grid.v_count // 2
    values = (ds / (2.0 * np.pi)) * ((-1.0) ** m_prime)[None, :] \
        * transformed[:, m_prime % ns]
    return _finish_grid(grid, values)


@dataclass(frozen=True)
class CharacteristicSample:
    xi: float
    eta: float
    value: complex


def characteristic_function(rho, xi: float, eta: float) -> CharacteristicSample:
    """phi(xi, eta) = tr(rho expm(-i(xi q + eta p))).

    Guarded by the displacement energy (xi^2+eta^2)/2 <= dim/2, beyond
    which the truncated exponential is unreliable.
    """
    mat = _state_matrix(rho)
    n = mat.shape[0]
    if (xi**2 + eta**2) / 2.0 > n / 2.0:
        raise GuardError(
            f"(xi^2+eta^2)/2 = {(xi**2 + eta**2) / 2:.3g} exceeds n/2 = {n / 2}"
        )
    q, p, _ = build_canonical(n)
    value = complex(np.trace(mat @ expm(-1j * (xi * q + eta * p))))
    return CharacteristicSample(xi=float(xi), eta=float(eta), value=value)


def wigner_from_characteristic(rho, grid: PhaseSpaceGrid, oversample: int = 2) -> WignerGrid:
    """Independent Wigner pipeline: 2-d anti-Fourier sum of sampled phi.

    Samples phi only inside the truncation guard disk (phi has decayed
    below the tolerance there for the states this is used on) and uses the
    Hermitian symmetry phi(-xi, -eta) = conj(phi(xi, eta)).
    """
    mat = _state_matrix(rho)
    n = mat.shape[0]
    q, p, _ = build_canonical(n)
    nf = _fft_size(grid, oversample)
    dxi = 2.0 * np.pi / (nf * grid.dx)
    deta = 2.0 * np.pi / (nf * grid.dv)
    xis = (np.arange(nf) - nf / 2) * dxi
    etas = (np.arange(nf) - nf / 2) * deta
    radius_sq = float(n)  # (xi^2+eta^2)/2 <= n/2

    phi = np.zeros((nf, nf), dtype=complex)
    for a, xi in enumerate(xis):
        if xi < 0:
            continue
        for b, eta in enumerate(etas):
            if xi == 0 and eta < 0:
                continue
            if xi * xi + eta * eta > radius_sq:
                continue
            val = np.trace(mat @ expm(-1j * (xi * q + eta * p)))
            phi[a, b] = val
            # mirror index of -xi (and -eta) on the shifted integer grid
            am, bm = int(nf - a), int(nf - b)
            if am < nf and bm < nf:
                phi[am, bm] = np.conj(val)
    ex = np.exp(1j * np.outer(xis, grid.x)) * dxi
    ev = np.exp(1j * np.outer(etas, grid.v)) * deta
    values = (ex.T @ phi @ ev) / (2.0 * np.pi) ** 2
    return _finish_grid(grid, values)


def _d1(w, h, axis):
    """4th-order first derivative (valid away from a 2-cell margin)."""
    p1, m1 = np.roll(w, -1, axis), np.roll(w, 1, axis)
    p2, m2 = np.roll(w, -2, axis), np.roll(w, 2, axis)
    return (-p2 + 8 * p1 - 8 * m1 + m2) / (12.0 * h)


def _d2(w, h, axis):
    p1, m1 = np.roll(w, -1, axis), np.roll(w, 1, axis)
    p2, m2 = np.roll(w, -2, axis), np.roll(w, 2, axis)
    return (-p2 + 16 * p1 - 30 * w + 16 * m1 - m2) / (12.0 * h * h)


@dataclass
class MomentReport:
    """Dictionary rows as (phase-space value, trace value, relative residual)."""

    rows: dict
    max_relative_residual: float


def dictionary_moments(rho, wgrid: WignerGrid) -> MomentReport:
    """Residuals of the trace-integrated Wigner/GKSL dictionary rows."""
    mat = _state_matrix(rho)
    n = mat.shape[0]
    q, p, _ = build_canonical(n)
    w = wgrid.values
    dx, dv = wgrid.dx, wgrid.dv
    xg = wgrid.x[:, None]
    vg = wgrid.v[None, :]
    area = dx * dv

    def tr(op):
        return float(np.real(np.trace(op @ mat)))

    rows = {}

    def add(name, lhs, rhs):
        rows[name] = (lhs, rhs, abs(lhs - rhs) / max(1.0, abs(rhs)))

    add("mass", float(w.sum() * area), float(np.real(np.trace(mat))))
    add("mean_x", float((xg * w).sum() * area), tr(q))
    add("mean_v", float((vg * w).sum() * area), tr(p))
    add("x2", float((xg**2 * w).sum() * area), tr(q @ q))
    add("v2", float((vg**2 * w).sum() * area), tr(p @ p))
    add("xv", float((xg * vg * w).sum() * area), 0.5 * tr(p @ q + q @ p))

    # integration-by-parts rows for the derivative entries of the dictionary:
    # d_x w <-> i[p, rho] integrated against x gives tr((1/2){q, i[p,rho]}) = -tr rho
    margin_x = slice(2, len(wgrid.x) - 2)
    margin_v = slice(2, len(wgrid.v) - 2)
    wx = _d1(w, dx, 0)[margin_x, margin_v]
    wv = _d1(w, dv, 1)[margin_x, margin_v]
    comm_p = 1j * (p @ mat - mat @ p)
    comm_q = -1j * (q @ mat - mat @ q)
    add(
        "ibp_x",
        float((xg[margin_x] * wx).sum() * area),
        float(np.real(np.trace(0.5 * (q @ comm_p + comm_p @ q)))),
    )
    add(
        "ibp_v",
        float((vg[:, margin_v] * wv).sum() * area),
        float(np.real(np.trace(0.5 * (p @ comm_q + comm_q @ p)))),
    )

    worst = max(r[2] for r in rows.values())
    return MomentReport(rows=rows, max_relative_residual=float(worst))


@dataclass
class WfpResidual:
    """Pointwise phase-space residual; interior excludes the outer 10%."""

    values: np.ndarray
    max_abs: float
    term_scale: float

    @property
    def relative(self) -> float:
        return self.max_abs / self.term_scale


def wfp_residual(wgrid: WignerGrid, params: QfpParams) -> WfpResidual:
    """Right side of the harmonic phase-space Fokker-Planck equation.

    For a steady-state Wigner function the combination
        omega^2 x dw/dv - v dw/dx + 2 gamma d(v w)/dv
        + d_pp lap_v w + d_qq lap_x w + 2 d_pq d2w/dxdv
    must vanish; evaluated with 4th-order central differences.  Requires
    V = 0 (the harmonic form of the equation).
    """
    if params.potential.kind != "none":
        raise ParameterError("phase-space residual is defined for V = 0")
    w = wgrid.values
    nx, nv = w.shape
    mx, mv = max(2, nx // 10), max(2, nv // 10)
    if nx - 2 * mx < 3 or nv - 2 * mv < 3:
        raise GridError("grid too small for an interior residual")
    dx, dv = wgrid.dx, wgrid.dv
    xg = wgrid.x[:, None]
    vg = wgrid.v[None, :]

    wx = _d1(w, dx, 0)
    wv = _d1(w, dv, 1)
    terms = [
        params.omega**2 * xg * wv,
        -vg * wx,
        2.0 * params.gamma * (w + vg * wv),
        params.d_pp * _d2(w, dv, 1),
        params.d_qq * _d2(w, dx, 0),
        2.0 * params.d_pq * _d1(wx, dv, 1),
    ]
    residual = sum(terms)
    interior = (slice(mx, nx - mx), slice(mv, nv - mv))
    out = np.full_like(w, np.nan)
    out[interior] = residual[interior]
    scale = max(np.abs(t[interior]).max() for t in terms)
    return WfpResidual(
        values=out,
        max_abs=float(np.abs(residual[interior]).max()),
        term_scale=float(scale),
    )
