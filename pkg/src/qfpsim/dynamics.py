"""Time evolution of density matrices under the QFP generator.

The master equation d rho/dt = L*(rho) is integrated on the vectorized
state with an adaptive embedded Runge-Kutta pair (Dormand-Prince 5(4) via
scipy).  Runge-Kutta steps preserve linear invariants exactly, so the raw
trace drift measures only accumulated roundoff; it is recorded per output
time *before* the emitted state is re-Hermitized and renormalized.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import DimensionError, StiffnessError, TruncationError
from .gksl import QfpParams, build_lindblad_ops, build_semigroup_generator, unvec, vec
from .states import DensityMatrix, trace_distance

RTOL_MIN, RTOL_MAX = 1e-12, 1e-4
NEGATIVITY_LIMIT = -1e-6
EXPM_MAX_DIM = 24


@dataclass
class Trajectory:
    """Output states at the requested times plus pre-correction diagnostics."""

    times: np.ndarray
    states: list
    trace_errors: np.ndarray
    min_eigenvalues: np.ndarray
    trace_dist_to_ref: np.ndarray | None = None
    rtol: float = 0.0
    method: str = "rk45"
    params: QfpParams | None = None

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]


def _check_t_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) == 0:
        raise ValueError("t_grid must be a nonempty 1-d sequence")
    if abs(t[0]) > 0:
        raise ValueError("t_grid must start at 0")
    if len(t) > 1 and np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    return t


def evolve(
    params: QfpParams,
    rho0: DensityMatrix,
    t_grid,
    rtol: float = 1e-9,
    method: str = "rk45",
    reference: DensityMatrix | None = None,
) -> Trajectory:
    """Integrate the master equation from rho0 over t_grid.

    method="rk45" is the adaptive default; method="expm" propagates with
    the exact matrix exponential of the superoperator (n <= 24, used for
    cross-validation).  Emitted states are re-Hermitized and renormalized;
    trace error and minimum eigenvalue are recorded before that correction.
    """
    t = _check_t_grid(t_grid)
    if not RTOL_MIN <= rtol <= RTOL_MAX:
        raise ValueError(f"rtol must lie in [{RTOL_MIN}, {RTOL_MAX}]")
    params.require_admissible()
    n = rho0.dim
    if reference is not None and reference.dim != n:
        raise DimensionError("reference state dimension mismatch")

    if len(t) == 1:
        raw = [rho0.matrix]
    elif method == "rk45":
        raw = _evolve_rk45(params, rho0.matrix, t, rtol)
    elif method == "expm":
        raw = _evolve_expm(params, rho0.matrix, t)
    else:
        raise ValueError(f"unknown method {method!r}")

    states, tr_err, min_eig, dists = [], [], [], []
    for mat in raw:
        tr_err.append(abs(np.trace(mat) - 1.0))
        herm = 0.5 * (mat + mat.conj().T)
        evals = np.linalg.eigvalsh(herm)
        min_eig.append(evals[0])
        if evals[0] < NEGATIVITY_LIMIT:
            raise TruncationError(
                f"state eigenvalue {evals[0]:.3e} below {NEGATIVITY_LIMIT}; "
                "increase the Fock truncation"
            )
        state = DensityMatrix(herm / np.real(np.trace(herm)), tag=rho0.tag)
        states.append(state)
        if reference is not None:
            dists.append(trace_distance(state, reference))

    return Trajectory(
        times=t,
        states=states,
        trace_errors=np.array(tr_err),
        min_eigenvalues=np.array(min_eig),
        trace_dist_to_ref=np.array(dists) if reference is not None else None,
        rtol=rtol,
        method=method,
        params=params,
    )


def _evolve_rk45(params, rho0, t, rtol):
    n = rho0.shape[0]
    g = build_semigroup_generator(params, n)
    gh = g.conj().T
    ops = [(l, l.conj().T) for l in build_lindblad_ops(params, n)]

    def rhs(_t, y):
        rho = unvec(y, n)
        out = g @ rho + rho @ gh
        for l, ld in ops:
            out += l @ rho @ ld
        return vec(out)

    # complex dtype is mandatory: solve_ivp would otherwise integrate a real
    # ODE and drop the commutator's imaginary parts
    y0 = vec(rho0).astype(complex)
    sol = solve_ivp(rhs, (t[0], t[-1]), y0, t_eval=t, rtol=rtol, atol=rtol * 1e-3)
    if sol.status != 0:
        raise StiffnessError(
            f"integrator failed ({sol.message}); reduce n or use method='expm'"
        )
    return [unvec(sol.y[:, k], n) for k in range(sol.y.shape[1])]


def _evolve_expm(params, rho0, t):
    from .gksl import build_superoperator

    n = rho0.shape[0]
    if n > EXPM_MAX_DIM:
        raise DimensionError(f"expm mode limited to n <= {EXPM_MAX_DIM}, got {n}")
    m = build_superoperator(params, n).matrix
    props = {}
    out, y = [], vec(rho0).astype(complex)
    out.append(unvec(y, n))
    for dt in np.diff(t):
        key = round(float(dt), 15)
        if key not in props:
            props[key] = expm(m * dt)
        y = props[key] @ y
        out.append(unvec(y, n))
    return out


def export_csv(traj: Trajectory, path):
    """CSV with one diagnostics row per output time."""
    with open(path, "w") as fh:
        fh.write("t,trace_error,min_eig,trace_dist_to_ref\n")
        for k in range(len(traj)):
            dist = "" if traj.trace_dist_to_ref is None else f"{traj.trace_dist_to_ref[k]:.16e}"
            fh.write(
                f"{traj.times[k]:.16e},{traj.trace_errors[k]:.16e},"
                f"{traj.min_eigenvalues[k]:.16e},{dist}\n"
            )


def export_states(traj: Trajectory, header_path, payload_path):
    """Full states as little-endian complex128 (row-major) plus JSON header."""
    n = traj.states[0].dim
    block = np.stack([s.matrix for s in traj.states]).astype("<c16")
    with open(payload_path, "wb") as fh:
        fh.write(block.tobytes(order="C"))
    header = {
        "format": "qfpsim-states",
        "version": 1,
        "dtype": "complex128",
        "byte_order": "little-endian",
        "layout": "row-major",
        "shape": [len(traj), n, n],
        "times": [float(x) for x in traj.times],
        "payload": str(payload_path),
    }
    with open(header_path, "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)


def load_states(header_path):
    """Inverse of export_states; returns (times, array of matrices)."""
    with open(header_path) as fh:
        header = json.load(fh)
    shape = tuple(header["shape"])
    data = np.fromfile(header["payload"], dtype="<c16").reshape(shape)
    return np.asarray(header["times"]), data
