"""Scenario configuration: TOML (or JSON) in, validated dataclass out."""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from .errors import ConfigError, ParameterError, PotentialError
from .fock import PotentialSpec
from .gksl import QfpParams
from .steady import gaussian_steady_params

N_MIN, N_MAX = 8, 128
KNOWN_TASKS = ("validate", "steady", "evolve", "wigner", "lyapunov", "report")

# all numeric pass/fail thresholds, overridable per scenario under [thresholds]
DEFAULT_THRESHOLDS = {
    "trace_drift": 1e-8,             # pre-correction |tr rho - 1| along trajectories
    "evolved_min_eigenvalue": -1e-7, # pre-correction eigenvalue floor
    "convergence_distance": 1e-4,    # mutual final trace distances
    "gaussian_agreement": 1e-3,      # solve_steady vs closed-form projection
    "pure_purity": 0.999,            # purity at the pure limiting point
    "pure_fidelity": 0.999,          # fidelity with the exp(-c x^2) projector
    "pure_min_eigenvalue": 1e-6,     # non-faithfulness ceiling at the pure point
    "wigner_mass_error": 1e-4,
    "moment_residual": 1e-4,
    "pipeline_agreement": 1e-4,      # kernel-FFT vs characteristic-function Wigner
    "wfp_relative_residual": 1e-3,
    "drift_violation": 1e-8,
    "markov_violation": 1e-8,
    "identity_residual": 1e-10,      # purity identity decomposition
}


@dataclass
class TimeSpec:
    t_max: float = 10.0
    n_output: int = 21
    rtol: float = 1e-9

    def grid(self):
        return np.linspace(0.0, self.t_max, self.n_output)


@dataclass
class GridSpec:
    x_max: float
    x_count: int = 129
    v_max: float = 0.0
    v_count: int = 0

    def __post_init__(self):
        if self.v_max <= 0:
            self.v_max = self.x_max
        if self.v_count <= 0:
            self.v_count = self.x_count


@dataclass
class ScenarioConfig:
    name: str
    params: QfpParams
    n: int
    seed: int = 0
    tasks: tuple = ("validate", "report")
    out_dir: Path | None = None
    time: TimeSpec = field(default_factory=TimeSpec)
    grid: GridSpec | None = None
    initial_states: tuple = ("fock:0", "thermal:1.0", "coherent:1.0")
    lyapunov_n: int = 60
    lyapunov_vectors: int = 200
    wigner_pipeline_check: bool = False
    check_convergence: bool = False
    expect_purity_class: str | None = None
    thresholds: dict = field(default_factory=dict)

    def threshold(self, key):
        if key not in DEFAULT_THRESHOLDS:
            raise KeyError(f"unknown threshold {key!r}")
        return self.thresholds.get(key, DEFAULT_THRESHOLDS[key])


def moment_estimate(params: QfpParams):
    """(<q^2>, <p^2>) estimate for grid sizing.

    Uses the closed-form V = 0 steady moments when gamma > 0 (the
    sub-quadratic perturbations change these only mildly); falls back to
    the oscillator ground state otherwise.
    """
    if params.gamma > 0:
        gs = gaussian_steady_params(params)
        return (
            gs.q22 / (2.0 * params.gamma * params.omega**2),
            gs.q11 / (2.0 * params.gamma),
        )
    return 0.5 / params.omega, 0.5 * params.omega


def default_grid(params: QfpParams) -> GridSpec:
    q2, v2 = moment_estimate(params)
    half = max(6.0, 4.0 * math.sqrt(max(q2, v2)))
    return GridSpec(x_max=half, x_count=129)


def _field(section, key, kind, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required field {key!r}")
        return default
    value = section[key]
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field {key!r}: {exc}") from exc


def _parse_potential(table) -> PotentialSpec:
    kind = table.get("kind", "none")
    try:
        if kind == "none":
            return PotentialSpec.none()
        if kind == "cosine":
            return PotentialSpec.cosine(float(table["lam"]), float(table.get("k", 1.0)))
        if kind == "soft_linear":
            return PotentialSpec.soft_linear(float(table["lam"]))
        if kind == "power":
            return PotentialSpec.power(float(table["lam"]), float(table["beta"]))
    except KeyError as exc:
        raise ConfigError(f"potential {kind!r} missing field {exc}") from exc
    except PotentialError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown potential kind {kind!r}")


def parse_config(raw: dict, name: str = "scenario") -> ScenarioConfig:
    if "params" not in raw:
        raise ConfigError("missing [params] section")
    ptab = raw["params"]
    try:
        params = QfpParams(
            omega=_field(ptab, "omega", float, required=True),
            gamma=_field(ptab, "gamma", float, required=True),
            d_pp=_field(ptab, "d_pp", float, required=True),
            d_qq=_field(ptab, "d_qq", float, required=True),
            d_pq=_field(ptab, "d_pq", float, 0.0),
            potential=_parse_potential(ptab.get("potential", {})),
        )
    except ParameterError as exc:
        raise ConfigError(f"params: {exc}") from exc

    n = _field(raw, "n", int, required=True)
    if not N_MIN <= n <= N_MAX:
        raise ConfigError(f"n = {n} outside [{N_MIN}, {N_MAX}]")

    tasks = tuple(raw.get("tasks", ["validate", "report"]))
    if not tasks:
        raise ConfigError("tasks must be nonempty")
    for t in tasks:
        if t not in KNOWN_TASKS:
            raise ConfigError(f"unknown task {t!r} (known: {', '.join(KNOWN_TASKS)})")

    seed = _field(raw, "seed", int, 0)
    if seed < 0 or seed >= 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")

    ttab = raw.get("time", {})
    time = TimeSpec(
        t_max=_field(ttab, "t_max", float, 10.0),
        n_output=_field(ttab, "n_output", int, 21),
        rtol=_field(ttab, "rtol", float, 1e-9),
    )
    if time.t_max <= 0 or time.n_output < 2:
        raise ConfigError("time spec needs t_max > 0 and n_output >= 2")
    if not 1e-12 <= time.rtol <= 1e-4:
        raise ConfigError("rtol must lie in [1e-12, 1e-4]")

    grid = None
    if "grid" in raw:
        gtab = raw["grid"]
        grid = GridSpec(
            x_max=_field(gtab, "x_max", float, required=True),
            x_count=_field(gtab, "x_count", int, 129),
            v_max=_field(gtab, "v_max", float, 0.0),
            v_count=_field(gtab, "v_count", int, 0),
        )
    if grid is None and "wigner" in tasks:
        grid = default_grid(params)
    if grid is not None:
        q2, v2 = moment_estimate(params)
        if 2.0 * grid.x_max < 6.0 * math.sqrt(q2) or 2.0 * grid.v_max < 6.0 * math.sqrt(v2):
            raise ConfigError(
                f"grid must span >= 6 estimated standard deviations "
                f"(need x_max >= {3.0 * math.sqrt(q2):.2f}, v_max >= {3.0 * math.sqrt(v2):.2f})"
            )

    thresholds = dict(raw.get("thresholds", {}))
    for key in thresholds:
        if key not in DEFAULT_THRESHOLDS:
            raise ConfigError(f"unknown threshold {key!r}")

    return ScenarioConfig(
        name=raw.get("name", name),
        params=params,
        n=n,
        seed=seed,
        tasks=tasks,
        out_dir=Path(raw["out_dir"]) if "out_dir" in raw else None,
        time=time,
        grid=grid,
        initial_states=tuple(raw.get("initial_states",
                                     ("fock:0", "thermal:1.0", "coherent:1.0"))),
        lyapunov_n=_field(raw, "lyapunov_n", int, 60),
        lyapunov_vectors=_field(raw, "lyapunov_vectors", int, 200),
        wigner_pipeline_check=bool(raw.get("wigner_pipeline_check", False)),
        check_convergence=bool(raw.get("check_convergence", False)),
        expect_purity_class=raw.get("expect_purity_class"),
        thresholds=thresholds,
    )


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    """Read a scenario from a .toml or .json file; overrides win."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix == ".json":
            raw = json.loads(path.read_text())
        else:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if overrides:
        raw = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    return parse_config(raw, name=path.stem)
