"""Scenario pipeline: runs requested tasks in dependency order and writes
machine-readable artifacts (report.json, trajectory CSVs, wigner grid,
steady/lyapunov JSON)."""

import concurrent.futures
import json
import time as time_mod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lyapunov as lyap
from .config import ScenarioConfig, default_grid, load_config
from .dynamics import evolve, export_csv
from .errors import QfpError
from .gksl import Classification, build_superoperator, validate_params
from .states import (DensityMatrix, coherent_state, fock_state,
                     pure_state_fidelity, random_state, thermal_state,
                     trace_distance)
from .steady import (PurityClass, gaussian_reference, purity_conditions,
                     purity_identity_check, pure_gaussian_state, solve_steady)
from .wigner import (PhaseSpaceGrid, dictionary_moments, wfp_residual,
                     wigner_from_characteristic, wigner_transform)

SCHEMA_VERSION = 1


@dataclass
class ScenarioResult:
    name: str
    ok: bool
    report: dict
    out_dir: Path
    error: str | None = None
    checks: list = field(default_factory=list)


def _check(checks, name, value, threshold, ok):
    checks.append({
        "name": name,
        "value": value if isinstance(value, (bool, int, str)) else float(value),
        "threshold": threshold if isinstance(threshold, (bool, int, str)) else float(threshold),
        "pass": bool(ok),
    })


def _parse_initial_state(spec: str, dim: int, rng, omega: float = 1.0) -> DensityMatrix:
    kind, _, arg = spec.partition(":")
    if kind == "fock":
        return fock_state(int(arg or 0), dim)
    if kind == "coherent":
        return coherent_state(complex(arg or "1"), dim)
    if kind == "thermal":
        return thermal_state(float(arg or 1.0), dim, omega=omega)
    if kind == "random":
        return random_state(dim, rng)
    raise QfpError(f"unknown initial state {spec!r}")


def _phase_grid(config) -> PhaseSpaceGrid:
    g = config.grid or default_grid(config.params)
    return PhaseSpaceGrid(g.x_max, g.x_count, g.v_max, g.v_count)


def run_scenario(config: ScenarioConfig, out_dir=None) -> ScenarioResult:
    out = Path(out_dir or config.out_dir or f"out/{config.name}")
    out.mkdir(parents=True, exist_ok=True)
    params, n = config.params, config.n
    rng = np.random.default_rng(config.seed)
    checks = []
    results = {}
    report = {
        "schema_version": SCHEMA_VERSION,
        "scenario": config.name,
        "params": params.to_dict(),
        "n": n,
        "seed": config.seed,
        "tasks": list(config.tasks),
        "results": results,
        "checks": checks,
    }

    def finish(ok, error=None):
        report["status"] = "pass" if ok else "fail"
        if error:
            report["error"] = error
        stamp = {"timestamp": time_mod.strftime("%Y-%m-%dT%H:%M:%SZ", time_mod.gmtime())}
        with open(out / "report.json", "w") as fh:
            json.dump({**report, **stamp}, fh, indent=2, sort_keys=True)
        return ScenarioResult(config.name, ok, report, out, error=error, checks=checks)

    # ---- validate ------------------------------------------------------
    cls, delta = validate_params(params)
    results["validate"] = {"classification": str(cls), "delta": delta}
    _check(checks, "lindblad_admissible", str(cls), "not Invalid",
           cls is not Classification.INVALID)
    if cls is Classification.INVALID:
        return finish(False, error=f"Invalid Lindblad parameters (delta = {delta:.6g})")
    if params.potential.kind == "none" and params.gamma > 0:
        pc = purity_conditions(params)
        results["validate"]["purity_class"] = str(pc.kind)
        if pc.reason:
            results["validate"]["purity_reason"] = pc.reason
        residual = purity_identity_check(params)
        results["validate"]["purity_identity_residual"] = residual
        _check(checks, "purity_identity_residual", residual,
               config.threshold("identity_residual"),
               residual <= config.threshold("identity_residual"))
        if config.expect_purity_class is not None:
            _check(checks, "purity_class", str(pc.kind),
                   config.expect_purity_class,
                   str(pc.kind) == config.expect_purity_class)

    steady_report = None
    try:
        # ---- steady ------------------------------------------------------
        if "steady" in config.tasks:
            superop = build_superoperator(params, n)
            steady_report = solve_steady(superop)
            sdict = steady_report.to_dict()
            _check(checks, "steady_kernel_dim", steady_report.kernel_dim_estimate, 1,
                   steady_report.kernel_dim_estimate == 1)
            pure_point = (
                params.potential.kind == "none" and params.gamma > 0
                and purity_conditions(params).kind is PurityClass.PURE_STEADY
            )
            if pure_point:
                _check(checks, "steady_purity", steady_report.purity,
                       config.threshold("pure_purity"),
                       steady_report.purity >= config.threshold("pure_purity"))
                _check(checks, "steady_min_eigenvalue_pure",
                       steady_report.min_eigenvalue,
                       config.threshold("pure_min_eigenvalue"),
                       steady_report.min_eigenvalue <= config.threshold("pure_min_eigenvalue"))
                fid = pure_state_fidelity(
                    steady_report.rho_ss, _pure_reference_vector(params, n))
                sdict["pure_fidelity"] = fid
                _check(checks, "pure_fidelity", fid, config.threshold("pure_fidelity"),
                       fid >= config.threshold("pure_fidelity"))
            elif cls is Classification.STRICT_LINDBLAD:
                _check(checks, "steady_min_eigenvalue", steady_report.min_eigenvalue,
                       0.0, steady_report.min_eigenvalue > 0.0)
            if params.potential.kind == "none" and params.gamma > 0:
                gs, rho_ref = gaussian_reference(params, n)
                dist = trace_distance(steady_report.rho_ss, rho_ref)
                sdict["gaussian_reference"] = {
                    "q11": gs.q11, "q12": gs.q12, "q22": gs.q22, "big_q": gs.big_q,
                    "projected_trace": gs.projected_trace,
                    "trace_distance": dist,
                }
                _check(checks, "gaussian_agreement", dist,
                       config.threshold("gaussian_agreement"),
                       dist <= config.threshold("gaussian_agreement"))
            results["steady"] = sdict
            steady_report.to_json(out / "steady.json", matrix_path=out / "steady_state.bin")
            _dump_matrix(steady_report.rho_ss.matrix, out / "steady_state.json",
                         out / "steady_state.bin")

        # ---- evolve ------------------------------------------------------
        if "evolve" in config.tasks:
            reference = steady_report.rho_ss if steady_report else None
            t_grid = config.time.grid()
            finals, edata = [], {}
            for spec in config.initial_states:
                rho0 = _parse_initial_state(spec, n, rng, omega=params.omega)
                traj = evolve(params, rho0, t_grid, rtol=config.time.rtol,
                              reference=reference)
                tag = spec.replace(":", "_").replace("+", "")
                export_csv(traj, out / f"trajectory_{tag}.csv")
                finals.append(traj.final)
                edata[spec] = {
                    "max_trace_drift": float(traj.trace_errors.max()),
                    "min_eigenvalue": float(traj.min_eigenvalues.min()),
                }
                if traj.trace_dist_to_ref is not None:
                    edata[spec]["final_dist_to_steady"] = float(traj.trace_dist_to_ref[-1])
            drift = max(v["max_trace_drift"] for v in edata.values())
            floor = min(v["min_eigenvalue"] for v in edata.values())
            _check(checks, "trace_drift", drift, config.threshold("trace_drift"),
                   drift <= config.threshold("trace_drift"))
            _check(checks, "evolved_min_eigenvalue", floor,
                   config.threshold("evolved_min_eigenvalue"),
                   floor >= config.threshold("evolved_min_eigenvalue"))
            if config.check_convergence and len(finals) >= 2:
                pairwise = max(
                    trace_distance(a, b)
                    for i, a in enumerate(finals) for b in finals[:i]
                )
                edata["max_pairwise_final_distance"] = pairwise
                _check(checks, "convergence_distance", pairwise,
                       config.threshold("convergence_distance"),
                       pairwise <= config.threshold("convergence_distance"))
            results["evolve"] = edata

        # ---- wigner ------------------------------------------------------
        if "wigner" in config.tasks:
            grid = _phase_grid(config)
            state = steady_report.rho_ss if steady_report else \
                _parse_initial_state(config.initial_states[0], n, rng,
                                     omega=params.omega)
            wgrid = wigner_transform(state, grid)
            wdata = {"mass": wgrid.mass, "max_imag": wgrid.max_imag}
            mass_err = abs(wgrid.mass - 1.0)
            _check(checks, "wigner_mass_error", mass_err,
                   config.threshold("wigner_mass_error"),
                   mass_err <= config.threshold("wigner_mass_error"))
            moments = dictionary_moments(state, wgrid)
            wdata["moment_rows"] = {
                k: {"wigner": v[0], "trace": v[1], "residual": v[2]}
                for k, v in moments.rows.items()
            }
            _check(checks, "moment_residual", moments.max_relative_residual,
                   config.threshold("moment_residual"),
                   moments.max_relative_residual <= config.threshold("moment_residual"))
            if params.potential.kind == "none" and steady_report is not None:
                res = wfp_residual(wgrid, params)
                wdata["wfp_residual"] = {
                    "max_abs": res.max_abs, "term_scale": res.term_scale,
                    "relative": res.relative,
                }
                _check(checks, "wfp_relative_residual", res.relative,
                       config.threshold("wfp_relative_residual"),
                       res.relative <= config.threshold("wfp_relative_residual"))
            if config.wigner_pipeline_check:
                wchar = wigner_from_characteristic(state, grid)
                agreement = float(np.nanmax(np.abs(wchar.values - wgrid.values)))
                wdata["pipeline_agreement"] = agreement
                _check(checks, "pipeline_agreement", agreement,
                       config.threshold("pipeline_agreement"),
                       agreement <= config.threshold("pipeline_agreement"))
            wgrid.export_csv(out / "wigner.csv")
            wgrid.export_binary(out / "wigner.json", out / "wigner.bin")
            results["wigner"] = wdata

        # ---- lyapunov ----------------------------------------------------
        if "lyapunov" in config.tasks:
            cert = lyap.choose_certificate(params, config.lyapunov_n)
            x_min = float(np.linalg.eigvalsh(lyap.build_X(cert))[0])
            drift_rep = lyap.check_drift(params, cert, config.lyapunov_n,
                                         config.lyapunov_vectors, seed=config.seed)
            markov_rep = lyap.check_markov_bound(params, cert, config.lyapunov_n,
                                                 config.lyapunov_vectors,
                                                 seed=config.seed)
            ldata = lyap.certificate_report(params, cert, drift_rep, markov_rep)
            ldata["x_min_eigenvalue"] = x_min
            _check(checks, "x_positive", x_min, 0.0, x_min > 0.0)
            _check(checks, "drift_violation", drift_rep.max_violation,
                   config.threshold("drift_violation"),
                   drift_rep.max_violation <= config.threshold("drift_violation"))
            _check(checks, "markov_violation", markov_rep.max_violation,
                   config.threshold("markov_violation"),
                   markov_rep.max_violation <= config.threshold("markov_violation"))
            lyap.export_report(ldata, out / "lyapunov.json")
            results["lyapunov"] = ldata
    except QfpError as exc:
        return finish(False, error=f"{type(exc).__name__}: {exc}")

    return finish(all(c["pass"] for c in checks))


def _pure_reference_vector(params, n):
    ref = pure_gaussian_state(params, n)
    vals, vecs = np.linalg.eigh(ref.matrix)
    return vecs[:, -1]


def _dump_matrix(mat, header_path, payload_path):
    with open(payload_path, "wb") as fh:
        fh.write(np.asarray(mat, dtype="<c16").tobytes(order="C"))
    header = {
        "format": "qfpsim-matrix",
        "version": 1,
        "dtype": "complex128",
        "byte_order": "little-endian",
        "layout": "row-major",
        "shape": list(mat.shape),
        "payload": str(payload_path),
    }
    with open(header_path, "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)


def run_matrix(config_dir, out_root=None, jobs: int = 1):
    """Run every scenario config in a directory; returns (results, n_failed)."""
    config_dir = Path(config_dir)
    paths = sorted(
        p for p in config_dir.iterdir() if p.suffix in (".toml", ".json")
    )
    if not paths:
        raise QfpError(f"no scenario configs found in {config_dir}")
    out_root = Path(out_root or "out")

    def one(path):
        config = load_config(path)
        return run_scenario(config, out_dir=out_root / config.name)

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, paths))
    else:
        results = [one(p) for p in paths]
    failed = sum(1 for r in results if not r.ok)
    aggregate = {
        "schema_version": SCHEMA_VERSION,
        "scenarios": [
            {"name": r.name, "status": "pass" if r.ok else "fail",
             "error": r.error, "out_dir": str(r.out_dir)}
            for r in results
        ],
        "failed": failed,
    }
    out_root.mkdir(parents=True, exist_ok=True)
    with open(out_root / "matrix_report.json", "w") as fh:
        json.dump(aggregate, fh, indent=2, sort_keys=True)
    return results, failed
