import numpy as np
import pytest

from conftest import canonical, purity_point
from qfpsim import (TruncationError, apply_generator,
                    coherent_state, evolve, fock_state, solve_steady,
                    build_superoperator, thermal_state, trace_distance)
from qfpsim.dynamics import export_csv, export_states, load_states


class TestEvolveBasics:
    def test_time_zero_returns_input(self):
        rho0 = fock_state(2, 10)
        traj = evolve(canonical(), rho0, [0.0])
        assert len(traj) == 1
        assert np.allclose(traj.states[0].matrix, rho0.matrix)

    def test_t_grid_validation(self):
        rho0 = fock_state(0, 8)
        with pytest.raises(ValueError, match="start at 0"):
            evolve(canonical(), rho0, [1.0, 2.0])
        with pytest.raises(ValueError, match="increasing"):
            evolve(canonical(), rho0, [0.0, 2.0, 1.0])

    def test_rtol_validation(self):
        rho0 = fock_state(0, 8)
        with pytest.raises(ValueError, match="rtol"):
            evolve(canonical(), rho0, [0.0, 1.0], rtol=1e-3)

    def test_reference_dimension_mismatch(self):
        from qfpsim.errors import DimensionError

        with pytest.raises(DimensionError, match="reference"):
            evolve(canonical(), fock_state(0, 8), [0.0, 1.0],
                   reference=fock_state(0, 10))

    def test_truncation_guard(self, monkeypatch):
        # the finite-n generator is exactly CPTP, so the guard only fires on
        # integrator failure; exercise it with an injected negative state
        import qfpsim.dynamics as dyn

        bad = np.diag([1.0 + 1e-5, -1e-5]).astype(complex)
        monkeypatch.setattr(dyn, "_evolve_rk45", lambda *a, **k: [bad])
        with pytest.raises(TruncationError):
            evolve(canonical(), fock_state(0, 2), [0.0, 1.0])

    def test_stiffness_error_mapping(self, monkeypatch):
        import qfpsim.dynamics as dyn
        from qfpsim.errors import StiffnessError

        class FailedSolution:
            status = -1
            message = "Required step size is less than spacing between numbers."

        monkeypatch.setattr(dyn, "solve_ivp", lambda *a, **k: FailedSolution())
        with pytest.raises(StiffnessError, match="reduce n"):
            evolve(canonical(), fock_state(0, 8), [0.0, 1.0])


class TestTraceConservation:
    def test_purity_point_trace_drift(self):
        # d-values forced by the purity conditions:
        # d_qq = gamma/(2 sqrt(omega^2-gamma^2)), d_pq = -gamma d_qq, d_pp = omega^2 d_qq
        params = purity_point()
        assert params.d_qq == pytest.approx(0.375)
        assert params.d_pq == pytest.approx(-0.225)
        assert params.d_pp == pytest.approx(0.375)
        rho0 = fock_state(0, 24)
        traj = evolve(params, rho0, np.linspace(0.0, 10.0, 21), rtol=1e-9)
        assert traj.trace_errors.max() <= 1e-10

    def test_short_time_taylor(self):
        # || rho(h) - rho0 - h L*(rho0) || = O(h^2): halving h quarters it
        params = canonical()
        rho0 = thermal_state(1.0, 14)
        lrho = apply_generator(params, rho0.matrix)
        errs = []
        for h in (0.02, 0.01):
            traj = evolve(params, rho0, [0.0, h], rtol=1e-12)
            errs.append(np.linalg.norm(
                traj.states[1].matrix - rho0.matrix - h * lrho))
        ratio = errs[0] / errs[1]
        assert 3.0 <= ratio <= 5.0

    def test_positivity_along_trajectory(self):
        params = canonical()
        for rho0 in (fock_state(1, 20), thermal_state(1.6, 20),
                     coherent_state(0.7, 20)):
            assert rho0.top_weight() <= 1e-10
            traj = evolve(params, rho0, np.linspace(0.0, 4.0, 9), rtol=1e-9)
            assert traj.min_eigenvalues.min() >= -1e-7


class TestContractivity:
    def test_trace_distance_nonincreasing(self):
        params = canonical()
        t = np.linspace(0.0, 6.0, 13)
        t1 = evolve(params, fock_state(0, 18), t, rtol=1e-10)
        t2 = evolve(params, fock_state(2, 18), t, rtol=1e-10)
        dists = [trace_distance(a, b) for a, b in zip(t1.states, t2.states)]
        assert all(d2 <= d1 + 1e-7 for d1, d2 in zip(dists, dists[1:]))


class TestConvergence:
    def test_three_initial_states_reach_common_steady(self):
        params = canonical()
        n = 30
        steady = solve_steady(build_superoperator(params, n)).rho_ss
        t = np.linspace(0.0, 25.0, 11)
        finals = []
        for rho0 in (fock_state(2, n), thermal_state(1.0, n),
                     coherent_state(1.0, n)):
            traj = evolve(params, rho0, t, rtol=1e-8, reference=steady)
            # contraction towards the invariant state is monotone (small
            # slack for integrator noise)
            d = traj.trace_dist_to_ref
            assert all(b <= a + 1e-7 for a, b in zip(d, d[1:]))
            assert d[-1] <= 1e-4
            finals.append(traj.final)
        for i, a in enumerate(finals):
            for b in finals[:i]:
                assert trace_distance(a, b) <= 1e-4


class TestExpmCrossValidation:
    def test_rk45_matches_expm(self):
        params = canonical()
        rho0 = coherent_state(0.6 + 0.2j, 12)
        t = np.linspace(0.0, 3.0, 7)
        t_rk = evolve(params, rho0, t, rtol=1e-11)
        t_ex = evolve(params, rho0, t, method="expm")
        for a, b in zip(t_rk.states, t_ex.states):
            assert trace_distance(a, b) <= 1e-8

    def test_expm_dimension_guard(self):
        from qfpsim.errors import DimensionError

        with pytest.raises(DimensionError):
            evolve(canonical(), fock_state(0, 30), [0.0, 1.0], method="expm")


class TestExports:
    def test_csv_columns(self, tmp_path):
        params = canonical()
        steady = solve_steady(build_superoperator(params, 12)).rho_ss
        traj = evolve(params, fock_state(0, 12), [0.0, 0.5, 1.0],
                      reference=steady)
        path = tmp_path / "traj.csv"
        export_csv(traj, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,trace_error,min_eig,trace_dist_to_ref"
        assert len(lines) == 4
        assert len(lines[1].split(",")) == 4

    def test_states_roundtrip(self, tmp_path):
        traj = evolve(canonical(), thermal_state(1.0, 10), [0.0, 0.5, 1.0])
        header = tmp_path / "states.json"
        payload = tmp_path / "states.bin"
        export_states(traj, header, payload)
        times, mats = load_states(header)
        assert np.allclose(times, traj.times)
        assert mats.shape == (3, 10, 10)
        for k in range(3):
            assert np.allclose(mats[k], traj.states[k].matrix)
