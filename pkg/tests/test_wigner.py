import json

import numpy as np
import pytest

from qfpsim import (GridError, GuardError, ParameterError, PhaseSpaceGrid,
                    characteristic_function, coherent_state,
                    density_kernel, dictionary_moments, fock_state,
                    thermal_state, wfp_residual, wigner_from_characteristic,
                    wigner_transform)


def grid(extent=6.0, count=97):
    return PhaseSpaceGrid(extent, count, extent, count)


class TestGridSpec:
    def test_even_count_rejected(self):
        with pytest.raises(GridError, match="odd"):
            PhaseSpaceGrid(6.0, 96, 6.0, 97)

    def test_refine_halves_spacing(self):
        g = grid(6.0, 49)
        fine = g.refine()
        assert fine.dx == pytest.approx(g.dx / 2)
        assert fine.x_max == g.x_max


class TestDensityKernel:
    def test_ground_state_gaussian(self):
        x = np.linspace(-5, 5, 81)
        kern = density_kernel(fock_state(0, 12), x)
        expected = np.pi**-0.5 * np.exp(-(x[:, None]**2 + x[None, :]**2) / 2)
        assert np.max(np.abs(kern - expected)) <= 1e-12

    def test_diagonal_integrates_to_trace(self):
        x = np.linspace(-7, 7, 201)
        kern = density_kernel(thermal_state(1.0, 24), x)
        assert np.trapezoid(np.real(np.diag(kern)), x) == pytest.approx(1.0, abs=1e-6)

    def test_hermitian_kernel(self):
        x = np.linspace(-6, 6, 61)
        kern = density_kernel(coherent_state(0.5 + 0.5j, 16), x)
        assert np.max(np.abs(kern - kern.conj().T)) <= 1e-12

    def test_coarse_grid_rejected(self):
        x = np.linspace(-3, 3, 11)
        with pytest.raises(GridError, match="coarse"):
            density_kernel(thermal_state(1.0, 40), x)

    def test_asymmetric_grid_rejected(self):
        with pytest.raises(GridError, match="symmetric"):
            density_kernel(fock_state(0, 8), np.linspace(-2, 4, 31))


class TestWignerTransform:
    def test_ground_state_analytic(self):
        g = grid()
        w = wigner_transform(fock_state(0, 20), g)
        expected = (1 / np.pi) * np.exp(-g.x[:, None]**2 - g.v[None, :]**2)
        assert np.max(np.abs(w.values - expected)) <= 1e-6
        assert w.max_imag <= 1e-10

    def test_thermal_mass(self):
        w = wigner_transform(thermal_state(1.0, 40), grid(8.0, 129))
        assert abs(w.mass - 1.0) <= 1e-4

    def test_first_excited_laguerre(self):
        # analytic oracle: w_1(x,v) = -(1/pi)(1 - 2r^2) e^{-r^2}
        g = grid()
        w = wigner_transform(fock_state(1, 20), g)
        r2 = g.x[:, None]**2 + g.v[None, :]**2
        expected = -(1 / np.pi) * (1 - 2 * r2) * np.exp(-r2)
        assert np.max(np.abs(w.values - expected)) <= 1e-6
        center = (g.x_count // 2, g.v_count // 2)
        assert w.values[center] == pytest.approx(-1 / np.pi, abs=1e-4)
        assert w.values.min() < -0.05

    def test_mass_for_library_states(self):
        g = grid(8.0, 129)
        for rho in (fock_state(0, 40), fock_state(3, 40),
                    thermal_state(1.0, 40), coherent_state(1.0, 40)):
            w = wigner_transform(rho, g)
            assert abs(w.mass - 1.0) <= 1e-4
            assert w.max_imag <= 1e-10

    def test_mass_for_random_state(self):
        # random library states are broad (<q^2> ~ dim/2), so the 6-sigma
        # grid is correspondingly large
        from qfpsim import random_state
        from qfpsim.fock import build_canonical

        rho = random_state(40, np.random.default_rng(8))
        q, p, _ = build_canonical(40)
        sigma = np.sqrt(max(np.real(np.trace(q @ q @ rho.matrix)),
                            np.real(np.trace(p @ p @ rho.matrix))))
        w = wigner_transform(rho, PhaseSpaceGrid(3.2 * sigma, 257,
                                                 3.2 * sigma, 257))
        assert abs(w.mass - 1.0) <= 1e-4
        assert w.max_imag <= 1e-10

    def test_aliasing_detector(self):
        with pytest.raises(GridError, match="aliasing|enlarge"):
            wigner_transform(thermal_state(0.5, 30), grid(2.5, 49))


class TestCharacteristicFunction:
    def test_normalization_point(self):
        for rho in (fock_state(0, 16), thermal_state(1.0, 16)):
            sample = characteristic_function(rho, 0.0, 0.0)
            assert sample.value == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("xi,eta", [(0.5, 0.0), (1.0, 1.0), (2.0, -1.5)])
    def test_ground_state_gaussian(self, xi, eta):
        # coherent-overlap oracle: <0|D(alpha)|0> = e^{-|alpha|^2/2},
        # |alpha|^2 = (xi^2+eta^2)/2
        sample = characteristic_function(fock_state(0, 24), xi, eta)
        assert sample.value == pytest.approx(np.exp(-(xi**2 + eta**2) / 4), abs=1e-12)

    def test_modulus_bounded_by_trace(self):
        rng = np.random.default_rng(1)
        rho = thermal_state(0.7, 20)
        for _ in range(10):
            xi, eta = rng.uniform(-2, 2, size=2)
            assert abs(characteristic_function(rho, xi, eta).value) <= 1.0 + 1e-12

    def test_guard(self):
        with pytest.raises(GuardError):
            characteristic_function(fock_state(0, 10), 4.0, 4.0)


class TestPipelineAgreement:
    def test_kernel_fft_vs_characteristic(self):
        rho = thermal_state(1.0, 24)
        g = grid(6.5, 41)
        w_kernel = wigner_transform(rho, g)
        w_char = wigner_from_characteristic(rho, g)
        assert np.max(np.abs(w_kernel.values - w_char.values)) <= 1e-4

    def test_displaced_thermal_complex_state(self):
        # a displaced thermal state has a genuinely complex density matrix
        # and an off-center Wigner blob, exercising the conjugate-mirror
        # bookkeeping of the sampled characteristic function
        from scipy.linalg import expm

        from qfpsim import normalize_density
        from qfpsim.fock import build_ladder

        n, alpha = 28, 0.8 + 0.5j
        a, a_dag = build_ladder(n)
        disp = expm(alpha * a_dag.astype(complex) - np.conj(alpha) * a)
        rho = normalize_density(disp @ thermal_state(1.0, n).matrix
                                @ disp.conj().T)
        g = grid(7.5, 61)
        w_kernel = wigner_transform(rho, g)
        w_char = wigner_from_characteristic(rho, g)
        assert np.max(np.abs(w_kernel.values - w_char.values)) <= 1e-4
        # blob centered at (sqrt(2) Re alpha, sqrt(2) Im alpha)
        i, j = np.unravel_index(np.argmax(w_kernel.values),
                                w_kernel.values.shape)
        assert abs(g.x[i] - np.sqrt(2) * alpha.real) <= g.dx
        assert abs(g.v[j] - np.sqrt(2) * alpha.imag) <= g.dv

    def test_pure_displaced_state_guard_disk_detected(self):
        # for a near-pure state phi only decays like exp(-r^2/4), so the
        # truncation-guard disk cut leaves ringing that the aliasing
        # detector must catch rather than silently absorb
        rho = coherent_state(0.8 + 0.5j, 28)
        with pytest.raises(GridError, match="aliasing|enlarge"):
            wigner_from_characteristic(rho, grid(7.5, 61))


class TestDictionaryMoments:
    def test_displaced_state_first_moment(self):
        # ladder-algebra oracle: tr(q rho) = sqrt(2) Re alpha for a coherent state
        alpha = 1.0
        rho = coherent_state(alpha, 40)
        w = wigner_transform(rho, grid(8.0, 129))
        report = dictionary_moments(rho, w)
        lhs, rhs, residual = report.rows["mean_x"]
        assert lhs == pytest.approx(np.sqrt(2) * alpha, abs=1e-4)
        assert rhs == pytest.approx(np.sqrt(2) * alpha, abs=1e-10)
        assert residual <= 1e-4

    def test_ground_state_moments_vanish(self):
        rho = fock_state(0, 20)
        w = wigner_transform(rho, grid())
        report = dictionary_moments(rho, w)
        for name in ("mean_x", "mean_v", "xv"):
            assert abs(report.rows[name][0]) <= 1e-8

    def test_thermal_second_moments(self):
        # geometric-series oracle: <N> = 1/(e^{beta omega}-1), so
        # integral (x^2+v^2) w = 2<N>+1
        rho = thermal_state(1.0, 40)
        w = wigner_transform(rho, grid(8.0, 129))
        report = dictionary_moments(rho, w)
        total = report.rows["x2"][0] + report.rows["v2"][0]
        assert total == pytest.approx(2.0 / (np.e - 1.0) + 1.0, abs=1e-4)
        assert report.max_relative_residual <= 1e-4

    def test_all_rows_small_for_steady(self, canonical_steady_40):
        rho = canonical_steady_40.rho_ss
        w = wigner_transform(rho, grid(9.0, 145))
        report = dictionary_moments(rho, w)
        assert report.max_relative_residual <= 1e-4


class TestWfpResidual:
    def test_steady_state_satisfies_equation(self, canonical_params,
                                             canonical_steady_40):
        w = wigner_transform(canonical_steady_40.rho_ss, grid(8.0, 161))
        res = wfp_residual(w, canonical_params)
        assert res.relative <= 1e-3

    def test_negative_control(self, canonical_params):
        # the oscillator ground state is not steady for the dissipative set
        w = wigner_transform(fock_state(0, 40), grid(8.0, 161))
        res = wfp_residual(w, canonical_params)
        assert res.relative > 0.1

    def test_fourth_order_refinement(self, canonical_params, canonical_steady_40):
        rho = canonical_steady_40.rho_ss
        coarse = wfp_residual(wigner_transform(rho, grid(8.0, 81)),
                              canonical_params)
        fine = wfp_residual(wigner_transform(rho, grid(8.0, 161)),
                            canonical_params)
        ratio = coarse.max_abs / fine.max_abs
        assert 8.0 <= ratio <= 24.0

    def test_requires_no_potential(self, canonical_steady_40):
        from qfpsim import PotentialSpec, QfpParams

        params = QfpParams(omega=1.0, gamma=0.5, d_pp=1.0, d_qq=0.5,
                           potential=PotentialSpec.cosine(0.5, 1.0))
        w = wigner_transform(canonical_steady_40.rho_ss, grid(8.0, 81))
        with pytest.raises(ParameterError, match="V = 0"):
            wfp_residual(w, params)

    def test_gaussian_steady_wigner_positive(self, canonical_steady_40):
        # mixed Gaussian states have everywhere-positive Wigner functions
        w = wigner_transform(canonical_steady_40.rho_ss, grid(8.0, 81))
        assert w.values.min() >= -1e-8


class TestExports:
    def test_csv(self, tmp_path):
        w = wigner_transform(fock_state(0, 12), grid(5.0, 41))
        path = tmp_path / "w.csv"
        w.export_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,v,w"
        assert len(lines) == 1 + 41 * 41

    def test_binary_roundtrip(self, tmp_path):
        w = wigner_transform(thermal_state(1.0, 16), grid(6.0, 33))
        header, payload = tmp_path / "w.json", tmp_path / "w.bin"
        w.export_binary(header, payload)
        meta = json.loads(header.read_text())
        assert meta["byte_order"] == "little-endian"
        assert meta["shape"] == [33, 33]
        data = np.fromfile(payload, dtype="<f8").reshape(33, 33)
        assert np.allclose(data, w.values)
        assert meta["x"]["spacing"] == pytest.approx(w.dx)
