from math import factorial

import numpy as np
import pytest

from app.exceptions import ConfigurationError
from app.models.physics_models import InterfaceLaw, QuasiPeriodic
from app.models.simulation_models import FieldState
from app.services.esim import (
    EsimInterface, build_jump_matrices, fit_boundary_derivatives, interface_traces, modified_values, transfer_matrix,
)
from app.services.fdtd import override_nodes
from app.services.modulation import interface_params


def _polynomial_state(grid, material, coefficients_v, coefficients_s):
    s = grid.x - material.x0
    v = sum(c * s ** m for m, c in enumerate(coefficients_v))
    sigma = sum(c * s ** m for m, c in enumerate(coefficients_s))
    return FieldState(t=0.0, v=v, sigma=sigma)


class TestJumpMatrices:
    def test_perfect_contact_is_identity(self, material, grid):
        jm = build_jump_matrices(InterfaceLaw(), material, 0.0, 5, length_scale=grid.dx)
        assert jm.size == 12
        assert np.allclose(transfer_matrix(jm), np.eye(12), atol=1e-9)

    def test_static_compliance_jump(self, material):
        """Zeroth row: [v] = C <sigma_t> = (C E / 2)(v_x+ + v_x-), [sigma] = 0."""
        C0 = 1.0 / 2.45e9
        jm = build_jump_matrices(InterfaceLaw(C0=C0), material, 0.0, 1, length_scale=1.0)
        d = transfer_matrix(jm)
        minus = np.array([0.3, -2.0e5, 0.01, 50.0])
        plus = d @ minus
        young = material.E_minus
        assert plus[1] == pytest.approx(minus[1], rel=1e-10)
        assert plus[0] - minus[0] == pytest.approx(0.5 * C0 * young * (plus[2] + minus[2]), rel=1e-8)

    def test_frozen_derivatives_leave_static_laws_unchanged(self, material):
        law = InterfaceLaw(C0=1.0 / 2.45e9, M0=2.0e4, QC0=1e-7)
        free = transfer_matrix(build_jump_matrices(law, material, 0.0, 5, length_scale=1.0))
        frozen = transfer_matrix(build_jump_matrices(law, material, 0.0, 5, True, length_scale=1.0))
        assert np.allclose(free, frozen, rtol=1e-12, atol=0.0)

    def test_modulated_law_depends_on_time(self, material, modulated_law):
        esim_a = build_jump_matrices(modulated_law, material, 0.0, 3, length_scale=1.0)
        esim_b = build_jump_matrices(modulated_law, material, 0.0025, 3, length_scale=1.0)
        assert not np.allclose(esim_a.cplus, esim_b.cplus)

    def test_negative_order(self, material):
        with pytest.raises(ConfigurationError):
            build_jump_matrices(InterfaceLaw(), material, 0.0, -1)


class TestFit:
    def test_polynomial_fields_are_recovered(self, grid, material):
        coefficients_v = [0.2, -0.05, 0.01, 2e-3, -1e-4, 3e-6]
        coefficients_s = [1e5, 2e4, -3e3, 50.0, 1.0, -0.02]
        state = _polynomial_state(grid, material, coefficients_v, coefficients_s)
        esim = EsimInterface(grid, material, InterfaceLaw(), k=5)
        bd = esim.fit(state)
        derivatives = bd.derivatives("-")
        for m in range(6):
            assert derivatives[m, 0] == pytest.approx(factorial(m) * coefficients_v[m], rel=1e-6, abs=1e-12)
            assert derivatives[m, 1] == pytest.approx(factorial(m) * coefficients_s[m], rel=1e-6, abs=1e-6)
        assert np.allclose(bd.uk_plus, bd.uk_minus, rtol=1e-9, atol=1e-12)

    def test_overrides_reproduce_smooth_data(self, grid, material):
        state = _polynomial_state(grid, material, [0.2, -0.05, 0.01, 2e-3], [1e5, 2e4, -3e3, 50.0])
        overrides, traces = EsimInterface(grid, material, InterfaceLaw(), k=5).update(state)
        i_left = grid.interface_index(material.x0)
        assert sorted(overrides) == list(override_nodes(i_left))
        for j, (v_star, s_star) in overrides.items():
            assert v_star == pytest.approx(state.v[j], rel=1e-9)
            assert s_star == pytest.approx(state.sigma[j], rel=1e-9)
        assert traces.jump_v == pytest.approx(0.0, abs=1e-9)
        assert traces.mean_v == pytest.approx(0.2, rel=1e-9)

    def test_least_squares_fit_with_more_nodes(self, grid, material):
        state = _polynomial_state(grid, material, [0.2, -0.05, 0.01], [1e5, 2e4, -3e3])
        d_k = np.eye(12)
        bd = fit_boundary_derivatives(state, d_k, grid, material, k=5, q=5)
        assert bd.derivatives("-")[1, 0] == pytest.approx(-0.05, rel=1e-6)
        values = modified_values(bd, grid, material)
        assert len(values) == 4
        assert interface_traces(bd).mean_sigma == pytest.approx(1e5, rel=1e-9)

    def test_too_few_nodes(self, grid, material):
        with pytest.raises(ConfigurationError):
            EsimInterface(grid, material, InterfaceLaw(), k=5, q=2)


# (amplitude, wavenumber 1/m, phase, direction): direction +1 travels right, -1 left
WAVES = [(0.8, 2.0 * np.pi * 50.0 / 2800.0, 0.3, 1), (0.5, 2.0 * np.pi * 80.0 / 2800.0, -1.1, -1)]


def _wave_derivatives(material, t, k):
    """(d/dx)^m (v, sigma) at x0 for m <= k of a superposition of travelling sines, stacked by block."""
    out = np.zeros(2 * (k + 1))
    for amplitude, wavenumber, phase, direction in WAVES:
        s = material.x0 - direction * material.c_minus * t
        for m in range(k + 1):
            d_m = amplitude * wavenumber ** m * np.sin(wavenumber * s + phase + m * np.pi / 2.0)
            out[2 * m] += d_m
            out[2 * m + 1] -= direction * material.Z_minus * d_m
    return out


def _jump_residual(law, material, t, k):
    """C+ W - C- W with the same exact bulk solution W on both sides."""
    jm = build_jump_matrices(law, material, t, k, length_scale=1.0)
    w = _wave_derivatives(material, t, k)
    return jm.cplus @ w - jm.cminus @ w


class TestTimeVaryingJumps:
    LAW = InterfaceLaw(C0=1.0 / 2.45e9, M0=2.0e4, QC0=1e-7, QM0=5e4, eps_C=0.75, eps_M=0.5, eps_QC=0.4,
                       eps_QM=0.3, f_m=100.0)

    def test_row_zero_matches_the_jump_conditions(self, material):
        """With equal sides the residual is -(d/dt(B U) + E U), U the bulk solution at x0."""
        t, h = 0.0031, 1e-6
        residual = _jump_residual(self.LAW, material, t, 3)

        def stress_weighted(tau):
            w = _wave_derivatives(material, tau, 0)
            params = interface_params(self.LAW, tau)
            return params.C * w[1], params.M * w[0]

        d_c = (np.array(stress_weighted(t + h)) - np.array(stress_weighted(t - h))) / (2.0 * h)
        w0 = _wave_derivatives(material, t, 0)
        params = interface_params(self.LAW, t)
        assert residual[0] == pytest.approx(-d_c[0] - params.QC * w0[1], rel=1e-6, abs=1e-6)
        assert residual[1] == pytest.approx(-d_c[1] - params.QM * w0[0], rel=1e-6, abs=1e-6 * material.Z_minus)

    @pytest.mark.parametrize("t", [0.0, 0.0031, 0.0077])
    def test_higher_rows_are_time_derivatives_of_row_zero(self, material, t):
        k, h = 3, 2e-6
        rows = _jump_residual(self.LAW, material, t, k).reshape(k + 1, 2)
        g_minus = _jump_residual(self.LAW, material, t - h, k)[:2]
        g_zero = rows[0]
        g_plus = _jump_residual(self.LAW, material, t + h, k)[:2]
        first = (g_plus - g_minus) / (2.0 * h)
        second = (g_plus - 2.0 * g_zero + g_minus) / h ** 2
        omega = 2.0 * np.pi * 100.0
        scale = np.array([1.0, material.Z_minus])
        for c in (0, 1):
            assert rows[1][c] == pytest.approx(first[c], rel=1e-5, abs=1e-6 * omega * scale[c])
            assert rows[2][c] == pytest.approx(second[c], rel=1e-4, abs=1e-5 * omega ** 2 * scale[c])


class TestTransferPeriodicity:
    @staticmethod
    def _equilibrated(law, material, t):
        jm = build_jump_matrices(law, material, t, 5, length_scale=1.0)
        scale = jm.column_scale
        return transfer_matrix(jm) * scale[:, None] / scale[None, :]

    def test_sinusoidal_law_repeats_every_period(self, material, modulated_law):
        period = 1.0 / modulated_law.f_m
        d_now = self._equilibrated(modulated_law, material, 0.0013)
        for shift in (period, 3.0 * period):
            assert np.allclose(self._equilibrated(modulated_law, material, 0.0013 + shift), d_now,
                               rtol=1e-7, atol=1e-8 * np.max(np.abs(d_now)))
        assert not np.allclose(self._equilibrated(modulated_law, material, 0.0013 + 0.5 * period), d_now,
                               rtol=1e-3, atol=1e-6)

    def test_quasi_periodic_law_does_not_repeat(self, material):
        law = InterfaceLaw(C0=1.0 / 2.45e9, eps_C=0.4, f_m=100.0, kind=QuasiPeriodic())
        d_now = self._equilibrated(law, material, 0.0013)
        assert not np.allclose(self._equilibrated(law, material, 0.0113), d_now, rtol=1e-3, atol=1e-6)
