import math

import numpy as np
import pytest

from app.exceptions import ConfigurationError
from app.models.physics_models import InterfaceLaw, Rectangular
from app.models.scattering_models import ReducedParams, TridiagonalSystem
from app.services.hbm import (
    assemble_psi_system, is_impedance_matched, solve_scattering, solve_tridiagonal, spectrum_frame, static_rt,
    static_rt_sweep,
)


Z_HOMOGENEOUS = 1200.0 * 2800.0


class TestTridiagonal:
    def test_matches_dense_solve(self):
        n = 9
        rng = np.random.default_rng(7)
        system = TridiagonalSystem(
            lower=rng.normal(size=n) + 1j * rng.normal(size=n),
            diag=4.0 + rng.normal(size=n) + 1j * rng.normal(size=n),
            upper=rng.normal(size=n) + 1j * rng.normal(size=n),
            rhs=rng.normal(size=n) + 0j,
        )
        assert np.allclose(solve_tridiagonal(system), np.linalg.solve(system.dense(), system.rhs), atol=1e-12)

    def test_zero_leading_pivot_falls_back(self):
        system = TridiagonalSystem(
            lower=np.array([0.0, 1.0, 1.0], dtype=complex),
            diag=np.array([0.0, 1.0, 2.0], dtype=complex),
            upper=np.array([1.0, 1.0, 0.0], dtype=complex),
            rhs=np.array([1.0, 2.0, 3.0], dtype=complex),
        )
        assert np.allclose(system.dense() @ solve_tridiagonal(system), system.rhs)

    def test_truncation_must_be_positive(self):
        rp = ReducedParams(Ccal=1e-3, Qcal_C=0.0, Mcal=1e-3, Qcal_M=0.0)
        with pytest.raises(ConfigurationError):
            assemble_psi_system(rp, 0.5, 0.0, 1.0, 1.0, 0)


class TestScattering:
    def test_truncation_convergence(self, material, modulated_law):
        law = modulated_law.updated(f_m=30.0)
        coarse = solve_scattering(law, material, 100.0, 12)
        fine = solve_scattering(law, material, 100.0, 24)
        for k in range(-4, 5):
            assert abs(coarse.coefficient("R", k) - fine.coefficient("R", k)) < 1e-6
            assert abs(coarse.coefficient("T", k) - fine.coefficient("T", k)) < 1e-6

    def test_static_limit_matches_closed_form(self, material):
        law = InterfaceLaw(C0=1.0 / 2.45e9, M0=2.0e4, QC0=1e-7, f_m=30.0)
        spectrum = solve_scattering(law, material, 100.0, 12)
        r, t = static_rt(material, law, 2.0 * math.pi * 100.0, convention="velocity")
        assert abs(spectrum.coefficient("R", 0) - r) < 1e-10
        assert abs(spectrum.coefficient("T", 0) - t) < 1e-10
        others = np.delete(np.arange(25), 12)
        assert np.all(np.abs(spectrum.R[others]) < 1e-14)

    def test_matched_interface_reflects_nothing(self, material, matched_law):
        spectrum = solve_scattering(matched_law, material, 45.0, 12)
        assert np.max(np.abs(spectrum.R)) < 1e-12
        assert np.abs(spectrum.T).max() > 0.0

    def test_downshift_to_dc_vanishes(self, material, modulated_law):
        law = modulated_law.updated(f_m=30.0)
        spectrum = solve_scattering(law, material, 30.0, 12)
        assert abs(spectrum.coefficient("R", -1)) < 1e-14
        assert abs(spectrum.coefficient("T", -1)) < 1e-14

    def test_needs_one_medium(self, bimaterial, modulated_law):
        with pytest.raises(ConfigurationError):
            solve_scattering(modulated_law, bimaterial, 45.0)

    def test_needs_sinusoidal_kind(self, material):
        law = InterfaceLaw(C0=1e-10, eps_C=0.5, f_m=100.0, kind=Rectangular())
        with pytest.raises(ConfigurationError):
            solve_scattering(law, material, 45.0)

    def test_coefficient_outside_truncation(self, material, modulated_law):
        with pytest.raises(IndexError):
            solve_scattering(modulated_law, material, 45.0, 3).coefficient("T", 4)

    def test_spectrum_frame_layout(self, material, modulated_law):
        frame = spectrum_frame(solve_scattering(modulated_law, material, 45.0, 5))
        assert list(frame.columns) == ["k", "omega_k", "Re_R", "Im_R", "abs_R", "Re_T", "Im_T", "abs_T"]
        assert len(frame) == 11


class TestStaticClosedForms:
    def test_stress_and_velocity_reflections_have_opposite_sign(self, material):
        law = InterfaceLaw(C0=1.0 / 2.45e9)
        omega = 2.0 * math.pi * 45.0
        r_s, t_s = static_rt(material, law, omega, "stress")
        r_v, t_v = static_rt(material, law, omega, "velocity")
        assert r_s == pytest.approx(-r_v, rel=1e-12)
        assert t_s == pytest.approx(t_v, rel=1e-12)
        assert abs(r_s) ** 2 + abs(t_s) ** 2 == pytest.approx(1.0, rel=1e-12)

    def test_matched_static_interface(self, material):
        law = InterfaceLaw(C0=1.2e4 / Z_HOMOGENEOUS ** 2, M0=1.2e4)
        r, t = static_rt(material, law, 2.0 * math.pi * 80.0, "stress")
        assert abs(r) < 1e-9
        assert abs(t) == pytest.approx(1.0, rel=1e-9)

    def test_perfect_contact_between_different_media(self, bimaterial):
        r, t = static_rt(bimaterial, InterfaceLaw(), 2.0 * math.pi * 45.0, "stress")
        z0, z1 = bimaterial.Z_minus, bimaterial.Z_plus
        assert r == pytest.approx((z1 - z0) / (z1 + z0))

    def test_unknown_convention(self, material):
        with pytest.raises(ConfigurationError):
            static_rt(material, InterfaceLaw(), 1.0, "energy")

    def test_sweep_columns(self, material):
        frame = static_rt_sweep(material, InterfaceLaw(C0=1e-10), [10.0, 20.0])
        assert list(frame.columns) == ["f", "abs_R", "arg_R", "abs_T", "arg_T", "convention"]
        assert set(frame["convention"]) == {"stress"}
        assert frame["abs_R"].iloc[1] > frame["abs_R"].iloc[0]


class TestImpedanceMatching:
    def test_matched(self, matched_law):
        assert is_impedance_matched(matched_law, Z_HOMOGENEOUS)

    def test_unmatched(self, modulated_law):
        assert not is_impedance_matched(modulated_law, Z_HOMOGENEOUS)
        assert not is_impedance_matched(InterfaceLaw(C0=1.2e4 / Z_HOMOGENEOUS ** 2, M0=1.2e4, eps_C=0.5),
                                        Z_HOMOGENEOUS)
