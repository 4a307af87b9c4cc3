from typing import Iterable, Literal, Tuple
import math
import numpy as np
import pandas as pd
import scipy.linalg

from app.exceptions import ConfigurationError, NumericalFailureError
from app.models.physics_models import InterfaceLaw, MaterialHalfSpaces, Sinusoidal
from app.models.scattering_models import ReducedParams, ScatteringSpectrum, TridiagonalSystem
from logger_config import logger


PIVOT_TOLERANCE = 1e-14
RESIDUAL_TOLERANCE = 1e-12


# --- Helpers

def _assemble(stiff: float, loss: float, eps: float, eps_loss: float, omega: float, Omega: float,
              N: int) -> TridiagonalSystem:
    if N < 1:
        raise ConfigurationError(f"harmonic truncation N={N} must be at least 1")
    k = np.arange(-N, N + 1)
    omega_k = omega + k * Omega
    coupling = (stiff * eps * omega_k - 1j * loss * eps_loss) / 4.0

    lower = coupling.astype(complex)
    upper = -coupling.astype(complex)
    lower[0] = 0.0
    upper[-1] = 0.0
    diag = 1.0 + loss / 2.0 + 0.5j * stiff * omega_k

    rhs = np.zeros(2 * N + 1, dtype=complex)
    rhs[N] = 1.0 - loss / 2.0 - 0.5j * stiff * omega
    rhs[N - 1] = coupling[N - 1]
    rhs[N + 1] = -coupling[N + 1]
    return TridiagonalSystem(lower=lower, diag=diag.astype(complex), upper=upper, rhs=rhs)


def assemble_psi_system(rp: ReducedParams, eps_C: float, eps_QC: float, omega: float, Omega: float,
                        N: int) -> TridiagonalSystem:
    """Harmonic balance of the velocity jump condition, unknowns Psi_k = T_k - R_k."""
    return _assemble(rp.Ccal, rp.Qcal_C, eps_C, eps_QC, omega, Omega, N)


def assemble_phi_system(rp: ReducedParams, eps_M: float, eps_QM: float, omega: float, Omega: float,
                        N: int) -> TridiagonalSystem:
    """Harmonic balance of the stress jump condition, unknowns Phi_k = T_k + R_k."""
    return _assemble(rp.Mcal, rp.Qcal_M, eps_M, eps_QM, omega, Omega, N)


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """
    Thomas elimination; falls back to banded LU with partial pivoting when a pivot vanishes.

    Raises:
        NumericalFailureError: singular system
    """
    a, b, c, d = system.lower, system.diag, system.upper, system.rhs
    n = system.size
    scale = max(float(np.max(np.abs(b))), float(np.max(np.abs(a))), float(np.max(np.abs(c))), 1e-300)
    c_prime = np.zeros(n, dtype=complex)
    d_prime = np.zeros(n, dtype=complex)
    x = np.zeros(n, dtype=complex)

    pivot = b[0]
    stable = abs(pivot) > PIVOT_TOLERANCE * scale
    if stable:
        c_prime[0] = c[0] / pivot
        d_prime[0] = d[0] / pivot
        for i in range(1, n):
            pivot = b[i] - a[i] * c_prime[i - 1]
            if abs(pivot) <= PIVOT_TOLERANCE * scale:
                stable = False
                break
            c_prime[i] = c[i] / pivot
            d_prime[i] = (d[i] - a[i] * d_prime[i - 1]) / pivot

    if stable:
        x[-1] = d_prime[-1]
        for i in range(n - 2, -1, -1):
            x[i] = d_prime[i] - c_prime[i] * x[i + 1]
        return x

    logger.warning("tridiagonal pivot underflow, falling back to banded LU")
    banded = np.zeros((3, n), dtype=complex)
    banded[0, 1:] = c[:-1]
    banded[1, :] = b
    banded[2, :-1] = a[1:]
    try:
        return scipy.linalg.solve_banded((1, 1), banded, d)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailureError(f"singular harmonic-balance system: {str(e)}") from e


def _solve_checked(system: TridiagonalSystem, name: str) -> np.ndarray:
    solution = solve_tridiagonal(system)
    residual = np.linalg.norm(system.dense() @ solution - system.rhs)
    if not np.isfinite(residual) or residual > RESIDUAL_TOLERANCE * max(1.0, np.linalg.norm(system.rhs)):
        raise NumericalFailureError(f"{name} system residual {residual:.3e} above tolerance")
    return solution


# --- Scattering

def solve_scattering(law: InterfaceLaw, material: MaterialHalfSpaces, f_c: float, N: int = 12) -> ScatteringSpectrum:
    """
    Floquet coefficients R_k, T_k of a sinusoidally modulated interface in a homogeneous medium.

    Args:
        law: interface law (sinusoidal kind, or static)
        material: homogeneous bulk medium
        f_c: incident frequency (Hz)
        N: harmonics kept on each side

    Returns:
        ScatteringSpectrum
    """
    if not material.is_homogeneous:
        raise ConfigurationError("harmonic balance assumes the same medium on both sides of the interface")
    if not isinstance(law.kind, Sinusoidal) and not law.is_static:
        raise ConfigurationError(f"harmonic balance supports sinusoidal modulation only, got {law.kind.kind}")

    rp = ReducedParams.from_law(law, material.Z_minus)
    omega, Omega = 2.0 * math.pi * f_c, law.omega_m
    psi = _solve_checked(assemble_psi_system(rp, law.eps_C, law.eps_QC, omega, Omega, N), "Psi")
    phi = _solve_checked(assemble_phi_system(rp, law.eps_M, law.eps_QM, omega, Omega, N), "Phi")
    return ScatteringSpectrum(omega=omega, Omega=Omega, N=N, R=0.5 * (phi - psi), T=0.5 * (psi + phi))


def spectrum_frame(spectrum: ScatteringSpectrum) -> pd.DataFrame:
    """CSV layout: k, omega_k, Re/Im/abs of R_k and T_k."""
    return pd.DataFrame({
        "k": spectrum.k,
        "omega_k": spectrum.omega_k,
        "Re_R": spectrum.R.real,
        "Im_R": spectrum.R.imag,
        "abs_R": np.abs(spectrum.R),
        "Re_T": spectrum.T.real,
        "Im_T": spectrum.T.imag,
        "abs_T": np.abs(spectrum.T),
    })


# --- Static closed forms

def static_rt(material: MaterialHalfSpaces, law: InterfaceLaw, omega: float,
              convention: Literal["stress", "velocity"] = "stress") -> Tuple[complex, complex]:
    """
    Reflection and transmission of a static imperfect interface at angular frequency omega.

    "stress" evaluates the closed form with Z0, Z1, Z2 = rho0 c1, Y0, Y1 and (omega/omega#)^2 = omega^2 C0 M0 / 4.
    "velocity" solves the two jump conditions for the velocity amplitudes of the reflected and
    transmitted waves (the convention of the harmonic-balance ansatz).
    """
    C0, M0, QC0, QM0 = law.C0, law.M0, law.QC0, law.QM0
    if convention == "velocity":
        z0, z1 = material.Z_minus, material.Z_plus
        a = 1j * omega * C0 + QC0
        b = 1j * omega * M0 + QM0
        # stress row divided by z0
        matrix = np.array([[-1.0 - a * z0 / 2.0, 1.0 + a * z1 / 2.0],
                           [-1.0 - b / (2.0 * z0), -z1 / z0 - b / (2.0 * z0)]], dtype=complex)
        rhs = np.array([1.0 - a * z0 / 2.0, b / (2.0 * z0) - 1.0], dtype=complex)
        r, t = np.linalg.solve(matrix, rhs)
        return complex(r), complex(t)
    if convention != "stress":
        raise ConfigurationError(f"unknown convention {convention!r}")

    z0, z1 = material.Z_minus, material.Z_plus
    z2 = material.rho_minus * material.c_plus
    y0 = C0 * z0 * z1 - M0
    y1 = C0 * z0 * z1 + M0
    ratio2 = omega ** 2 * C0 * M0 / 4.0
    q = (QC0 * M0 + QM0 * C0) / 4.0
    q_prod = QC0 * QM0 / 4.0

    denominator = (z1 + z0) * (1.0 - ratio2 + q_prod) + QC0 * z0 * z1 + QM0 + 1j * omega * (y1 + q * (z1 + z0))
    r = ((z1 - z0) * (1.0 - ratio2 + q_prod) - QC0 * z0 * z1 + QM0 - 1j * omega * (y0 + q * (z1 - z0))) / denominator
    t = 2.0 * z2 * (1.0 + ratio2 - q_prod - 1j * omega * q) / denominator
    return complex(r), complex(t)


def static_rt_sweep(material: MaterialHalfSpaces, law: InterfaceLaw, frequencies: Iterable[float],
                    convention: Literal["stress", "velocity"] = "stress") -> pd.DataFrame:
    """
    |R|, |T| and phases of the static interface over a list of frequencies (Hz).

    The convention column names the amplitudes the coefficients relate: "stress" rows are not
    comparable with the velocity-amplitude coefficients of the harmonic-balance spectrum.
    """
    rows = []
    for f in frequencies:
        r, t = static_rt(material, law, 2.0 * math.pi * f, convention)
        rows.append({"f": f, "abs_R": abs(r), "arg_R": np.angle(r), "abs_T": abs(t), "arg_T": np.angle(t),
                     "convention": convention})
    return pd.DataFrame(rows, columns=["f", "abs_R", "arg_R", "abs_T", "arg_T", "convention"])


def is_impedance_matched(law: InterfaceLaw, impedance: float, rtol: float = 1e-9) -> bool:
    """M(t) = Z^2 C(t) and Q_M(t) = Z^2 Q_C(t) at every instant: the Psi and Phi systems coincide."""
    rp = ReducedParams.from_law(law, impedance)
    return (
        math.isclose(rp.Ccal, rp.Mcal, rel_tol=rtol) and math.isclose(rp.Qcal_C, rp.Qcal_M, rel_tol=rtol, abs_tol=1e-300)
        and math.isclose(law.eps_C, law.eps_M, rel_tol=rtol, abs_tol=0.0)
        and math.isclose(law.eps_QC, law.eps_QM, rel_tol=rtol, abs_tol=0.0)
    )
