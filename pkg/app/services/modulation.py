from fractions import Fraction
from typing import NamedTuple, Union
import math
import numpy as np

from app.exceptions import UnsupportedOrderError
from app.models.physics_models import (
    CauchyPulse, InterfaceLaw, ModulationKind, QuasiPeriodic, Rectangular, Sinusoidal, SourceSpec,
)


MAX_DERIVATIVE_ORDER = 6
SQRT2 = math.sqrt(2.0)

# S(xi) = sum_m a_m sin(b_m omega_c xi) on 0 < xi < 1/f_c
SOURCE_COEFFICIENTS = (Fraction(1), Fraction(-21, 32), Fraction(63, 768), Fraction(-1, 512))
SOURCE_HARMONICS = (1, 2, 4, 8)
_A = np.array([float(a) for a in SOURCE_COEFFICIENTS])
_B = np.array(SOURCE_HARMONICS, dtype=float)

Scalar = Union[float, np.ndarray]


class InterfaceParams(NamedTuple):
    C: Scalar
    M: Scalar
    QC: Scalar
    QM: Scalar


def _sine_derivative(omega: float, t: Scalar, order: int) -> Scalar:
    return omega ** order * np.sin(omega * t + order * math.pi / 2.0)


def _as_output(value, t):
    return float(value) if np.ndim(t) == 0 else value


def modulation_phi(kind: ModulationKind, omega_m: float, t: Scalar, order: int = 0) -> Scalar:
    """
    Modulation function or one of its time derivatives.

    Args:
        kind: sinusoidal, quasi-periodic or rectangular modulation
        omega_m: modulation angular frequency (rad/s)
        t: time(s) (s)
        order: derivative order, 0..6

    Returns:
        d^order phi / dt^order at t (float for scalar t)
    """
    if order < 0 or order > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(f"modulation derivative of order {order} requested, supported 0..{MAX_DERIVATIVE_ORDER}")

    if isinstance(kind, Sinusoidal):
        value = _sine_derivative(omega_m, t, order)
    elif isinstance(kind, QuasiPeriodic):
        value = _sine_derivative(omega_m, t, order) + _sine_derivative(SQRT2 * omega_m, t, order)
    elif isinstance(kind, Rectangular):
        if order > 0:
            value = np.zeros_like(np.asarray(t, dtype=float))
        else:
            fraction = np.mod(omega_m * np.asarray(t, dtype=float) / (2.0 * math.pi), 1.0)
            value = np.where(np.floor(fraction - kind.nu) % 2 == 0, 1.0, -1.0)
    else:
        raise TypeError(f"unknown modulation kind {kind!r}")
    return _as_output(value, t)


def interface_params(law: InterfaceLaw, t: Scalar, order: int = 0) -> InterfaceParams:
    """
    Compliance, inertia and the two dissipations (or their order-th derivatives) at time t.
    """
    phi = modulation_phi(law.kind, law.omega_m, t, order)
    values = []
    for channel in ("C", "M", "QC", "QM"):
        base, eps = law.base(channel), law.eps(channel)
        if order == 0:
            values.append(base * (1.0 + eps * phi))
        else:
            values.append(base * eps * phi)
    return InterfaceParams(*values)


def source_signal(f_c: float, xi: Scalar) -> Scalar:
    """Truncated sum of four sinusoids, C6 at both ends of its support [0, 1/f_c]."""
    xi_arr = np.asarray(xi, dtype=float)
    omega_c = 2.0 * math.pi * f_c
    inside = (xi_arr > 0.0) & (xi_arr < 1.0 / f_c)
    phase = np.multiply.outer(xi_arr, _B * omega_c)
    value = np.where(inside, np.sin(phase) @ _A, 0.0)
    return _as_output(value, xi)


def forcing_signal(source: SourceSpec, t: Scalar) -> Scalar:
    """Amplitude-scaled time signal of a point source (zero for Cauchy data)."""
    if isinstance(source.forcing, CauchyPulse):
        return _as_output(np.zeros_like(np.asarray(t, dtype=float)), t)
    if source.forcing.kind == "harmonic":
        t_arr = np.asarray(t, dtype=float)
        value = np.where(t_arr >= 0.0, np.sin(2.0 * math.pi * source.f_c * t_arr), 0.0)
        return _as_output(source.amplitude * value, t)
    return _as_output(source.amplitude * np.asarray(source_signal(source.f_c, t)), t)


def right_invariant_initial(source: SourceSpec, c_minus: float, x: Scalar) -> Scalar:
    """
    Initial right-going invariant J_R(x, 0) = (v - sigma/(rho c))/2 of the Cauchy data.

    With sigma = -rho c v the invariant equals the velocity itself.
    """
    if not isinstance(source.forcing, CauchyPulse):
        return _as_output(np.zeros_like(np.asarray(x, dtype=float)), x)
    xi = source.forcing.t0 - np.asarray(x, dtype=float) / c_minus
    return _as_output(source.amplitude * np.asarray(source_signal(source.f_c, xi)), x)
