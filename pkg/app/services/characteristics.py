from typing import Callable, Literal, Optional, Tuple
import math
import numpy as np
from scipy.interpolate import CubicHermiteSpline

from app.exceptions import ConfigurationError, SingularComplianceError
from app.models.physics_models import CauchyPulse, InterfaceLaw, MaterialHalfSpaces, SourceSpec
from app.models.scattering_models import CharacteristicSolution
from app.services.modulation import interface_params, right_invariant_initial
from logger_config import logger


Fields = Tuple[np.ndarray, np.ndarray]


# --- Helpers

def _require_cauchy(source: SourceSpec) -> CauchyPulse:
    if not isinstance(source.forcing, CauchyPulse):
        raise ConfigurationError("characteristics solutions need Cauchy initial data")
    return source.forcing


def incident_invariant(material: MaterialHalfSpaces, source: SourceSpec, t):
    """J_R arriving at x0 at time t, J_R(x0 - c0 t, 0)."""
    return right_invariant_initial(source, material.c_minus, material.x0 - material.c_minus * np.asarray(t, dtype=float))


def arrival_time(material: MaterialHalfSpaces, source: SourceSpec) -> float:
    """First time the pulse front reaches x0."""
    forcing = _require_cauchy(source)
    return max(0.0, material.x0 / material.c_minus - forcing.t0)


def _ode_rhs(channel: str, material: MaterialHalfSpaces, law: InterfaceLaw, source: SourceSpec) -> Callable:
    z0, z1 = material.Z_minus, material.Z_plus

    if channel == "C":
        def rhs(t: float, y: float) -> float:
            params, rates = interface_params(law, t, 0), interface_params(law, t, 1)
            if params.C <= 0.0:
                raise SingularComplianceError(t, float(params.C))
            h = 2.0 * float(incident_invariant(material, source, t))
            return (h - (1.0 + z1 / z0 + z1 * (rates.C + params.QC)) * y) / (z1 * params.C)
    else:
        def rhs(t: float, y: float) -> float:
            params, rates = interface_params(law, t, 0), interface_params(law, t, 1)
            if params.M <= 0.0:
                raise SingularComplianceError(t, float(params.M))
            g = 2.0 * z0 * float(incident_invariant(material, source, t))
            return -(z1 / params.M) * (g + (1.0 + z0 / z1 + (rates.M + params.QM) / z1) * y)
    return rhs


def _rk4_trace(rhs: Callable, t_start: float, t_end: float, step: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = max(1, int(math.ceil((t_end - t_start) / step - 1e-9)))
    h = (t_end - t_start) / n
    times = t_start + h * np.arange(n + 1)
    values = np.zeros(n + 1)
    slopes = np.zeros(n + 1)
    y = 0.0
    for i in range(n):
        t = times[i]
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        slopes[i] = k1
        y = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        values[i + 1] = y
    slopes[n] = rhs(times[n], y)
    return times, values, slopes


# --- Interface traces

def interface_trace(material: MaterialHalfSpaces, law: InterfaceLaw, source: SourceSpec, t_end: float,
                    step: float, channel: Literal["C", "M"] = "C") -> CharacteristicSolution:
    """
    RK4 integration of the interface ODE, v+(t) for the compliance channel, sigma+(t) for inertia.

    Args:
        material: bulk media
        law: single-channel law (M0 = QM0 = 0 for "C", C0 = QC0 = 0 for "M")
        source: Cauchy pulse
        t_end: last time needed (s)
        step: RK4 step (s)
        channel: "C" or "M"

    Returns:
        CharacteristicSolution sampled at the RK4 nodes
    """
    if channel == "C" and (law.M0 != 0.0 or law.QM0 != 0.0 or law.C0 <= 0.0):
        raise ConfigurationError("compliance-channel solution needs C0 > 0 and M0 = QM0 = 0")
    if channel == "M" and (law.C0 != 0.0 or law.QC0 != 0.0 or law.M0 <= 0.0):
        raise ConfigurationError("inertia-channel solution needs M0 > 0 and C0 = QC0 = 0")

    t_start = min(arrival_time(material, source), t_end)
    rhs = _ode_rhs(channel, material, law, source)
    try:
        times, values, slopes = _rk4_trace(rhs, t_start, max(t_end, t_start + step), step)
    except SingularComplianceError as e:
        logger.error(f"Error integrating the interface ODE: {str(e)}")
        raise
    # zero history before the pulse arrives
    times = np.concatenate([[-1.0, t_start - 0.5 * step], times]) if t_start > 0.0 else times
    values = np.concatenate([[0.0, 0.0], values]) if t_start > 0.0 else values
    slopes = np.concatenate([[0.0, 0.0], slopes]) if t_start > 0.0 else slopes
    return CharacteristicSolution(channel=channel, times=times, values=values, slopes=slopes,
                                  material=material, law=law, source=source)


def _trace_evaluator(solution: CharacteristicSolution) -> Callable[[np.ndarray], np.ndarray]:
    spline = CubicHermiteSpline(solution.times, solution.values, solution.slopes, extrapolate=False)

    def evaluate(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        inside = (t >= solution.times[0]) & (t <= solution.times[-1])
        out[inside] = spline(t[inside])
        return out
    return evaluate


def _reconstruct(material: MaterialHalfSpaces, source: SourceSpec, x: np.ndarray, t: float,
                 transmitted: Callable[[np.ndarray], np.ndarray], channel: str) -> Fields:
    """
    Fields from the interface trace: incident plus reflected waves left of x0, transmitted right of x0.
    """
    z0, z1, c0, c1, x0 = material.Z_minus, material.Z_plus, material.c_minus, material.c_plus, material.x0
    x = np.asarray(x, dtype=float)
    v, sigma = np.zeros_like(x), np.zeros_like(x)

    left = x < x0
    xl = x[left]
    j_right = np.asarray(right_invariant_initial(source, c0, xl - c0 * t))
    t_a = t - (x0 - xl) / c0
    reached = t_a >= 0.0
    trace_a = transmitted(np.where(reached, t_a, 0.0))
    incident_a = np.asarray(incident_invariant(material, source, np.where(reached, t_a, 0.0)))
    if channel == "C":
        left_going = -(z1 / z0) * trace_a + incident_a
    else:
        left_going = -trace_a / z1 - incident_a
    # initial left-going invariant is zero
    left_going = np.where(reached, left_going, 0.0)
    v[left] = j_right + left_going
    sigma[left] = z0 * (left_going - j_right)

    right = ~left
    t_b = t - (x[right] - x0) / c1
    trace_b = np.where(t_b >= 0.0, transmitted(np.where(t_b >= 0.0, t_b, 0.0)), 0.0)
    if channel == "C":
        v[right], sigma[right] = trace_b, -z1 * trace_b
    else:
        v[right], sigma[right] = -trace_b / z1, trace_b
    return v, sigma


# --- Analytic solutions

def analytic_solution_C(material: MaterialHalfSpaces, law: InterfaceLaw, source: SourceSpec, x: np.ndarray, t: float,
                        dt: float, solution: Optional[CharacteristicSolution] = None) -> Fields:
    """
    (v, sigma) at time t for a compliance-only law, RK4 at step dt/10.

    Args:
        solution: precomputed trace reaching at least t, reused across snapshots
    """
    _require_cauchy(source)
    solution = solution or interface_trace(material, law, source, t, dt / 10.0, "C")
    return _reconstruct(material, source, x, t, _trace_evaluator(solution), "C")


def analytic_solution_M(material: MaterialHalfSpaces, law: InterfaceLaw, source: SourceSpec, x: np.ndarray, t: float,
                        dt: float, solution: Optional[CharacteristicSolution] = None) -> Fields:
    """(v, sigma) at time t for an inertia-only law, the trace being sigma+(t)."""
    _require_cauchy(source)
    solution = solution or interface_trace(material, law, source, t, dt / 10.0, "M")
    return _reconstruct(material, source, x, t, _trace_evaluator(solution), "M")


def _qonly_channel(law: InterfaceLaw) -> str:
    if law.C0 != 0.0 or law.M0 != 0.0:
        raise ConfigurationError("dissipation-only solution needs C0 = M0 = 0")
    if law.QC0 > 0.0 and law.QM0 > 0.0:
        raise ConfigurationError("dissipation-only solution needs exactly one of QC0, QM0")
    return "M" if law.QM0 > 0.0 else "C"


def _qonly_trace(material: MaterialHalfSpaces, law: InterfaceLaw, source: SourceSpec,
                 channel: str) -> Callable[[np.ndarray], np.ndarray]:
    z0, z1 = material.Z_minus, material.Z_plus

    def trace(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        j_r = np.asarray(incident_invariant(material, source, t))
        params = interface_params(law, t, 0)
        if channel == "C":
            return 2.0 * j_r / (1.0 + z1 / z0 + z1 * np.asarray(params.QC))
        return -2.0 * z0 * j_r / (1.0 + z0 / z1 + np.asarray(params.QM) / z1)
    return trace


def analytic_solution_Qonly(material: MaterialHalfSpaces, law: InterfaceLaw, source: SourceSpec,
                            x: np.ndarray, t: float) -> Fields:
    """Closed-form (v, sigma) for a single dissipation channel, no ODE."""
    _require_cauchy(source)
    channel = _qonly_channel(law)
    return _reconstruct(material, source, x, t, _qonly_trace(material, law, source, channel), channel)


def envelope_bounds(material: MaterialHalfSpaces, law: InterfaceLaw, source: SourceSpec,
                    x: np.ndarray, t: float) -> Tuple[Fields, Fields]:
    """
    Pointwise (lower, upper) bounds from the static solutions at the extreme dissipation values.

    Returns:
        ((v_lower, sigma_lower), (v_upper, sigma_upper))
    """
    channel = _qonly_channel(law)
    name = "QC" if channel == "C" else "QM"
    base, eps = law.base(name), abs(law.eps(name))
    extremes = []
    for q_value in (base * (1.0 - eps * law.kind.max_abs), base * (1.0 + eps * law.kind.max_abs)):
        static = law.updated(**{f"{name}0": max(q_value, 0.0), f"eps_{name}": 0.0, "f_m": 0.0})
        extremes.append(analytic_solution_Qonly(material, static, source, x, t))
    (v_a, s_a), (v_b, s_b) = extremes
    return (np.minimum(v_a, v_b), np.minimum(s_a, s_b)), (np.maximum(v_a, v_b), np.maximum(s_a, s_b))


# --- Boundedness analytics

def g_function(a, b):
    """1 + (a/b)(sqrt(1 - b^2) - 1), continued by 1 at b = 0."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    safe_b = np.where(b == 0.0, 1.0, b)
    value = np.where(b == 0.0, 1.0, 1.0 + (a / safe_b) * (np.sqrt(1.0 - b ** 2) - 1.0))
    return float(value) if value.ndim == 0 else value


def mean_alpha(Z: float, C0: float, QC0: float, eps_C: float, eps_QC: float) -> float:
    """
    Period average of the interface ODE coefficient for sinusoidal compliance modulation.

    The helper's first argument is the dissipation amplitude and the second the compliance
    amplitude; this ordering is the one that matches a direct quadrature of a(t).
    """
    if abs(eps_C) >= 1.0 or abs(eps_QC) >= 1.0:
        raise ConfigurationError("mean coefficient needs |eps_C| < 1 and |eps_QC| < 1")
    root = math.sqrt(1.0 - eps_C ** 2)
    return -(2.0 + Z * QC0 * g_function(eps_QC, eps_C)) / (Z * C0 * root)


def alpha_coefficient(t, Z: float, law: InterfaceLaw):
    """a(t) = -(2 + Z (C'(t) + Q_C(t))) / (Z C(t)) for a homogeneous medium."""
    params, rates = interface_params(law, t, 0), interface_params(law, t, 1)
    return -(2.0 + Z * (np.asarray(rates.C) + np.asarray(params.QC))) / (Z * np.asarray(params.C))
