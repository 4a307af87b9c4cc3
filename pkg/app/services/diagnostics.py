from fractions import Fraction
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple
import math
import numpy as np
import pandas as pd

from app.exceptions import ConfigurationError
from app.models.physics_models import InterfaceLaw, MaterialHalfSpaces, SourceSpec
from app.models.simulation_models import EnergyRecord, FieldState, Grid, InterfaceTraces
from app.services.fdtd import node_coefficients
from app.services.modulation import forcing_signal, interface_params
from logger_config import logger


Spectrum = Tuple[np.ndarray, np.ndarray]


# -- Energies

def energies(state: FieldState, traces: InterfaceTraces, law: InterfaceLaw, grid: Grid,
             material: MaterialHalfSpaces, source: Optional[SourceSpec] = None) -> EnergyRecord:
    """
    Bulk, interface and total energies with the forcing power.

    Args:
        state: fields at state.t
        traces: interface means/jumps at state.t
        law: interface law
        grid: grid
        material: bulk media
        source: point source contributing P = S(t) v(x_s); None or Cauchy data gives P = 0

    Returns:
        EnergyRecord
    """
    rho, young, _ = node_coefficients(grid, material)
    e_bulk = 0.5 * grid.dx * float(np.sum(rho * state.v ** 2 + state.sigma ** 2 / young))
    params = interface_params(law, state.t, 0)
    e_interface = 0.5 * params.M * traces.mean_v ** 2 + 0.5 * params.C * traces.mean_sigma ** 2
    power = 0.0
    if source is not None and source.is_point:
        j = grid.nearest_node(source.x_s, toward=material.x0)
        power = float(forcing_signal(source, state.t)) * float(state.v[j])
    return EnergyRecord(t=state.t, E_b=e_bulk, E_i=float(e_interface), E_m=e_bulk + float(e_interface), P=power)


def _central_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central difference; the two samples at each end are NaN."""
    out = np.full(values.shape, np.nan)
    if values.size >= 5:
        out[2:-2] = (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)
    return out


def energy_balance_residual(records: pd.DataFrame, traces: pd.DataFrame, law: InterfaceLaw) -> pd.DataFrame:
    """
    Residual of dE_m/dt = P - (M' <v>^2 + C' <sigma>^2)/2 - Q_C <sigma>^2 - Q_M <v>^2.

    Args:
        records: columns t, E_m, P on a uniform time grid
        traces: columns t, mean_v, mean_sigma at the same times
        law: interface law

    Returns:
        DataFrame with columns t, dEdt, residual
    """
    t = records["t"].to_numpy()
    if t.size > 2:
        steps = np.diff(t)
        if np.max(np.abs(steps - steps.mean())) > 1e-9 * steps.mean():
            raise ConfigurationError("energy balance needs uniformly sampled records")
        h = steps.mean()
    else:
        h = 1.0
    if not np.allclose(traces["t"].to_numpy(), t, rtol=0.0, atol=1e-12 * max(1.0, abs(t[-1]) if t.size else 1.0)):
        raise ConfigurationError("energy records and interface traces are sampled at different times")

    d_energy = _central_derivative(records["E_m"].to_numpy(), h)
    mean_v = traces["mean_v"].to_numpy()
    mean_sigma = traces["mean_sigma"].to_numpy()
    rates = interface_params(law, t, 1)
    values = interface_params(law, t, 0)
    residual = (
        d_energy - records["P"].to_numpy()
        + 0.5 * (rates.M * mean_v ** 2 + rates.C * mean_sigma ** 2)
        + values.QC * mean_sigma ** 2 + values.QM * mean_v ** 2
    )
    return pd.DataFrame({"t": t, "dEdt": d_energy, "residual": residual})


def delta_energy(records: pd.DataFrame, t_end: Optional[float] = None) -> float:
    """E_m at the last record not after t_end, minus E_m(0)."""
    if records.empty:
        return 0.0
    selected = records if t_end is None else records[records["t"] <= t_end + 1e-12]
    return float(selected["E_m"].iloc[-1] - records["E_m"].iloc[0])


# -- Error norms and convergence

def error_norm(numeric: FieldState, analytic_sampler: Callable[[np.ndarray, float], np.ndarray], grid: Grid) -> float:
    """eps_v = sqrt(dx sum_j (v(x_j, t) - v_j)^2)."""
    exact = np.asarray(analytic_sampler(grid.x, numeric.t), dtype=float)
    return float(np.sqrt(grid.dx * np.sum((exact - numeric.v) ** 2)))


def convergence_order(samples: Iterable[Tuple[float, float]], drop_coarsest: int = 0) -> float:
    """Least-squares slope of log(error) against log(dx)."""
    pairs = sorted(samples, key=lambda pair: pair[0], reverse=True)[drop_coarsest:]
    if len(pairs) < 2:
        raise ConfigurationError("at least two (dx, error) samples are needed for a convergence order")
    dx, err = np.array(pairs, dtype=float).T
    if np.any(dx <= 0.0) or np.any(err <= 0.0):
        raise ConfigurationError("convergence order needs positive grid spacings and errors")
    slope, _ = np.polyfit(np.log(dx), np.log(err), 1)
    return float(slope)


# -- Spectra

def dft_spectrum(series: Sequence[float], dt: float, onesided: bool = True) -> Spectrum:
    """
    Plain DFT of a uniformly sampled record.

    Returns:
        (frequencies in Hz, complex amplitudes); one-sided by default
    """
    values = np.asarray(series, dtype=float)
    if onesided:
        return np.fft.rfftfreq(values.size, dt), np.fft.rfft(values)
    return np.fft.fftfreq(values.size, dt), np.fft.fft(values)


def _peak(spectrum: Spectrum, frequency: float) -> float:
    freqs, amps = spectrum
    return float(np.abs(amps[int(np.argmin(np.abs(freqs - frequency)))]))


def harmonic_peak_ratios(transmitted: Spectrum, incident: Spectrum, f_c: float, f_m: float, K: int) -> Dict[int, float]:
    """
    |spectrum| at |f_c + k f_m| over the incident |spectrum| at f_c, for |k| <= K.
    """
    reference = _peak(incident, f_c)
    if reference == 0.0:
        raise ConfigurationError(f"incident spectrum has no content at f_c={f_c} Hz")
    return {k: _peak(transmitted, abs(f_c + k * f_m)) / reference for k in range(-K, K + 1)}


# -- Scenario measures

def nonreciprocity_measure(v_s: Sequence[float], v_r: Sequence[float], f_c: float) -> float:
    """theta_v = f_c sqrt(sum (v_s - v_r)^2)."""
    a, b = np.asarray(v_s, dtype=float), np.asarray(v_r, dtype=float)
    if a.shape != b.shape:
        raise ConfigurationError(f"swapped records differ in length: {a.shape} vs {b.shape}")
    return float(f_c * np.sqrt(np.sum((a - b) ** 2)))


def reflected_velocity(state: FieldState, grid: Grid, material: MaterialHalfSpaces) -> float:
    """Largest velocity carried by left-going waves on the incidence side, max |(v + sigma/Z)/2| over x < x0."""
    left = grid.x < material.x0
    j_left = 0.5 * (state.v[left] + state.sigma[left] / material.Z_minus)
    return float(np.max(np.abs(j_left))) if j_left.size else 0.0


def amplitude_growth(t: Sequence[float], values: Sequence[float], f_m: float, n_periods: int) -> float:
    """
    Relative excess of the late-half maximum over the early-half maximum of |values|
    across n_periods modulation periods.
    """
    times, data = np.asarray(t, dtype=float), np.abs(np.asarray(values, dtype=float))
    period = 1.0 / f_m
    half = 0.5 * n_periods * period
    early = data[times < half]
    late = data[(times >= half) & (times <= n_periods * period * (1.0 + 1e-12))]
    if early.size == 0 or late.size == 0 or early.max() == 0.0:
        raise ConfigurationError("record too short or silent for an amplitude-growth estimate")
    growth = float(late.max() / early.max() - 1.0)
    logger.info(f"amplitude growth over {n_periods} periods: {growth:.3e}")
    return growth


def local_minima(x: Sequence[float], y: Sequence[float]) -> pd.DataFrame:
    """Interior local minima of a sampled curve."""
    xs, ys = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    idx = np.where((ys[1:-1] <= ys[:-2]) & (ys[1:-1] <= ys[2:]))[0] + 1
    return pd.DataFrame({"x": xs[idx], "y": ys[idx]})


def fundamental_period(*frequencies: float, max_denominator: int = 1000) -> float:
    """Common period 1/gcd of a set of frequencies (Hz), taken as rationals."""
    fractions = [Fraction(f).limit_denominator(max_denominator) for f in frequencies if f > 0.0]
    if not fractions:
        raise ConfigurationError("a common period needs at least one positive frequency")
    denominator = math.lcm(*(f.denominator for f in fractions))
    numerators = [f.numerator * (denominator // f.denominator) for f in fractions]
    return float(Fraction(denominator, math.gcd(*numerators)))
