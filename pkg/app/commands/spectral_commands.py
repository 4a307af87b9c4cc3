from functools import partial
from typing import Dict, List, Optional, Tuple
import math
import numpy as np
import pandas as pd

from app.commands.common import ScenarioOutcome, make_grid, make_simulation, require_point, run_parallel, zero_law
from app.exceptions import ConfigurationError
from app.models.config_models import ExperimentConfig
from app.services.diagnostics import dft_spectrum, fundamental_period, harmonic_peak_ratios
from app.services.hbm import is_impedance_matched, solve_scattering, spectrum_frame, static_rt, static_rt_sweep
from app.services.simulation import receiver_column
from logger_config import logger


COMPARED_HARMONICS = 6


# --- hbm

def run_hbm(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """Floquet spectrum with truncation, static-limit and matched-impedance checks."""
    outcome = ScenarioOutcome(name="hbm")
    law, material, checks = config.law, config.material, config.checks
    f_c, N = config.source.f_c, config.run.harmonics

    spectrum = solve_scattering(law, material, f_c, N)
    doubled = solve_scattering(law, material, f_c, 2 * N)
    kept = min(COMPARED_HARMONICS, N)
    window = slice(N - kept, N + kept + 1)
    window_2 = slice(2 * N - kept, 2 * N + kept + 1)
    truncation = max(float(np.max(np.abs(spectrum.R[window] - doubled.R[window_2]))),
                     float(np.max(np.abs(spectrum.T[window] - doubled.T[window_2]))))
    outcome.check("truncation", truncation, truncation <= checks.truncation_tolerance,
                  f"<= {checks.truncation_tolerance} for |k| <= {kept} between N={N} and N={2 * N}")

    static = law.updated(eps_C=0.0, eps_M=0.0, eps_QC=0.0, eps_QM=0.0)
    static_spectrum = solve_scattering(static, material, f_c, N)
    r_ref, t_ref = static_rt(material, static, 2.0 * math.pi * f_c, convention="velocity")
    misfit = max(abs(static_spectrum.coefficient("R", 0) - r_ref), abs(static_spectrum.coefficient("T", 0) - t_ref))
    outcome.check("static_limit", misfit, misfit <= checks.static_tolerance, f"<= {checks.static_tolerance}")

    if is_impedance_matched(law, material.Z_minus):
        reflection = float(np.max(np.abs(spectrum.R)))
        outcome.check("matched_reflection", reflection, reflection <= checks.max_hbm_reflection,
                      f"<= {checks.max_hbm_reflection}")

    frequencies = np.linspace(0.0, 8.0 * f_c, 161)[1:]
    outcome.tables["spectrum"] = spectrum_frame(spectrum)
    outcome.tables["static_rt"] = static_rt_sweep(material, static, frequencies, convention="stress")
    outcome.details.update({"f_c": f_c, "f_m": law.f_m, "N": N, "R0": str(spectrum.coefficient("R", 0)),
                            "T0": str(spectrum.coefficient("T", 0)),
                            "static_limit_convention": "velocity", "static_rt_convention": "stress"})
    return outcome


# --- harmonics

def _window_layout(config: ExperimentConfig, f_c: float, f_m: float) -> Tuple[float, int, int, int]:
    """
    (t_end, steps per common period, settle periods, window periods) so that every
    f_c + k f_m lands on a DFT bin of the window.
    """
    period = fundamental_period(f_c, f_m)
    settle = math.ceil(config.sweep.settle_time / period)
    window = max(1, round(config.sweep.window / period))
    steps = math.ceil(period / make_grid(config).dt)
    return (settle + window) * period, steps, settle, window


def _split_receivers(config: ExperimentConfig) -> Tuple[float, Optional[float]]:
    x0 = config.material.x0
    right = [x for x in config.run.receivers if x > x0]
    left = [x for x in config.run.receivers if x < x0]
    if not right:
        raise ConfigurationError("the harmonics scenario needs a receiver beyond the interface")
    return right[0], (left[0] if left else None)


def _harmonic_pair(config: ExperimentConfig, pair: Tuple[float, float]) -> List[Dict[str, float]]:
    f_c, f_m = pair
    law = config.interface.to_law(f_m=f_m)
    source = config.source.to_spec(f_c=f_c)
    x_t, x_r = _split_receivers(config)
    receivers = [x_t] + ([x_r] if x_r is not None else [])

    t_end, steps, settle, window = _window_layout(config, f_c, f_m)
    grid = make_grid(config).with_dt(t_end / (steps * (settle + window)))
    modulated = make_simulation(config, law=law, source=source, grid=grid, receivers=receivers).run(t_end)
    reference = make_simulation(config, law=zero_law(law), source=source, grid=grid, receivers=receivers).run(t_end)

    start, stop = steps * settle, steps * (settle + window)
    dt = grid.dt

    def record(result, x):
        return result.receivers[receiver_column(x)].to_numpy()[start:stop]

    incident = dft_spectrum(record(reference, x_t), dt)
    K = min(COMPARED_HARMONICS, config.run.harmonics)
    transmitted = harmonic_peak_ratios(dft_spectrum(record(modulated, x_t), dt), incident, f_c, f_m, K)
    reflected = {}
    if x_r is not None:
        scattered = record(modulated, x_r) - record(reference, x_r)
        reflected = harmonic_peak_ratios(dft_spectrum(scattered, dt), incident, f_c, f_m, K)

    spectrum = solve_scattering(law, config.material, f_c, config.run.harmonics)
    frequencies = {k: abs(f_c + k * f_m) for k in range(-K, K + 1)}
    rows = []
    for k in range(-K, K + 1):
        # harmonics folding onto the same |frequency| (or DC) cannot be separated in the record
        unique = frequencies[k] > 0.0 and list(frequencies.values()).count(frequencies[k]) == 1
        for wave, ratios in (("T", transmitted), ("R", reflected)):
            if k not in ratios:
                continue
            rows.append({"f_c": f_c, "f_m": f_m, "wave": wave, "k": k, "frequency": frequencies[k],
                         "ratio_fdtd": ratios[k], "abs_hbm": abs(spectrum.coefficient(wave, k)), "compared": unique})
    logger.info(f"harmonics f_c={f_c} Hz, f_m={f_m} Hz: {len(rows)} peaks extracted")
    return rows


def run_harmonics(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """Steady-state spectra of the scheme against the harmonic-balance table."""
    require_point(config, "harmonics", kinds=("harmonic",))
    if not config.material.is_homogeneous:
        raise ConfigurationError("the harmonics scenario compares with harmonic balance, which needs one medium")
    outcome = ScenarioOutcome(name="harmonics")
    checks = config.checks

    results = run_parallel(partial(_harmonic_pair, config), config.sweep.frequency_pairs, workers)
    frame = pd.DataFrame([row for rows in results for row in rows],
                         columns=["f_c", "f_m", "wave", "k", "frequency", "ratio_fdtd", "abs_hbm", "compared"])
    outcome.tables["harmonics"] = frame

    compared = frame[frame["compared"]]
    strong = compared[compared["abs_hbm"] >= checks.harmonic_floor]
    weak = compared[compared["abs_hbm"] < checks.harmonic_floor]
    relative = float(np.max(np.abs(strong["ratio_fdtd"] / strong["abs_hbm"] - 1.0))) if not strong.empty else 0.0
    absolute = float(np.max(np.abs(weak["ratio_fdtd"] - weak["abs_hbm"]))) if not weak.empty else 0.0
    outcome.check("harmonic_peaks", relative, relative <= checks.harmonic_tolerance,
                  f"<= {checks.harmonic_tolerance} relative where |coefficient| >= {checks.harmonic_floor}")
    outcome.check("weak_harmonics", absolute, absolute <= checks.harmonic_floor, f"<= {checks.harmonic_floor} absolute")
    return outcome
