from functools import partial
from typing import Dict
import numpy as np
import pandas as pd

from app.commands.common import ScenarioOutcome, make_simulation, require_cauchy, require_point, run_parallel
from app.exceptions import ConfigurationError
from app.models.config_models import ExperimentConfig
from app.models.physics_models import Sinusoidal
from app.services.characteristics import alpha_coefficient, g_function, mean_alpha
from app.services.diagnostics import amplitude_growth, local_minima, nonreciprocity_measure, reflected_velocity
from app.services.fdtd import initial_state
from app.services.hbm import is_impedance_matched
from app.services.simulation import receiver_column
from logger_config import logger


# --- Impedance matching

def _impedance_point(config: ExperimentConfig, kind: str) -> Dict[str, float]:
    law = config.interface.to_law(kind=kind)
    simulation = make_simulation(config, law=law, receivers=[])
    incident = float(np.max(np.abs(initial_state(simulation.grid, config.material, config.source_spec).v)))
    result = simulation.run(config.grid.t_end)
    reflected = reflected_velocity(result.final_state, result.grid, config.material)
    return {"kind": kind, "incident": incident, "reflected": reflected, "ratio": reflected / incident}


def run_impedance(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """Largest reflected velocity for each modulation kind of a matched interface."""
    require_cauchy(config, "impedance")
    if not is_impedance_matched(config.law, config.material.Z_minus):
        logger.warning("interface parameters do not satisfy M = Z^2 C; a reflected wave is expected")
    outcome = ScenarioOutcome(name="impedance")
    rows = run_parallel(partial(_impedance_point, config), config.sweep.kinds, workers)
    frame = pd.DataFrame(rows, columns=["kind", "incident", "reflected", "ratio"])
    outcome.tables["reflection"] = frame

    limit = config.checks.max_reflection_ratio
    for row in rows:
        outcome.check(f"reflection_{row['kind']}", row["ratio"], row["ratio"] <= limit, f"<= {limit} of the incident")
    return outcome


# --- Non-reciprocity

def _nonreciprocity_point(config: ExperimentConfig, f_m: float) -> Dict[str, float]:
    law = config.interface.to_law(f_m=f_m)
    x_s, x_r = config.source.x_s, config.run.receivers[0]
    forward = make_simulation(config, law=law, receivers=[x_r]).run(config.grid.t_end)
    swapped = config.source.to_spec(x_s=x_r)
    backward = make_simulation(config, law=law, source=swapped, receivers=[x_s]).run(config.grid.t_end)
    theta = nonreciprocity_measure(forward.receivers[receiver_column(x_r)], backward.receivers[receiver_column(x_s)],
                                   config.source.f_c)
    return {"f_m": f_m, "theta_v": theta}


def _relative_depth(frame: pd.DataFrame, target: float, window: float, peak: float) -> float:
    """Smallest theta_v within window Hz of target, relative to the sweep maximum (1.0 when no sample is near)."""
    near = frame.loc[(frame["f_m"] - target).abs() <= window, "theta_v"]
    if near.empty or peak <= 0.0:
        return 1.0
    return float(near.min()) / peak


def run_nonreciprocity(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """
    theta_v over the modulation-frequency grid for swapped source and receiver.

    Sinusoidal runs must show minima near the configured targets; quasi-periodic runs must not vanish there.
    """
    require_point(config, "nonreciprocity")
    if not config.run.receivers:
        raise ConfigurationError("the nonreciprocity scenario needs one receiver")
    outcome = ScenarioOutcome(name="nonreciprocity")
    checks = config.checks

    rows = run_parallel(partial(_nonreciprocity_point, config), config.sweep.fm_grid(), workers)
    frame = pd.DataFrame(rows, columns=["f_m", "theta_v"])
    minima = local_minima(frame["f_m"], frame["theta_v"])
    outcome.tables.update({"theta": frame, "minima": minima.rename(columns={"x": "f_m", "y": "theta_v"})})

    f_lo, f_hi = float(frame["f_m"].min()), float(frame["f_m"].max())
    targets = [f for f in checks.nonreciprocity_targets if f_lo <= f <= f_hi]
    peak = float(frame["theta_v"].max())
    window = checks.nonreciprocity_window
    kind = config.interface.kind
    depths = {f: _relative_depth(frame, f, window, peak) for f in targets}
    outcome.details["relative_depths"] = {f"{f:g}": depth for f, depth in depths.items()}

    if kind == "sinusoidal":
        missing = [f for f in targets if not np.any(np.abs(minima["x"] - f) <= window)]
        outcome.details["missing_minima"] = missing
        outcome.check("minima_at_targets", len(missing), not missing, f"a local minimum within {window} Hz of {targets}")
        shallowest = max(depths.values()) if depths else 0.0
        outcome.check("minima_depth", shallowest, shallowest < checks.nonreciprocity_floor,
                      f"< {checks.nonreciprocity_floor} of max theta_v within {window} Hz of each of {targets}")
    elif kind == "quasi_periodic":
        lowest = min(depths.values()) if depths else 1.0
        outcome.check("no_zeros_at_targets", lowest, lowest >= checks.nonreciprocity_floor,
                      f">= {checks.nonreciprocity_floor} of max theta_v near {targets}")
    outcome.details.update({"x_s": config.source.x_s, "x_r": config.run.receivers[0], "max_theta_v": peak})
    return outcome


# --- Boundedness

def run_boundedness(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """Long harmonically forced run plus the sign of the period-averaged interface coefficient."""
    require_point(config, "boundedness", kinds=("harmonic",))
    law, material, checks = config.law, config.material, config.checks
    if law.f_m <= 0.0:
        raise ConfigurationError("the boundedness scenario needs a modulation frequency")
    outcome = ScenarioOutcome(name="boundedness")
    periods = config.sweep.periods

    result = make_simulation(config, receivers=[], track_max_v=True).run(periods / law.f_m)
    growth = amplitude_growth(result.max_abs_v["t"], result.max_abs_v["max_abs_v"], law.f_m, periods)
    outcome.tables["max_abs_v"] = result.max_abs_v
    outcome.check("amplitude_growth", growth, growth <= checks.growth_tolerance,
                  f"<= {checks.growth_tolerance} between the first and second half of {periods} periods")

    grid_values = np.linspace(-0.99, 0.99, 199)
    lowest_g = float(np.min(g_function(*np.meshgrid(grid_values, grid_values))))
    outcome.check("g_positive", lowest_g, lowest_g > 0.0, "> 0 on (-1, 1)^2")

    compliance_only = law.M0 == 0.0 and law.QM0 == 0.0 and law.C0 > 0.0
    if material.is_homogeneous and compliance_only and isinstance(law.kind, Sinusoidal):
        Z = material.Z_minus
        t = np.arange(4096) / (4096 * law.f_m)
        alpha = alpha_coefficient(t, Z, law)
        closed = mean_alpha(Z, law.C0, law.QC0, law.eps_C, law.eps_QC)
        sampled = float(np.mean(alpha))
        outcome.tables["alpha"] = pd.DataFrame({"t": t, "alpha": alpha})
        outcome.details.update({"mean_alpha": closed, "mean_alpha_sampled": sampled})
        outcome.check("mean_alpha_negative", closed, closed < 0.0, "< 0")
        misfit = abs(sampled / closed - 1.0)
        outcome.check("mean_alpha_quadrature", misfit, misfit <= checks.quadrature_tolerance,
                      f"<= {checks.quadrature_tolerance} relative")
    else:
        logger.warning("mean coefficient checks apply to sinusoidal compliance-only laws in one medium; skipped")
    return outcome
