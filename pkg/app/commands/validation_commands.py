from functools import partial
from typing import Dict, Tuple
import numpy as np
import pandas as pd

from app.commands.common import ScenarioOutcome, make_simulation, require_cauchy, run_parallel
from app.exceptions import ConfigurationError
from app.models.config_models import ExperimentConfig
from app.models.physics_models import InterfaceLaw
from app.services.characteristics import (
    analytic_solution_C, analytic_solution_M, analytic_solution_Qonly, envelope_bounds, interface_trace,
)
from app.services.diagnostics import convergence_order, error_norm
from logger_config import logger


# --- Helpers

def reference_channel(law: InterfaceLaw) -> str:
    """Which closed-form reference applies: 'C', 'M' or 'Q'."""
    if law.C0 == 0.0 and law.M0 == 0.0:
        return "Q"
    if law.M0 == 0.0 and law.QM0 == 0.0:
        return "C"
    if law.C0 == 0.0 and law.QC0 == 0.0:
        return "M"
    raise ConfigurationError("no closed-form reference when compliance and inertia act together")


def compare_with_reference(config: ExperimentConfig, nx: int) -> Tuple[pd.DataFrame, Dict[str, float]]:
    """
    Run the scheme to t_end and compare the final velocity with the characteristic solution.

    Returns:
        snapshot table (x, v, sigma, v_exact, sigma_exact) and the error metrics
    """
    law, source, material = config.law, config.source_spec, config.material
    channel = reference_channel(law)
    result = make_simulation(config, nx=nx, receivers=[]).run(config.grid.t_end)
    grid, state = result.grid, result.final_state

    if channel == "Q":
        v_exact, s_exact = analytic_solution_Qonly(material, law, source, grid.x, state.t)
    elif channel == "C":
        v_exact, s_exact = analytic_solution_C(material, law, source, grid.x, state.t, grid.dt)
    else:
        v_exact, s_exact = analytic_solution_M(material, law, source, grid.x, state.t, grid.dt)

    eps_v = error_norm(state, lambda x, t: v_exact, grid)
    scale = float(np.sqrt(grid.dx * np.sum(v_exact ** 2)))
    frame = pd.DataFrame({"x": grid.x, "v": state.v, "sigma": state.sigma, "v_exact": v_exact, "sigma_exact": s_exact})
    metrics = {"nx": nx, "dx": grid.dx, "eps_v": eps_v, "relative_error": eps_v / scale if scale > 0.0 else eps_v}
    logger.info(f"nx={nx}: eps_v={eps_v:.4e}, relative {metrics['relative_error']:.4e}")
    return frame, metrics


def _ladder_point(config: ExperimentConfig, nx: int) -> Dict[str, float]:
    return compare_with_reference(config, nx)[1]


# --- Scenarios

def run_validate(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """Scheme against the characteristic solution at t_end."""
    require_cauchy(config, "validate")
    outcome = ScenarioOutcome(name="validate")
    law, source, material = config.law, config.source_spec, config.material
    snapshot, metrics = compare_with_reference(config, config.grid.nx)
    channel = reference_channel(law)

    if channel == "Q":
        (v_lo, _), (v_hi, _) = envelope_bounds(material, law, source, snapshot["x"].to_numpy(), config.grid.t_end)
        snapshot["v_lower"], snapshot["v_upper"] = v_lo, v_hi
        v_exact = snapshot["v_exact"].to_numpy()
        slack = config.checks.envelope_tolerance * float(np.max(np.abs(v_exact)))
        excess = float(np.max(np.maximum(v_lo - v_exact, v_exact - v_hi)))
        outcome.check("envelope", excess, excess <= slack,
                      f"<= {config.checks.envelope_tolerance} of max|v| outside the static envelopes")
        # the scheme only follows the envelopes to within its discretisation error
        inside = (snapshot["v"] >= v_lo - slack) & (snapshot["v"] <= v_hi + slack)
        outcome.details["envelope_fraction"] = float(inside.mean())
    else:
        step = config.grid.zeta * config.grid.length / (config.grid.nx * material.c_max) / 10.0
        trace = interface_trace(material, law, source, config.grid.t_end, step, channel)
        column = "v_plus" if channel == "C" else "sigma_plus"
        outcome.tables["trace"] = pd.DataFrame({"t": trace.times, column: trace.values})

    outcome.tables["snapshot"] = snapshot
    outcome.details.update(metrics)
    outcome.details["reference"] = channel
    outcome.check("relative_error", metrics["relative_error"],
                  metrics["relative_error"] <= config.checks.max_relative_error, f"<= {config.checks.max_relative_error}")
    return outcome


def run_converge(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """Error ladder over sweep.nx_ladder and the fitted convergence order."""
    require_cauchy(config, "converge")
    reference_channel(config.law)
    outcome = ScenarioOutcome(name="converge")
    rows = run_parallel(partial(_ladder_point, config), config.sweep.nx_ladder, workers)
    frame = pd.DataFrame(rows, columns=["nx", "dx", "eps_v", "relative_error"])
    slope = convergence_order(zip(frame["dx"], frame["eps_v"]), drop_coarsest=config.sweep.drop_coarsest)

    outcome.tables["convergence"] = frame
    outcome.details["slope"] = slope
    checks = config.checks
    outcome.check("convergence_order", slope, checks.min_slope <= slope <= checks.max_slope,
                  f"in [{checks.min_slope}, {checks.max_slope}]")
    return outcome
