from functools import partial
from typing import Dict, List, Tuple
import numpy as np
import pandas as pd

from app.commands.common import ScenarioOutcome, make_simulation, run_parallel
from app.models.config_models import ExperimentConfig
from app.models.physics_models import CHANNELS, InterfaceLaw
from app.services.diagnostics import delta_energy, energy_balance_residual
from logger_config import logger


# --- Helpers

def modulated_channels(config: ExperimentConfig) -> List[str]:
    """Channels carrying a modulation in the config; the compliance when none does."""
    law = config.law
    channels = [name for name in CHANNELS if law.base(name) > 0.0 and law.eps(name) != 0.0]
    return channels or ["C"]


def swept_law(config: ExperimentConfig, f_m: float, eps: float) -> InterfaceLaw:
    return config.interface.to_law(f_m=f_m, **{f"eps_{name}": eps for name in modulated_channels(config)})


def _energy_point(config: ExperimentConfig, item: Tuple[float, float]) -> Dict[str, float]:
    f_m, eps = item
    law = swept_law(config, f_m, eps)
    result = make_simulation(config, law=law, receivers=[], record_energy=True).run(config.grid.t_end)
    e0 = float(result.energy["E_m"].iloc[0])
    change = delta_energy(result.energy, config.grid.t_end)
    return {"f_m": f_m, "eps": eps, "delta_E": change, "ratio": (e0 + change) / e0 if e0 > 0.0 else float("nan")}


def _ladder_is_monotone(values: np.ndarray) -> int:
    """Number of places where |dE(f_i) - dE(f_i+1)| grows along the ladder."""
    gaps = np.abs(np.diff(values))
    if gaps.size < 2:
        return 0
    slack = 1e-12 * max(float(np.max(np.abs(values))), 1e-300)
    return int(np.sum(np.diff(gaps) > slack))


# --- Scenario

def run_energy(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """
    Energy records, balance residual and the energy change of the configured run, plus optional sweeps.

    Args:
        config: experiment; sweep.eps_values and sweep.fm_ladder switch the sweeps on
        workers: process pool size for the sweeps

    Returns:
        ScenarioOutcome with tables energy, traces, balance and, when swept, delta_energy_eps / delta_energy_fm
    """
    outcome = ScenarioOutcome(name="energy")
    law, checks = config.law, config.checks
    result = make_simulation(config, record_energy=True).run(config.grid.t_end)
    records = result.energy
    balance = energy_balance_residual(records, result.traces, law)
    outcome.tables.update({"energy": records, "traces": result.traces, "balance": balance})

    e0 = float(records["E_m"].iloc[0])
    change = delta_energy(records, config.grid.t_end)
    outcome.details.update({"E_m0": e0, "delta_E": change})
    cauchy = config.source.kind == "cauchy"
    dissipative = law.QC0 > 0.0 or law.QM0 > 0.0

    if cauchy and e0 > 0.0:
        ratio = (e0 + change) / e0
        outcome.details["energy_ratio"] = ratio
        if law.is_static and not dissipative:
            outcome.check("energy_conservation", abs(ratio - 1.0), abs(ratio - 1.0) <= checks.conservation_tolerance,
                          f"<= {checks.conservation_tolerance}")
        if law.is_static and dissipative:
            rise = float(np.max(np.diff(records["E_m"].to_numpy()), initial=0.0)) / e0
            outcome.check("energy_non_increasing", rise, rise <= 1e-6, "<= 1e-06 of E_m(0) per record")
        if checks.expected_energy_ratio is not None:
            misfit = abs(ratio / checks.expected_energy_ratio - 1.0)
            outcome.check("energy_ratio", ratio, misfit <= checks.energy_ratio_tolerance,
                          f"{checks.expected_energy_ratio} within {checks.energy_ratio_tolerance:.0%}")

    if checks.balance_tolerance is not None:
        worst = float(np.nanmax(np.abs(balance["residual"])))
        scale = float(np.nanmax(np.abs(balance["dEdt"])))
        relative = worst / scale if scale > 0.0 else worst
        outcome.check("energy_balance", relative, relative <= checks.balance_tolerance, f"<= {checks.balance_tolerance}")

    sweep = config.sweep
    if sweep.eps_values:
        f_values = sweep.fm_values or [law.f_m]
        items = [(f_m, eps) for f_m in f_values for eps in sweep.eps_values]
        rows = run_parallel(partial(_energy_point, config), items, workers)
        outcome.tables["delta_energy_eps"] = pd.DataFrame(rows, columns=["f_m", "eps", "delta_E", "ratio"])

    if sweep.fm_ladder:
        eps = law.eps(modulated_channels(config)[0])
        rows = run_parallel(partial(_energy_point, config), [(f_m, eps) for f_m in sweep.fm_ladder], workers)
        frame = pd.DataFrame(rows, columns=["f_m", "eps", "delta_E", "ratio"])
        outcome.tables["delta_energy_fm"] = frame
        violations = _ladder_is_monotone(frame["delta_E"].to_numpy())
        outcome.check("high_frequency_limit", violations, violations == 0, "0 growing gaps along the ladder")

    logger.info(f"energy: E_m(0)={e0:.6e}, delta_E={change:.6e}")
    return outcome
