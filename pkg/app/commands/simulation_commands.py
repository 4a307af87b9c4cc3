from app.commands.common import ScenarioOutcome, make_simulation, snapshot_frame
from app.models.config_models import ExperimentConfig
from logger_config import logger


def run_simulate(config: ExperimentConfig, workers: int = 1) -> ScenarioOutcome:
    """
    Plain run to grid.t_end: final snapshot, receiver records and, when requested, energies and traces.
    """
    outcome = ScenarioOutcome(name="simulate")
    result = make_simulation(config).run(config.grid.t_end)

    outcome.tables["snapshot"] = snapshot_frame(result.final_state, result.grid)
    if config.run.receivers:
        outcome.tables["receivers"] = result.receivers
    if config.run.record_energy:
        outcome.tables["energy"] = result.energy
        outcome.tables["traces"] = result.traces

    outcome.details.update({"t_end": result.final_state.t, "dt": result.grid.dt, "nx": result.grid.nx})
    logger.info(f"simulate finished at t={result.final_state.t:.6e} s")
    return outcome
