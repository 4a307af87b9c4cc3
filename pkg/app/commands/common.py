from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar
from pydantic import BaseModel, ConfigDict, Field, ValidationError
import pandas as pd

from app.config_settings import settings
from app.exceptions import CheckFailedError, ConfigurationError
from app.models.config_models import ExperimentConfig
from app.models.physics_models import InterfaceLaw, SourceSpec
from app.models.simulation_models import FieldState, Grid
from app.services.config_parser import config_summary
from app.services.fdtd import build_grid
from app.services.simulation import InterfaceSimulation
from logger_config import logger


Item = TypeVar("Item")
Result = TypeVar("Result")


# --- Outcome

class CheckResult(BaseModel):
    """One pass/fail check of a scenario."""
    name: str
    value: float
    threshold: str
    passed: bool


class ScenarioOutcome(BaseModel):
    """Tables, checks and scalar details produced by a scenario."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    tables: Dict[str, pd.DataFrame] = Field(default_factory=dict)
    checks: List[CheckResult] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)

    def check(self, name: str, value: float, passed: bool, threshold: str) -> CheckResult:
        result = CheckResult(name=name, value=float(value), threshold=threshold, passed=bool(passed))
        level = logger.info if result.passed else logger.warning
        level(f"check {name}: {result.value:.6g} ({'pass' if result.passed else 'FAIL'}, expected {threshold})")
        self.checks.append(result)
        return result

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def summary(self, config: Optional[ExperimentConfig] = None) -> Dict[str, Any]:
        data = {
            "scenario": self.name,
            "passed": self.passed,
            "checks": [check.model_dump() for check in self.checks],
            "details": self.details,
            "tables": {name: list(frame.columns) for name, frame in self.tables.items()},
        }
        if config is not None:
            data["config"] = config_summary(config)
        return data

    def raise_for_checks(self) -> None:
        for check in self.checks:
            if not check.passed:
                raise CheckFailedError(check.name, check.value, check.threshold)


# --- Builders

def make_grid(config: ExperimentConfig, nx: Optional[int] = None) -> Grid:
    return build_grid(config.grid.length, nx or config.grid.nx, config.material, config.grid.zeta)


def make_simulation(config: ExperimentConfig, law: Optional[InterfaceLaw] = None, source: Optional[SourceSpec] = None,
                    nx: Optional[int] = None, grid: Optional[Grid] = None, receivers: Optional[Sequence[float]] = None,
                    record_energy: Optional[bool] = None, track_max_v: bool = False) -> InterfaceSimulation:
    """InterfaceSimulation from a config, with selected pieces replaced."""
    return InterfaceSimulation(
        material=config.material,
        law=law if law is not None else config.law,
        source=source if source is not None else config.source_spec,
        grid=grid if grid is not None else make_grid(config, nx),
        boundary=config.run.boundary,
        k=config.esim.k,
        q=config.esim.q,
        frozen_derivatives=config.esim.frozen_derivatives,
        receivers=config.run.receivers if receivers is None else receivers,
        record_energy=config.run.record_energy if record_energy is None else record_energy,
        track_max_v=track_max_v,
    )


def snapshot_frame(state: FieldState, grid: Grid) -> pd.DataFrame:
    return pd.DataFrame({"x": grid.x, "v": state.v, "sigma": state.sigma})


def zero_law(law: InterfaceLaw) -> InterfaceLaw:
    """Perfect contact with the same kind and modulation frequency."""
    return law.updated(C0=0.0, M0=0.0, QC0=0.0, QM0=0.0, eps_C=0.0, eps_M=0.0, eps_QC=0.0, eps_QM=0.0)


def require_cauchy(config: ExperimentConfig, scenario: str) -> None:
    if config.source.kind != "cauchy":
        raise ConfigurationError(f"the {scenario} scenario needs a Cauchy pulse source, got {config.source.kind}")


def require_point(config: ExperimentConfig, scenario: str, kinds: Iterable[str] = ("dirac", "harmonic")) -> None:
    if config.source.kind not in kinds:
        raise ConfigurationError(f"the {scenario} scenario needs a {' or '.join(kinds)} source, got {config.source.kind}")


# --- Sweeps

def run_parallel(worker: Callable[[Item], Result], items: Sequence[Item], workers: Optional[int] = None) -> List[Result]:
    """
    Apply a picklable worker to every item, in a process pool when more than one worker is allowed.

    Args:
        worker: module-level function (or functools.partial of one)
        items: work items
        workers: pool size (settings.MAX_WORKERS when None)

    Returns:
        results in input order
    """
    workers = settings.MAX_WORKERS if workers is None else workers
    items = list(items)
    logger.info(f"sweep over {len(items)} item(s) with {max(1, workers)} worker(s)")
    if workers <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    try:
        with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
            return list(pool.map(worker, items))
    except Exception as e:
        logger.error(f"Error in parallel sweep: {str(e)}")
        raise


def apply_overrides(config: ExperimentConfig, nx: Optional[int] = None, fm: Optional[float] = None) -> ExperimentConfig:
    """Revalidated copy with the command-line grid and modulation-frequency overrides applied."""
    if nx is None and fm is None:
        return config
    data = config.model_dump()
    if nx is not None:
        data["grid"]["nx"] = nx
    if fm is not None:
        data["interface"]["f_m"] = fm
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid override: {e.errors()[0]['msg']}") from e
