from typing import Dict, List, Optional, Sequence
from pydantic import BaseModel, ConfigDict
import numpy as np
import pandas as pd

from app.config_settings import settings
from app.exceptions import ConfigurationError, NumericalFailureError
from app.models.physics_models import CHANNELS, InterfaceLaw, MaterialHalfSpaces, SourceSpec
from app.models.simulation_models import BoundaryPolicy, FieldState, Grid, InterfaceTraces
from app.services.diagnostics import energies
from app.services.esim import EsimInterface
from app.services.fdtd import (
    STENCIL_HALF_WIDTH, ader_step, apply_boundary, initial_state, inject_point_source, node_coefficients, step_count,
)
from app.services.modulation import forcing_signal, interface_params
from logger_config import logger


FINITE_CHECK_EVERY = 50


class SimulationResult(BaseModel):
    """Final fields plus the per-step records of one run."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: Grid
    final_state: FieldState
    receivers: pd.DataFrame
    energy: pd.DataFrame
    traces: pd.DataFrame
    max_abs_v: pd.DataFrame


def receiver_column(x: float) -> str:
    return f"v_{x:g}"


# --- Class
class InterfaceSimulation:
    """
    Time loop coupling the ADER-4 bulk update with the ESIM interface treatment.
    """

    def __init__(self, material: MaterialHalfSpaces, law: InterfaceLaw, source: SourceSpec, grid: Grid,
                 boundary: BoundaryPolicy = BoundaryPolicy.ABSORBING, k: int = 5, q: Optional[int] = None,
                 frozen_derivatives: bool = False, receivers: Sequence[float] = (),
                 record_energy: bool = False, record_every: Optional[int] = None, track_max_v: bool = False):
        """
        Args:
            material: bulk media
            law: interface law
            source: Cauchy pulse or point forcing
            grid: grid (dt from the CFL condition, snapped in run())
            boundary: ghost-cell policy at both ends
            k: ESIM order
            q: fit nodes per side
            frozen_derivatives: drop time derivatives of the interface parameters in the ESIM
            receivers: positions (m) where v is recorded every step
            record_energy: record energies and interface traces
            record_every: energy/trace sampling stride in steps
            track_max_v: record max|v| over the grid every step
        """
        self.material = material
        self.law = law
        self.source = source
        self.grid = grid
        self.boundary = BoundaryPolicy(boundary)
        self.k = k
        self.q = q
        self.frozen_derivatives = frozen_derivatives
        self.receivers = list(receivers)
        self.record_energy = record_energy
        self.record_every = record_every or settings.ENERGY_RECORD_EVERY
        self.track_max_v = track_max_v

        for x in self.receivers:
            if not 0.0 < x < grid.length:
                raise ConfigurationError(f"receiver at x={x} outside the domain (0, {grid.length})")
        if source.is_point:
            if not 0.0 < source.x_s < grid.length:
                raise ConfigurationError(f"source at x_s={source.x_s} outside the domain (0, {grid.length})")
            if abs(source.x_s - material.x0) <= STENCIL_HALF_WIDTH * grid.dx:
                raise ConfigurationError(f"source at x_s={source.x_s} is within {STENCIL_HALF_WIDTH} cells of x0")
        if record_energy and law.allow_nonpositive:
            signed = [name for name in ("C", "M")
                      if law.base(name) > 0.0 and abs(law.eps(name)) * law.kind.max_abs >= 1.0]
            if signed:
                raise ConfigurationError(
                    f"interface energy needs {', '.join(signed)}(t) >= 0; run this law without record_energy"
                )

    def _warn_nonpositive(self, t: float, flagged: Dict[str, bool]) -> None:
        params = interface_params(self.law, t, 0)._asdict()
        for name in CHANNELS:
            below = self.law.base(name) > 0.0 and params[name] <= 0.0
            if below and not flagged[name]:
                logger.warning(f"interface parameter {name}(t) = {params[name]:.4e} <= 0 at t = {t:.6e} s")
            flagged[name] = below

    def run(self, t_end: float) -> SimulationResult:
        """
        Integrate from t = 0 to t_end.

        Returns:
            SimulationResult with receivers (t, v_<x>...), energy (t, E_b, E_i, E_m, P) and
            traces (t, mean_v, mean_sigma, jump_v, jump_sigma)
        """
        n_steps, dt = step_count(t_end, self.grid.dt)
        grid = self.grid.with_dt(dt)
        logger.info(
            f"run: nx={grid.nx}, dx={grid.dx:.4g} m, dt={dt:.6e} s, steps={n_steps}, "
            f"law kind={self.law.kind.kind}, f_m={self.law.f_m} Hz, source={self.source.forcing.kind}"
        )

        esim = EsimInterface(grid, self.material, self.law, self.k, self.q, self.frozen_derivatives)
        coefficients = node_coefficients(grid, self.material)
        receiver_nodes = [grid.nearest_node(x, toward=self.material.x0) for x in self.receivers]
        rho_source = None
        if self.source.is_point:
            rho_source = float(coefficients[0][grid.nearest_node(self.source.x_s, toward=self.material.x0)])

        state = initial_state(grid, self.material, self.source)
        times: List[float] = []
        receiver_rows: List[np.ndarray] = []
        max_rows: List[float] = []
        energy_rows, trace_rows = [], []
        flagged = {name: False for name in CHANNELS}
        check_positive = self.law.allow_nonpositive

        try:
            for n in range(n_steps + 1):
                overrides, traces = esim.update(state)
                times.append(state.t)
                receiver_rows.append(state.v[receiver_nodes])
                if self.track_max_v:
                    max_rows.append(float(np.max(np.abs(state.v))))
                if self.record_energy and n % self.record_every == 0:
                    energy_rows.append(energies(state, traces, self.law, grid, self.material, self.source).model_dump())
                    trace_rows.append({"t": state.t, **traces._asdict()})
                if check_positive:
                    self._warn_nonpositive(state.t, flagged)
                if n == n_steps:
                    break

                state = apply_boundary(state, self.boundary, self.material)
                t_mid = state.t + 0.5 * dt
                state = ader_step(state, grid, self.material, overrides, coefficients)
                if self.source.is_point:
                    s_value = float(forcing_signal(self.source, t_mid))
                    state = inject_point_source(state, grid, self.source.x_s, self.material.x0, s_value, rho_source, dt)
                # keep the nominal time exact
                state = FieldState(t=(n + 1) * dt, v=state.v, sigma=state.sigma)

                if (n + 1) % FINITE_CHECK_EVERY == 0 and not state.is_finite():
                    raise NumericalFailureError(f"non-finite field values at step {n + 1} (t = {state.t:.6e} s)")
        except Exception as e:
            logger.error(f"Error during simulation at t={state.t:.6e} s: {str(e)}")
            raise

        if not state.is_finite():
            raise NumericalFailureError(f"non-finite field values at t = {state.t:.6e} s")

        receivers = pd.DataFrame(
            np.array(receiver_rows).reshape(len(times), len(self.receivers)),
            columns=[receiver_column(x) for x in self.receivers],
        )
        receivers.insert(0, "t", times)
        return SimulationResult(
            grid=grid,
            final_state=state,
            receivers=receivers,
            energy=pd.DataFrame(energy_rows, columns=["t", "E_b", "E_i", "E_m", "P"]),
            traces=pd.DataFrame(trace_rows, columns=["t", *InterfaceTraces._fields]),
            max_abs_v=pd.DataFrame({"t": times[:len(max_rows)], "max_abs_v": max_rows}),
        )
