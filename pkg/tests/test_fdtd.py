import numpy as np
import pytest

from app.exceptions import ConfigurationError, InternalConsistencyError
from app.models.physics_models import CauchyPulse, SourceSpec
from app.models.simulation_models import BoundaryPolicy, FieldState, Grid
from app.services.diagnostics import convergence_order
from app.services.fdtd import (
    apply_boundary, ader_step, build_grid, cfl_timestep, initial_state, inject_point_source, node_coefficients,
    override_nodes, step_count,
)
from app.services.simulation import InterfaceSimulation


class TestGrid:
    def test_cell_centred_nodes(self, grid):
        assert grid.dx == 1.0
        assert grid.x[0] == 0.5 and grid.x[-1] == 399.5
        assert grid.dt == pytest.approx(0.95 / 2800.0)

    @pytest.mark.parametrize("nx, expected", [(400, 199), (800, 399), (1600, 799)])
    def test_interface_index(self, material, nx, expected):
        assert build_grid(400.0, nx, material).interface_index(material.x0) == expected

    def test_interface_on_a_node_is_rejected(self, grid):
        with pytest.raises(ConfigurationError):
            grid.interface_index(200.5)
        with pytest.raises(ConfigurationError):
            grid.interface_index(450.0)

    def test_nearest_node_tie_goes_toward_interface(self, grid):
        # x = 150 sits halfway between nodes 149 (149.5) and 150 (150.5)
        assert grid.nearest_node(150.0, toward=200.0) == 150
        assert grid.nearest_node(150.0, toward=100.0) == 149
        assert grid.nearest_node(150.2) == 150

    def test_cfl_timestep_uses_fastest_medium(self, bimaterial):
        assert cfl_timestep(0.5, bimaterial, 0.9) == pytest.approx(0.9 * 0.5 / 2800.0)
        with pytest.raises(ConfigurationError):
            cfl_timestep(0.5, bimaterial, 1.2)

    def test_interface_too_close_to_the_end(self, material):
        with pytest.raises(ConfigurationError):
            build_grid(203.0, 203, material)


class TestStepCount:
    def test_lands_on_t_end(self):
        n, dt = step_count(0.045, 0.95 / 2800.0)
        assert n * dt == pytest.approx(0.045, rel=1e-14)
        assert dt <= 0.95 / 2800.0

    def test_exact_multiple_keeps_dt(self):
        n, dt = step_count(20.0 / 2800.0, 1.0 / 2800.0)
        assert n == 20
        assert dt == pytest.approx(1.0 / 2800.0, rel=1e-14)

    def test_zero_time(self):
        assert step_count(0.0, 1e-4) == (0, 1e-4)


class TestInitialData:
    def test_cauchy_pulse_is_right_going(self, grid, material, cauchy_source):
        state = initial_state(grid, material, cauchy_source)
        assert np.max(np.abs(state.v)) > 0.5
        assert np.allclose(state.sigma, -material.Z_minus * state.v)
        outside = (grid.x < 109.0) | (grid.x > 172.5)
        assert np.all(state.v[outside] == 0.0)

    def test_pulse_must_fit_left_of_interface(self, grid, material):
        with pytest.raises(ConfigurationError):
            initial_state(grid, material, SourceSpec(f_c=45.0, forcing=CauchyPulse(t0=0.08)))

    def test_point_source_injection(self, grid):
        state = FieldState.zeros(grid.nx)
        kicked = inject_point_source(state, grid, 150.0, 200.0, 2.0, 1200.0, 1e-4)
        assert kicked.v[150] == pytest.approx(1e-4 * 2.0 / 1200.0)
        assert np.count_nonzero(kicked.v) == 1

    def test_point_source_next_to_interface(self, grid):
        with pytest.raises(ConfigurationError):
            inject_point_source(FieldState.zeros(grid.nx), grid, 199.0, 200.0, 1.0, 1200.0, 1e-4)


class TestBoundary:
    def test_absorbing_ghosts_carry_no_incoming_wave(self, material):
        v = np.zeros(20)
        sigma = np.zeros(20)
        v[-1], sigma[-1] = 1.0, -material.Z_plus * 1.0
        state = apply_boundary(FieldState(t=0.0, v=v, sigma=sigma), BoundaryPolicy.ABSORBING, material)
        assert np.allclose(state.ghost_right[0], 1.0)
        assert np.allclose(state.ghost_right[1], -material.Z_plus)
        assert np.allclose(state.ghost_left, 0.0)

    def test_reflecting_zero(self, material):
        state = apply_boundary(FieldState(t=0.0, v=np.ones(20), sigma=np.ones(20)), "reflecting-zero", material)
        assert np.all(state.ghost_left == 0.0) and np.all(state.ghost_right == 0.0)


class TestAderStep:
    def test_missing_override_is_an_error(self, grid, material):
        with pytest.raises(InternalConsistencyError):
            ader_step(FieldState.zeros(grid.nx), grid, material, {})

    def test_exact_shift_at_unit_cfl(self, material):
        """Far from the interface, one step at zeta = 1 translates a right-going wave by one cell."""
        grid = build_grid(400.0, 400, material, 1.0)
        x = grid.x
        v = np.exp(-((x - 100.0) / 8.0) ** 2)
        state = FieldState(t=0.0, v=v, sigma=-material.Z_minus * v)
        i_left = grid.interface_index(material.x0)
        overrides = {j: (float(state.v[j]), float(state.sigma[j])) for j in override_nodes(i_left)}
        new = ader_step(state, grid, material, overrides, node_coefficients(grid, material))
        assert new.t == pytest.approx(grid.dt)
        assert np.allclose(new.v[1:], v[:-1], atol=1e-12)
        assert np.allclose(new.sigma[1:], -material.Z_minus * v[:-1], atol=1e-12 * material.Z_minus)

    def test_grid_with_dt(self, grid):
        assert isinstance(grid.with_dt(1e-5), Grid)
        assert grid.with_dt(1e-5).dt == 1e-5


def _advect_gaussian(material, nx, t_end, zeta=0.5):
    """Right-going Gaussian in one medium; returns (dx, L2 error of v against the translated pulse)."""
    grid = build_grid(400.0, nx, material, zeta)
    n, dt = step_count(t_end, grid.dt)
    grid = grid.with_dt(dt)
    coefficients = node_coefficients(grid, material)
    nodes = override_nodes(grid.interface_index(material.x0))

    def pulse(x):
        return np.exp(-((x - 80.0) / 10.0) ** 2)

    state = FieldState(t=0.0, v=pulse(grid.x), sigma=-material.Z_minus * pulse(grid.x))
    for _ in range(n):
        overrides = {j: (float(state.v[j]), float(state.sigma[j])) for j in nodes}
        state = ader_step(state, grid, material, overrides, coefficients)
    error = state.v - pulse(grid.x - material.c_minus * state.t)
    return grid.dx, float(np.sqrt(grid.dx * np.sum(error ** 2)))


class TestAderAccuracy:
    def test_fourth_order_on_a_smooth_pulse(self, material):
        samples = [_advect_gaussian(material, nx, 40.0 / 2800.0) for nx in (400, 800, 1600)]
        assert samples[0][1] > samples[1][1] > samples[2][1]
        assert 3.6 <= convergence_order(samples) <= 4.5

    @pytest.mark.slow
    def test_ten_thousand_steps_stay_bounded(self, material, cauchy_source, modulated_law):
        grid = build_grid(400.0, 400, material, 0.9)
        initial = float(np.max(np.abs(initial_state(grid, material, cauchy_source).v)))
        simulation = InterfaceSimulation(material, modulated_law, cauchy_source, grid, track_max_v=True)
        result = simulation.run(10_000 * grid.dt)
        history = result.max_abs_v["max_abs_v"].to_numpy()
        assert len(history) >= 10_000
        assert np.all(np.isfinite(history))
        assert history.max() <= 2.0 * initial
        # everything has left through the absorbing ends
        assert np.max(np.abs(result.final_state.v)) <= 1e-2 * initial
