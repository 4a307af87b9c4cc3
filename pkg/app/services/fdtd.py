from typing import Dict, Tuple
import math
import numpy as np

from app.exceptions import ConfigurationError, InternalConsistencyError
from app.models.physics_models import CauchyPulse, MaterialHalfSpaces, SourceSpec
from app.models.simulation_models import BoundaryPolicy, FieldState, Grid
from app.services.modulation import source_signal
from logger_config import logger


Overrides = Dict[int, Tuple[float, float]]

STENCIL_HALF_WIDTH = 2


# --- Grid helpers

def cfl_timestep(dx: float, material: MaterialHalfSpaces, zeta: float) -> float:
    """dt = zeta dx / max(c)."""
    if not 0.0 < zeta <= 1.0:
        raise ConfigurationError(f"CFL number zeta={zeta} outside (0, 1]")
    if dx <= 0.0:
        raise ConfigurationError(f"grid spacing dx={dx} must be positive")
    return zeta * dx / material.c_max


def build_grid(length: float, nx: int, material: MaterialHalfSpaces, zeta: float = 0.95) -> Grid:
    """
    Build the cell-centred grid and check the interface falls between two nodes.

    Args:
        length: domain length (m)
        nx: number of cells
        material: bulk media, carries x0
        zeta: CFL number

    Returns:
        Grid with dt from the CFL condition
    """
    dx = length / nx
    grid = Grid(length=length, nx=nx, zeta=zeta, dt=cfl_timestep(dx, material, zeta))
    i_left = grid.interface_index(material.x0)
    if i_left < STENCIL_HALF_WIDTH + 2 or i_left + STENCIL_HALF_WIDTH + 3 > nx:
        raise ConfigurationError(f"interface x0={material.x0} too close to the domain ends for nx={nx}")
    return grid


def override_nodes(i_left: int) -> Tuple[int, ...]:
    """Nodes whose values are read across the interface by the 5-point stencils."""
    return (i_left - 1, i_left, i_left + 1, i_left + 2)


def node_coefficients(grid: Grid, material: MaterialHalfSpaces) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-node density, Young's modulus and squared speed."""
    left = grid.x < material.x0
    rho = np.where(left, material.rho_minus, material.rho_plus)
    young = np.where(left, material.E_minus, material.E_plus)
    c2 = np.where(left, material.c_minus ** 2, material.c_plus ** 2)
    return rho, young, c2


# --- Initial data and forcing

def initial_state(grid: Grid, material: MaterialHalfSpaces, source: SourceSpec) -> FieldState:
    """
    Initial fields: right-going Cauchy pulse left of x0, or zero for point sources.
    """
    if not isinstance(source.forcing, CauchyPulse):
        return FieldState.zeros(grid.nx)

    t0 = source.forcing.t0
    tail = material.c_minus * (t0 - 1.0 / source.f_c)
    head = material.c_minus * t0
    if tail <= 0.0 or head >= material.x0:
        raise ConfigurationError(
            f"Cauchy pulse support [{tail:.3f}, {head:.3f}] m must lie inside (0, x0={material.x0})"
        )

    x = grid.x
    v = source.amplitude * np.asarray(source_signal(source.f_c, t0 - x / material.c_minus))
    v = np.where(x < material.x0, v, 0.0)
    return FieldState(t=0.0, v=v, sigma=-material.Z_minus * v)


def inject_point_source(state: FieldState, grid: Grid, x_s: float, x0: float,
                        s_value: float, rho: float, dt: float) -> FieldState:
    """
    Add dt S / (rho dx) to the velocity at the node nearest x_s.

    Args:
        state: fields after the bulk update
        grid: grid
        x_s: source position (m)
        x0: interface position (m)
        s_value: source amplitude at mid-step
        rho: density at the source (kg/m^3)
        dt: time step (s)

    Returns:
        New FieldState with the impulse added
    """
    if abs(x_s - x0) <= STENCIL_HALF_WIDTH * grid.dx:
        raise ConfigurationError(f"source at x_s={x_s} is within {STENCIL_HALF_WIDTH} cells of the interface x0={x0}")
    if s_value == 0.0:
        return state
    j = grid.nearest_node(x_s, toward=x0)
    v = state.v.copy()
    v[j] += dt * s_value / (rho * grid.dx)
    return FieldState(t=state.t, v=v, sigma=state.sigma, ghost_left=state.ghost_left, ghost_right=state.ghost_right)


# --- Boundaries

def apply_boundary(state: FieldState, policy: BoundaryPolicy, material: MaterialHalfSpaces) -> FieldState:
    """
    Fill the two ghost cells at each end.

    Absorbing ghosts carry the outgoing Riemann invariant of the end node and no incoming wave;
    reflecting-zero ghosts are zero.
    """
    policy = BoundaryPolicy(policy)
    if policy is BoundaryPolicy.REFLECTING_ZERO:
        ghost_left = np.zeros((2, 2))
        ghost_right = np.zeros((2, 2))
    else:
        z_left, z_right = material.Z_minus, material.Z_plus
        # left end: outgoing is left-going J_L = (v + sigma/Z)/2
        j_left = 0.5 * (state.v[0] + state.sigma[0] / z_left)
        ghost_left = np.array([[j_left, j_left], [z_left * j_left, z_left * j_left]])
        # right end: outgoing is right-going J_R = (v - sigma/Z)/2
        j_right = 0.5 * (state.v[-1] - state.sigma[-1] / z_right)
        ghost_right = np.array([[j_right, j_right], [-z_right * j_right, -z_right * j_right]])
    return FieldState(t=state.t, v=state.v, sigma=state.sigma, ghost_left=ghost_left, ghost_right=ghost_right)


# --- ADER-4 update

def _stencil_derivatives(u: np.ndarray, dx: float) -> Tuple[np.ndarray, ...]:
    """Five-point D1..D4 on a padded array (two ghosts per side)."""
    um2, um1, u0, up1, up2 = u[:-4], u[1:-3], u[2:-2], u[3:-1], u[4:]
    d1 = (um2 - 8.0 * um1 + 8.0 * up1 - up2) / (12.0 * dx)
    d2 = (-um2 + 16.0 * um1 - 30.0 * u0 + 16.0 * up1 - up2) / (12.0 * dx ** 2)
    d3 = (-um2 + 2.0 * um1 - 2.0 * up1 + up2) / (2.0 * dx ** 3)
    d4 = (um2 - 4.0 * um1 + 6.0 * u0 - 4.0 * up1 + up2) / dx ** 4
    return d1, d2, d3, d4


def _padded(state: FieldState, row: int) -> np.ndarray:
    values = state.v if row == 0 else state.sigma
    return np.concatenate([state.ghost_left[row], values, state.ghost_right[row]])


def ader_step(state: FieldState, grid: Grid, material: MaterialHalfSpaces, modified_values: Overrides,
              coefficients: Tuple[np.ndarray, np.ndarray, np.ndarray] = None) -> FieldState:
    """
    One ADER-4 step, U^{n+1} = U^n + sum_m dt^m/m! (-A)^m D_m U.

    Left-side nodes read the overrides placed right of x0 and vice versa.

    Args:
        state: fields at t_n (ghosts filled by apply_boundary; absorbing used otherwise)
        grid: grid
        material: bulk media
        modified_values: override map {node index: (v*, sigma*)} for the four nodes around x0
        coefficients: cached output of node_coefficients

    Returns:
        FieldState at t_n + dt
    """
    i_left = grid.interface_index(material.x0)
    missing = [j for j in override_nodes(i_left) if j not in modified_values]
    if missing:
        raise InternalConsistencyError(f"no override for cross-interface reads at nodes {missing}")
    if state.ghost_left is None or state.ghost_right is None:
        state = apply_boundary(state, BoundaryPolicy.ABSORBING, material)

    rho, young, c2 = coefficients if coefficients is not None else node_coefficients(grid, material)
    dx, dt = grid.dx, grid.dt
    split = i_left + 1

    derivatives = []
    for row in (0, 1):
        padded = _padded(state, row)
        left_view, right_view = padded.copy(), padded.copy()
        for j in (i_left + 1, i_left + 2):
            left_view[j + STENCIL_HALF_WIDTH] = modified_values[j][row]
        for j in (i_left - 1, i_left):
            right_view[j + STENCIL_HALF_WIDTH] = modified_values[j][row]
        from_left = _stencil_derivatives(left_view, dx)
        from_right = _stencil_derivatives(right_view, dx)
        derivatives.append([np.concatenate([dl[:split], dr[split:]]) for dl, dr in zip(from_left, from_right)])

    (dv1, dv2, dv3, dv4), (ds1, ds2, ds3, ds4) = derivatives
    h1, h2, h3, h4 = dt, dt ** 2 / 2.0, dt ** 3 / 6.0, dt ** 4 / 24.0

    # (-A) = [[0, 1/rho], [E, 0]], (-A)^2 = c^2 I
    v_new = state.v + h1 * ds1 / rho + h2 * c2 * dv2 + h3 * c2 * ds3 / rho + h4 * c2 ** 2 * dv4
    s_new = state.sigma + h1 * young * dv1 + h2 * c2 * ds2 + h3 * c2 * young * dv3 + h4 * c2 ** 2 * ds4
    return FieldState(t=state.t + dt, v=v_new, sigma=s_new)


def step_count(t_end: float, dt: float) -> Tuple[int, float]:
    """Number of steps reaching t_end and the snapped time step."""
    if t_end <= 0.0:
        return 0, dt
    n = int(math.ceil(t_end / dt - 1e-9))
    snapped = t_end / n
    if snapped < dt * (1.0 - 1e-12):
        logger.debug(f"time step snapped from {dt:.6e} to {snapped:.6e} s to land on t_end={t_end}")
    return n, snapped
