from math import comb, factorial
from typing import Optional, Tuple
import numpy as np
import scipy.linalg

from app.exceptions import ConfigurationError, FitRankError, IllConditionedInterfaceError
from app.models.physics_models import InterfaceLaw, MaterialHalfSpaces
from app.models.simulation_models import (
    BoundaryDerivatives, FieldState, Grid, InterfaceTraces, JumpMatrices, block_scale,
)
from app.services.fdtd import Overrides, override_nodes
from app.services.modulation import interface_params
from logger_config import logger


CONDITION_LIMIT = 1e12


# --- Helpers

def _propagator(rho: float, young: float) -> np.ndarray:
    """A of U_t + A U_x = 0 for U = (v, sigma)."""
    return np.array([[0.0, -1.0 / rho], [-young, 0.0]])


def _off_diagonal(upper: float, lower: float) -> np.ndarray:
    return np.array([[0.0, upper], [lower, 0.0]])


def _taylor_row(h: float, k: int) -> np.ndarray:
    return np.array([h ** m / factorial(m) for m in range(k + 1)])


def _taylor_block(offsets: np.ndarray, k: int) -> np.ndarray:
    """Rows (node, component) mapping the stacked derivatives (block m, component c) to node values."""
    rows = np.zeros((2 * len(offsets), 2 * (k + 1)))
    for n, h in enumerate(offsets):
        coeffs = _taylor_row(h, k)
        rows[2 * n, 0::2] = coeffs
        rows[2 * n + 1, 1::2] = coeffs
    return rows


# --- Jump matrices

def build_jump_matrices(law: InterfaceLaw, material: MaterialHalfSpaces, t: float, k: int,
                        frozen_derivatives: bool = False, length_scale: float = 1.0) -> JumpMatrices:
    """
    Assemble the plus/minus relations of the k first time derivatives of the jump conditions.

    Block row j holds d^j/dt^j of  U -+ (1/2) d/dt(B U) -+ (1/2) E U  on each side, with time
    derivatives of U replaced by (-A)^i (d/dx)^i U; the (k+1)-th spatial derivative is dropped.

    Args:
        law: interface law
        material: bulk media on both sides
        t: evaluation time (s)
        k: highest spatial derivative kept
        frozen_derivatives: drop every time derivative of B and E (order >= 1)
        length_scale: length used to equilibrate the matrices (the grid spacing)

    Returns:
        JumpMatrices
    """
    if k < 0:
        raise ConfigurationError(f"ESIM order k={k} must be non-negative")

    a_minus = _propagator(material.rho_minus, material.E_minus)
    a_plus = _propagator(material.rho_plus, material.E_plus)
    pow_minus = [np.linalg.matrix_power(-a_minus, i) for i in range(k + 1)]
    pow_plus = [np.linalg.matrix_power(-a_plus, i) for i in range(k + 1)]

    b_blocks, e_blocks = [], []
    for n in range(k + 2):
        if frozen_derivatives and n > 0:
            b_blocks.append(np.zeros((2, 2)))
            e_blocks.append(np.zeros((2, 2)))
            continue
        params = interface_params(law, t, n)
        b_blocks.append(_off_diagonal(params.C, params.M))
        e_blocks.append(_off_diagonal(params.QC, params.QM))

    size = 2 * (k + 1)
    cplus, cminus = np.zeros((size, size)), np.zeros((size, size))
    identity = np.eye(2)
    for j in range(k + 1):
        rows = slice(2 * j, 2 * j + 2)
        for i in range(j + 1):
            binom = comb(j, i)
            delta = identity if i == j else 0.0
            damping = 0.5 * (b_blocks[j - i + 1] + e_blocks[j - i])
            cols = slice(2 * i, 2 * i + 2)
            cplus[rows, cols] += binom * (delta - damping) @ pow_plus[i]
            cminus[rows, cols] += binom * (delta + damping) @ pow_minus[i]
            if i + 1 <= k:
                cols = slice(2 * i + 2, 2 * i + 4)
                cplus[rows, cols] += binom * 0.5 * b_blocks[j - i] @ pow_plus[i] @ a_plus
                cminus[rows, cols] -= binom * 0.5 * b_blocks[j - i] @ pow_minus[i] @ a_minus

    return JumpMatrices(
        cplus=cplus, cminus=cminus, t=t, k=k,
        length_scale=length_scale,
        time_scale=length_scale / material.c_max,
        z_ref=material.z_ref,
    )


def _scaled_transfer(jm: JumpMatrices) -> np.ndarray:
    rows, cols = jm.row_scale, jm.column_scale
    cplus = jm.cplus * rows[:, None] / cols[None, :]
    cminus = jm.cminus * rows[:, None] / cols[None, :]
    condition = np.linalg.cond(cplus)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise IllConditionedInterfaceError(f"plus-side jump matrix singular at t={jm.t:.6e} s", float(condition))
    return scipy.linalg.lu_solve(scipy.linalg.lu_factor(cplus), cminus)


def transfer_matrix(jm: JumpMatrices) -> np.ndarray:
    """
    D_k = (C_k^+)^{-1} C_k^-, mapping the minus-side derivatives to the plus side.

    The inversion runs on the equilibrated matrices; the condition limit applies there.
    """
    scale = jm.column_scale
    return _scaled_transfer(jm) * scale[None, :] / scale[:, None]


# --- Fit and extension

def fit_boundary_derivatives(state: FieldState, d_k: np.ndarray, grid: Grid, material: MaterialHalfSpaces,
                             k: int, q: Optional[int] = None) -> BoundaryDerivatives:
    """
    Fit the one-sided derivatives at x0 from q nodes on each side.

    Left nodes satisfy the Taylor expansion of U^-; right nodes the expansion of U^+ = D_k U^-.

    Args:
        state: fields at the current time
        d_k: transfer matrix at the current time
        grid: grid
        material: bulk media (x0 and the reference impedance)
        k: highest derivative
        q: nodes per side, default (k+1)/2 (square system); larger values use least squares

    Returns:
        BoundaryDerivatives with uk_plus = d_k uk_minus
    """
    q = (k + 1) // 2 if q is None else q
    if 2 * q < k + 1:
        raise ConfigurationError(f"q={q} nodes per side cannot determine {k + 1} derivatives")
    i_left = grid.interface_index(material.x0)
    left = np.arange(i_left - q + 1, i_left + 1)
    right = np.arange(i_left + 1, i_left + q + 1)
    if left[0] < 0 or right[-1] >= grid.nx:
        raise ConfigurationError(f"not enough nodes around x0={material.x0} for q={q}")

    scale = block_scale(k, grid.dx, material.z_ref)
    d_scaled = d_k * scale[:, None] / scale[None, :]
    left_rows = _taylor_block((grid.x[left] - material.x0) / grid.dx, k)
    right_rows = _taylor_block((grid.x[right] - material.x0) / grid.dx, k) @ d_scaled
    matrix, data = _stack_fit(state, left, right, left_rows, right_rows, material.z_ref)
    return _solve_fit(matrix, data, d_scaled, scale, k)


def _stack_fit(state: FieldState, left: np.ndarray, right: np.ndarray, left_rows: np.ndarray,
               right_rows: np.ndarray, z_ref: float) -> Tuple[np.ndarray, np.ndarray]:
    nodes = np.concatenate([left, right])
    data = np.column_stack([state.v[nodes], state.sigma[nodes] / z_ref]).ravel()
    return np.vstack([left_rows, right_rows]), data


def _solve_fit(matrix: np.ndarray, data: np.ndarray, d_scaled: np.ndarray, scale: np.ndarray,
               k: int) -> BoundaryDerivatives:
    unknowns = matrix.shape[1]
    if matrix.shape[0] == unknowns:
        condition = np.linalg.cond(matrix)
        if not np.isfinite(condition) or condition > 1e14:
            raise FitRankError("interface Taylor fit is singular", int(np.linalg.matrix_rank(matrix)), matrix.shape)
        scaled_minus = scipy.linalg.lu_solve(scipy.linalg.lu_factor(matrix), data)
    else:
        scaled_minus, _, rank, _ = np.linalg.lstsq(matrix, data, rcond=None)
        if rank < unknowns:
            raise FitRankError("interface least-squares fit is rank deficient", int(rank), matrix.shape)
    scaled_plus = d_scaled @ scaled_minus
    return BoundaryDerivatives(uk_minus=scaled_minus / scale, uk_plus=scaled_plus / scale, k=k)


def modified_values(bd: BoundaryDerivatives, grid: Grid, material: MaterialHalfSpaces) -> Overrides:
    """
    Values of the one-sided extensions at the nodes read across the interface.

    Nodes right of x0 (read by left stencils) take the U^- extension, nodes left of x0 the U^+ one.
    """
    i_left = grid.interface_index(material.x0)
    overrides = {}
    for j in override_nodes(i_left):
        side = "-" if j > i_left else "+"
        coeffs = _taylor_row(grid.node_position(j) - material.x0, bd.k)
        v_star, s_star = coeffs @ bd.derivatives(side)
        overrides[j] = (float(v_star), float(s_star))
    return overrides


def interface_traces(bd: BoundaryDerivatives) -> InterfaceTraces:
    """Means and jumps of the one-sided limits of v and sigma."""
    v_minus, s_minus = bd.uk_minus[0], bd.uk_minus[1]
    v_plus, s_plus = bd.uk_plus[0], bd.uk_plus[1]
    return InterfaceTraces(
        mean_v=0.5 * (v_plus + v_minus),
        mean_sigma=0.5 * (s_plus + s_minus),
        jump_v=v_plus - v_minus,
        jump_sigma=s_plus - s_minus,
    )


# --- Class
class EsimInterface:
    """
    Per-simulation interface treatment: caches the fit geometry and rebuilds D_k(t) each step
    (once for static laws).
    """

    def __init__(self, grid: Grid, material: MaterialHalfSpaces, law: InterfaceLaw, k: int = 5,
                 q: Optional[int] = None, frozen_derivatives: bool = False):
        """
        Args:
            grid: grid
            material: bulk media
            law: interface law
            k: ESIM order
            q: nodes per side for the fit
            frozen_derivatives: ignore time derivatives of the interface parameters
        """
        self.grid = grid
        self.material = material
        self.law = law
        self.k = k
        self.q = (k + 1) // 2 if q is None else q
        self.frozen_derivatives = frozen_derivatives
        if 2 * self.q < k + 1:
            raise ConfigurationError(f"q={self.q} nodes per side cannot determine {k + 1} derivatives")

        self.i_left = grid.interface_index(material.x0)
        self._left = np.arange(self.i_left - self.q + 1, self.i_left + 1)
        self._right = np.arange(self.i_left + 1, self.i_left + self.q + 1)
        if self._left[0] < 0 or self._right[-1] >= grid.nx:
            raise ConfigurationError(f"not enough nodes around x0={material.x0} for q={self.q}")

        self._scale = block_scale(k, grid.dx, material.z_ref)
        self._left_rows = _taylor_block((grid.x[self._left] - material.x0) / grid.dx, k)
        self._right_taylor = _taylor_block((grid.x[self._right] - material.x0) / grid.dx, k)
        self._static_transfer = None

    def scaled_transfer(self, t: float) -> np.ndarray:
        """Equilibrated D_k at time t (cached for static laws)."""
        if self.law.is_static and self._static_transfer is not None:
            return self._static_transfer
        jm = build_jump_matrices(self.law, self.material, t, self.k, self.frozen_derivatives, self.grid.dx)
        scaled = _scaled_transfer(jm)
        if self.law.is_static:
            logger.debug("static interface law, transfer matrix cached")
            self._static_transfer = scaled
        return scaled

    def transfer(self, t: float) -> np.ndarray:
        return self.scaled_transfer(t) * self._scale[None, :] / self._scale[:, None]

    def fit(self, state: FieldState) -> BoundaryDerivatives:
        d_scaled = self.scaled_transfer(state.t)
        right_rows = self._right_taylor @ d_scaled
        matrix, data = _stack_fit(state, self._left, self._right, self._left_rows, right_rows, self.material.z_ref)
        return _solve_fit(matrix, data, d_scaled, self._scale, self.k)

    def update(self, state: FieldState) -> Tuple[Overrides, InterfaceTraces]:
        """Overrides for the ADER step and interface traces at state.t."""
        bd = self.fit(state)
        return modified_values(bd, self.grid, self.material), interface_traces(bd)
