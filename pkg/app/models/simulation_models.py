from enum import Enum
from typing import NamedTuple, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
import math
import numpy as np

from app.exceptions import ConfigurationError


class BoundaryPolicy(str, Enum):
    ABSORBING = "absorbing"
    REFLECTING_ZERO = "reflecting-zero"


# --- Grid

class Grid(BaseModel):
    """Cell-centred uniform grid, x_j = (j + 1/2) dx, with its time step."""
    model_config = ConfigDict(frozen=True)

    length: float = Field(gt=0.0)
    nx: int = Field(ge=8)
    zeta: float = Field(gt=0.0, le=1.0)
    dt: float = Field(gt=0.0)

    @property
    def dx(self) -> float:
        return self.length / self.nx

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def node_position(self, j: int) -> float:
        return (j + 0.5) * self.dx

    def interface_index(self, x0: float) -> int:
        """
        Index of the last node left of x0.

        Raises:
            ConfigurationError: x0 outside the domain or on a node
        """
        if not 0.0 < x0 < self.length:
            raise ConfigurationError(f"interface x0={x0} outside the domain (0, {self.length})")
        position = x0 / self.dx - 0.5
        if abs(position - round(position)) < 1e-9:
            raise ConfigurationError(f"interface x0={x0} sits on a grid node; it must lie between two nodes")
        return int(math.floor(position))

    def nearest_node(self, x: float, toward: Optional[float] = None) -> int:
        """Node closest to x; an exact tie resolves toward the point `toward`."""
        position = x / self.dx - 0.5
        lower = math.floor(position)
        frac = position - lower
        if abs(frac - 0.5) < 1e-9 and toward is not None:
            j = lower + 1 if toward > x else lower
        else:
            j = int(round(position))
        return int(min(max(j, 0), self.nx - 1))

    def with_dt(self, dt: float) -> "Grid":
        return Grid(length=self.length, nx=self.nx, zeta=self.zeta, dt=dt)


# --- Field state

class FieldState(BaseModel):
    """Velocity and stress on the grid at one time level, with optional boundary ghosts."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    t: float
    v: np.ndarray
    sigma: np.ndarray
    # rows (v, sigma); columns (x_{-2}, x_{-1}) on the left, (x_{N}, x_{N+1}) on the right
    ghost_left: Optional[np.ndarray] = None
    ghost_right: Optional[np.ndarray] = None

    @field_validator("v", "sigma", mode="before")
    @classmethod
    def as_float_array(cls, value):
        return np.asarray(value, dtype=float)

    @model_validator(mode="after")
    def check_shapes(self):
        if self.v.ndim != 1 or self.v.shape != self.sigma.shape:
            raise ValueError(f"v and sigma must be 1D arrays of equal length, got {self.v.shape} and {self.sigma.shape}")
        return self

    @property
    def nx(self) -> int:
        return self.v.shape[0]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.v).all() and np.isfinite(self.sigma).all())

    @classmethod
    def zeros(cls, nx: int, t: float = 0.0) -> "FieldState":
        return cls(t=t, v=np.zeros(nx), sigma=np.zeros(nx))


# --- ESIM containers

class JumpMatrices(BaseModel):
    """Plus/minus matrices of the k first time derivatives of the jump conditions."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    cplus: np.ndarray
    cminus: np.ndarray
    t: float
    k: int = Field(ge=0)
    length_scale: float = Field(1.0, gt=0.0)
    time_scale: float = Field(1.0, gt=0.0)
    z_ref: float = Field(1.0, gt=0.0)

    @property
    def size(self) -> int:
        return 2 * (self.k + 1)

    @property
    def column_scale(self) -> np.ndarray:
        """Scale of the unknowns: block m holds dx^m (d/dx)^m (v, sigma / Z)."""
        return block_scale(self.k, self.length_scale, self.z_ref)

    @property
    def row_scale(self) -> np.ndarray:
        """Scale of the equations: block j is the j-th time derivative, in units of tau^j."""
        return block_scale(self.k, self.time_scale, self.z_ref)


def block_scale(k: int, unit: float, z_ref: float) -> np.ndarray:
    powers = unit ** np.arange(k + 1)
    return np.column_stack([powers, powers / z_ref]).ravel()


class BoundaryDerivatives(BaseModel):
    """One-sided limits (v, sigma) and their spatial derivatives up to order k at x0."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    uk_minus: np.ndarray
    uk_plus: np.ndarray
    k: int

    def derivatives(self, side: str) -> np.ndarray:
        """(k+1, 2) array: row m holds (d^m v/dx^m, d^m sigma/dx^m)."""
        vector = self.uk_plus if side == "+" else self.uk_minus
        return vector.reshape(self.k + 1, 2)


class InterfaceTraces(NamedTuple):
    mean_v: float
    mean_sigma: float
    jump_v: float
    jump_sigma: float


# --- Diagnostics

class EnergyRecord(BaseModel):
    """Bulk, interface and total energy with the forcing power at one time."""
    t: float
    E_b: float = Field(ge=0.0)
    E_i: float = Field(ge=0.0)
    E_m: float
    P: float = 0.0
