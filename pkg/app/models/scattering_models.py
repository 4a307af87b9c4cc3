from typing import Literal
from pydantic import BaseModel, ConfigDict, Field
import numpy as np

from app.models.physics_models import InterfaceLaw, MaterialHalfSpaces, SourceSpec


# --- Harmonic balance

class ReducedParams(BaseModel):
    """Dimensionless interface parameters scaled by the bulk impedance."""
    model_config = ConfigDict(frozen=True)

    Ccal: float = Field(ge=0.0)
    Qcal_C: float = Field(ge=0.0)
    Mcal: float = Field(ge=0.0)
    Qcal_M: float = Field(ge=0.0)

    @classmethod
    def from_law(cls, law: InterfaceLaw, impedance: float) -> "ReducedParams":
        return cls(
            Ccal=impedance * law.C0,
            Qcal_C=impedance * law.QC0,
            Mcal=law.M0 / impedance,
            Qcal_M=law.QM0 / impedance,
        )


class TridiagonalSystem(BaseModel):
    """Complex tridiagonal system stored by diagonals, rows k = -N..N."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    lower: np.ndarray   # lower[i] multiplies x[i-1] in row i (lower[0] unused)
    diag: np.ndarray
    upper: np.ndarray   # upper[i] multiplies x[i+1] in row i (upper[-1] unused)
    rhs: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def dense(self) -> np.ndarray:
        n = self.size
        matrix = np.diag(self.diag).astype(complex)
        matrix[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        matrix[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        return matrix


class ScatteringSpectrum(BaseModel):
    """Floquet reflection and transmission coefficients for k = -N..N."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    omega: float
    Omega: float
    N: int = Field(ge=1)
    R: np.ndarray
    T: np.ndarray

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def omega_k(self) -> np.ndarray:
        return self.omega + self.k * self.Omega

    @property
    def psi(self) -> np.ndarray:
        return self.T - self.R

    @property
    def phi(self) -> np.ndarray:
        return self.T + self.R

    def coefficient(self, name: str, k: int) -> complex:
        if abs(k) > self.N:
            raise IndexError(f"harmonic {k} outside the truncation N={self.N}")
        values = self.R if name == "R" else self.T
        return complex(values[k + self.N])


# --- Characteristics

class CharacteristicSolution(BaseModel):
    """Interface trace (v+ or sigma+) of the characteristics solution on a uniform time grid."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    channel: Literal["C", "M"]
    times: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    material: MaterialHalfSpaces
    law: InterfaceLaw
    source: SourceSpec
