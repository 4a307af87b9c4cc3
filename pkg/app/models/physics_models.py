from typing import Annotated, Literal, Union
from pydantic import BaseModel, ConfigDict, Field, model_validator
import math


# --- Bulk media

class MaterialHalfSpaces(BaseModel):
    """Piecewise-constant density and sound speed on each side of the interface at x0."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    rho_minus: float = Field(gt=0, description="density left of x0 (kg/m^3)")
    rho_plus: float = Field(gt=0, description="density right of x0 (kg/m^3)")
    c_minus: float = Field(gt=0, description="sound speed left of x0 (m/s)")
    c_plus: float = Field(gt=0, description="sound speed right of x0 (m/s)")
    x0: float = Field(description="interface position (m)")

    @property
    def E_minus(self) -> float:
        return self.rho_minus * self.c_minus ** 2

    @property
    def E_plus(self) -> float:
        return self.rho_plus * self.c_plus ** 2

    @property
    def Z_minus(self) -> float:
        return self.rho_minus * self.c_minus

    @property
    def Z_plus(self) -> float:
        return self.rho_plus * self.c_plus

    @property
    def c_max(self) -> float:
        return max(self.c_minus, self.c_plus)

    @property
    def z_ref(self) -> float:
        """Geometric mean of the two impedances, used to equilibrate stress against velocity."""
        return math.sqrt(self.Z_minus * self.Z_plus)

    @property
    def is_homogeneous(self) -> bool:
        return self.rho_minus == self.rho_plus and self.c_minus == self.c_plus


# --- Modulation kinds

class Sinusoidal(BaseModel):
    """phi(t) = sin(Omega t)."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["sinusoidal"] = "sinusoidal"

    @property
    def max_abs(self) -> float:
        return 1.0


class QuasiPeriodic(BaseModel):
    """phi(t) = sin(Omega t) + sin(sqrt(2) Omega t)."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["quasi_periodic"] = "quasi_periodic"

    @property
    def max_abs(self) -> float:
        return 2.0


class Rectangular(BaseModel):
    """Square wave of unit amplitude, low for the first fraction nu of each period."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["rectangular"] = "rectangular"
    nu: float = Field(0.5, gt=0.0, lt=1.0, description="duty offset within one period")

    @property
    def max_abs(self) -> float:
        return 1.0


ModulationKind = Annotated[Union[Sinusoidal, QuasiPeriodic, Rectangular], Field(discriminator="kind")]


# --- Interface law

CHANNELS = ("C", "M", "QC", "QM")


class InterfaceLaw(BaseModel):
    """Base values, modulation amplitudes, kind and frequency of the four interface parameters."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    C0: float = Field(0.0, ge=0.0, description="compliance (m/Pa)")
    M0: float = Field(0.0, ge=0.0, description="inertia (kg/m^2)")
    QC0: float = Field(0.0, ge=0.0, description="compliance dissipation (m^2 s/kg)")
    QM0: float = Field(0.0, ge=0.0, description="inertia dissipation (kg/(m^2 s))")
    eps_C: float = 0.0
    eps_M: float = 0.0
    eps_QC: float = 0.0
    eps_QM: float = 0.0
    kind: ModulationKind = Field(default_factory=Sinusoidal)
    f_m: float = Field(0.0, ge=0.0, description="modulation frequency (Hz)")
    allow_nonpositive: bool = Field(False, description="let eps*max|phi| reach 1 (quasi-periodic runs)")

    @model_validator(mode="after")
    def check_positivity_guard(self):
        """Every modulated channel must stay positive unless explicitly allowed."""
        if self.allow_nonpositive:
            return self
        for name in CHANNELS:
            base, eps = self.base(name), self.eps(name)
            if base > 0.0 and abs(eps) * self.kind.max_abs >= 1.0:
                raise ValueError(
                    f"eps_{name}={eps} with max|phi|={self.kind.max_abs} lets {name}(t) reach zero; "
                    f"set allow_nonpositive to run it anyway"
                )
        return self

    @property
    def omega_m(self) -> float:
        return 2.0 * math.pi * self.f_m

    def base(self, channel: str) -> float:
        return getattr(self, f"{channel}0")

    def eps(self, channel: str) -> float:
        return getattr(self, f"eps_{channel}")

    @property
    def is_static(self) -> bool:
        return self.f_m == 0.0 or all(self.eps(name) == 0.0 for name in CHANNELS)

    def updated(self, **changes) -> "InterfaceLaw":
        """Validated copy with some fields replaced."""
        return InterfaceLaw(**{**self.model_dump(), **changes})


# --- Sources

class CauchyPulse(BaseModel):
    """Right-going pulse given as initial data, v(x,0) = S(t0 - x/c)."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["cauchy"] = "cauchy"
    t0: float = Field(description="time offset (s)")


class DiracPoint(BaseModel):
    """Point force S(t) at x_s from zero initial data."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["dirac"] = "dirac"
    x_s: float = Field(description="source position (m)")


class HarmonicPoint(BaseModel):
    """Point force sin(2 pi f_c t), switched on at t = 0."""
    model_config = ConfigDict(frozen=True, extra="forbid")
    kind: Literal["harmonic"] = "harmonic"
    x_s: float = Field(description="source position (m)")


Forcing = Annotated[Union[CauchyPulse, DiracPoint, HarmonicPoint], Field(discriminator="kind")]


class SourceSpec(BaseModel):
    """Central frequency, forcing variant and amplitude of the excitation."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    f_c: float = Field(gt=0.0, description="central frequency (Hz)")
    forcing: Forcing
    amplitude: float = 1.0

    @property
    def is_point(self) -> bool:
        return not isinstance(self.forcing, CauchyPulse)

    @property
    def x_s(self) -> float:
        if isinstance(self.forcing, CauchyPulse):
            raise AttributeError("Cauchy pulses have no source point")
        return self.forcing.x_s
