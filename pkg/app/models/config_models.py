from typing import List, Literal, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.physics_models import (
    CauchyPulse, DiracPoint, HarmonicPoint, InterfaceLaw, MaterialHalfSpaces, QuasiPeriodic, Rectangular,
    Sinusoidal, SourceSpec,
)
from app.models.simulation_models import BoundaryPolicy


SCENARIOS = (
    "simulate", "validate", "converge", "energy", "hbm", "harmonics", "impedance", "nonreciprocity", "boundedness",
)


# --- Sections

class InterfaceSection(BaseModel):
    """Interface law as written in a config file; stiffness K0 may replace C0."""
    model_config = ConfigDict(extra="forbid")

    C0: Optional[float] = Field(None, ge=0.0)
    K0: Optional[float] = Field(None, gt=0.0, description="stiffness (Pa/m), C0 = 1/K0")
    M0: float = Field(0.0, ge=0.0)
    QC0: float = Field(0.0, ge=0.0)
    QM0: float = Field(0.0, ge=0.0)
    eps_C: float = 0.0
    eps_M: float = 0.0
    eps_QC: float = 0.0
    eps_QM: float = 0.0
    kind: Literal["sinusoidal", "quasi_periodic", "rectangular"] = "sinusoidal"
    nu: float = Field(0.5, gt=0.0, lt=1.0)
    f_m: float = Field(0.0, ge=0.0)
    allow_nonpositive: bool = False

    @model_validator(mode="after")
    def check_stiffness(self):
        if self.C0 is not None and self.K0 is not None:
            raise ValueError("give either C0 or K0, not both")
        return self

    def to_law(self, **overrides) -> InterfaceLaw:
        kinds = {"sinusoidal": Sinusoidal(), "quasi_periodic": QuasiPeriodic(), "rectangular": Rectangular(nu=self.nu)}
        values = self.model_dump(exclude={"K0", "nu", "kind"})
        values["C0"] = 1.0 / self.K0 if self.K0 is not None else (self.C0 or 0.0)
        values["kind"] = kinds[overrides.pop("kind", self.kind)]
        values.update(overrides)
        return InterfaceLaw(**values)


class SourceSection(BaseModel):
    """Excitation as written in a config file."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["cauchy", "dirac", "harmonic"] = "cauchy"
    f_c: float = Field(gt=0.0)
    t0: Optional[float] = None
    x_s: Optional[float] = None
    amplitude: float = 1.0

    @model_validator(mode="after")
    def check_position(self):
        if self.kind == "cauchy" and self.t0 is None:
            raise ValueError("a Cauchy pulse needs t0")
        if self.kind != "cauchy" and self.x_s is None:
            raise ValueError(f"a {self.kind} point source needs x_s")
        return self

    def to_spec(self, **overrides) -> SourceSpec:
        values = {**self.model_dump(), **overrides}
        if values["kind"] == "cauchy":
            forcing = CauchyPulse(t0=values["t0"])
        elif values["kind"] == "dirac":
            forcing = DiracPoint(x_s=values["x_s"])
        else:
            forcing = HarmonicPoint(x_s=values["x_s"])
        return SourceSpec(f_c=values["f_c"], forcing=forcing, amplitude=values["amplitude"])


class GridSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    length: float = Field(400.0, gt=0.0)
    nx: int = Field(400, ge=16)
    zeta: float = Field(0.95, gt=0.0, le=1.0)
    t_end: float = Field(0.045, gt=0.0)


class EsimSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(5, ge=1)
    q: Optional[int] = Field(None, ge=1)
    frozen_derivatives: bool = False

    @field_validator("k")
    @classmethod
    def check_odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"ESIM order k={value} must be odd")
        return value

    @model_validator(mode="after")
    def check_nodes(self):
        if self.q is not None and 2 * self.q < self.k + 1:
            raise ValueError(f"q={self.q} nodes per side cannot determine {self.k + 1} derivatives")
        return self


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: Optional[Literal[SCENARIOS]] = None
    boundary: BoundaryPolicy = BoundaryPolicy.ABSORBING
    receivers: List[float] = Field(default_factory=list)
    output_dir: Optional[str] = None
    record_energy: bool = False
    harmonics: int = Field(12, ge=1, description="HBM truncation N")


class SweepSection(BaseModel):
    """Ranges for ladders and sweeps."""
    model_config = ConfigDict(extra="forbid")

    nx_ladder: List[int] = Field(default_factory=lambda: [400, 800, 1600, 3200])
    drop_coarsest: int = Field(0, ge=0)
    fm_values: List[float] = Field(default_factory=list)
    fm_min: float = Field(4.0, gt=0.0)
    fm_max: float = Field(400.0, gt=0.0)
    fm_count: int = Field(100, ge=1)
    eps_values: List[float] = Field(default_factory=list)
    fm_ladder: List[float] = Field(default_factory=list)
    kinds: List[Literal["sinusoidal", "quasi_periodic", "rectangular"]] = Field(
        default_factory=lambda: ["sinusoidal", "quasi_periodic", "rectangular"]
    )
    frequency_pairs: List[Tuple[float, float]] = Field(default_factory=lambda: [(100.0, 30.0), (30.0, 30.0), (30.0, 100.0)])
    periods: int = Field(100, ge=2)
    settle_time: float = Field(0.1, ge=0.0, description="transient skipped before a spectral window (s)")
    window: float = Field(0.2, gt=0.0, description="spectral window length (s)")

    def fm_grid(self) -> List[float]:
        if self.fm_values:
            return list(self.fm_values)
        step = (self.fm_max - self.fm_min) / max(self.fm_count - 1, 1)
        return [self.fm_min + i * step for i in range(self.fm_count)]


class CheckThresholds(BaseModel):
    """Pass/fail thresholds of the scenario checks."""
    model_config = ConfigDict(extra="forbid")

    max_relative_error: float = 1e-4
    min_slope: float = 3.5
    max_slope: float = 4.5
    truncation_tolerance: float = 1e-8
    static_tolerance: float = 1e-12
    harmonic_tolerance: float = 0.05
    harmonic_floor: float = 0.01
    max_reflection_ratio: float = 1e-3
    max_hbm_reflection: float = 1e-12
    expected_energy_ratio: Optional[float] = None
    energy_ratio_tolerance: float = 0.10
    balance_tolerance: Optional[float] = None
    conservation_tolerance: float = 1e-6
    growth_tolerance: float = 0.01
    quadrature_tolerance: float = 1e-10
    envelope_tolerance: float = Field(1e-12, description="slack of the envelope containment, relative to max|v|")
    nonreciprocity_targets: List[float] = Field(default_factory=lambda: [112.0, 224.0, 336.0])
    nonreciprocity_window: float = 4.0
    nonreciprocity_floor: float = 0.01


# --- Experiment

class ExperimentConfig(BaseModel):
    """Validated experiment description for one scenario."""
    model_config = ConfigDict(extra="forbid")

    material: MaterialHalfSpaces
    interface: InterfaceSection = Field(default_factory=InterfaceSection)
    source: SourceSection
    grid: GridSection = Field(default_factory=GridSection)
    esim: EsimSection = Field(default_factory=EsimSection)
    run: RunSection = Field(default_factory=RunSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    checks: CheckThresholds = Field(default_factory=CheckThresholds)

    @model_validator(mode="after")
    def check_positions(self):
        length, x0 = self.grid.length, self.material.x0
        if not 0.0 < x0 < length:
            raise ValueError(f"interface x0={x0} outside the domain (0, {length})")
        for x in self.run.receivers:
            if not 0.0 < x < length:
                raise ValueError(f"receiver at {x} outside the domain (0, {length})")
        if self.source.kind == "cauchy":
            c = self.material.c_minus
            tail, head = c * (self.source.t0 - 1.0 / self.source.f_c), c * self.source.t0
            if tail <= 0.0 or head >= x0:
                raise ValueError(f"Cauchy pulse support [{tail:.3f}, {head:.3f}] m must lie inside (0, x0={x0})")
        else:
            if not 0.0 < self.source.x_s < length:
                raise ValueError(f"source at {self.source.x_s} outside the domain (0, {length})")
            if self.source.x_s == x0:
                raise ValueError("source placed on the interface")
        return self

    @property
    def law(self) -> InterfaceLaw:
        return self.interface.to_law()

    @property
    def source_spec(self) -> SourceSpec:
        return self.source.to_spec()
