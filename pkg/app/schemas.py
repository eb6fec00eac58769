"""Pydantic models for experiment configs and emitted reports."""

from datetime import datetime
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator

from .enums import BumpKind, CheckStatus, DamperKind, ForcingFamily, SolveMethod
from .utils.validation import parse_disks, parse_float_list


class Disk(BaseModel):
    """Circular obstacle (or damper hole)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    center: tuple[float, ...]
    radius: float = Field(gt=0)


class DomainSpec(BaseModel):
    """Resolved truncated exterior domain; checked by build_grid."""

    model_config = ConfigDict(frozen=True)

    dimension: int = 2
    r_box: float
    h: float
    obstacles: list[Disk] = Field(default_factory=list)
    r0: float
    r1: float

    def doubled(self) -> "DomainSpec":
        return self.model_copy(update={"r_box": 2 * self.r_box})


# Config sections
class ConfigSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class DomainSection(ConfigSection):
    dimension: int = Field(2, ge=1, le=2)
    h: float = Field(0.1, gt=0)
    r0: float = Field(2.0, gt=0)
    r1: float = Field(3.0, gt=0)
    r_box: float | None = Field(None, gt=0)
    obstacles: list[Disk] = Field(default_factory=list)

    @field_validator("obstacles", mode="before")
    @classmethod
    def _split_obstacles(cls, value: Any) -> Any:
        return parse_disks(value)


class DamperSection(ConfigSection):
    kind: DamperKind = DamperKind.EXTERIOR_SMOOTH
    inner_radius: float = Field(1.0, ge=0)
    holes: list[Disk] = Field(default_factory=list)
    table_value: float | None = None
    table_path: str | None = None

    @field_validator("kind", mode="before")
    @classmethod
    def _upper_kind(cls, value: Any) -> Any:
        return value.strip().upper() if isinstance(value, str) else value

    @field_validator("holes", mode="before")
    @classmethod
    def _split_holes(cls, value: Any) -> Any:
        return parse_disks(value)


class InitialSection(ConfigSection):
    kind: BumpKind = BumpKind.BUMP_U0
    center: tuple[float, ...] | None = None
    width: float = Field(0.5, gt=0)
    amplitude: float = 1.0
    velocity_amplitude: float = 1.0

    @field_validator("kind", mode="before")
    @classmethod
    def _upper_kind(cls, value: Any) -> Any:
        return value.strip().upper() if isinstance(value, str) else value

    @field_validator("center", mode="before")
    @classmethod
    def _split_center(cls, value: Any) -> Any:
        return parse_float_list(value)


class RunSection(ConfigSection):
    t_end: float = Field(50.0, gt=0)
    safety: float = Field(0.9, gt=0, le=1)
    observer_stride: int | None = Field(None, ge=1)
    radii: list[PositiveFloat] = Field(default_factory=list)
    fit_t_min: float | None = Field(None, ge=0)
    fit_t_max: float | None = Field(None, gt=0)
    theorem_run: bool = False
    expect_gcc: bool | None = None
    escape_radius: float | None = Field(None, gt=0)
    gcc_n_pos: int | None = Field(None, ge=1)
    gcc_n_dir: int | None = Field(None, ge=1)
    gcc_t_max: float | None = Field(None, gt=0)
    gcc_epsilon: float | None = Field(None, gt=0)
    snapshot_every: int = Field(0, ge=0)
    cutoff_diagnostic: bool = True
    gradient_weight: float = Field(1.0, ge=0)
    box_doubling: bool = False

    @field_validator("radii", mode="before")
    @classmethod
    def _split_radii(cls, value: Any) -> Any:
        return parse_float_list(value)


class ResolventSection(ConfigSection):
    intermediate_band: tuple[float, float] = (0.25, 4.0)
    high_band: tuple[float, float] = (5.0, 40.0)
    n_samples: int = Field(40, ge=1)
    tol: float = Field(1e-10, gt=0)
    family: ForcingFamily = ForcingFamily.BUMP
    n_random_bumps: int = Field(3, ge=1)
    probe: bool = True
    delta: float = Field(0.25, gt=0)
    betas: list[PositiveFloat] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    probe_s: list[float] = Field(default_factory=lambda: [-0.5, -0.2, -0.05, 0.05, 0.2, 0.5])
    chi_radius: float | None = Field(None, gt=0)
    r_box: float | None = Field(None, gt=0)
    verify: bool = False

    @field_validator("family", mode="before")
    @classmethod
    def _upper_family(cls, value: Any) -> Any:
        return value.strip().upper() if isinstance(value, str) else value

    @field_validator("intermediate_band", "high_band", "betas", "probe_s", mode="before")
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        return parse_float_list(value)


class OutputSection(ConfigSection):
    scenario: str = "default"
    directory: str | None = None
    seed: int = Field(0, ge=0)
    write_snapshots: bool = False


class ExperimentConfig(BaseModel):
    """Complete experiment description, one model per config section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    domain: DomainSection = Field(default_factory=DomainSection)
    damper: DamperSection = Field(default_factory=DamperSection)
    initial: InitialSection = Field(default_factory=InitialSection)
    run: RunSection = Field(default_factory=RunSection)
    resolvent: ResolventSection = Field(default_factory=ResolventSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @property
    def scenario(self) -> str:
        return self.output.scenario

    def domain_spec(self) -> DomainSpec:
        domain = self.domain
        r_box = domain.r_box
        if r_box is None:
            r_box = domain.r1 + self.run.t_end / 2 + 10 * domain.h
        return DomainSpec(
            dimension=domain.dimension,
            r_box=r_box,
            h=domain.h,
            obstacles=list(domain.obstacles),
            r0=domain.r0,
            r1=domain.r1,
        )

    def resolvent_spec(self) -> DomainSpec:
        """Domain for frequency-domain solves; may use a smaller box than the run."""
        spec = self.domain_spec()
        if self.resolvent.r_box is None:
            return spec
        return spec.model_copy(update={"r_box": self.resolvent.r_box})

    def fit_window(self) -> tuple[float, float]:
        t_min = self.run.fit_t_min
        if t_min is None:
            t_min = max(10.0, 2 * (self.domain.r1 + self.domain.r0))
        t_max = self.run.fit_t_max if self.run.fit_t_max is not None else 0.9 * self.run.t_end
        return t_min, t_max

    def observer_radii(self) -> list[float]:
        return list(self.run.radii) or [self.domain.r1]

    def bump_center(self) -> tuple[float, ...]:
        if self.initial.center is not None:
            return self.initial.center
        offset = 0.5 * (self.domain.r0 + self.domain.r1)
        return (offset,) + (0.0,) * (self.domain.dimension - 1)


# Reports
class Ray(BaseModel):
    position: tuple[float, ...]
    direction: tuple[float, ...]
    time: float = 0.0


class GccReport(BaseModel):
    mode: str = "GCC"
    satisfied: bool
    t0_estimate: float
    worst_ray: Ray | None = None
    num_samples: int
    escape_radius: float | None = None
    epsilon: float
    t_max: float
    degenerate_hits: int = 0


class DecayFit(BaseModel):
    exponent: float
    intercept: float
    r2: float
    window: tuple[float, float]
    n_samples: int


class RateTable(BaseModel):
    """Reference decay exponents for a dimension and data class m."""

    dimension: int
    m: float
    free_l2: float
    free_energy: float
    heat_l2: float
    heat_gradient: float
    exterior_local: float
    exterior_l2: float
    exterior_energy: float
    energy_data_only: float = 1.0


class ConvBoundProfile(BaseModel):
    a: float
    b: float
    times: list[float]
    ratios: list[float]
    decade_maxima: list[float]
    bounded: bool


class ResolventSample(BaseModel):
    s: float
    norm_w: float = 0.0
    norm_gradw: float = 0.0
    norm_f: float = 0.0
    h1_ratio: float | None = None
    hf_ratio: float | None = None
    residual: float | None = None
    method: SolveMethod | None = None
    iterations: int = 0
    identity_defect: float | None = None
    identity_bound: float | None = None
    converged: bool = True
    error: str | None = None


class LowFreqSample(BaseModel):
    beta: float
    s: float
    energy_norm: float | None = None
    residual: float | None = None
    converged: bool = True
    error: str | None = None


class LowFreqReport(BaseModel):
    samples: list[LowFreqSample]
    maxima: list[tuple[float, float]]
    bounded: bool
    chi_radius: float


class SweepReport(BaseModel):
    band: tuple[float, float]
    family: ForcingFamily
    samples: list[ResolventSample]
    sup_h1_ratio: float | None = None
    sup_hf_ratio: float | None = None
    failures: int = 0
    notes: list[str] = Field(default_factory=list)


class GapReport(BaseModel):
    times: list[float]
    gap: list[float]
    norm_u: list[float]
    norm_v: list[float]
    gap_fit: DecayFit | None = None
    u_fit: DecayFit | None = None
    integrated_gap_sq: float
    integrated_bound: float | None = None
    bound_ratio: float | None = None


class SimulationReport(BaseModel):
    scenario: str
    dt: float
    steps: int
    max_residual: float
    energy_increases: int
    fits: dict[str, DecayFit] = Field(default_factory=dict)
    fit_errors: dict[str, str] = Field(default_factory=dict)
    cutoff_constant: float | None = None
    gcc: GccReport | None = None


class CheckResult(BaseModel):
    name: str
    scenario: str
    status: CheckStatus
    reason: str | None = None
    metrics: dict[str, Any] = Field(default_factory=dict)

    @property
    def label(self) -> str:
        if self.status == CheckStatus.SKIPPED and self.reason:
            return f"{self.status.value}({self.reason})"
        return self.status.value


class ManifestEntry(BaseModel):
    path: str
    sha256: str
    size: int


class RunManifest(BaseModel):
    command: str
    config_hash: str | None = None
    code_version: str
    started_at: datetime
    finished_at: datetime
    files: list[ManifestEntry] = Field(default_factory=list)


class SweepSummary(BaseModel):
    scenario: str
    intermediate: SweepReport
    high: SweepReport
    band_growth: float | None = None
    low_freq: LowFreqReport | None = None


class VerifyReport(BaseModel):
    results: list[CheckResult]
    passed: bool
