"""In-memory entities for grids, solver states and traces."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import numpy.typing as npt
from scipy import sparse

from .enums import NodeKind

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]


@dataclass(frozen=True, eq=False)
class GridMask:
    """Uniform grid on [-R_box, R_box]^N with per-node classification."""

    dimension: int
    h: float
    half_nodes: int  # nodes on each side of the origin
    kinds: npt.NDArray[np.int8]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.kinds.shape

    @property
    def n_per_axis(self) -> int:
        return 2 * self.half_nodes + 1

    @property
    def r_box(self) -> float:
        """Half-width actually covered by the nodes."""
        return self.half_nodes * self.h

    @property
    def node_volume(self) -> float:
        return self.h**self.dimension

    @cached_property
    def axis(self) -> FloatArray:
        return (np.arange(self.n_per_axis) - self.half_nodes) * self.h

    @cached_property
    def coords(self) -> tuple[FloatArray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dimension), indexing="ij"))

    @cached_property
    def radius(self) -> FloatArray:
        return np.sqrt(sum(c**2 for c in self.coords))

    @cached_property
    def interior(self) -> npt.NDArray[np.bool_]:
        return self.kinds == NodeKind.INTERIOR

    @cached_property
    def interior_index(self) -> npt.NDArray[np.intp]:
        """Flat indices of interior nodes, in C order."""
        return np.flatnonzero(self.interior.ravel())

    @property
    def interior_count(self) -> int:
        return int(self.interior_index.size)

    def apply_mask(self, values: npt.NDArray) -> npt.NDArray:
        """Zero every non-interior node (Dirichlet values)."""
        return np.where(self.interior, values, 0)

    def zeros(self, dtype=np.float64) -> npt.NDArray:
        return np.zeros(self.shape, dtype=dtype)

    def count(self, kind: NodeKind) -> int:
        return int(np.count_nonzero(self.kinds == kind))


@dataclass(frozen=True, eq=False)
class SolverState:
    """Two consecutive leapfrog levels; `n` indexes `u_curr`."""

    u_prev: FloatArray
    u_curr: FloatArray
    dt: float
    n: int

    @property
    def t(self) -> float:
        return self.n * self.dt


@dataclass(frozen=True, eq=False)
class HeatState:
    v_curr: FloatArray
    dt: float
    n: int

    @property
    def t(self) -> float:
        return self.n * self.dt


@dataclass(eq=False)
class EnergyTrace:
    """Observer time series of a wave run."""

    times: list[float] = field(default_factory=list)
    e_total: list[float] = field(default_factory=list)
    e_local: dict[float, list[float]] = field(default_factory=dict)
    l2_sq: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    cutoff_ratio: list[float] | None = None
    steps: int = 0
    dt: float = 0.0
    max_residual: float = 0.0
    energy_increases: int = 0

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> FloatArray:
        if name == "E_total":
            return np.asarray(self.e_total)
        if name == "l2_sq":
            return np.asarray(self.l2_sq)
        if name == "residual":
            return np.asarray(self.residuals)
        if name == "E_r":
            return np.asarray(self.e_local[self.primary_radius])
        raise KeyError(name)

    @property
    def primary_radius(self) -> float:
        return next(iter(self.e_local))


@dataclass(eq=False)
class WaveRun:
    """Result of a wave run: trace plus optional snapshots of u."""

    trace: EnergyTrace
    snapshots: dict[float, FloatArray] = field(default_factory=dict)
    final: SolverState | None = None


@dataclass(eq=False)
class HeatRun:
    times: list[float] = field(default_factory=list)
    l2_sq: list[float] = field(default_factory=list)
    max_value: list[float] = field(default_factory=list)
    snapshots: dict[float, FloatArray] = field(default_factory=dict)
    dt: float = 0.0
    steps: int = 0


@dataclass(frozen=True, eq=False)
class RaySegment:
    """Straight piece of a billiard trajectory."""

    start: FloatArray
    direction: FloatArray
    t_start: float
    t_end: float
    reflected: bool = False
    degenerate: bool = False

    @property
    def length(self) -> float:
        return self.t_end - self.t_start

    @property
    def end(self) -> FloatArray:
        return self.start + self.length * self.direction


@dataclass(frozen=True, eq=False)
class TraceResult:
    segments: list[RaySegment]
    degenerate_hits: int = 0

    @property
    def total_time(self) -> float:
        return sum(segment.length for segment in self.segments)


@dataclass(frozen=True, eq=False)
class HelmholtzSystem:
    """Sparse operator lam^2 + lam*a - Laplacian on interior nodes."""

    matrix: sparse.csc_matrix
    lam: complex
    grid: GridMask
    damper: FloatArray

    @property
    def s(self) -> float:
        """Real frequency when lam = i*s."""
        return float(self.lam.imag)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class BlockResolvent:
    u1: ComplexArray
    u2: ComplexArray
    residual: float
