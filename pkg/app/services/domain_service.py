"""Truncated exterior domains: node classification, dampers and initial data."""

import math
from pathlib import Path

import numpy as np
from loguru import logger

from ..enums import BumpKind, DamperKind, ErrorCode, NodeKind
from ..errors import DomainError
from ..models import FloatArray, GridMask
from ..schemas import DamperSection, Disk, DomainSpec
from ..utils.io import read_snapshot
from ..utils.validation import validate_field_shape


def smooth_step(radius: FloatArray, inner: float, outer: float) -> FloatArray:
    """C-infinity transition: 0 for r <= inner, exactly 1 for r >= outer."""

    z = np.clip((outer - radius) / (outer - inner), 0.0, 1.0)
    out = np.zeros_like(z, dtype=np.float64)
    live = z < 1.0
    out[live] = np.exp(1.0 - 1.0 / (1.0 - z[live] ** 2))
    return out


def bump_field(grid: GridMask, center: tuple[float, ...], width: float) -> FloatArray:
    """Radial bump exp(-1/(1-(|x-c|/w)^2)) truncated at |x-c| = w."""

    dist = np.sqrt(sum((x - c) ** 2 for x, c in zip(grid.coords, center, strict=True)))
    zeta = dist / width
    out = np.zeros(grid.shape)
    live = zeta < 1.0
    out[live] = np.exp(-1.0 / (1.0 - zeta[live] ** 2))
    return out


def _inside(grid: GridMask, disk: Disk) -> np.ndarray:
    dist_sq = sum((x - c) ** 2 for x, c in zip(grid.coords, disk.center, strict=True))
    return dist_sq <= disk.radius**2


class DomainService:
    """Grid construction and field sampling for a DomainSpec."""

    @staticmethod
    def check_spec(spec: DomainSpec) -> None:
        if spec.h <= 0:
            raise DomainError(ErrorCode.SPEC_INVALID, f"grid spacing must be positive: {spec.h}")
        if spec.dimension not in (1, 2):
            raise DomainError(
                ErrorCode.SPEC_INVALID, f"dimension must be 1 or 2, got {spec.dimension}"
            )
        if spec.r_box <= max(spec.r0, spec.r1):
            raise DomainError(
                ErrorCode.SPEC_INVALID,
                f"box half-width {spec.r_box} must exceed r0={spec.r0} and r1={spec.r1}",
            )
        if spec.dimension == 1 and spec.obstacles:
            raise DomainError(ErrorCode.SPEC_INVALID, "obstacles are only supported for N = 2")
        for disk in spec.obstacles:
            if len(disk.center) != spec.dimension:
                raise DomainError(
                    ErrorCode.SPEC_INVALID, f"obstacle center {disk.center} has wrong dimension"
                )
            if math.hypot(*disk.center) + disk.radius >= spec.r0:
                raise DomainError(
                    ErrorCode.SPEC_INVALID,
                    f"obstacle {disk.center} r={disk.radius} is not inside B_r0 (r0={spec.r0})",
                )

    @staticmethod
    def build_grid(spec: DomainSpec) -> GridMask:
        DomainService.check_spec(spec)

        # 1e-9 guards values like 30 / 0.1 = 299.99999999999994
        half = int(math.floor(spec.r_box / spec.h + 1e-9))
        n = 2 * half + 1
        kinds = np.full((n,) * spec.dimension, NodeKind.INTERIOR, dtype=np.int8)
        grid = GridMask(dimension=spec.dimension, h=spec.h, half_nodes=half, kinds=kinds)

        for disk in spec.obstacles:
            kinds[_inside(grid, disk)] = NodeKind.OBSTACLE
        for axis in range(spec.dimension):
            index = [slice(None)] * spec.dimension
            for edge in (0, -1):
                index[axis] = edge
                kinds[tuple(index)] = NodeKind.OUTER_BOUNDARY

        if grid.count(NodeKind.INTERIOR) == 0:
            raise DomainError(ErrorCode.SPEC_INVALID, "no interior node remains")

        logger.info(
            f"Built grid N={spec.dimension} n={n}^{spec.dimension} h={spec.h}: "
            f"{grid.count(NodeKind.INTERIOR)} interior, {grid.count(NodeKind.OBSTACLE)} obstacle"
        )
        return grid

    @staticmethod
    def sample_damper(
        damper: DamperSection, spec: DomainSpec, grid: GridMask, table: FloatArray | None = None
    ) -> FloatArray:
        """Sample a(x) on the grid, zeroed on Dirichlet nodes."""

        kind = damper.kind
        if kind == DamperKind.CONSTANT_ONE:
            values = np.ones(grid.shape)
        elif kind == DamperKind.EXTERIOR_SMOOTH:
            if damper.inner_radius >= spec.r0:
                raise DomainError(
                    ErrorCode.SPEC_INVALID,
                    f"inner radius {damper.inner_radius} must be below r0={spec.r0}",
                )
            values = smooth_step(grid.radius, damper.inner_radius, spec.r0)
        elif kind == DamperKind.EXTERIOR_WITH_HOLE:
            values = np.ones(grid.shape)
            for hole in damper.holes:
                if len(hole.center) != spec.dimension:
                    raise DomainError(
                        ErrorCode.SPEC_INVALID, f"hole center {hole.center} has wrong dimension"
                    )
                if math.hypot(*hole.center) + hole.radius > spec.r0:
                    raise DomainError(
                        ErrorCode.SPEC_INVALID, f"hole {hole.center} leaves B_r0 (r0={spec.r0})"
                    )
                values[_inside(grid, hole)] = 0.0
        elif kind == DamperKind.TABLE:
            values = DomainService._table_values(damper, grid, table)
        else:
            raise DomainError(ErrorCode.SPEC_INVALID, f"unknown damper kind {kind}")

        return grid.apply_mask(values).astype(np.float64)

    @staticmethod
    def _table_values(
        damper: DamperSection, grid: GridMask, table: FloatArray | None
    ) -> FloatArray:
        if table is None and damper.table_path:
            table, _, _ = read_snapshot(Path(damper.table_path))
        if table is None and damper.table_value is not None:
            table = np.full(grid.shape, damper.table_value)
        if table is None:
            raise DomainError(ErrorCode.SPEC_INVALID, "TABLE damper needs a value or a path")
        table = np.asarray(table, dtype=np.float64)
        if table.ndim == 0:
            table = np.full(grid.shape, float(table))
        problems = validate_field_shape(table, grid.shape)
        if problems:
            raise DomainError(ErrorCode.SHAPE_MISMATCH, f"damper table: {problems[0]}")
        values = table.copy()
        if np.any(values < 0):
            raise DomainError(ErrorCode.SPEC_INVALID, "damper table has negative values")
        return values

    @staticmethod
    def initial_data(
        kind: BumpKind,
        spec: DomainSpec,
        grid: GridMask,
        center: tuple[float, ...],
        width: float,
        amplitude: float = 1.0,
        velocity_amplitude: float = 1.0,
    ) -> tuple[FloatArray, FloatArray]:
        """Compactly supported (u0, u1) inside B_r1 and away from obstacles."""

        if len(center) != spec.dimension:
            raise DomainError(ErrorCode.SPEC_INVALID, f"bump center {center} has wrong dimension")
        if width <= 0:
            raise DomainError(ErrorCode.SPEC_INVALID, f"bump width must be positive, got {width}")
        if math.hypot(*center) + width > spec.r1:
            raise DomainError(
                ErrorCode.SPEC_INVALID,
                f"bump at {center} with width {width} exits B_r1 (r1={spec.r1})",
            )
        for disk in spec.obstacles:
            gap = math.dist(center, disk.center) - disk.radius
            if gap < width:
                raise DomainError(
                    ErrorCode.SPEC_INVALID, f"bump at {center} intersects obstacle {disk.center}"
                )

        bump = grid.apply_mask(bump_field(grid, center, width))
        zero = grid.zeros()
        if kind == BumpKind.BUMP_U0:
            return amplitude * bump, zero
        if kind == BumpKind.BUMP_U1:
            return zero, velocity_amplitude * bump
        return amplitude * bump, velocity_amplitude * bump


domain_service = DomainService()


def build_grid(spec: DomainSpec) -> GridMask:
    """Convenience function to classify the nodes of a domain."""
    return DomainService.build_grid(spec)


def sample_damper(
    damper: DamperSection, spec: DomainSpec, grid: GridMask, table: FloatArray | None = None
) -> FloatArray:
    return DomainService.sample_damper(damper, spec, grid, table)


def initial_data(
    kind: BumpKind,
    spec: DomainSpec,
    grid: GridMask,
    center: tuple[float, ...],
    width: float,
    amplitude: float = 1.0,
    velocity_amplitude: float = 1.0,
) -> tuple[FloatArray, FloatArray]:
    return DomainService.initial_data(
        kind, spec, grid, center, width, amplitude, velocity_amplitude
    )
