"""Billiard rays off circular obstacles and geometric control certification."""

import itertools
import math
from collections.abc import Iterator

import numpy as np
from loguru import logger

from ..config import settings
from ..enums import ErrorCode
from ..errors import RayError
from ..models import FloatArray, GridMask, RaySegment, TraceResult
from ..schemas import Disk, DomainSpec, GccReport, Ray
from .executor import run_tasks

TANGENT_TOL = 1e-12
HIT_EPS = 1e-10


def reflect(direction: FloatArray, normal: FloatArray) -> FloatArray:
    """Specular reflection d - 2(d.n)n."""
    return direction - 2.0 * np.dot(direction, normal) * normal


def _next_hit(
    position: FloatArray, direction: FloatArray, obstacles: list[Disk]
) -> tuple[float, Disk | None]:
    best, hit = math.inf, None
    for disk in obstacles:
        rel = position - np.asarray(disk.center)
        b = float(np.dot(direction, rel))
        cc = float(np.dot(rel, rel)) - disk.radius**2
        disc = b * b - cc
        if disc < 0:
            continue
        t = -b - math.sqrt(disc)
        if HIT_EPS < t < best:
            best, hit = t, disk
    return best, hit


def iter_segments(
    position: FloatArray, direction: FloatArray, obstacles: list[Disk], t_max: float
) -> Iterator[RaySegment]:
    """Yield straight segments until the accumulated time reaches t_max."""

    p = np.asarray(position, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    t = 0.0
    while t < t_max:
        dt_hit, disk = _next_hit(p, d, obstacles)
        if disk is None or t + dt_hit >= t_max:
            yield RaySegment(start=p, direction=d, t_start=t, t_end=t_max)
            return

        center = np.asarray(disk.center)
        q = p + dt_hit * d
        normal = (q - center) / np.linalg.norm(q - center)
        q = center + disk.radius * normal
        dn = float(np.dot(d, normal))
        if abs(dn) < TANGENT_TOL:
            logger.warning(
                f"{ErrorCode.GEOMETRY_DEGENERATE.value}: tangential hit on obstacle "
                f"{disk.center} at {q.tolist()}"
            )
            yield RaySegment(start=p, direction=d, t_start=t, t_end=t + dt_hit, degenerate=True)
        else:
            yield RaySegment(start=p, direction=d, t_start=t, t_end=t + dt_hit, reflected=True)
            d = reflect(d, normal)
        p, t = q, t + dt_hit


class DamperLookup:
    """Membership test for omega = {a > eps} on sample points.

    A point belongs to omega when any corner of its grid cell has a > eps.
    """

    def __init__(self, damper: FloatArray, grid: GridMask, epsilon: float):
        self.grid = grid
        self.active = damper > epsilon
        self.offsets = np.array(list(itertools.product((0, 1), repeat=grid.dimension)))

    def contains(self, points: FloatArray) -> np.ndarray:
        grid = self.grid
        lower = np.floor((points + grid.r_box) / grid.h).astype(np.intp)
        lower = np.clip(lower, 0, grid.n_per_axis - 2)
        hit = np.zeros(points.shape[0], dtype=bool)
        for offset in self.offsets:
            corner = lower + offset
            hit |= self.active[tuple(corner.T)]
        return hit


def _exit_parameter(start: FloatArray, direction: FloatArray, radius: float) -> float:
    b = float(np.dot(start, direction))
    cc = float(np.dot(start, start)) - radius**2
    if cc >= 0:
        return 0.0
    return -b + math.sqrt(b * b - cc)


def first_entry_time(
    segments: Iterator[RaySegment],
    lookup: DamperLookup,
    step: float,
    escape_radius: float | None = None,
) -> tuple[float, int]:
    """Time a ray first meets omega (or leaves B_R), inf if neither happens.

    Also returns the number of tangential hits seen on the way.
    """

    degenerate = 0
    for segment in segments:
        degenerate += segment.degenerate
        length = segment.length
        count = max(1, math.ceil(length / step))
        taus = np.linspace(0.0, length, count + 1)
        points = segment.start + taus[:, None] * segment.direction
        inside = lookup.contains(points)
        candidate = math.inf
        if inside.any():
            candidate = float(taus[int(np.argmax(inside))])
        if escape_radius is not None:
            tau_exit = _exit_parameter(segment.start, segment.direction, escape_radius)
            if tau_exit <= length:
                candidate = min(candidate, tau_exit)
        if candidate < math.inf:
            return segment.t_start + candidate, degenerate
    return math.inf, degenerate


def _lattice(dimension: int, spacing: float, radius: float) -> FloatArray:
    k = int(math.floor(radius / spacing))
    ticks = np.arange(-k, k + 1) * spacing
    if dimension == 1:
        return ticks[:, None]
    xs, ys = np.meshgrid(ticks, ticks, indexing="ij")
    return np.column_stack([xs.ravel(), ys.ravel()])


def sample_positions(spec: DomainSpec, n_pos: int) -> FloatArray:
    """Axis-aligned lattice through the origin covering B_{r0+1} minus obstacles.

    The spacing is halved until at least one point survives the obstacle cut.
    """

    radius = spec.r0 + 1.0
    if spec.dimension == 1:
        spacing = 2 * radius / n_pos
    else:
        area = math.pi * radius**2 - sum(math.pi * disk.radius**2 for disk in spec.obstacles)
        spacing = math.sqrt(area / n_pos)

    while True:
        points = _lattice(spec.dimension, spacing, radius)
        keep = np.linalg.norm(points, axis=1) < radius
        for disk in spec.obstacles:
            keep &= np.linalg.norm(points - np.asarray(disk.center), axis=1) > disk.radius + 1e-9
        if keep.any() or spacing < 1e-6:
            return points[keep]
        spacing /= 2


def sample_directions(dimension: int, n_dir: int) -> FloatArray:
    if dimension == 1:
        return np.array([[-1.0], [1.0]])
    angles = 2 * np.pi * np.arange(n_dir) / n_dir
    directions = np.column_stack([np.cos(angles), np.sin(angles)])
    directions[np.abs(directions) < 1e-12] = 0.0
    return directions / np.linalg.norm(directions, axis=1)[:, None]


class RayService:
    """Ray tracing and GCC / EGC certification."""

    @staticmethod
    def trace_ray(start: Ray, obstacles: list[Disk], t_max: float) -> TraceResult:
        if t_max <= 0:
            raise RayError(ErrorCode.PRECONDITION_VIOLATED, f"t_max must be positive, got {t_max}")
        position = np.asarray(start.position, dtype=np.float64)
        direction = np.asarray(start.direction, dtype=np.float64)
        norm = float(np.linalg.norm(direction))
        if abs(norm - 1.0) > 1e-12:
            raise RayError(ErrorCode.PRECONDITION_VIOLATED, f"direction is not unit: |d|={norm}")
        for disk in obstacles:
            if math.dist(start.position, disk.center) < disk.radius - 1e-12:
                raise RayError(
                    ErrorCode.PRECONDITION_VIOLATED,
                    f"start {start.position} lies inside obstacle {disk.center}",
                )

        segments = list(iter_segments(position, direction, obstacles, t_max))
        degenerate = sum(1 for segment in segments if segment.degenerate)
        return TraceResult(segments=segments, degenerate_hits=degenerate)

    @staticmethod
    def certify(
        damper: FloatArray,
        spec: DomainSpec,
        grid: GridMask,
        n_pos: int | None = None,
        n_dir: int | None = None,
        t_max: float | None = None,
        epsilon: float | None = None,
        escape_radius: float | None = None,
        threads: int | None = None,
    ) -> GccReport:
        n_pos = settings.gcc_n_pos if n_pos is None else n_pos
        n_dir = settings.gcc_n_dir if n_dir is None else n_dir
        t_max = settings.gcc_t_max if t_max is None else t_max
        epsilon = settings.gcc_epsilon if epsilon is None else epsilon
        if n_pos < 1 or n_dir < 1:
            raise RayError(ErrorCode.PRECONDITION_VIOLATED, "sampling counts must be at least 1")
        if epsilon <= 0 or t_max <= 0:
            raise RayError(ErrorCode.PRECONDITION_VIOLATED, "epsilon and t_max must be positive")
        if damper.shape != grid.shape:
            raise RayError(
                ErrorCode.SHAPE_MISMATCH, f"damper {damper.shape} vs grid {grid.shape}"
            )

        lookup = DamperLookup(damper, grid, epsilon)
        positions = sample_positions(spec, n_pos)
        if len(positions) == 0:
            raise RayError(
                ErrorCode.PRECONDITION_VIOLATED, "no sample position outside the obstacles"
            )
        directions = sample_directions(spec.dimension, n_dir)
        step = 0.5 * grid.h

        def first_hits(position: FloatArray) -> list[tuple[float, int]]:
            return [
                first_entry_time(
                    iter_segments(position, direction, spec.obstacles, t_max),
                    lookup,
                    step,
                    escape_radius,
                )
                for direction in directions
            ]

        results = np.array(run_tasks(first_hits, positions, threads)).reshape(-1, 2)
        times = results[:, 0]
        degenerate_hits = int(results[:, 1].sum())
        worst = int(np.argmax(times))
        satisfied = bool(np.all(times < t_max))
        t0 = float(times[worst]) if satisfied else t_max
        worst_ray = Ray(
            position=tuple(float(x) for x in positions[worst // len(directions)]),
            direction=tuple(float(x) for x in directions[worst % len(directions)]),
            time=t0,
        )
        mode = "EGC" if escape_radius is not None else "GCC"
        logger.info(
            f"{mode} check over {times.size} rays: satisfied={satisfied}, T0~{t0:.3f}"
        )
        return GccReport(
            mode=mode,
            satisfied=satisfied,
            t0_estimate=t0,
            worst_ray=worst_ray,
            num_samples=int(times.size),
            escape_radius=escape_radius,
            epsilon=epsilon,
            t_max=t_max,
            degenerate_hits=degenerate_hits,
        )


ray_service = RayService()


def trace_ray(start: Ray, obstacles: list[Disk], t_max: float) -> TraceResult:
    """Convenience function to trace one billiard ray."""
    return RayService.trace_ray(start, obstacles, t_max)


def check_gcc(
    damper: FloatArray,
    spec: DomainSpec,
    grid: GridMask,
    n_pos: int | None = None,
    n_dir: int | None = None,
    t_max: float | None = None,
    epsilon: float | None = None,
    threads: int | None = None,
) -> GccReport:
    return RayService.certify(damper, spec, grid, n_pos, n_dir, t_max, epsilon, None, threads)


def check_egc(
    damper: FloatArray,
    spec: DomainSpec,
    grid: GridMask,
    escape_radius: float,
    n_pos: int | None = None,
    n_dir: int | None = None,
    t_max: float | None = None,
    epsilon: float | None = None,
    threads: int | None = None,
) -> GccReport:
    if escape_radius <= 0:
        raise RayError(ErrorCode.PRECONDITION_VIOLATED, "escape radius must be positive")
    return RayService.certify(
        damper, spec, grid, n_pos, n_dir, t_max, epsilon, escape_radius, threads
    )
