"""Time stepping for the damped wave equation and the heat equation."""

import math

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid

from ..config import settings
from ..enums import ErrorCode
from ..errors import SolverError
from ..models import EnergyTrace, FloatArray, GridMask, HeatRun, HeatState, SolverState, WaveRun
from ..schemas import GapReport, GccReport
from ..utils.stencil import l2_norm_sq, laplacian
from .energy_service import EnergyService, energy_density, residual_from_energies


def _check_blowup(u: FloatArray, n: int) -> None:
    peak = float(np.max(np.abs(u)))
    if not math.isfinite(peak) or peak > settings.blowup_threshold:
        raise SolverError(ErrorCode.BLOWUP, f"max|u| = {peak:.3e} at step {n}", step=n)


class WaveService:
    """Damped leapfrog and explicit heat stepping on a GridMask."""

    @staticmethod
    def cfl_timestep(h: float, dimension: int, safety: float | None = None) -> float:
        safety = settings.cfl_safety if safety is None else safety
        if not 0 < safety <= 1:
            raise SolverError(
                ErrorCode.PRECONDITION_VIOLATED, f"CFL safety must lie in (0, 1], got {safety}"
            )
        return safety * h / math.sqrt(dimension)

    @staticmethod
    def first_step(
        u0: FloatArray, u1: FloatArray, damper: FloatArray, grid: GridMask, dt: float
    ) -> SolverState:
        """Taylor start u^1 = u0 + dt u1 + dt^2/2 (lap u0 - a u1)."""
        u_prev = grid.apply_mask(u0)
        u_curr = u_prev + dt * u1 + 0.5 * dt**2 * (laplacian(u_prev, grid.h) - damper * u1)
        return SolverState(u_prev=u_prev, u_curr=grid.apply_mask(u_curr), dt=dt, n=1)

    @staticmethod
    def step(state: SolverState, damper: FloatArray, grid: GridMask) -> SolverState:
        half = 0.5 * damper * state.dt
        u_next = WaveService._advance(state, 1.0 - half, 1.0 + half, grid)
        return SolverState(u_prev=state.u_curr, u_curr=u_next, dt=state.dt, n=state.n + 1)

    @staticmethod
    def _advance(
        state: SolverState, minus: FloatArray, plus: FloatArray, grid: GridMask
    ) -> FloatArray:
        dt = state.dt
        lap = laplacian(state.u_curr, grid.h)
        numerator = 2.0 * state.u_curr - minus * state.u_prev + dt**2 * lap
        u_next = grid.apply_mask(numerator / plus)
        _check_blowup(u_next, state.n + 1)
        return u_next

    @staticmethod
    def run(
        grid: GridMask,
        damper: FloatArray,
        data: tuple[FloatArray, FloatArray],
        t_end: float,
        observer_stride: int | None = None,
        *,
        radii: list[float] | None = None,
        safety: float | None = None,
        snapshot_every: int = 0,
        cutoff: FloatArray | None = None,
        cutoff_radius: float | None = None,
        gradient_weight: float = 1.0,
        theorem_run: bool = False,
        gcc: GccReport | None = None,
    ) -> WaveRun:
        """Step to t_end, observing every `observer_stride` steps.

        Row n holds t = n dt, the staggered energy between u^n and u^{n+1},
        local energies for `radii`, ||u^n||^2 and the largest per-step
        dissipation residual since the previous row.
        """
        if theorem_run and (gcc is None or not gcc.satisfied):
            logger.warning("Theorem run without a certified geometric control condition")

        u0, u1 = data
        if u0.shape != grid.shape or u1.shape != grid.shape or damper.shape != grid.shape:
            raise SolverError(
                ErrorCode.SHAPE_MISMATCH, "initial data and damper must match the grid"
            )
        dt = WaveService.cfl_timestep(grid.h, grid.dimension, safety)
        n_steps = max(1, math.ceil(t_end / dt - 1e-9))
        stride = observer_stride or math.ceil(1.0 / (settings.observer_rate * dt))
        radii = list(radii or [])
        energies = EnergyService()

        trace = EnergyTrace(e_local={r: [] for r in radii}, dt=dt)
        if cutoff is not None:
            trace.cutoff_ratio = []
        snapshots: dict[float, FloatArray] = {}

        half = 0.5 * damper * dt
        minus, plus = 1.0 - half, 1.0 + half

        state = WaveService.first_step(u0, u1, damper, grid, dt)
        e_prev = float(energy_density(state.u_prev, state.u_curr, dt, grid.h).sum())
        floor = max(settings.roundoff_floor * e_prev, 1e-300)

        def observe(n: int, residual: float) -> None:
            t = n * dt
            density = energy_density(state.u_prev, state.u_curr, dt, grid.h)
            trace.times.append(t)
            trace.e_total.append(float(density.sum()))
            for r in radii:
                local = density if r >= grid.r_box else density[grid.radius <= r]
                trace.e_local[r].append(float(local.sum()))
            trace.l2_sq.append(l2_norm_sq(state.u_prev, grid.h))
            trace.residuals.append(residual)
            if cutoff is not None:
                forcing = energies.cutoff_forcing(state.u_prev, cutoff, grid, gradient_weight)
                local = float(density[grid.radius <= (cutoff_radius or grid.r_box)].sum())
                ratio = l2_norm_sq(forcing, grid.h) / local if local > floor else 0.0
                trace.cutoff_ratio.append(ratio)
            if snapshot_every and (len(trace.times) - 1) % snapshot_every == 0:
                snapshots[t] = state.u_prev.copy()

        observe(0, 0.0)
        window_max = 0.0
        for n in range(1, n_steps):
            u_next = WaveService._advance(state, minus, plus, grid)
            e_next = float(energy_density(state.u_curr, u_next, dt, grid.h).sum())
            power = energies.dissipated_power(state.u_prev, u_next, damper, dt, grid.h)
            residual = residual_from_energies(e_prev, e_next, power, dt, floor)
            window_max = max(window_max, residual)
            trace.max_residual = max(trace.max_residual, residual)
            if e_next > e_prev * (1 + 1e-12) + floor:
                if trace.energy_increases == 0:
                    logger.warning(f"Energy increased at step {n}: {e_prev:.6e} -> {e_next:.6e}")
                trace.energy_increases += 1

            state = SolverState(u_prev=state.u_curr, u_curr=u_next, dt=dt, n=n + 1)
            e_prev = e_next
            if n % stride == 0:
                observe(n, window_max)
                window_max = 0.0
            if n % 1000 == 0:
                logger.debug(f"Step {n}/{n_steps}: E={e_next:.6e}")

        trace.steps = n_steps
        logger.info(
            f"Wave run finished: {n_steps} steps dt={dt:.5f}, {len(trace)} rows, "
            f"max residual {trace.max_residual:.2e}"
        )
        return WaveRun(trace=trace, snapshots=snapshots, final=state)

    @staticmethod
    def heat_step(state: HeatState, grid: GridMask) -> HeatState:
        v_next = grid.apply_mask(state.v_curr + state.dt * laplacian(state.v_curr, grid.h))
        _check_blowup(v_next, state.n + 1)
        return HeatState(v_curr=v_next, dt=state.dt, n=state.n + 1)

    @staticmethod
    def heat_run(
        grid: GridMask,
        v0: FloatArray,
        sample_times: list[float],
        snapshot_times: list[float] | None = None,
    ) -> HeatRun:
        """Explicit heat stepping, sampled at the nearest step to each requested time."""

        dt = settings.heat_dt_factor * grid.h**2
        index_of = {t: int(round(t / dt)) for t in sample_times}
        snapshot_set = set(snapshot_times or [])
        last = max(index_of.values(), default=0)
        by_index: dict[int, list[float]] = {}
        for t, n in index_of.items():
            by_index.setdefault(n, []).append(t)

        result = HeatRun(dt=dt, steps=last)
        state = HeatState(v_curr=grid.apply_mask(v0), dt=dt, n=0)

        def observe(state: HeatState) -> None:
            v = state.v_curr
            for t in sorted(by_index.get(state.n, [])):
                result.times.append(t)
                result.l2_sq.append(l2_norm_sq(v, grid.h))
                result.max_value.append(float(v.max()))
                if t in snapshot_set:
                    result.snapshots[t] = v.copy()

        observe(state)
        while state.n < last:
            state = WaveService.heat_step(state, grid)
            observe(state)

        logger.info(f"Heat run finished: {last} steps dt={dt:.5f}, {len(result.times)} samples")
        return result

    @staticmethod
    def diffusion_gap(
        wave_snapshots: dict[float, FloatArray],
        heat_snapshots: dict[float, FloatArray],
        grid: GridMask,
        window: tuple[float, float] | None = None,
        initial_energy: float | None = None,
    ) -> GapReport:
        """||u(t) - v(t)|| at matched times, with optional decay fits."""

        wave_times = sorted(wave_snapshots)
        heat_times = sorted(heat_snapshots)
        if len(wave_times) != len(heat_times) or any(
            abs(a - b) > 1e-9 for a, b in zip(wave_times, heat_times, strict=True)
        ):
            raise SolverError(ErrorCode.SHAPE_MISMATCH, "wave and heat observation times differ")

        times, gap, norm_u, norm_v = [], [], [], []
        for tw, th in zip(wave_times, heat_times, strict=True):
            u, v = wave_snapshots[tw], heat_snapshots[th]
            if u.shape != grid.shape or v.shape != grid.shape:
                raise SolverError(
                    ErrorCode.SHAPE_MISMATCH,
                    f"snapshot shapes {u.shape}, {v.shape} vs grid {grid.shape}",
                )
            times.append(tw)
            gap.append(math.sqrt(l2_norm_sq(u - v, grid.h)))
            norm_u.append(math.sqrt(l2_norm_sq(u, grid.h)))
            norm_v.append(math.sqrt(l2_norm_sq(v, grid.h)))

        gap_fit = u_fit = None
        if window is not None:
            gap_fit = EnergyService.fit_decay(np.array(times), np.array(gap), window)
            u_fit = EnergyService.fit_decay(np.array(times), np.array(norm_u), window)

        integrated = float(trapezoid(np.square(gap), times)) if len(times) > 1 else 0.0
        bound = ratio = None
        if initial_energy is not None:
            bound = 4.0 / 3.0 * initial_energy
            ratio = integrated / bound if bound > 0 else None
        return GapReport(
            times=times,
            gap=gap,
            norm_u=norm_u,
            norm_v=norm_v,
            gap_fit=gap_fit,
            u_fit=u_fit,
            integrated_gap_sq=integrated,
            integrated_bound=bound,
            bound_ratio=ratio,
        )


wave_service = WaveService()


def cfl_timestep(h: float, dimension: int, safety: float | None = None) -> float:
    """Convenience function for the leapfrog step size."""
    return WaveService.cfl_timestep(h, dimension, safety)


def step(state: SolverState, damper: FloatArray, grid: GridMask) -> SolverState:
    return WaveService.step(state, damper, grid)


def run(
    grid: GridMask,
    damper: FloatArray,
    data: tuple[FloatArray, FloatArray],
    t_end: float,
    observer_stride: int | None = None,
    **options,
) -> WaveRun:
    return WaveService.run(grid, damper, data, t_end, observer_stride, **options)


def heat_run(
    grid: GridMask, v0: FloatArray, sample_times: list[float], snapshot_times=None
) -> HeatRun:
    return WaveService.heat_run(grid, v0, sample_times, snapshot_times)
