"""Experiment orchestration: turn a config into runs, reports and files."""

import math
from dataclasses import dataclass

import numpy as np
from loguru import logger

from ..config import settings
from ..enums import ForcingFamily
from ..errors import MetricsError, ResolventError
from ..models import FloatArray, GridMask, HeatRun, WaveRun
from ..schemas import (
    DamperSection,
    DomainSpec,
    ExperimentConfig,
    GapReport,
    GccReport,
    SimulationReport,
    SweepReport,
    SweepSummary,
)
from .domain_service import DomainService
from .energy_service import EnergyService
from .manifest import RunRecorder
from .ray_service import RayService
from .resolvent_service import ResolventService, make_forcing
from .wave_service import WaveService

TRACE_HEADER = ["t", "E_total", "E_r", "l2_sq", "residual"]
SWEEP_HEADER = ["s", "norm_w", "norm_gradw", "norm_F", "h1_ratio", "hf_ratio", "residual", "method"]
FIT_COLUMNS = ("E_total", "E_r", "l2_sq")


@dataclass(frozen=True, eq=False)
class Scenario:
    """A config resolved onto a grid."""

    config: ExperimentConfig
    spec: DomainSpec
    grid: GridMask
    damper: FloatArray
    data: tuple[FloatArray, FloatArray]


class ExperimentService:
    """Drives the services for one ExperimentConfig."""

    @staticmethod
    def setup(
        config: ExperimentConfig,
        spec: DomainSpec | None = None,
        damper: DamperSection | None = None,
    ) -> Scenario:
        spec = spec or config.domain_spec()
        grid = DomainService.build_grid(spec)
        a = DomainService.sample_damper(damper or config.damper, spec, grid)
        initial = config.initial
        data = DomainService.initial_data(
            initial.kind,
            spec,
            grid,
            config.bump_center(),
            initial.width,
            initial.amplitude,
            initial.velocity_amplitude,
        )
        return Scenario(config=config, spec=spec, grid=grid, damper=a, data=data)

    @staticmethod
    def gcc(
        config: ExperimentConfig,
        scenario: Scenario | None = None,
        threads: int | None = None,
        escape_radius: float | None = None,
    ) -> GccReport:
        scenario = scenario or ExperimentService.setup(config)
        run = config.run
        return RayService.certify(
            scenario.damper,
            scenario.spec,
            scenario.grid,
            run.gcc_n_pos,
            run.gcc_n_dir,
            run.gcc_t_max,
            run.gcc_epsilon,
            escape_radius or run.escape_radius,
            threads,
        )

    @staticmethod
    def simulate(
        config: ExperimentConfig,
        threads: int | None = None,
        *,
        scenario: Scenario | None = None,
        snapshot_every: int | None = None,
        gcc: GccReport | None = None,
    ) -> tuple[WaveRun, SimulationReport]:
        scenario = scenario or ExperimentService.setup(config)
        run, domain = config.run, config.domain
        if gcc is None and run.theorem_run:
            gcc = ExperimentService.gcc(config, scenario, threads)

        cutoff = None
        if run.cutoff_diagnostic and domain.r0 < domain.r1:
            cutoff = EnergyService.sample_cutoff(scenario.grid, domain.r0, domain.r1)

        wave = WaveService.run(
            scenario.grid,
            scenario.damper,
            scenario.data,
            run.t_end,
            run.observer_stride,
            radii=config.observer_radii(),
            safety=run.safety,
            snapshot_every=run.snapshot_every if snapshot_every is None else snapshot_every,
            cutoff=cutoff,
            cutoff_radius=domain.r1,
            gradient_weight=run.gradient_weight,
            theorem_run=run.theorem_run,
            gcc=gcc,
        )
        trace = wave.trace
        report = SimulationReport(
            scenario=config.scenario,
            dt=trace.dt,
            steps=trace.steps,
            max_residual=trace.max_residual,
            energy_increases=trace.energy_increases,
            cutoff_constant=max(trace.cutoff_ratio) if trace.cutoff_ratio else None,
            gcc=gcc,
        )
        window = config.fit_window()
        times = np.asarray(trace.times)
        for name in FIT_COLUMNS:
            try:
                report.fits[name] = EnergyService.fit_decay(times, trace.column(name), window)
            except MetricsError as e:
                logger.warning(f"No {name} fit for {config.scenario}: {e.detail}")
                report.fit_errors[name] = str(e)
        return wave, report

    @staticmethod
    def sweep(config: ExperimentConfig, threads: int | None = None) -> SweepSummary:
        res = config.resolvent
        spec = config.resolvent_spec()
        grid = DomainService.build_grid(spec)
        a = DomainService.sample_damper(config.damper, spec, grid)
        center, width, seed = config.bump_center(), config.initial.width, config.output.seed

        fixed = None
        if res.family != ForcingFamily.RANDOM_BUMPS:
            fixed = make_forcing(res.family, spec, grid, center, width)

        def forcing_for(index: int) -> FloatArray:
            if fixed is not None:
                return fixed
            return make_forcing(
                res.family, spec, grid, center, width, seed, index, res.n_random_bumps
            )

        bands = {}
        for name in ("intermediate_band", "high_band"):
            band = getattr(res, name)
            bands[name] = ResolventService.sweep(
                grid, a, band, res.n_samples, forcing_for, res.family, res.tol, threads
            )

        high = res.high_band
        growth = None
        try:
            growth = ResolventService.band_growth(
                bands["high_band"].samples, (high[0], 2 * high[0]), (high[1] / 2, high[1])
            )
        except ResolventError as e:
            logger.warning(f"High-band growth unavailable: {e.detail}")

        low_freq = None
        if res.probe:
            bump = make_forcing(ForcingFamily.BUMP, spec, grid, center, width)
            low_freq = ResolventService.low_freq_probe(
                grid,
                a,
                (bump, bump),
                list(res.betas),
                list(res.probe_s),
                res.chi_radius or config.domain.r1,
                res.tol,
                res.delta,
                threads,
            )
        return SweepSummary(
            scenario=config.scenario,
            intermediate=bands["intermediate_band"],
            high=bands["high_band"],
            band_growth=growth,
            low_freq=low_freq,
        )

    @staticmethod
    def resolvent_box_doubling(config: ExperimentConfig, s: float) -> float:
        center, width = config.bump_center(), config.initial.width

        def forcing_for(spec: DomainSpec, grid: GridMask) -> FloatArray:
            return make_forcing(ForcingFamily.BUMP, spec, grid, center, width)

        return ResolventService.box_doubling_check(
            config.resolvent_spec(), config.damper, s, forcing_for, config.resolvent.tol
        )

    @staticmethod
    def compare_heat(
        config: ExperimentConfig, threads: int | None = None
    ) -> tuple[WaveRun, SimulationReport, HeatRun, GapReport]:
        """Wave run against heat flow from u0 + u1, compared at the snapshot times."""

        scenario = ExperimentService.setup(config)
        run = config.run
        every = run.snapshot_every
        if not every:
            dt = WaveService.cfl_timestep(config.domain.h, config.domain.dimension, run.safety)
            stride = run.observer_stride or math.ceil(1.0 / (settings.observer_rate * dt))
            every = max(1, int(run.t_end / (stride * dt)) // 40)

        wave, report = ExperimentService.simulate(
            config, threads, scenario=scenario, snapshot_every=every
        )
        times = sorted(wave.snapshots)
        u0, u1 = scenario.data
        heat = WaveService.heat_run(scenario.grid, u0 + u1, times, times)
        initial_energy = wave.trace.e_total[0] if len(wave.trace) else None
        try:
            gap = WaveService.diffusion_gap(
                wave.snapshots, heat.snapshots, scenario.grid, config.fit_window(), initial_energy
            )
        except MetricsError as e:
            logger.warning(f"Gap fits skipped: {e.detail}")
            gap = WaveService.diffusion_gap(
                wave.snapshots, heat.snapshots, scenario.grid, None, initial_energy
            )
        return wave, report, heat, gap


def trace_rows(wave: WaveRun) -> list[list[float]]:
    trace = wave.trace
    e_r = trace.column("E_r") if trace.e_local else [None] * len(trace)
    return [
        [t, e, local, l2, residual]
        for t, e, local, l2, residual in zip(
            trace.times, trace.e_total, e_r, trace.l2_sq, trace.residuals, strict=True
        )
    ]


def sweep_rows(report: SweepReport) -> list[list]:
    return [
        [
            x.s,
            x.norm_w,
            x.norm_gradw,
            x.norm_f,
            x.h1_ratio,
            x.hf_ratio,
            x.residual,
            x.method if x.converged else "FAILED",
        ]
        for x in report.samples
    ]


def write_simulation(
    recorder: RunRecorder, wave: WaveRun, report: SimulationReport, config: ExperimentConfig
) -> None:
    trace = wave.trace
    recorder.write_csv("trace.csv", TRACE_HEADER, trace_rows(wave))
    recorder.write_json("fits.json", report)
    if len(trace.e_local) > 1:
        radii = list(trace.e_local)
        header = ["t"] + [f"E_r@{r!r}" for r in radii]
        columns = [trace.e_local[r] for r in radii]
        recorder.write_csv(
            "local_energy.csv", header, ([t, *row] for t, *row in zip(trace.times, *columns))
        )
    if trace.cutoff_ratio is not None:
        recorder.write_csv(
            "cutoff.csv", ["t", "forcing_ratio"], zip(trace.times, trace.cutoff_ratio, strict=True)
        )
    if config.output.write_snapshots:
        h = config.domain.h
        for index, (t, values) in enumerate(sorted(wave.snapshots.items())):
            recorder.write_snapshot(f"snapshots/u_{index:04d}.bin", values, h, t)


def write_sweep(recorder: RunRecorder, summary: SweepSummary) -> None:
    recorder.write_csv("sweep_intermediate.csv", SWEEP_HEADER, sweep_rows(summary.intermediate))
    recorder.write_csv("sweep_high.csv", SWEEP_HEADER, sweep_rows(summary.high))
    if summary.low_freq is not None:
        recorder.write_csv(
            "low_freq.csv",
            ["beta", "s", "energy_norm", "residual"],
            ([x.beta, x.s, x.energy_norm, x.residual] for x in summary.low_freq.samples),
        )
    recorder.write_json("sweep.json", summary)


def write_heat_comparison(recorder: RunRecorder, heat: HeatRun, gap: GapReport) -> None:
    recorder.write_csv(
        "heat.csv",
        ["t", "l2_sq", "max_value"],
        zip(heat.times, heat.l2_sq, heat.max_value, strict=True),
    )
    recorder.write_csv(
        "gap.csv",
        ["t", "gap", "norm_u", "norm_v"],
        zip(gap.times, gap.gap, gap.norm_u, gap.norm_v, strict=True),
    )
    recorder.write_json("gap.json", gap)


experiment_service = ExperimentService()
