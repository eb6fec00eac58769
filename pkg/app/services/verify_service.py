"""Acceptance suite: one row per checked claim, per scenario."""

import math
from pathlib import Path

import numpy as np
from loguru import logger

from ..config import settings
from ..enums import CheckStatus, DamperKind
from ..errors import LabError
from ..models import WaveRun
from ..schemas import (
    CheckResult,
    DamperSection,
    DomainSpec,
    ExperimentConfig,
    GapReport,
    GccReport,
    SimulationReport,
    SweepSummary,
    VerifyReport,
)
from ..utils.compare import in_range, max_relative_drift, max_relative_gap, within_tolerance
from .config_service import ConfigService
from .domain_service import DomainService
from .energy_service import EnergyService
from .executor import run_tasks
from .experiment_service import (
    ExperimentService,
    Scenario,
    write_heat_comparison,
    write_simulation,
    write_sweep,
)
from .manifest import RunRecorder
from .ray_service import RayService
from .resolvent_service import ResolventService
from .wave_service import WaveService

GLOBAL = "global"
VERIFY_HEADER = ["check", "scenario", "status", "reason"]

# Lower bars are a fraction of the theorem exponent.
DECAY_FRACTION = 0.8
LOCAL_R2 = 0.95
FREE_R2 = 0.98
DOUBLING_LIMIT = 0.01
GROWTH_LIMIT = 1.2
DIFFUSION_MARGIN = 0.3
ORACLE_LIMIT = 1e-9
CONV_PAIRS = ((2.0, 1.5), (1.25, 3.0), (0.5, 1.5))


def _row(name: str, scenario: str, passed: bool, reason: str | None = None, **metrics):
    status = CheckStatus.PASSED if passed else CheckStatus.FAILED
    return CheckResult(name=name, scenario=scenario, status=status, reason=reason, metrics=metrics)


def _skipped(name: str, scenario: str, reason: str) -> CheckResult:
    return CheckResult(name=name, scenario=scenario, status=CheckStatus.SKIPPED, reason=reason)


def _errored(name: str, scenario: str, error: LabError) -> CheckResult:
    logger.error(f"{name} on {scenario} raised {error}")
    return CheckResult(
        name=name,
        scenario=scenario,
        status=CheckStatus.FAILED,
        reason=error.code.value,
        metrics={"detail": error.detail},
    )


def eigen_oracle_error(k: int, s: float, a0: float = 1.0, r_box: float = 5.0, h: float = 0.1):
    """Relative error of the 1D solve against w = F / (lambda_k - s^2 + i s a0)."""

    spec = DomainSpec(dimension=1, r_box=r_box, h=h, r0=1.0, r1=2.0)
    grid = DomainService.build_grid(spec)
    length = 2 * grid.r_box
    damper = grid.apply_mask(np.full(grid.shape, a0))
    forcing = grid.apply_mask(np.sin(k * np.pi * (grid.axis + grid.r_box) / length))
    eigenvalue = 4 / h**2 * math.sin(k * math.pi * h / (2 * length)) ** 2
    exact = forcing / (eigenvalue - s**2 + 1j * s * a0)

    w, _ = ResolventService.solve(ResolventService.assemble(grid, damper, s), forcing, 1e-12)
    return float(np.linalg.norm(w - exact) / np.linalg.norm(exact))


class VerifyService:
    """Runs every applicable check for a set of scenario configs."""

    @staticmethod
    def global_checks() -> list[CheckResult]:
        results = []

        profiles = [EnergyService.conv_bound_profile(a, b) for a, b in CONV_PAIRS]
        results.append(
            _row(
                "convolution-bound",
                GLOBAL,
                all(p.bounded for p in profiles),
                maxima={f"{p.a},{p.b}": p.decade_maxima for p in profiles},
            )
        )

        errors = {
            f"k={k},s={s}": eigen_oracle_error(k, s) for k in (1, 2, 5) for s in (0.5, 2.0, 10.0)
        }
        worst = max(errors.values())
        results.append(
            _row("resolvent-oracle-1d", GLOBAL, worst <= ORACLE_LIMIT, worst_error=worst)
        )

        expected = {2: 1.5, 3: 2.25, 4: 3.0}
        thetas = {n: float(EnergyService.theta(n)) for n in expected}
        results.append(_row("theta-arithmetic", GLOBAL, thetas == expected, theta=thetas))
        return results

    @staticmethod
    def gcc_rows(
        config: ExperimentConfig, scenario: Scenario, gcc: GccReport, threads: int | None
    ) -> list[CheckResult]:
        name, run = config.scenario, config.run
        results = [
            _row(
                "gcc-certificate",
                name,
                gcc.satisfied == run.expect_gcc,
                None if gcc.satisfied == run.expect_gcc else f"satisfied={gcc.satisfied}",
                satisfied=gcc.satisfied,
                t0_estimate=gcc.t0_estimate,
                degenerate_hits=gcc.degenerate_hits,
            )
        ]

        obstacles = scenario.spec.obstacles
        if not run.expect_gcc and len(obstacles) >= 2 and gcc.worst_ray is not None:
            c1 = np.asarray(obstacles[0].center)
            c2 = np.asarray(obstacles[1].center)
            p = np.asarray(gcc.worst_ray.position)
            axis = c2 - c1
            distance = abs(axis[0] * (p - c1)[1] - axis[1] * (p - c1)[0]) / np.linalg.norm(axis)
            results.append(
                _row(
                    "gcc-trapped-ray",
                    name,
                    distance <= 2 * config.domain.h,
                    distance_to_axis=float(distance),
                )
            )

        ones = DomainService.sample_damper(
            DamperSection(kind=DamperKind.CONSTANT_ONE), scenario.spec, scenario.grid
        )
        full = RayService.certify(
            ones,
            scenario.spec,
            scenario.grid,
            run.gcc_n_pos,
            run.gcc_n_dir,
            run.gcc_t_max,
            run.gcc_epsilon,
            None,
            threads,
        )
        results.append(
            _row(
                "gcc-full-damper",
                name,
                full.satisfied and full.t0_estimate == 0.0,
                t0_estimate=full.t0_estimate,
            )
        )
        return results

    @staticmethod
    def dissipation_rows(
        config: ExperimentConfig, scenario: Scenario, report: SimulationReport
    ) -> list[CheckResult]:
        name, run = config.scenario, config.run
        tol = settings.dissipation_tol
        results = [
            _row(
                "dissipation-identity",
                name,
                report.max_residual <= tol and report.energy_increases == 0,
                max_residual=report.max_residual,
                energy_increases=report.energy_increases,
            )
        ]

        undamped = DomainService.sample_damper(
            DamperSection(kind=DamperKind.TABLE, table_value=0.0), scenario.spec, scenario.grid
        )
        conserved = WaveService.run(
            scenario.grid,
            undamped,
            scenario.data,
            run.t_end,
            run.observer_stride,
            safety=run.safety,
        )
        drift = max_relative_drift(conserved.trace.e_total)
        results.append(_row("energy-conservation", name, drift <= tol, drift=drift))
        return results

    @staticmethod
    def theorem_rows(
        config: ExperimentConfig, report: SimulationReport, gcc: GccReport | None
    ) -> list[CheckResult]:
        name = config.scenario
        if gcc is None or not gcc.satisfied:
            return [
                _skipped("local-energy-decay", name, "GCC_FAIL"),
                _skipped("total-energy-decay", name, "GCC_FAIL"),
            ]
        rates = EnergyService.predicted_exponents(config.domain.dimension)
        fits = report.fits
        results = []

        local = fits.get("E_r")
        if local is None:
            results.append(_row("local-energy-decay", name, False, report.fit_errors.get("E_r")))
        else:
            results.append(
                _row(
                    "local-energy-decay",
                    name,
                    local.exponent >= DECAY_FRACTION * rates.exterior_local
                    and local.r2 >= LOCAL_R2,
                    exponent=local.exponent,
                    r2=local.r2,
                    target=rates.exterior_local,
                )
            )

        l2, energy = fits.get("l2_sq"), fits.get("E_total")
        if l2 is None or energy is None:
            reason = report.fit_errors.get("l2_sq") or report.fit_errors.get("E_total")
            results.append(_row("total-energy-decay", name, False, reason))
        else:
            results.append(
                _row(
                    "total-energy-decay",
                    name,
                    l2.exponent >= DECAY_FRACTION * rates.exterior_l2
                    and energy.exponent >= DECAY_FRACTION * rates.exterior_energy,
                    l2_exponent=l2.exponent,
                    energy_exponent=energy.exponent,
                    targets=[rates.exterior_l2, rates.exterior_energy],
                )
            )
        return results

    @staticmethod
    def box_doubling_row(
        config: ExperimentConfig, scenario: Scenario, wave: WaveRun
    ) -> CheckResult:
        run = config.run
        doubled = ExperimentService.setup(config, scenario.spec.doubled())
        bigger = WaveService.run(
            doubled.grid,
            doubled.damper,
            doubled.data,
            run.t_end,
            run.observer_stride,
            safety=run.safety,
        )
        change = max_relative_gap(wave.trace.e_total, bigger.trace.e_total)
        return _row("box-doubling", config.scenario, change <= DOUBLING_LIMIT, max_change=change)

    @staticmethod
    def free_space_rows(
        config: ExperimentConfig, report: SimulationReport, gap: GapReport
    ) -> list[CheckResult]:
        name = config.scenario
        rates = EnergyService.predicted_exponents(config.domain.dimension)
        l2, energy = report.fits.get("l2_sq"), report.fits.get("E_total")
        results = []
        if l2 is None or energy is None:
            reason = report.fit_errors.get("l2_sq") or report.fit_errors.get("E_total")
            results.append(_row("free-space-rates", name, False, reason))
        else:
            results.append(
                _row(
                    "free-space-rates",
                    name,
                    in_range(l2.exponent, 0.7 * rates.free_l2, 1.4 * rates.free_l2)
                    and in_range(energy.exponent, 0.75 * rates.free_energy, 1.3 * rates.free_energy)
                    and min(l2.r2, energy.r2) >= FREE_R2,
                    l2_exponent=l2.exponent,
                    energy_exponent=energy.exponent,
                    r2=[l2.r2, energy.r2],
                )
            )

        if gap.gap_fit is None or gap.u_fit is None:
            results.append(_row("diffusion-phenomenon", name, False, "NO_FIT"))
        else:
            margin = gap.gap_fit.exponent - gap.u_fit.exponent
            results.append(
                _row(
                    "diffusion-phenomenon",
                    name,
                    margin >= DIFFUSION_MARGIN,
                    gap_exponent=gap.gap_fit.exponent,
                    u_exponent=gap.u_fit.exponent,
                    integrated_bound_ratio=gap.bound_ratio,
                )
            )
        return results

    @staticmethod
    def resolvent_rows(summary: SweepSummary, config: ExperimentConfig) -> list[CheckResult]:
        name = config.scenario
        inter, high = summary.intermediate, summary.high
        results = [
            _row(
                "intermediate-frequency-bound",
                name,
                inter.failures == 0
                and inter.sup_h1_ratio is not None
                and math.isfinite(inter.sup_h1_ratio),
                sup_h1_ratio=inter.sup_h1_ratio,
                failures=inter.failures,
            ),
            _row(
                "high-frequency-bound",
                name,
                high.failures == 0
                and summary.band_growth is not None
                and within_tolerance(summary.band_growth, GROWTH_LIMIT),
                band_growth=summary.band_growth,
                sup_hf_ratio=high.sup_hf_ratio,
                failures=high.failures,
            ),
        ]

        accepted = [x for x in inter.samples + high.samples if x.converged]
        violations = [
            x.s
            for x in accepted
            if x.identity_defect is None or x.identity_defect > x.identity_bound
        ]
        results.append(
            _row(
                "quadratic-identity",
                name,
                bool(accepted) and not violations,
                checked=len(accepted),
                violations=violations,
            )
        )

        if summary.low_freq is not None:
            results.append(
                _row(
                    "low-frequency-bound",
                    name,
                    summary.low_freq.bounded,
                    maxima=summary.low_freq.maxima,
                )
            )
        return results

    @staticmethod
    def check_scenario(
        config: ExperimentConfig, threads: int | None = None, out_dir: Path | None = None
    ) -> list[CheckResult]:
        name, run = config.scenario, config.run
        logger.info(f"Verifying scenario {name}")
        results: list[CheckResult] = []
        recorder = None
        if out_dir:
            recorder = RunRecorder(out_dir / name, "verify", ConfigService.config_hash(config))

        scenario = ExperimentService.setup(config)
        gcc = None
        if run.expect_gcc is not None or run.theorem_run:
            gcc = ExperimentService.gcc(config, scenario, threads)
            if run.expect_gcc is not None:
                results += VerifyService.gcc_rows(config, scenario, gcc, threads)

        free_space = not config.domain.obstacles and config.damper.kind == DamperKind.CONSTANT_ONE
        gap = None
        if free_space:
            wave, report, heat, gap = ExperimentService.compare_heat(config, threads)
            if recorder:
                write_heat_comparison(recorder, heat, gap)
        else:
            wave, report = ExperimentService.simulate(config, threads, scenario=scenario, gcc=gcc)
        if recorder:
            write_simulation(recorder, wave, report, config)

        results += VerifyService.dissipation_rows(config, scenario, report)
        if run.theorem_run:
            results += VerifyService.theorem_rows(config, report, gcc)
        if run.box_doubling:
            results.append(VerifyService.box_doubling_row(config, scenario, wave))
        if free_space:
            results += VerifyService.free_space_rows(config, report, gap)

        if config.resolvent.verify:
            summary = ExperimentService.sweep(config, threads)
            if recorder:
                write_sweep(recorder, summary)
            results += VerifyService.resolvent_rows(summary, config)
            if run.box_doubling:
                s = config.resolvent.intermediate_band[0]
                change = ExperimentService.resolvent_box_doubling(config, s)
                passed = change <= DOUBLING_LIMIT
                results.append(
                    _row("resolvent-box-doubling", name, passed, max_change=change)
                )

        if recorder:
            recorder.finish()
        return results

    @staticmethod
    def verify(
        configs: list[ExperimentConfig],
        threads: int | None = None,
        out_dir: Path | None = None,
        include_global: bool = True,
    ) -> VerifyReport:
        threads = threads or settings.threads
        inner = 1 if threads > 1 and len(configs) > 1 else threads

        def one(config: ExperimentConfig) -> list[CheckResult]:
            try:
                return VerifyService.check_scenario(config, inner, out_dir)
            except LabError as e:
                return [_errored("scenario", config.scenario, e)]

        results = [row for rows in run_tasks(one, configs, threads) for row in rows]
        if include_global:
            results += VerifyService.global_checks()
        passed = all(row.status != CheckStatus.FAILED for row in results)
        logger.info(
            f"Verify finished: {sum(r.status == CheckStatus.PASSED for r in results)} passed, "
            f"{sum(r.status == CheckStatus.FAILED for r in results)} failed, "
            f"{sum(r.status == CheckStatus.SKIPPED for r in results)} skipped"
        )
        return VerifyReport(results=results, passed=passed)


def verify_rows(report: VerifyReport) -> list[list]:
    return [[r.name, r.scenario, r.label, r.reason or ""] for r in report.results]


verify_service = VerifyService()
