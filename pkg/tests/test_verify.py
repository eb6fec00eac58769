from app.enums import CheckStatus, ErrorCode
from app.schemas import (
    DecayFit,
    GapReport,
    GccReport,
    LowFreqReport,
    ResolventSample,
    SimulationReport,
    SweepReport,
    SweepSummary,
)
from app.services.config_service import ConfigService, parse_config
from app.services.experiment_service import ExperimentService
from app.services.manifest import load_manifest
from app.services.verify_service import VerifyService, eigen_oracle_error, verify_rows
from app.services.wave_service import WaveService

DISK = parse_config("[domain]\nobstacles = 0, 0, 1\n[output]\nscenario = disk\n")
LINE = parse_config(
    "[domain]\ndimension = 1\nh = 0.1\n[damper]\nkind = CONSTANT_ONE\n"
    "[initial]\ncenter = 0\nwidth = 2\n[run]\nt_end = 30\n[output]\nscenario = line\n"
)


def _fit(exponent: float, r2: float = 0.999) -> DecayFit:
    return DecayFit(exponent=exponent, intercept=0.0, r2=r2, window=(10.0, 40.0), n_samples=60)


def _report(**fits: DecayFit) -> SimulationReport:
    return SimulationReport(
        scenario="disk", dt=0.06, steps=100, max_residual=0.0, energy_increases=0, fits=fits
    )


def _gcc(satisfied: bool) -> GccReport:
    return GccReport(
        satisfied=satisfied, t0_estimate=3.0, num_samples=10, epsilon=1e-3, t_max=50.0
    )


def _by_name(rows):
    return {row.name: row for row in rows}


class TestTheoremRows:
    def test_skipped_without_control(self):
        rows = VerifyService.theorem_rows(DISK, _report(), _gcc(False))

        assert [row.label for row in rows] == ["SKIPPED(GCC_FAIL)", "SKIPPED(GCC_FAIL)"]
        assert [row.name for row in rows] == ["local-energy-decay", "total-energy-decay"]

    def test_skipped_without_certificate(self):
        rows = VerifyService.theorem_rows(DISK, _report(), None)
        assert all(row.status == CheckStatus.SKIPPED for row in rows)

    def test_rates_meet_the_planar_bounds(self):
        report = _report(E_r=_fit(2.1), l2_sq=_fit(1.0), E_total=_fit(1.6))
        rows = _by_name(VerifyService.theorem_rows(DISK, report, _gcc(True)))

        assert rows["local-energy-decay"].status == CheckStatus.PASSED
        assert rows["total-energy-decay"].status == CheckStatus.PASSED

    def test_slow_decay_fails(self):
        report = _report(E_r=_fit(1.0), l2_sq=_fit(1.0), E_total=_fit(0.5))
        rows = _by_name(VerifyService.theorem_rows(DISK, report, _gcc(True)))

        assert rows["local-energy-decay"].status == CheckStatus.FAILED
        assert rows["total-energy-decay"].status == CheckStatus.FAILED

    def test_poor_local_fit_fails(self):
        report = _report(E_r=_fit(2.0, r2=0.5), l2_sq=_fit(1.0), E_total=_fit(1.5))
        rows = _by_name(VerifyService.theorem_rows(DISK, report, _gcc(True)))
        assert rows["local-energy-decay"].status == CheckStatus.FAILED

    def test_missing_fit_carries_its_error(self):
        report = _report(l2_sq=_fit(1.0), E_total=_fit(1.5))
        report.fit_errors["E_r"] = "energy-metrics: NONPOSITIVE_DATA: round-off"
        rows = _by_name(VerifyService.theorem_rows(DISK, report, _gcc(True)))

        assert rows["local-energy-decay"].status == CheckStatus.FAILED
        assert "NONPOSITIVE_DATA" in rows["local-energy-decay"].reason


class TestFreeSpaceRows:
    def _gap(self, gap_exponent: float, u_exponent: float) -> GapReport:
        return GapReport(
            times=[0.0],
            gap=[0.0],
            norm_u=[1.0],
            norm_v=[1.0],
            gap_fit=_fit(gap_exponent),
            u_fit=_fit(u_exponent),
            integrated_gap_sq=0.1,
        )

    def test_line_rates(self):
        report = _report(l2_sq=_fit(0.5), E_total=_fit(1.5))
        rows = _by_name(VerifyService.free_space_rows(LINE, report, self._gap(0.8, 0.25)))

        assert rows["free-space-rates"].status == CheckStatus.PASSED
        assert rows["diffusion-phenomenon"].status == CheckStatus.PASSED

    def test_gap_must_beat_the_solution(self):
        report = _report(l2_sq=_fit(0.5), E_total=_fit(1.5))
        rows = _by_name(VerifyService.free_space_rows(LINE, report, self._gap(0.3, 0.25)))
        assert rows["diffusion-phenomenon"].status == CheckStatus.FAILED

    def test_wrong_rate_fails(self):
        report = _report(l2_sq=_fit(1.5), E_total=_fit(1.5))
        rows = _by_name(VerifyService.free_space_rows(LINE, report, self._gap(0.8, 0.25)))
        assert rows["free-space-rates"].status == CheckStatus.FAILED


class TestResolventRows:
    def _summary(self, growth: float | None, defect: float = 1e-14) -> SweepSummary:
        sample = ResolventSample(
            s=1.0, h1_ratio=2.0, hf_ratio=1.0, identity_defect=defect, identity_bound=1e-12
        )
        band = SweepReport(band=(0.25, 4.0), family="BUMP", samples=[sample], sup_h1_ratio=2.0)
        return SweepSummary(
            scenario="disk",
            intermediate=band,
            high=band,
            band_growth=growth,
            low_freq=LowFreqReport(samples=[], maxima=[], bounded=True, chi_radius=3.0),
        )

    def test_all_bounds_hold(self):
        rows = _by_name(VerifyService.resolvent_rows(self._summary(1.05), DISK))

        assert set(rows) == {
            "intermediate-frequency-bound",
            "high-frequency-bound",
            "quadratic-identity",
            "low-frequency-bound",
        }
        assert all(row.status == CheckStatus.PASSED for row in rows.values())

    def test_growth_and_identity_failures(self):
        rows = _by_name(VerifyService.resolvent_rows(self._summary(1.5, defect=1.0), DISK))

        assert rows["high-frequency-bound"].status == CheckStatus.FAILED
        assert rows["quadratic-identity"].status == CheckStatus.FAILED

    def test_missing_growth_fails(self):
        rows = _by_name(VerifyService.resolvent_rows(self._summary(None), DISK))
        assert rows["high-frequency-bound"].status == CheckStatus.FAILED


def test_global_checks_pass():
    rows = _by_name(VerifyService.global_checks())

    assert set(rows) == {"convolution-bound", "resolvent-oracle-1d", "theta-arithmetic"}
    assert all(row.status == CheckStatus.PASSED for row in rows.values())


def test_oracle_error_is_at_round_off():
    assert eigen_oracle_error(3, 1.0) < 1e-9


def test_free_line_scenario_end_to_end(tmp_path):
    report = VerifyService.verify([LINE], threads=1, out_dir=tmp_path, include_global=False)
    rows = _by_name(report.results)

    assert rows["dissipation-identity"].status == CheckStatus.PASSED
    assert rows["energy-conservation"].status == CheckStatus.PASSED
    assert {"free-space-rates", "diffusion-phenomenon"} <= set(rows)
    files = {entry.path for entry in load_manifest(tmp_path / "line").files}
    assert {"trace.csv", "gap.csv"} <= files


def test_verify_manifest_carries_the_config_hash(tmp_path):
    VerifyService.verify([LINE], threads=1, out_dir=tmp_path, include_global=False)
    manifest = load_manifest(tmp_path / "line")

    assert manifest.command == "verify"
    assert manifest.config_hash == ConfigService.config_hash(LINE)


def test_box_doubling_passes_when_the_front_stays_inside():
    config = parse_config(
        "[domain]\nh = 0.2\nr0 = 2\nr1 = 3\nr_box = 12\nobstacles = 0, 0, 1\n"
        "[damper]\nkind = EXTERIOR_SMOOTH\ninner_radius = 1.5\n"
        "[initial]\ncenter = 2.5, 0\nwidth = 0.5\n"
        "[run]\nt_end = 6\nbox_doubling = true\n[output]\nscenario = small_disk\n"
    )
    scenario = ExperimentService.setup(config)
    wave = WaveService.run(
        scenario.grid,
        scenario.damper,
        scenario.data,
        config.run.t_end,
        config.run.observer_stride,
        safety=config.run.safety,
    )
    row = VerifyService.box_doubling_row(config, scenario, wave)

    assert row.status == CheckStatus.PASSED
    assert row.metrics["max_change"] <= 1e-6


def test_scenario_errors_become_failed_rows():
    broken = parse_config(
        "[domain]\ndimension = 1\n[initial]\ncenter = 2.8\nwidth = 0.5\n"
        "[output]\nscenario = broken\n"
    )
    report = VerifyService.verify([broken], threads=1, include_global=False)

    assert not report.passed
    row = report.results[0]
    assert (row.name, row.status, row.reason) == ("scenario", CheckStatus.FAILED, "SPEC_INVALID")
    assert verify_rows(report) == [["scenario", "broken", "FAILED", ErrorCode.SPEC_INVALID.value]]
