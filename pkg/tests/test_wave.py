import math

import numpy as np
import pytest

from app.enums import BumpKind, DamperKind, ErrorCode
from app.errors import SolverError
from app.models import HeatState, SolverState
from app.schemas import DamperSection, DomainSpec
from app.services.domain_service import DomainService, bump_field
from app.services.energy_service import EnergyService
from app.services.wave_service import WaveService, cfl_timestep, heat_run, run, step
from app.utils.compare import is_non_increasing, max_relative_drift
from app.utils.stencil import centered_gradient, laplacian


def _line(r_box: float = 5.0, h: float = 1.0):
    return DomainService.build_grid(DomainSpec(dimension=1, r_box=r_box, h=h, r0=1.0, r1=2.0))


class TestTimestep:
    def test_cfl_values(self):
        assert cfl_timestep(0.1, 2, 0.9) == pytest.approx(0.09 / math.sqrt(2))
        assert cfl_timestep(0.1, 1, 1.0) == pytest.approx(0.1)

    @pytest.mark.parametrize("safety", [0.0, 1.5])
    def test_safety_outside_unit_interval(self, safety):
        with pytest.raises(SolverError) as info:
            cfl_timestep(0.1, 2, safety)
        assert info.value.code == ErrorCode.PRECONDITION_VIOLATED


class TestStep:
    def test_zero_state_stays_zero(self):
        grid = _line()
        state = SolverState(u_prev=grid.zeros(), u_curr=grid.zeros(), dt=0.5, n=1)
        assert not np.any(step(state, grid.zeros(), grid).u_curr)

    def test_undamped_unit_courant_number_is_exact_transport(self, rng):
        grid = _line()
        u_prev = grid.apply_mask(rng.standard_normal(grid.shape))
        u_curr = grid.apply_mask(rng.standard_normal(grid.shape))
        state = SolverState(u_prev=u_prev, u_curr=u_curr, dt=1.0, n=1)

        new = step(state, grid.zeros(), grid)

        expected = np.zeros(grid.shape)
        expected[1:-1] = u_curr[2:] + u_curr[:-2] - u_prev[1:-1]
        assert np.allclose(new.u_curr, expected)
        assert new.n == 2
        assert new.u_prev is u_curr

    def test_critical_damping_drops_previous_level(self, rng):
        grid = _line()
        dt = 0.5
        damper = grid.apply_mask(np.full(grid.shape, 2.0 / dt))
        u_prev = grid.apply_mask(rng.standard_normal(grid.shape))
        u_curr = grid.apply_mask(rng.standard_normal(grid.shape))

        new = step(SolverState(u_prev=u_prev, u_curr=u_curr, dt=dt, n=1), damper, grid)

        lap = np.zeros(grid.shape)
        lap[1:-1] = u_curr[2:] - 2 * u_curr[1:-1] + u_curr[:-2]
        expected = grid.apply_mask((2 * u_curr + dt**2 * lap) / 2)
        assert np.allclose(new.u_curr, expected)

    def test_blowup_is_reported(self):
        grid = _line()
        u = grid.apply_mask(np.full(grid.shape, 1e13))
        with pytest.raises(SolverError) as info:
            step(SolverState(u_prev=grid.zeros(), u_curr=u, dt=0.5, n=1), grid.zeros(), grid)
        assert info.value.code == ErrorCode.BLOWUP


def test_finite_speed_of_propagation():
    grid = _line(r_box=20.0, h=1.0)
    center = grid.half_nodes
    u0 = grid.zeros()
    u0[center] = 1.0
    dt = cfl_timestep(grid.h, 1, 0.9)

    state = WaveService.first_step(u0, grid.zeros(), grid.zeros(), grid, dt)
    for _ in range(11):
        support = np.flatnonzero(state.u_curr)
        assert support.min() >= center - state.n
        assert support.max() <= center + state.n
        state = step(state, grid.zeros(), grid)


class TestRun:
    def test_zero_data_gives_zero_trace(self, disk_grid, disk_damper):
        zero = disk_grid.zeros()
        wave = run(disk_grid, disk_damper, (zero, zero), 2.0)

        assert wave.trace.e_total == [0.0] * len(wave.trace)
        assert wave.trace.l2_sq == [0.0] * len(wave.trace)

    def test_undamped_energy_is_conserved(self, line_spec, line_grid):
        u0, u1 = DomainService.initial_data(BumpKind.BUMP_BOTH, line_spec, line_grid, (0.0,), 1.0)
        wave = run(line_grid, line_grid.zeros(), (u0, u1), 10.0)

        assert max_relative_drift(wave.trace.e_total) <= 1e-10
        assert wave.trace.energy_increases == 0

    def test_damped_energy_decreases_with_small_residual(self, disk_spec, disk_grid, disk_damper):
        data = DomainService.initial_data(BumpKind.BUMP_U0, disk_spec, disk_grid, (2.0, 0.0), 0.4)
        wave = run(disk_grid, disk_damper, data, 6.0, radii=[2.5, disk_grid.r_box])
        trace = wave.trace

        assert is_non_increasing(trace.e_total)
        assert trace.e_total[-1] < trace.e_total[0]
        assert trace.max_residual <= 1e-10
        assert trace.energy_increases == 0
        assert trace.e_local[disk_grid.r_box] == trace.e_total
        assert all(
            inner <= outer * (1 + 1e-6)
            for inner, outer in zip(trace.e_local[2.5], trace.e_total, strict=True)
        )

    def test_rows_are_taken_at_the_observer_rate(self, disk_spec, disk_grid, disk_damper):
        data = DomainService.initial_data(BumpKind.BUMP_U0, disk_spec, disk_grid, (2.0, 0.0), 0.4)
        wave = run(disk_grid, disk_damper, data, 4.0)
        times = np.diff(wave.trace.times)

        assert wave.trace.times[0] == 0.0
        assert np.allclose(times, times[0])
        assert 0.5 <= times[0] < 0.5 + wave.trace.dt

    def test_energy_scales_quadratically(self, disk_spec, disk_grid, disk_damper):
        u0, u1 = DomainService.initial_data(
            BumpKind.BUMP_BOTH, disk_spec, disk_grid, (2.0, 0.0), 0.4
        )
        base = run(disk_grid, disk_damper, (u0, u1), 3.0).trace.e_total
        doubled = run(disk_grid, disk_damper, (2 * u0, 2 * u1), 3.0).trace.e_total

        assert np.allclose(doubled, 4 * np.asarray(base), rtol=1e-12)

    def test_solution_is_linear_in_the_data(self, disk_spec, disk_grid, disk_damper):
        u0, u1 = DomainService.initial_data(
            BumpKind.BUMP_BOTH, disk_spec, disk_grid, (2.0, 0.0), 0.4
        )
        base = run(disk_grid, disk_damper, (u0, u1), 3.0, snapshot_every=1).snapshots
        scaled = run(disk_grid, disk_damper, (-3 * u0, -3 * u1), 3.0, snapshot_every=1).snapshots

        assert sorted(scaled) == sorted(base)
        peak = max(float(np.abs(field).max()) for field in base.values())
        for t, field in base.items():
            np.testing.assert_allclose(scaled[t], -3 * field, rtol=0, atol=1e-12 * peak)

    def test_cutoff_ratio_stays_bounded(self, disk_spec, disk_grid, disk_damper):
        data = DomainService.initial_data(BumpKind.BUMP_U0, disk_spec, disk_grid, (2.0, 0.0), 0.4)
        phi = EnergyService.sample_cutoff(disk_grid, disk_spec.r0, disk_spec.r1)
        result = run(
            disk_grid,
            disk_damper,
            data,
            8.0,
            radii=[disk_spec.r1],
            snapshot_every=1,
            cutoff=phi,
            cutoff_radius=disk_spec.r1,
        )
        trace = result.trace
        grad_phi_sq = float(np.max(sum(g**2 for g in centered_gradient(phi, disk_grid.h))))
        lap_phi_sq = float(np.max(laplacian(phi, disk_grid.h) ** 2))

        assert trace.cutoff_ratio[0] > 0
        for t, ratio, local in zip(
            trace.times, trace.cutoff_ratio, trace.e_local[disk_spec.r1], strict=True
        ):
            u = result.snapshots[t]
            grad_u_sq = float(sum(np.sum(g**2) for g in centered_gradient(u, disk_grid.h)))
            bound = (
                2 * disk_grid.node_volume * (grad_phi_sq * grad_u_sq + lap_phi_sq * np.sum(u**2))
            )
            assert math.isfinite(ratio)
            assert ratio * local <= bound * (1 + 1e-9) + 1e-300

    def test_shape_mismatch(self, disk_grid, disk_damper):
        with pytest.raises(SolverError) as info:
            run(disk_grid, disk_damper, (np.zeros(3), np.zeros(3)), 1.0)
        assert info.value.code == ErrorCode.SHAPE_MISMATCH

    def test_snapshots_and_cutoff_ratio(self, disk_spec, disk_grid, disk_damper):
        data = DomainService.initial_data(BumpKind.BUMP_U0, disk_spec, disk_grid, (2.0, 0.0), 0.4)
        phi = EnergyService.sample_cutoff(disk_grid, disk_spec.r0, disk_spec.r1)
        wave = run(
            disk_grid,
            disk_damper,
            data,
            3.0,
            snapshot_every=2,
            cutoff=phi,
            cutoff_radius=disk_spec.r1,
        )

        assert len(wave.snapshots) == math.ceil(len(wave.trace) / 2)
        assert np.array_equal(wave.snapshots[0.0], data[0])
        assert len(wave.trace.cutoff_ratio) == len(wave.trace)
        assert all(ratio >= 0 for ratio in wave.trace.cutoff_ratio)


class TestHeat:
    def test_zero_data_stays_zero(self, line_grid):
        result = heat_run(line_grid, line_grid.zeros(), [0.0, 1.0])
        assert result.l2_sq == [0.0, 0.0]

    def test_single_step_of_a_spike(self):
        grid = _line()
        v0 = grid.zeros()
        v0[5] = 1.0
        state = WaveService.heat_step(HeatState(v_curr=v0, dt=0.24, n=0), grid)

        assert state.n == 1
        assert state.t == pytest.approx(0.24)
        assert state.v_curr[5] == pytest.approx(0.52)
        assert state.v_curr[4] == pytest.approx(0.24)
        assert state.v_curr[6] == pytest.approx(0.24)
        assert state.v_curr.sum() == pytest.approx(1.0)

    def test_maximum_principle(self, line_grid):
        v0 = line_grid.apply_mask(bump_field(line_grid, (0.0,), 1.0))
        result = heat_run(line_grid, v0, [0.0, 0.5, 1.0, 2.0, 4.0])

        assert is_non_increasing(result.max_value)
        assert is_non_increasing(result.l2_sq)

    def test_free_space_l2_decay_rate(self):
        grid = DomainService.build_grid(
            DomainSpec(dimension=1, r_box=60.0, h=0.25, r0=1.0, r1=2.0)
        )
        v0 = grid.apply_mask(bump_field(grid, (0.0,), 1.0))
        times = [float(t) for t in np.linspace(10.0, 100.0, 46)]
        result = heat_run(grid, v0, times)

        fit = EnergyService.fit_decay(np.array(result.times), np.array(result.l2_sq), (10, 100))
        assert fit.exponent == pytest.approx(0.5, abs=0.06)


class TestDiffusionGap:
    def test_identical_snapshots_have_no_gap(self, line_grid):
        u = line_grid.apply_mask(bump_field(line_grid, (0.0,), 1.0))
        snapshots = {0.0: u, 1.0: 0.5 * u}
        report = WaveService.diffusion_gap(snapshots, dict(snapshots), line_grid)

        assert report.gap == [0.0, 0.0]
        assert report.integrated_gap_sq == 0.0

    def test_gap_at_time_zero_is_the_velocity_norm(self, line_grid):
        u0 = line_grid.apply_mask(bump_field(line_grid, (0.0,), 1.0))
        u1 = 0.5 * u0
        report = WaveService.diffusion_gap({0.0: u0}, {0.0: u0 + u1}, line_grid, None, 1.0)

        assert report.gap[0] == pytest.approx(math.sqrt(EnergyService.l2_norm_sq(u1, line_grid)))
        assert report.integrated_bound == pytest.approx(4.0 / 3.0)

    def test_mismatched_times(self, line_grid):
        u = line_grid.zeros()
        with pytest.raises(SolverError) as info:
            WaveService.diffusion_gap({0.0: u}, {0.5: u}, line_grid)
        assert info.value.code == ErrorCode.SHAPE_MISMATCH


def test_damper_kind_does_not_change_undamped_limit(line_spec, line_grid):
    zero = DomainService.sample_damper(
        DamperSection(kind=DamperKind.TABLE, table_value=0.0), line_spec, line_grid
    )
    u0, u1 = DomainService.initial_data(BumpKind.BUMP_U0, line_spec, line_grid, (0.0,), 1.0)
    a = run(line_grid, zero, (u0, u1), 2.0).trace.e_total
    b = run(line_grid, line_grid.zeros(), (u0, u1), 2.0).trace.e_total
    assert a == b
