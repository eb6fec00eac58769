"""Energy functionals, decay fits and the convolution-bound quadrature."""

import math
from fractions import Fraction

import numpy as np
from loguru import logger
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from ..config import settings
from ..enums import ErrorCode
from ..errors import MetricsError
from ..models import FloatArray, GridMask, SolverState
from ..schemas import ConvBoundProfile, DecayFit, RateTable
from ..utils.quadrature import integrate_relative
from ..utils.stencil import centered_gradient, edge_products, laplacian
from .domain_service import smooth_step


def energy_density(u_old: FloatArray, u_new: FloatArray, dt: float, h: float) -> FloatArray:
    """Per-node staggered energy between two consecutive levels.

    Velocity uses (u_new - u_old)/dt; the gradient term is the product of the
    forward gradients of both levels, each edge attributed to its base node.
    """
    velocity = (u_new - u_old) / dt
    return 0.5 * h**u_new.ndim * (velocity**2 + edge_products(u_new, u_old, h))


class EnergyService:
    """Energy observers and decay diagnostics."""

    @staticmethod
    def total_energy(state: SolverState, grid: GridMask) -> float:
        return float(energy_density(state.u_prev, state.u_curr, state.dt, grid.h).sum())

    @staticmethod
    def local_energies(
        state: SolverState, grid: GridMask, radii: list[float]
    ) -> dict[float, float]:
        density = energy_density(state.u_prev, state.u_curr, state.dt, grid.h)
        out = {}
        for r in radii:
            EnergyService._check_radius(r, grid)
            if r >= grid.r_box:
                out[r] = float(density.sum())
            else:
                out[r] = float(density[grid.radius <= r].sum())
        return out

    @staticmethod
    def _check_radius(r: float, grid: GridMask) -> None:
        if r <= 0 or r > grid.r_box + 1e-9 * grid.r_box:
            raise MetricsError(
                ErrorCode.RADIUS_OUT_OF_RANGE, f"radius {r} outside (0, {grid.r_box}]", radius=r
            )

    @staticmethod
    def l2_norm_sq(field: FloatArray, grid: GridMask) -> float:
        return grid.node_volume * float(np.sum(np.abs(field) ** 2))

    @staticmethod
    def dissipated_power(
        u_prevprev: FloatArray, u_curr: FloatArray, damper: FloatArray, dt: float, h: float
    ) -> float:
        """Sum h^N a ((u^{n+1} - u^{n-1}) / (2dt))^2."""
        velocity = (u_curr - u_prevprev) / (2 * dt)
        return h**u_curr.ndim * float(np.sum(damper * velocity**2))

    @staticmethod
    def dissipation_residual(
        u_prevprev: FloatArray,
        u_prev: FloatArray,
        u_curr: FloatArray,
        damper: FloatArray,
        dt: float,
        h: float,
        floor: float = 1e-300,
    ) -> float:
        e_old = float(energy_density(u_prevprev, u_prev, dt, h).sum())
        e_new = float(energy_density(u_prev, u_curr, dt, h).sum())
        power = EnergyService.dissipated_power(u_prevprev, u_curr, damper, dt, h)
        return residual_from_energies(e_old, e_new, power, dt, floor)

    @staticmethod
    def fit_decay(
        times: FloatArray, values: FloatArray, window: tuple[float, float]
    ) -> DecayFit:
        """Least-squares line through (log(1+t), log y); exponent = -slope."""

        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        t_min, t_max = window
        if t_min >= t_max:
            raise MetricsError(ErrorCode.PRECONDITION_VIOLATED, f"empty fit window {window}")
        if times.size == 0 or t_min < times[0] - 1e-9 or t_max > times[-1] + 1e-9:
            raise MetricsError(
                ErrorCode.PRECONDITION_VIOLATED,
                f"fit window {window} not inside the trace times",
            )

        selected = (times >= t_min) & (times <= t_max)
        if np.count_nonzero(selected) < 10:
            raise MetricsError(
                ErrorCode.PRECONDITION_VIOLATED,
                f"only {np.count_nonzero(selected)} samples in window {window}, need 10",
            )
        floor = settings.roundoff_floor * abs(values[0])
        y = values[selected]
        if np.any(y <= 0) or np.any(y <= floor):
            raise MetricsError(
                ErrorCode.NONPOSITIVE_DATA,
                f"values at round-off level inside {window}; shrink the window",
            )

        x = np.log1p(times[selected]).reshape(-1, 1)
        log_y = np.log(y)
        model = LinearRegression().fit(x, log_y)
        r2 = float(r2_score(log_y, model.predict(x)))
        fit = DecayFit(
            exponent=-float(model.coef_[0]),
            intercept=float(model.intercept_),
            r2=r2,
            window=(t_min, t_max),
            n_samples=int(y.size),
        )
        logger.debug(f"Decay fit on {window}: exponent={fit.exponent:.4f} r2={fit.r2:.4f}")
        return fit

    @staticmethod
    def theta(dimension: int) -> Fraction:
        """min{1 + N/2, 3N/4} as an exact rational."""
        if dimension < 1:
            raise MetricsError(ErrorCode.PRECONDITION_VIOLATED, f"dimension {dimension} < 1")
        return min(1 + Fraction(dimension, 2), Fraction(3 * dimension, 4))

    @staticmethod
    def predicted_exponents(dimension: int, m: float = 1.0) -> RateTable:
        if dimension < 1 or not 1 <= m <= 2:
            raise MetricsError(
                ErrorCode.PRECONDITION_VIOLATED, f"need N >= 1 and 1 <= m <= 2: {dimension}, {m}"
            )
        gain = dimension * (1 / m - 0.5)
        return RateTable(
            dimension=dimension,
            m=m,
            free_l2=gain,
            free_energy=1 + gain,
            heat_l2=gain,
            heat_gradient=1 + gain,
            exterior_local=float(dimension),
            exterior_l2=dimension / 2,
            exterior_energy=float(EnergyService.theta(dimension)),
        )

    @staticmethod
    def conv_bound_ratio(a: float, b: float, t: float) -> float:
        """int_0^t (1+t-s)^-a (1+s)^-b ds divided by (1+t)^-min(a,b)."""

        if a <= 0 or b <= 0 or max(a, b) <= 1:
            raise MetricsError(
                ErrorCode.HYPOTHESIS_VIOLATED, f"need a, b > 0 and max(a, b) > 1, got {a}, {b}"
            )
        if t <= 0:
            return 0.0

        def integrand(s: float) -> float:
            return (1 + t - s) ** -a * (1 + s) ** -b

        integral = integrate_relative(integrand, 0.0, t, settings.quad_rtol, (t / 2,))
        return integral * (1 + t) ** min(a, b)

    @staticmethod
    def exp_conv_bound_ratio(alpha: float, b: float, t: float) -> float:
        """int_0^t exp(-alpha(t-s)) (1+s)^-b ds divided by (1+t)^-b."""

        if alpha <= 0 or b <= 0:
            raise MetricsError(
                ErrorCode.HYPOTHESIS_VIOLATED, f"need alpha, b > 0, got {alpha}, {b}"
            )
        if t <= 0:
            return 0.0

        def integrand(s: float) -> float:
            return math.exp(-alpha * (t - s)) * (1 + s) ** -b

        breakpoints = (t / 2, max(0.0, t - 1 / alpha))
        integral = integrate_relative(integrand, 0.0, t, settings.quad_rtol, breakpoints)
        return integral * (1 + t) ** b

    @staticmethod
    def conv_bound_profile(
        a: float, b: float, times: list[float] | None = None, growth_limit: float = 0.05
    ) -> ConvBoundProfile:
        """Ratios on a log grid plus per-decade maxima.

        The profile counts as bounded when every decade lying above t = 100
        exceeds the previous decade's maximum by less than growth_limit.
        """
        if times is None:
            times = [float(t) for t in np.logspace(0, 4, 41)]
        ratios = [EnergyService.conv_bound_ratio(a, b, t) for t in times]

        decades: dict[int, float] = {}
        for t, ratio in zip(times, ratios, strict=True):
            decade = min(int(math.floor(math.log10(t) + 1e-12)), 3) if t >= 1 else -1
            decades[decade] = max(decades.get(decade, 0.0), ratio)
        ordered = [decades[k] for k in sorted(decades)]
        keys = sorted(decades)

        bounded = all(math.isfinite(r) for r in ratios)
        for prev, curr in zip(keys[:-1], keys[1:], strict=True):
            if prev >= 2 and decades[curr] > (1 + growth_limit) * decades[prev]:
                bounded = False
        return ConvBoundProfile(
            a=a, b=b, times=list(times), ratios=ratios, decade_maxima=ordered, bounded=bounded
        )

    @staticmethod
    def sample_cutoff(grid: GridMask, inner: float, outer: float) -> FloatArray:
        """phi = 0 on |x| <= inner, 1 on |x| >= outer."""
        if not 0 <= inner < outer:
            raise MetricsError(
                ErrorCode.PRECONDITION_VIOLATED, f"need 0 <= inner < outer, got {inner}, {outer}"
            )
        return smooth_step(grid.radius, inner, outer)

    @staticmethod
    def cutoff_forcing(
        u: FloatArray, phi: FloatArray, grid: GridMask, gradient_weight: float = 1.0
    ) -> FloatArray:
        """-w grad(phi).grad(u) - lap(phi) u on interior nodes."""

        if u.shape != grid.shape or phi.shape != grid.shape:
            raise MetricsError(
                ErrorCode.SHAPE_MISMATCH,
                f"u {u.shape} and phi {phi.shape} must match grid {grid.shape}",
            )
        grad_phi = centered_gradient(phi, grid.h)
        grad_u = centered_gradient(u, grid.h)
        cross = sum(gp * gu for gp, gu in zip(grad_phi, grad_u, strict=True))
        forcing = -gradient_weight * cross - laplacian(phi, grid.h) * u
        return grid.apply_mask(forcing)


def residual_from_energies(
    e_old: float, e_new: float, power: float, dt: float, floor: float = 1e-300
) -> float:
    return abs((e_new - e_old) / dt + power) / max(e_new, floor)


energy_service = EnergyService()


def total_energy(state: SolverState, grid: GridMask) -> float:
    """Convenience function for the staggered energy of a state."""
    return EnergyService.total_energy(state, grid)


def local_energy(state: SolverState, grid: GridMask, r: float) -> float:
    return EnergyService.local_energies(state, grid, [r])[r]


def l2_norm_sq(field: FloatArray, grid: GridMask) -> float:
    return EnergyService.l2_norm_sq(field, grid)


def fit_decay(times: FloatArray, values: FloatArray, window: tuple[float, float]) -> DecayFit:
    return EnergyService.fit_decay(times, values, window)


def theta(dimension: int) -> Fraction:
    return EnergyService.theta(dimension)
