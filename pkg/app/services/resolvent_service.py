"""Reduced Helmholtz-type equations at complex frequencies and resolvent sweeps."""

import math
from collections.abc import Callable

import numpy as np
from loguru import logger
from scipy import sparse

from ..adapters.linear_solvers import SolveOutcome, get_linear_solver
from ..config import settings
from ..enums import ErrorCode, ForcingFamily, SolveMethod
from ..errors import ResolventError
from ..models import BlockResolvent, ComplexArray, FloatArray, GridMask, HelmholtzSystem
from ..schemas import (
    DamperSection,
    DomainSpec,
    LowFreqReport,
    LowFreqSample,
    ResolventSample,
    SweepReport,
)
from ..utils.stencil import gradient_norm_sq, l2_norm_sq, laplacian
from .domain_service import DomainService, bump_field, smooth_step
from .executor import run_tasks

WEAKENING_NOTE = (
    "low-frequency regularity is sampled as pointwise boundedness in lambda; "
    "no Besov-type norm is computed"
)


def _stagnated(e: ResolventError) -> bool:
    return e.code == ErrorCode.SOLVER_STAGNATED


class ResolventService:
    """Assembly, solves and frequency sweeps."""

    @staticmethod
    def assemble_operator(grid: GridMask, damper: FloatArray, lam: complex) -> HelmholtzSystem:
        """lam^2 + lam*a - Laplacian restricted to interior nodes."""

        if damper.shape != grid.shape:
            raise ResolventError(
                ErrorCode.SHAPE_MISMATCH, f"damper {damper.shape} vs grid {grid.shape}"
            )
        index = grid.interior_index
        size = index.size
        position = np.full(grid.kinds.size, -1, dtype=np.intp)
        position[index] = np.arange(size)
        interior = grid.interior.ravel()

        rows, cols = [], []
        strides = [int(np.prod(grid.shape[axis + 1 :])) for axis in range(grid.dimension)]
        for stride in strides:
            neighbor = index + stride
            linked = interior[neighbor]
            rows.append(position[index[linked]])
            cols.append(position[neighbor[linked]])
        rows_arr = np.concatenate(rows)
        cols_arr = np.concatenate(cols)

        h2 = grid.h**2
        diagonal = 2 * grid.dimension / h2 + lam**2 + lam * damper.ravel()[index]
        off = np.full(rows_arr.size, -1.0 / h2, dtype=np.complex128)
        diag_index = np.arange(size)
        matrix = sparse.coo_matrix(
            (
                np.concatenate([diagonal.astype(np.complex128), off, off]),
                (
                    np.concatenate([diag_index, rows_arr, cols_arr]),
                    np.concatenate([diag_index, cols_arr, rows_arr]),
                ),
            ),
            shape=(size, size),
        ).tocsc()
        return HelmholtzSystem(matrix=matrix, lam=complex(lam), grid=grid, damper=damper)

    @staticmethod
    def assemble(grid: GridMask, damper: FloatArray, s: float) -> HelmholtzSystem:
        """-Laplacian - s^2 + i s a, i.e. the operator at lam = i s."""
        return ResolventService.assemble_operator(grid, damper, 1j * s)

    @staticmethod
    def solve(
        system: HelmholtzSystem, forcing: np.ndarray, tol: float | None = None
    ) -> tuple[ComplexArray, SolveOutcome]:
        tol = settings.solver_tol if tol is None else tol
        if tol <= 0:
            raise ResolventError(ErrorCode.PRECONDITION_VIOLATED, f"tol must be positive: {tol}")
        grid = system.grid
        if forcing.shape != grid.shape:
            raise ResolventError(
                ErrorCode.SHAPE_MISMATCH, f"forcing {forcing.shape} vs grid {grid.shape}"
            )
        rhs = forcing.ravel()[grid.interior_index].astype(np.complex128)
        flat = np.zeros(grid.kinds.size, dtype=np.complex128)
        if not np.any(rhs):
            outcome = SolveOutcome(x=rhs, residual=0.0, iterations=0, method=SolveMethod.DIRECT)
            return flat.reshape(grid.shape), outcome

        outcome = get_linear_solver(system.size).solve(system.matrix, rhs, tol)
        if outcome.residual > tol:
            raise ResolventError(
                ErrorCode.SOLVER_STAGNATED,
                f"residual {outcome.residual:.3e} above {tol:.1e} at lam={system.lam}",
                residual=outcome.residual,
            )
        flat[grid.interior_index] = outcome.x
        return flat.reshape(grid.shape), outcome

    @staticmethod
    def quadratic_identity(
        system: HelmholtzSystem, forcing: np.ndarray, w: ComplexArray
    ) -> complex:
        """||grad w||^2 + lam^2 ||w||^2 + lam sum a|w|^2 - <F, w>."""

        grid = system.grid
        volume = grid.node_volume
        mass = l2_norm_sq(w, grid.h)
        damped = volume * float(np.sum(system.damper * np.abs(w) ** 2))
        pairing = volume * complex(np.sum(forcing * np.conj(w)))
        lam = system.lam
        return gradient_norm_sq(w, grid.h) + lam**2 * mass + lam * damped - pairing

    @staticmethod
    def sample(
        system: HelmholtzSystem, forcing: FloatArray, tol: float | None = None
    ) -> ResolventSample:
        tol = settings.solver_tol if tol is None else tol
        s = system.s
        try:
            w, outcome = ResolventService.solve(system, forcing, tol)
        except ResolventError as e:
            if not _stagnated(e):
                raise
            logger.warning(f"Solve at s={s:.4g} failed: {e.detail}")
            return ResolventSample(s=s, converged=False, error=str(e))

        grid = system.grid
        mass = l2_norm_sq(w, grid.h)
        grad = gradient_norm_sq(w, grid.h)
        norm_f = math.sqrt(l2_norm_sq(forcing, grid.h))
        norm_w = math.sqrt(mass)
        defect = ResolventService.quadratic_identity(system, forcing, w)
        return ResolventSample(
            s=s,
            norm_w=norm_w,
            norm_gradw=math.sqrt(grad),
            norm_f=norm_f,
            h1_ratio=(grad + mass) / norm_f**2 if norm_f else None,
            hf_ratio=abs(s) * norm_w / norm_f if norm_f else None,
            residual=outcome.residual,
            method=outcome.method,
            iterations=outcome.iterations,
            identity_defect=abs(defect),
            identity_bound=10 * tol * norm_f * norm_w,
        )

    @staticmethod
    def sweep(
        grid: GridMask,
        damper: FloatArray,
        band: tuple[float, float],
        n_samples: int,
        forcing_for: Callable[[int], FloatArray],
        family: ForcingFamily = ForcingFamily.BUMP,
        tol: float | None = None,
        threads: int | None = None,
    ) -> SweepReport:
        """Solve at log-spaced s across the band; sups over converged samples."""

        s_min, s_max = band
        if not 0 < s_min < s_max or n_samples < 1:
            raise ResolventError(
                ErrorCode.PRECONDITION_VIOLATED, f"invalid band {band} or sample count {n_samples}"
            )
        s_values = np.geomspace(s_min, s_max, n_samples)

        def one(item: tuple[int, float]) -> ResolventSample:
            index, s = item
            system = ResolventService.assemble(grid, damper, float(s))
            return ResolventService.sample(system, forcing_for(index), tol)

        samples = run_tasks(one, list(enumerate(s_values)), threads)
        converged = [sample for sample in samples if sample.converged]
        h1 = [x.h1_ratio for x in converged if x.h1_ratio is not None]
        hf = [x.hf_ratio for x in converged if x.hf_ratio is not None]
        report = SweepReport(
            band=band,
            family=family,
            samples=samples,
            sup_h1_ratio=max(h1, default=None),
            sup_hf_ratio=max(hf, default=None),
            failures=len(samples) - len(converged),
            notes=[WEAKENING_NOTE],
        )
        logger.info(
            f"Sweep {band} done: {len(converged)}/{len(samples)} converged, "
            f"sup h1={report.sup_h1_ratio}, sup hf={report.sup_hf_ratio}"
        )
        return report

    @staticmethod
    def block_resolvent_apply(
        grid: GridMask,
        damper: FloatArray,
        lam: complex,
        f1: FloatArray,
        f2: FloatArray,
        tol: float | None = None,
    ) -> BlockResolvent:
        """(lam - B_a)^{-1}(f1, f2) through one scalar solve.

        U1 = R(lam)((lam + a) f1 + f2), U2 = lam U1 - f1, then the first-order
        system is checked on the returned pair.
        """
        tol = settings.solver_tol if tol is None else tol
        if lam.real < 0 or lam == 0:
            raise ResolventError(
                ErrorCode.PRECONDITION_VIOLATED, f"need Re(lam) >= 0 and lam != 0, got {lam}"
            )
        lam = complex(lam)
        combined = grid.apply_mask((lam + damper) * f1 + f2)
        system = ResolventService.assemble_operator(grid, damper, lam)
        u1, _ = ResolventService.solve(system, combined, tol)
        u2 = grid.apply_mask(lam * u1 - f1)

        r1 = grid.apply_mask(lam * u1 - u2 - f1)
        r2 = grid.apply_mask(-laplacian(u1, grid.h) + (lam + damper) * u2 - f2)
        data_norm = math.sqrt(l2_norm_sq(f1, grid.h) + l2_norm_sq(f2, grid.h))
        if data_norm == 0:
            return BlockResolvent(u1=u1, u2=u2, residual=0.0)
        residual = math.sqrt(l2_norm_sq(r1, grid.h) + l2_norm_sq(r2, grid.h)) / data_norm
        allowed = 10 * tol * max(1.0, math.sqrt(l2_norm_sq(combined, grid.h)) / data_norm)
        if residual > allowed:
            raise ResolventError(
                ErrorCode.SOLVER_STAGNATED,
                f"block residual {residual:.3e} above {allowed:.1e} at lam={lam}",
                residual=residual,
            )
        return BlockResolvent(u1=u1, u2=u2, residual=residual)

    @staticmethod
    def energy_norm(u1: ComplexArray, u2: ComplexArray, grid: GridMask) -> float:
        return math.sqrt(gradient_norm_sq(u1, grid.h) + l2_norm_sq(u2, grid.h))

    @staticmethod
    def low_freq_probe(
        grid: GridMask,
        damper: FloatArray,
        data: tuple[FloatArray, FloatArray],
        betas: list[float],
        s_values: list[float],
        chi_radius: float,
        tol: float | None = None,
        delta: float | None = None,
        threads: int | None = None,
    ) -> LowFreqReport:
        """Energy norm of chi (lam - B_a)^{-1} chi (f1, f2) along lam = beta + i s."""

        delta = settings.low_freq_delta if delta is None else delta
        if any(not 0 < beta <= delta for beta in betas):
            raise ResolventError(
                ErrorCode.PRECONDITION_VIOLATED, f"shifts {betas} must lie in (0, {delta}]"
            )
        chi = 1.0 - smooth_step(grid.radius, chi_radius, chi_radius + 1.0)
        f1, f2 = chi * data[0], chi * data[1]

        def one(item: tuple[float, float]) -> LowFreqSample:
            beta, s = item
            try:
                result = ResolventService.block_resolvent_apply(
                    grid, damper, complex(beta, s), f1, f2, tol
                )
            except ResolventError as e:
                if not _stagnated(e):
                    raise
                return LowFreqSample(beta=beta, s=s, converged=False, error=str(e))
            norm = ResolventService.energy_norm(chi * result.u1, chi * result.u2, grid)
            return LowFreqSample(beta=beta, s=s, energy_norm=norm, residual=result.residual)

        ordered = sorted(betas, reverse=True)
        items = [(beta, float(s)) for beta in ordered for s in s_values]
        samples = run_tasks(one, items, threads)

        maxima = []
        for beta in ordered:
            norms = [x.energy_norm for x in samples if x.beta == beta and x.converged]
            maxima.append((beta, max(norms, default=math.inf)))
        bounded = all(x.converged for x in samples) and all(
            nxt <= 2.0 * prev for (_, prev), (_, nxt) in zip(maxima[:-1], maxima[1:], strict=True)
        )
        logger.info(f"Low-frequency probe maxima {maxima}: bounded={bounded}")
        return LowFreqReport(samples=samples, maxima=maxima, bounded=bounded, chi_radius=chi_radius)

    @staticmethod
    def band_growth(
        samples: list[ResolventSample],
        low: tuple[float, float] = (5.0, 10.0),
        high: tuple[float, float] = (20.0, 40.0),
    ) -> float:
        """max hf_ratio over the high band divided by its max over the low band."""

        def band_max(band: tuple[float, float]) -> float:
            values = [
                x.hf_ratio
                for x in samples
                if x.converged and x.hf_ratio is not None and band[0] <= x.s <= band[1]
            ]
            if not values:
                raise ResolventError(
                    ErrorCode.PRECONDITION_VIOLATED, f"no converged samples in {band}"
                )
            return max(values)

        return band_max(high) / band_max(low)

    @staticmethod
    def box_doubling_check(
        spec: DomainSpec,
        damper: DamperSection,
        s: float,
        forcing_for: Callable[[DomainSpec, GridMask], FloatArray],
        tol: float | None = None,
    ) -> float:
        """Relative change of ||w|| when the box half-width doubles."""

        norms = []
        for current in (spec, spec.doubled()):
            grid = DomainService.build_grid(current)
            a = DomainService.sample_damper(damper, current, grid)
            w, _ = ResolventService.solve(
                ResolventService.assemble(grid, a, s), forcing_for(current, grid), tol
            )
            norms.append(math.sqrt(l2_norm_sq(w, grid.h)))
        change = abs(norms[1] - norms[0]) / norms[0]
        logger.info(f"Box doubling at s={s}: ||w|| {norms[0]:.6e} -> {norms[1]:.6e} ({change:.2e})")
        return change


def make_forcing(
    family: ForcingFamily,
    spec: DomainSpec,
    grid: GridMask,
    center: tuple[float, ...],
    width: float,
    seed: int = 0,
    index: int = 0,
    count: int = 3,
) -> FloatArray:
    """Right-hand side of the requested family, zero on Dirichlet nodes."""

    if family == ForcingFamily.BUMP:
        return grid.apply_mask(bump_field(grid, center, width))
    if family == ForcingFamily.SPREAD:
        origin = (0.0,) * grid.dimension
        return grid.apply_mask(bump_field(grid, origin, 0.8 * grid.r_box))

    rng = np.random.default_rng([seed, index])
    lo, hi = spec.r0 + width, spec.r1 - width
    field = grid.zeros()
    for _ in range(count):
        if lo <= hi:
            radius = rng.uniform(lo, hi)
            angle = rng.uniform(0, 2 * np.pi)
            if grid.dimension == 1:
                where = (radius * (1 if angle < np.pi else -1),)
            else:
                where = (radius * math.cos(angle), radius * math.sin(angle))
        else:
            where = center
        field += rng.uniform(0.5, 1.5) * bump_field(grid, where, width)
    return grid.apply_mask(field)


resolvent_service = ResolventService()


def assemble(grid: GridMask, damper: FloatArray, s: float) -> HelmholtzSystem:
    """Convenience function to build the reduced operator at frequency s."""
    return ResolventService.assemble(grid, damper, s)


def solve(
    system: HelmholtzSystem, forcing: np.ndarray, tol: float | None = None
) -> tuple[ComplexArray, SolveOutcome]:
    return ResolventService.solve(system, forcing, tol)


def block_resolvent_apply(
    grid: GridMask,
    damper: FloatArray,
    lam: complex,
    f1: FloatArray,
    f2: FloatArray,
    tol: float | None = None,
) -> BlockResolvent:
    return ResolventService.block_resolvent_apply(grid, damper, lam, f1, f2, tol)
