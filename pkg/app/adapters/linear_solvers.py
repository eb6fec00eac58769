"""Sparse linear solver interface and backends for the complex Helmholtz systems."""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy import sparse
from scipy.sparse import linalg as spla
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from ..config import settings
from ..enums import ErrorCode, SolveMethod
from ..errors import ResolventError


@dataclass(frozen=True)
class SolveOutcome:
    x: np.ndarray
    residual: float
    iterations: int
    method: SolveMethod


class KrylovNotConverged(Exception):
    """Raised inside a GMRES attempt so tenacity can retry with a longer restart."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(f"GMRES stopped at relative residual {residual:.3e}")
        self.residual = residual
        self.iterations = iterations


def relative_residual(matrix: sparse.spmatrix, x: np.ndarray, rhs: np.ndarray) -> float:
    norm = float(np.linalg.norm(rhs))
    if norm == 0:
        return float(np.linalg.norm(matrix @ x))
    return float(np.linalg.norm(matrix @ x - rhs)) / norm


class LinearSolverInterface(ABC):
    """Interface for solving A x = b with a relative residual target."""

    @abstractmethod
    def solve(self, matrix: sparse.spmatrix, rhs: np.ndarray, tol: float) -> SolveOutcome:
        """Solve and report the achieved relative residual."""
        pass


class DirectSolver(LinearSolverInterface):
    """Sparse LU factorization (SuperLU)."""

    def solve(self, matrix: sparse.spmatrix, rhs: np.ndarray, tol: float) -> SolveOutcome:
        factor = spla.splu(sparse.csc_matrix(matrix))
        x = factor.solve(np.asarray(rhs, dtype=np.complex128))
        return SolveOutcome(
            x=x,
            residual=relative_residual(matrix, x, rhs),
            iterations=1,
            method=SolveMethod.DIRECT,
        )


class KrylovSolver(LinearSolverInterface):
    """Restarted GMRES with an incomplete-LU preconditioner."""

    def __init__(self, restart: int | None = None, max_iter: int | None = None):
        self.restart = restart or settings.krylov_restart
        self.max_iter = max_iter or settings.krylov_max_iter

    def _preconditioner(self, matrix: sparse.spmatrix) -> spla.LinearOperator:
        try:
            ilu = spla.spilu(sparse.csc_matrix(matrix), drop_tol=1e-5, fill_factor=10)
            return spla.LinearOperator(matrix.shape, ilu.solve, dtype=np.complex128)
        except RuntimeError as e:
            logger.warning(f"ILU failed ({e}); falling back to a diagonal preconditioner")
            inverse_diagonal = 1.0 / matrix.diagonal()
            return spla.LinearOperator(
                matrix.shape, lambda v: inverse_diagonal * v, dtype=np.complex128
            )

    def _attempt(
        self,
        matrix: sparse.spmatrix,
        rhs: np.ndarray,
        tol: float,
        restart: int,
        preconditioner: spla.LinearOperator,
    ) -> SolveOutcome:
        counter = {"n": 0}

        def count(_residual) -> None:
            counter["n"] += 1

        x, _ = spla.gmres(
            matrix,
            rhs,
            rtol=tol,
            atol=0.0,
            restart=restart,
            maxiter=self.max_iter,
            M=preconditioner,
            callback=count,
            callback_type="pr_norm",
        )
        residual = relative_residual(matrix, x, rhs)
        if residual > tol:
            raise KrylovNotConverged(residual, counter["n"])
        return SolveOutcome(
            x=x, residual=residual, iterations=counter["n"], method=SolveMethod.GMRES
        )

    def solve(self, matrix: sparse.spmatrix, rhs: np.ndarray, tol: float) -> SolveOutcome:
        rhs = np.asarray(rhs, dtype=np.complex128)
        preconditioner = self._preconditioner(matrix)
        retrying = Retrying(
            stop=stop_after_attempt(settings.krylov_attempts),
            retry=retry_if_exception_type(KrylovNotConverged),
        )
        try:
            for attempt in retrying:
                number = attempt.retry_state.attempt_number
                if number > 1:
                    logger.warning(f"GMRES retry {number} with restart {self.restart * number}")
                with attempt:
                    return self._attempt(
                        matrix, rhs, tol, self.restart * number, preconditioner
                    )
        except RetryError as e:
            failure = e.last_attempt.exception()
            raise ResolventError(
                ErrorCode.SOLVER_STAGNATED,
                f"GMRES stagnated after {settings.krylov_attempts} attempts: {failure}",
                residual=getattr(failure, "residual", None),
            ) from e
        raise ResolventError(ErrorCode.SOLVER_STAGNATED, "GMRES made no attempt")


def get_linear_solver(unknowns: int) -> LinearSolverInterface:
    """Factory: direct LU below the size threshold, GMRES above it."""
    if unknowns < settings.direct_solver_max_unknowns:
        return DirectSolver()
    return KrylovSolver()
