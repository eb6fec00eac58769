"""Error hierarchy shared by all lab modules."""

from typing import Any

from .enums import ErrorCode


class LabError(Exception):
    """Base error with a code and the module that raised it."""

    module = "lab"

    def __init__(self, code: ErrorCode, detail: str, **context: Any):
        super().__init__(f"{self.module}: {code.value}: {detail}")
        self.code = code
        self.detail = detail
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        """Machine-readable form for the CLI error JSON."""
        payload: dict[str, Any] = {
            "module": self.module,
            "code": self.code.value,
            "detail": self.detail,
        }
        if self.context:
            payload["context"] = {key: _plain(value) for key, value in self.context.items()}
        return payload


class DomainError(LabError):
    module = "exterior-domain"


class RayError(LabError):
    module = "ray-gcc"


class SolverError(LabError):
    module = "wave-solver"


class MetricsError(LabError):
    module = "energy-metrics"


class ResolventError(LabError):
    module = "resolvent-lab"


class HarnessError(LabError):
    module = "cli-harness"


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)
