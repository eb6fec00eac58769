"""Node, damper, data and status enums."""

from enum import Enum, IntEnum


class NodeKind(IntEnum):
    """Per-node grid classification."""

    INTERIOR = 0
    OBSTACLE = 1
    OUTER_BOUNDARY = 2


class DamperKind(str, Enum):
    """Damper profiles."""

    CONSTANT_ONE = "CONSTANT_ONE"
    EXTERIOR_SMOOTH = "EXTERIOR_SMOOTH"
    EXTERIOR_WITH_HOLE = "EXTERIOR_WITH_HOLE"
    TABLE = "TABLE"


class BumpKind(str, Enum):
    """Which initial slot carries the bump."""

    BUMP_U0 = "BUMP_U0"
    BUMP_U1 = "BUMP_U1"
    BUMP_BOTH = "BUMP_BOTH"


class ForcingFamily(str, Enum):
    """Right-hand sides used by resolvent sweeps."""

    BUMP = "BUMP"
    SPREAD = "SPREAD"
    RANDOM_BUMPS = "RANDOM_BUMPS"


class SolveMethod(str, Enum):
    """Linear solver backends."""

    DIRECT = "DIRECT"
    GMRES = "GMRES"


class CheckStatus(str, Enum):
    """Verify row outcomes."""

    PASSED = "PASSED"
    FAILED = "FAILED"
    SKIPPED = "SKIPPED"


class ErrorCode(str, Enum):
    """Machine-readable error codes."""

    SPEC_INVALID = "SPEC_INVALID"
    GEOMETRY_DEGENERATE = "GEOMETRY_DEGENERATE"
    PRECONDITION_VIOLATED = "PRECONDITION_VIOLATED"
    BLOWUP = "BLOWUP"
    SHAPE_MISMATCH = "SHAPE_MISMATCH"
    RADIUS_OUT_OF_RANGE = "RADIUS_OUT_OF_RANGE"
    NONPOSITIVE_DATA = "NONPOSITIVE_DATA"
    HYPOTHESIS_VIOLATED = "HYPOTHESIS_VIOLATED"
    SOLVER_STAGNATED = "SOLVER_STAGNATED"
    PARSE_ERROR = "PARSE_ERROR"
    VALIDATION_ERROR = "VALIDATION_ERROR"
    PLOT_ERROR = "PLOT_ERROR"
