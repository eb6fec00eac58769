"""Adaptive Simpson quadrature for scalar integrands."""

from collections.abc import Callable


def integrate_adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> tuple[float, float]:
    """Adaptive Simpson's rule with absolute tolerance `tol`.

    Returns (integral, error estimate). Subintervals halve the tolerance, and
    accepted panels get the Richardson correction.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        result, error = integrate_adaptive_simpson(f, b, a, tol, max_depth)
        return -result, error

    def _simpson(fa: float, fm: float, fb: float, half: float) -> float:
        return half / 3.0 * (fa + 4.0 * fm + fb)

    def _adaptive(
        lo: float, hi: float, fa: float, fm: float, fb: float, whole: float, depth: int, tol: float
    ) -> tuple[float, float]:
        mid = (lo + hi) / 2.0
        half = (hi - lo) / 2.0
        flm = f((lo + mid) / 2.0)
        frm = f((mid + hi) / 2.0)

        left = _simpson(fa, flm, fm, half / 2.0)
        right = _simpson(fm, frm, fb, half / 2.0)
        error = (left + right - whole) / 15.0

        if depth >= max_depth or abs(error) < tol:
            return left + right + error, abs(error)

        left_result, left_error = _adaptive(lo, mid, fa, flm, fm, left, depth + 1, tol / 2.0)
        right_result, right_error = _adaptive(mid, hi, fm, frm, fb, right, depth + 1, tol / 2.0)
        return left_result + right_result, left_error + right_error

    fa, fb = f(a), f(b)
    fm = f((a + b) / 2.0)
    whole = _simpson(fa, fm, fb, (b - a) / 2.0)
    return _adaptive(a, b, fa, fm, fb, whole, 0, tol)


def integrate_relative(
    f: Callable[[float], float],
    a: float,
    b: float,
    rtol: float,
    breakpoints: tuple[float, ...] = (),
) -> float:
    """Integrate to a relative tolerance, splitting at the given breakpoints.

    The absolute tolerance is rtol times a coarse composite-Simpson estimate.
    """
    edges = [a, *sorted(p for p in breakpoints if a < p < b), b]
    if a == b:
        return 0.0

    coarse = 0.0
    panels = 64
    for lo, hi in zip(edges[:-1], edges[1:], strict=True):
        width = (hi - lo) / panels
        for k in range(panels):
            x0 = lo + k * width
            coarse += _panel(f, x0, x0 + width)
    tol = rtol * abs(coarse) if coarse else rtol

    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:], strict=True):
        piece, _ = integrate_adaptive_simpson(f, lo, hi, tol / (len(edges) - 1))
        total += piece
    return total


def _panel(f: Callable[[float], float], lo: float, hi: float) -> float:
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f((lo + hi) / 2.0) + f(hi))
