"""Finite-difference stencils on grid-shaped arrays.

All operators leave the outermost layer untouched (zero), which is where the
Dirichlet boundary lives.
"""

import numpy as np
import numpy.typing as npt


def _inner(ndim: int) -> tuple[slice, ...]:
    return (slice(1, -1),) * ndim


def _shifted(ndim: int, axis: int, offset: int) -> tuple[slice, ...]:
    index = list(_inner(ndim))
    index[axis] = slice(1 + offset, -1 + offset if offset < 1 else None)
    return tuple(index)


def laplacian(u: npt.NDArray, h: float) -> npt.NDArray:
    """Standard (2N+1)-point Laplacian; zero on the outer layer."""

    out = np.zeros_like(u)
    inner = _inner(u.ndim)
    acc = -2.0 * u.ndim * u[inner]
    for axis in range(u.ndim):
        acc = acc + u[_shifted(u.ndim, axis, 1)] + u[_shifted(u.ndim, axis, -1)]
    out[inner] = acc / h**2
    return out


def forward_differences(u: npt.NDArray, h: float) -> list[npt.NDArray]:
    """Per-axis forward differences (u[i+1] - u[i]) / h, one entry per edge."""

    return [np.diff(u, axis=axis) / h for axis in range(u.ndim)]


def edge_products(u: npt.NDArray, v: npt.NDArray, h: float) -> npt.NDArray:
    """Sum over axes of forward-gradient products, attributed to each edge's base node."""

    out = np.zeros(u.shape, dtype=np.result_type(u, v))
    for axis, (du, dv) in enumerate(
        zip(forward_differences(u, h), forward_differences(v, h), strict=True)
    ):
        index = [slice(None)] * u.ndim
        index[axis] = slice(0, -1)
        out[tuple(index)] += du * dv
    return out


def centered_gradient(u: npt.NDArray, h: float) -> list[npt.NDArray]:
    """Centered differences per axis; zero on the outer layer."""

    gradients = []
    inner = _inner(u.ndim)
    for axis in range(u.ndim):
        g = np.zeros_like(u)
        g[inner] = (u[_shifted(u.ndim, axis, 1)] - u[_shifted(u.ndim, axis, -1)]) / (2 * h)
        gradients.append(g)
    return gradients


def gradient_norm_sq(u: npt.NDArray, h: float) -> float:
    """h^N * sum over all edges of |forward difference|^2."""

    total = sum(float(np.sum(np.abs(d) ** 2)) for d in forward_differences(u, h))
    return h**u.ndim * total


def l2_norm_sq(u: npt.NDArray, h: float) -> float:
    return h**u.ndim * float(np.sum(np.abs(u) ** 2))
