"""Finite-difference weights, step rules and Richardson helpers."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

EPS = np.finfo(float).eps


def fornberg_weights(x0: float, nodes: Sequence[float], m: int) -> np.ndarray:
    """Weights of the ``m``-th derivative at ``x0`` on arbitrary ``nodes`` (Fornberg 1988)."""
    x = np.asarray(nodes, dtype=float)
    n = len(x)
    if m >= n:
        raise ValueError(f"need more than {m} nodes for derivative order {m}")
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def central_offsets(npoints: int) -> np.ndarray:
    half = npoints // 2
    return np.arange(-half, half + 1, dtype=float)


def default_step(x: float, order: int) -> float:
    """Step for an ``order``-th derivative of second-order accuracy: eps^(1/(order+2))."""
    return EPS ** (1.0 / (order + 2)) * max(1.0, abs(x))


def derivative(
    f: Callable[[float], float],
    x: float,
    order: int,
    h: float | None = None,
    npoints: int | None = None,
    lower: float | None = None,
):
    """Finite-difference derivative of a scalar or array valued ``f``.

    Centered stencils by default; if ``lower`` is given and the stencil would
    cross it, a one-sided stencil anchored at ``lower`` is used instead.
    """
    if order == 0:
        return f(x)
    if npoints is None:
        npoints = order + 1 + (order + 1) % 2
    if h is None:
        h = default_step(x, order)
    offsets = central_offsets(npoints)
    if lower is not None and x + offsets[0] * h < lower:
        offsets = np.arange(npoints, dtype=float) + (lower - x) / h
        offsets = offsets - min(offsets[0], 0.0)
    w = fornberg_weights(0.0, offsets, order)
    vals = [np.asarray(f(x + o * h), dtype=float) for o in offsets]
    return sum(wi * v for wi, v in zip(w, vals)) / h**order


def richardson_slope(values: Sequence[float], ratio: float = 2.0) -> float:
    """Observed convergence order from three estimates at steps h, h/r, h/r^2."""
    d1 = abs(values[0] - values[1])
    d2 = abs(values[1] - values[2])
    if d1 == 0.0 or d2 == 0.0:
        return float("nan")
    return float(np.log(d1 / d2) / np.log(ratio))


def richardson_extrapolate(values: Sequence[float], p: int, ratio: float = 2.0) -> float:
    vals = [float(v) for v in values]
    for j in range(1, len(vals)):
        factor = ratio ** (p * j)
        for k in range(len(vals) - 1, j - 1, -1):
            vals[k] = (factor * vals[k] - vals[k - 1]) / (factor - 1.0)
    return vals[-1]
