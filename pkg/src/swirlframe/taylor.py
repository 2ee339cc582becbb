"""Truncated Taylor series arithmetic.

A series of order ``K`` is a numpy array ``c`` of shape ``(K + 1, ...)`` holding
normalized coefficients, so that ``f(x0 + h) = sum_k c[k] h**k``.  Trailing
dimensions are carried elementwise (vector-valued series use shape ``(K+1, 3)``).
These helpers back the chain-rule derivatives taken along trajectories and
streamlines.
"""

from __future__ import annotations

from itertools import product
from math import factorial
from typing import Callable, Mapping, Sequence

import numpy as np


def constant(value, order: int) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    out = np.zeros((order + 1,) + value.shape)
    out[0] = value
    return out


def variable(x0: float, order: int) -> np.ndarray:
    """Series of the independent variable ``x0 + h``."""
    out = np.zeros(order + 1)
    out[0] = x0
    if order >= 1:
        out[1] = 1.0
    return out


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    order = min(len(a), len(b)) - 1
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((order + 1,) + shape)
    for k in range(order + 1):
        for i in range(k + 1):
            out[k] = out[k] + a[i] * b[k - i]
    return out


def div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    order = min(len(a), len(b)) - 1
    if np.any(b[0] == 0):
        raise ZeroDivisionError("series division by a series with zero constant term")
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    q = np.zeros((order + 1,) + shape)
    for k in range(order + 1):
        acc = a[k] + np.zeros(shape)
        for i in range(1, k + 1):
            acc = acc - b[i] * q[k - i]
        q[k] = acc / b[0]
    return q


def sqrt(a: np.ndarray) -> np.ndarray:
    if np.any(a[0] <= 0):
        raise ValueError("series square root needs a positive constant term")
    s = np.zeros_like(a, dtype=float)
    s[0] = np.sqrt(a[0])
    for k in range(1, len(a)):
        acc = a[k].copy() if np.ndim(a[k]) else a[k]
        for i in range(1, k):
            acc = acc - s[i] * s[k - i]
        s[k] = acc / (2.0 * s[0])
    return s


def compose(derivs: Sequence, a: np.ndarray) -> np.ndarray:
    """``f(a(h))`` given ``derivs[m] = f^(m)(a[0])``."""
    order = len(a) - 1
    delta = a.copy()
    delta[0] = 0.0
    out = constant(derivs[0], order) if np.ndim(derivs[0]) else constant(float(derivs[0]), order)
    power = constant(1.0, order)
    for m in range(1, min(order, len(derivs) - 1) + 1):
        power = mul(power, delta)
        out = out + power * (derivs[m] / factorial(m))
    return out


def sin_cos(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = len(a) - 1
    s0, c0 = np.sin(a[0]), np.cos(a[0])
    sin_d = [s0, c0, -s0, -c0] * (order // 4 + 1)
    cos_d = [c0, -s0, -c0, s0] * (order // 4 + 1)
    return compose(sin_d[: order + 1], a), compose(cos_d[: order + 1], a)


def deriv(a: np.ndarray) -> np.ndarray:
    """d/dh of a series; the result has one order less."""
    k = np.arange(1, len(a)).reshape((-1,) + (1,) * (a.ndim - 1))
    return a[1:] * k


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return mul(a, b).sum(axis=-1)


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    order = min(len(a), len(b)) - 1
    out = np.zeros((order + 1, 3))
    for k in range(order + 1):
        for i in range(k + 1):
            out[k] += np.cross(a[i], b[k - i])
    return out


def derivatives(a: np.ndarray) -> np.ndarray:
    """Convert normalized coefficients to plain derivatives ``f^(k)(x0)``."""
    fac = np.array([factorial(k) for k in range(len(a))], dtype=float)
    return a * fac.reshape((-1,) + (1,) * (a.ndim - 1))


def multi_indices(order: int, active: Sequence[bool] = (True, True, True)):
    """All (i, j, k) with total degree <= order over the active variables."""
    ranges = [range(order + 1) if on else range(1) for on in active]
    return [idx for idx in product(*ranges) if sum(idx) <= order]


def compose_multivariate(
    partials: Mapping[tuple[int, ...], float], deltas: Sequence[np.ndarray]
) -> np.ndarray:
    """Evaluate a multivariate Taylor polynomial along perturbation series.

    ``partials[(i, j, ...)]`` is the mixed partial derivative at the base point;
    ``deltas`` are series with zero constant term, one per variable.
    """
    order = len(deltas[0]) - 1
    powers = []
    for d in deltas:
        d = d.copy()
        d[0] = 0.0
        p = [constant(1.0, order)]
        for _ in range(order):
            p.append(mul(p[-1], d))
        powers.append(p)
    out = constant(0.0, order)
    for idx, value in partials.items():
        if sum(idx) > order or value == 0.0:
            continue
        term = constant(value / np.prod([factorial(i) for i in idx]), order)
        for var, i in enumerate(idx):
            if i:
                term = mul(term, powers[var][i])
        out = out + term
    return out


def solve_ode_series(
    rhs: Callable[[list[np.ndarray], np.ndarray], list[np.ndarray]],
    y0: Sequence[float],
    x0: float,
    order: int,
) -> list[np.ndarray]:
    """Taylor-series solution of ``y' = rhs(y, x)`` about ``x0`` (Picard order raising).

    ``rhs`` receives the current state series and the series of ``x`` and must
    return one series per state component, correct through the input's order.
    """
    ys = [constant(v, 0) for v in y0]
    for k in range(order):
        ext = [np.concatenate([y, np.zeros(1)]) for y in ys]
        f = rhs([y[: k + 1] for y in ext], variable(x0, k))
        for y, fk in zip(ext, f):
            y[k + 1] = fk[k] / (k + 1)
        ys = ext
    return ys
