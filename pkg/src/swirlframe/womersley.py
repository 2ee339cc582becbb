"""Oscillatory pipe flow driven by a harmonic pressure gradient."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError
from .fields import AxisymmetricField, womersley_number

ALPHA_MAX = 20.0
SERIES_TOL = 1e-16


@dataclass(frozen=True)
class WomersleyParams:
    """Pipe radius R, viscosity nu, angular frequency N, oscillatory and steady
    pressure-gradient magnitudes p_o and p_s, and pipe length ell."""

    R: float = 1.0
    nu: float = 1.0
    N: float = 1.0
    p_o: float = 1.0
    ell: float = 1.0
    p_s: float = 1.0

    def __post_init__(self):
        for name in ("R", "nu", "N", "p_o", "ell", "p_s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise DomainError(f"Womersley parameter {name} must be positive and finite, got {v!r}")

    @property
    def alpha(self) -> float:
        return womersley_number(self.R, self.N, self.nu)


def bessel_series(alpha: float, R: float, tol: float = SERIES_TOL) -> np.ndarray:
    """Coefficients c_m with J0(i^{3/2} alpha r / R) = sum_m c_m r^(2m).

    Terms are added until the largest term at r = R drops below ``tol`` times
    the running sum.
    """
    if alpha > ALPHA_MAX:
        raise NumericError(f"Womersley number {alpha!r} exceeds the validated bound {ALPHA_MAX}")
    # (i^{3/2} alpha / R)^2 = -i alpha^2 / R^2, so -x^2/4 = i alpha^2 r^2 / (4 R^2)
    ratio = 1j * alpha**2 / (4.0 * R**2)
    coeffs = [1.0 + 0j]
    total = 1.0 + 0j
    m = 0
    while True:
        m += 1
        c = coeffs[-1] * ratio / (m * m)
        coeffs.append(c)
        term = c * R ** (2 * m)
        total += term
        if abs(term) <= tol * abs(total) and m > 2:
            break
        if m > 500:
            raise NumericError("Bessel series did not converge")
    return np.array(coeffs)


def _series_derivative(coeffs: np.ndarray, r: float, i: int) -> complex:
    """i-th derivative in r of sum_m c_m r^(2m)."""
    out = 0j
    for m, c in enumerate(coeffs):
        p = 2 * m
        if p < i:
            continue
        fall = math.prod(range(p - i + 1, p + 1))
        out += c * fall * r ** (p - i)
    return out


class WomersleyField(AxisymmetricField):
    """Axial velocity Re{(p_o/(iN)) [1 - J0(k r)/J0(k R)] e^{iNt}}, k = i^{3/2} alpha / R.

    With ``include_steady`` the Poiseuille part p_s (R^2 - r^2)/(4 nu ell) is added.
    """

    def __init__(self, params: WomersleyParams, include_steady: bool = False):
        super().__init__(
            name="womersley",
            params=dict(R=params.R, nu=params.nu, N=params.N, p_o=params.p_o, ell=params.ell,
                        p_s=params.p_s, include_steady=include_steady),
            r_max=params.R,
        )
        self.wp = params
        self.include_steady = include_steady
        self.coeffs = bessel_series(params.alpha, params.R)
        self._edge = _series_derivative(self.coeffs, params.R, 0)
        self._amp = params.p_o / (1j * params.N)

    def complex_amplitude(self, r: float, i: int = 0) -> complex:
        """r-derivative of order i of the complex profile U(r), u = Re(U e^{iNt})."""
        base = 1.0 if i == 0 else 0.0
        return self._amp * (base - _series_derivative(self.coeffs, r, i) / self._edge)

    def axial(self, r: float, t: float, i: int = 0, k: int = 0) -> float:
        N = self.wp.N
        val = (self.complex_amplitude(r, i) * (1j * N) ** k * cmath.exp(1j * N * t)).real
        if self.include_steady and k == 0:
            p = self.wp
            steady = p.p_s / (4 * p.nu * p.ell)
            val += steady * ((p.R**2 - r * r) if i == 0 else (-2 * r if i == 1 else (-2.0 if i == 2 else 0.0)))
        return float(val)

    def _raw_partials(self, keys, r, z, t):
        return np.array([self.axial(r, t, i, k) if (c == 2 and j == 0) else 0.0 for c, i, j, k in keys])


def womersley_field(params: WomersleyParams, include_steady: bool = False) -> WomersleyField:
    return WomersleyField(params, include_steady)


def momentum_residual(field: WomersleyField, r: float, t: float) -> float:
    """d_t u - nu (u_rr + u_r / r) - forcing, relative to p_o.

    The forcing is p_o cos(N t), plus p_s / ell when the steady part is included.
    """
    p = field.wp
    u_t = field.axial(r, t, 0, 1)
    u_r = field.axial(r, t, 1, 0)
    u_rr = field.axial(r, t, 2, 0)
    lap = 2.0 * u_rr if r == 0 else u_rr + u_r / r
    forcing = p.p_o * math.cos(p.N * t) + (p.p_s / p.ell if field.include_steady else 0.0)
    return (u_t - p.nu * lap - forcing) / p.p_o
