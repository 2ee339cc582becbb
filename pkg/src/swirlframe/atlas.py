"""Fixed-time streamline maps, their inverse, laminar rates and swirl transport.

A streamline at time t is traced in the axial coordinate z from the inflow
station ``z_in`` where it sits at radius ``r0``.  Its radius R(r0, z) carries
the variational states dR/dr0, d2R/dr0^2 and d3R/dr0^3 so that the radial
family of partials needs no differencing across streamlines.

Jets are dicts keyed ``(i, j)``: ``d^i/dr0^i d^j/dz^j`` of R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp

from . import stencils, taylor
from .errors import DomainError, RangeError, StructuralError, UnilateralViolation
from .fields import SLOPE_RADIAL, SLOPE_SWIRL, AxisymmetricField, InflowProfile
from .trajectory import Trajectory, write_csv

DEFAULT_Z_IN = -20.0
INVERSION_TOL = 1e-12

_RHS_KEYS = (
    (SLOPE_RADIAL, 0, 0, 0),
    (SLOPE_RADIAL, 1, 0, 0),
    (SLOPE_RADIAL, 2, 0, 0),
    (SLOPE_RADIAL, 3, 0, 0),
    (SLOPE_SWIRL, 0, 0, 0),
    (2, 0, 0, 0),
)
_JET_KEYS = tuple((SLOPE_RADIAL, i, j, 0) for i, j in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)))


def default_z_in(field: AxisymmetricField) -> float:
    return float(field.params.get("z_in", DEFAULT_Z_IN))


@dataclass
class Streamline:
    """One fixed-time streamline R(z), Theta(z) with its radial variations."""

    field: AxisymmetricField
    r0: float
    t: float
    z_in: float
    z_end: float
    sol: object = dc_field(repr=False)

    def state(self, z: float) -> np.ndarray:
        """(R, Theta, dR/dr0, d2R/dr0^2, d3R/dr0^3) at station z."""
        if not self.z_in - 1e-12 <= z <= self.z_end + 1e-12:
            raise DomainError(f"z = {z!r} outside the traced range [{self.z_in!r}, {self.z_end!r}]")
        if z == self.z_in:
            return np.array([self.r0, 0.0, 1.0, 0.0, 0.0])
        return np.asarray(self.sol(z), dtype=float)

    def radius(self, z: float) -> float:
        return float(self.state(z)[0])

    def theta(self, z: float) -> float:
        return float(self.state(z)[1])

    def jet(self, z: float) -> dict:
        """All partials of R(r0, z) with i + j <= 3."""
        R, _, R1, R2, R3 = self.state(z)
        f, f_r, f_z, f_rr, f_rz, f_zz = self.field.map_partials(_JET_KEYS, R, z, self.t)
        return {
            (0, 0): R,
            (1, 0): R1,
            (2, 0): R2,
            (3, 0): R3,
            (0, 1): f,
            (0, 2): f_r * f + f_z,
            (0, 3): f_rr * f * f + f_r * f_r * f + 2.0 * f_rz * f + f_r * f_z + f_zz,
            (1, 1): f_r * R1,
            (2, 1): f_rr * R1 * R1 + f_r * R2,
            (1, 2): (f_rr * f + f_rz + f_r * f_r) * R1,
        }


def trace_streamline(
    field: AxisymmetricField,
    r0: float,
    t: float,
    z_span: Sequence[float],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> Streamline:
    """Integrate dR/dz = v_r/v_z and dTheta/dz = v_theta/(R v_z) with the radial variations."""
    z_in, z_end = (float(v) for v in z_span)
    if not 0.0 < r0 < field.r_max:
        raise DomainError(f"inflow radius {r0!r} must lie in (0, r_max = {field.r_max!r})")
    if not z_end >= z_in:
        raise DomainError(f"z_span must be increasing, got {tuple(z_span)}")

    def rhs(z, y):
        R, _, R1, R2, R3 = y
        f, f_r, f_rr, f_rrr, swirl, vz = field.map_partials(_RHS_KEYS, R, z, t)
        if not vz > 0:
            raise UnilateralViolation(f"v_z = {vz!r} <= 0 at r = {R!r}, z = {z!r}, t = {t!r}")
        return [
            f,
            swirl / R,
            f_r * R1,
            f_r * R2 + f_rr * R1 * R1,
            f_r * R3 + 3.0 * f_rr * R1 * R2 + f_rrr * R1**3,
        ]

    y0 = [float(r0), 0.0, 1.0, 0.0, 0.0]
    if z_end == z_in:
        return Streamline(field, float(r0), float(t), z_in, z_end, lambda z: np.array(y0))
    sol = solve_ivp(rhs, (z_in, z_end), y0, method="RK45", rtol=rel_tol, atol=abs_tol, dense_output=True)
    if sol.status != 0:
        raise StructuralError(f"streamline from r0 = {r0!r} failed: {sol.message}")
    return Streamline(field, float(r0), float(t), z_in, z_end, sol.sol)


def inverse_jet(jet: dict, order: int = 3) -> dict:
    """Pure partials of the inverse map r -> r0 from the jet of R at the matching point.

    Keys ``(i, 0)`` are d^i r0 / dr^i at fixed z and ``(0, j)`` are d^j r0 / dz^j
    at fixed r.  Solved order by order from R(r0 + q(h), z) = r + h and
    R(r0 + q(h), z + h) = r.
    """
    A = jet[(1, 0)]
    if not A > 0:
        raise StructuralError(f"dR/dr0 = {A!r} is not positive; streamlines cross")
    out = {}
    h = taylor.variable(0.0, order)
    zero = taylor.constant(0.0, order)
    for direction in ("r", "z"):
        q = np.zeros(order + 1)
        for k in range(1, order + 1):
            dz = h if direction == "z" else zero
            S = taylor.compose_multivariate(jet, (q, dz))
            target = h[k] if direction == "r" else 0.0
            q[k] = (target - S[k]) / A
        d = taylor.derivatives(q)
        for k in range(1, order + 1):
            out[(k, 0) if direction == "r" else (0, k)] = float(d[k])
    return out


@dataclass
class InverseResult:
    """r0 = R^{-1}(r, z) with pure partials of the inverse map."""

    r0: float
    r: float
    z: float
    residual: float
    partials: dict
    iterations: int


def _solve_inflow_radius(trace, r: float, z: float, guess: float, lo: float, hi: float, max_iter: int = 60):
    """Safeguarded Newton for R(r0, z) = r inside the bracket [lo, hi]."""
    x = min(max(guess, lo), hi)
    for it in range(1, max_iter + 1):
        sl = trace(x)
        R, _, R1, _, _ = sl.state(z)
        resid = R - r
        if resid == 0.0:
            return x, sl, resid, it
        if resid < 0:
            lo = x
        else:
            hi = x
        step = resid / R1 if R1 > 0 else math.inf
        if abs(step) <= INVERSION_TOL:
            return x, sl, resid, it
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if hi - lo <= INVERSION_TOL:
            x_new = 0.5 * (lo + hi)
            return x_new, trace(x_new), resid, it
        x = x_new
    raise StructuralError(f"inversion at r = {r!r}, z = {z!r} did not converge")


class StreamlineMap:
    """R(r0, z, t) at fixed t over a grid of inflow radii and axial stations.

    Grid streamlines are traced at construction; other inflow radii are traced
    on demand and cached.
    """

    def __init__(
        self,
        field: AxisymmetricField,
        t: float,
        r0_grid: Sequence[float],
        z_grid: Sequence[float],
        z_in: float | None = None,
        rel_tol: float = 1e-10,
        abs_tol: float = 1e-12,
    ):
        self.field = field
        self.t = float(t)
        self.r0_grid = np.array(sorted(float(v) for v in r0_grid))
        self.z_grid = np.array(sorted(float(v) for v in z_grid))
        if len(self.r0_grid) < 2:
            raise DomainError("the inflow-radius grid needs at least two values")
        self.z_in = default_z_in(field) if z_in is None else float(z_in)
        if self.z_grid[0] < self.z_in:
            raise DomainError(f"axial grid starts at {self.z_grid[0]!r}, upstream of z_in = {self.z_in!r}")
        self.z_end = float(self.z_grid[-1])
        self.rel_tol, self.abs_tol = rel_tol, abs_tol
        self._cache: dict[float, Streamline] = {}
        self.streamlines = [self.streamline(r0) for r0 in self.r0_grid]
        self._check_monotone()

    def streamline(self, r0: float) -> Streamline:
        r0 = float(r0)
        sl = self._cache.get(r0)
        if sl is None:
            sl = trace_streamline(self.field, r0, self.t, (self.z_in, self.z_end), self.rel_tol, self.abs_tol)
            self._cache[r0] = sl
        return sl

    def _check_monotone(self) -> None:
        for z in self.z_grid:
            states = np.array([s.state(z) for s in self.streamlines])
            bad = np.nonzero(states[:, 2] <= 0)[0]
            if len(bad):
                raise StructuralError(f"dR/dr0 <= 0 at r0 = {self.r0_grid[bad[0]]!r}, z = {z!r}: streamlines cross")
            if np.any(np.diff(states[:, 0]) <= 0):
                raise StructuralError(f"radii not increasing in r0 at z = {z!r}: streamlines cross")

    def jet(self, r0: float, z: float) -> dict:
        return self.streamline(r0).jet(z)

    def radius(self, r0: float, z: float) -> float:
        return self.streamline(r0).radius(z)

    def invert(self, r: float, z: float) -> InverseResult:
        """r0 with R(r0, z) = r: bracket on the grid, Hermite guess, safeguarded Newton."""
        states = np.array([s.state(z) for s in self.streamlines])
        radii, slopes = states[:, 0], states[:, 2]
        if not radii[0] <= r <= radii[-1]:
            raise RangeError(f"r = {r!r} outside the mapped range [{radii[0]!r}, {radii[-1]!r}] at z = {z!r}")
        k = int(np.clip(np.searchsorted(radii, r) - 1, 0, len(radii) - 2))
        lo, hi = self.r0_grid[k], self.r0_grid[k + 1]
        # cubic Hermite of r0 as a function of R
        h = radii[k + 1] - radii[k]
        s = (r - radii[k]) / h
        h00, h10, h01, h11 = 2 * s**3 - 3 * s**2 + 1, s**3 - 2 * s**2 + s, -2 * s**3 + 3 * s**2, s**3 - s**2
        guess = h00 * lo + h10 * h / slopes[k] + h01 * hi + h11 * h / slopes[k + 1]
        x, sl, resid, it = _solve_inflow_radius(self.streamline, r, z, guess, lo, hi)
        return InverseResult(x, r, z, resid, inverse_jet(sl.jet(z)), it)

    def grid_rows(self) -> list[list[float]]:
        rows = []
        for r0, sl in zip(self.r0_grid, self.streamlines):
            for z in self.z_grid:
                j = sl.jet(z)
                rows.append([r0, z, j[(0, 0)], j[(1, 0)], j[(2, 0)], j[(3, 0)], j[(0, 1)], j[(0, 2)], j[(0, 3)],
                             j[(1, 1)], sl.theta(z)])
        return rows

    def to_csv(self, path) -> None:
        write_csv(path, MAP_COLUMNS, self.grid_rows(), f"streamline map at t = {self.t!r}")

    def fd_radial_partials(self, r0: float, z: float, h: float = 1e-3) -> np.ndarray:
        """d^k R / dr0^k (k = 1..3) by 7-point differences across neighbouring streamlines."""
        f = lambda x: self.streamline(x).radius(z)
        return np.array([stencils.derivative(f, r0, k, h=h, npoints=7) for k in (1, 2, 3)])


MAP_COLUMNS = ("r0", "z", "R", "dR_dr0", "d2R_dr0", "d3R_dr0", "dR_dz", "d2R_dz", "d3R_dz", "d2R_dr0dz", "Theta")


def build_streamline_map(field, t, r0_grid, z_grid, z_in=None, rel_tol=1e-10, abs_tol=1e-12) -> StreamlineMap:
    return StreamlineMap(field, t, r0_grid, z_grid, z_in, rel_tol, abs_tol)


def invert_radial_map(smap: StreamlineMap, r: float, z: float) -> InverseResult:
    return smap.invert(r, z)


# -- inflow propagation and reconstruction ------------------------------------------


@dataclass
class InflowPropagation:
    """rho = r0 / (R dR/dr0) with its first two partials in z and r0."""

    rho: float
    d_z: float
    d_zz: float
    d_r0: float
    d_r0r0: float


def inflow_propagation(smap: StreamlineMap, r0: float, z: float) -> InflowPropagation:
    j = smap.jet(r0, z)
    if j[(0, 0)] <= smap.field.r_min:
        raise DomainError(f"streamline radius {j[(0, 0)]!r} is below the axis floor")
    # along z at fixed r0
    R_z = np.array([j[(0, 0)], j[(0, 1)], j[(0, 2)] / 2.0])
    A_z = np.array([j[(1, 0)], j[(1, 1)], j[(1, 2)] / 2.0])
    rho_z = taylor.derivatives(taylor.div(taylor.constant(r0, 2), taylor.mul(A_z, R_z)))
    # along r0 at fixed z
    R_r = np.array([j[(0, 0)], j[(1, 0)], j[(2, 0)] / 2.0])
    A_r = np.array([j[(1, 0)], j[(2, 0)], j[(3, 0)] / 2.0])
    rho_r = taylor.derivatives(taylor.div(taylor.variable(r0, 2), taylor.mul(A_r, R_r)))
    return InflowPropagation(float(rho_z[0]), float(rho_z[1]), float(rho_z[2]), float(rho_r[1]), float(rho_r[2]))


def reconstruct_velocity(smap: StreamlineMap, g: InflowProfile, r: float, z: float) -> tuple[float, float]:
    """(v_z, v_r) from v_z = rho g(t) and v_r = dR/dz v_z at the inverse-mapped radius."""
    inv = smap.invert(r, z)
    rho = inflow_propagation(smap, inv.r0, z).rho
    vz = rho * g(smap.t)
    vr = smap.jet(inv.r0, z)[(0, 1)] * vz
    return float(vz), float(vr)


def annulus_flux(field: AxisymmetricField, t: float, z: float, r_lo: float, r_hi: float) -> float:
    """2 pi * integral of v_z r dr over [r_lo, r_hi] at station z."""
    val, _ = quad(lambda r: field.partial(2, 0, 0, 0, r, z, t) * r, r_lo, r_hi, epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * math.pi * val


@dataclass
class FluxCheck:
    flux_inflow: float
    flux_station: float

    @property
    def relative_error(self) -> float:
        return abs(self.flux_station - self.flux_inflow) / max(abs(self.flux_inflow), 1e-300)


def flux_conservation(smap: StreamlineMap, r0: float, eps: float, z: float) -> FluxCheck:
    """Flux between the streamlines from r0 and r0 + eps, at the inflow and at z."""
    f_in = annulus_flux(smap.field, smap.t, smap.z_in, r0, r0 + eps)
    f_z = annulus_flux(smap.field, smap.t, z, smap.radius(r0, z), smap.radius(r0 + eps, z))
    return FluxCheck(f_in, f_z)


# -- laminar rates -------------------------------------------------------------------

LX_TERMS = (
    "dR_dr0", "d2R_dr0", "d3R_dr0", "dR_dz", "d2R_dz", "d3R_dz",
    "dRinv_dr", "d2Rinv_dr", "d3Rinv_dr", "dRinv_dz", "d2Rinv_dz", "d3Rinv_dz",
)
LT_TERMS = ("dt_Rinv", "dt_dR_dr0", "dt_dR_dz")


@dataclass
class LaminarRates:
    """Laminar-profile rates with their absolute-value breakdown."""

    r0: float
    z: float
    L_x: float
    breakdown: dict
    L_t: float | None = None
    L_t_half: float | None = None
    time_breakdown: dict | None = None
    dt: float | None = None

    @property
    def richardson_L_t(self) -> float | None:
        if self.L_t is None or self.L_t_half is None:
            return None
        return (4.0 * self.L_t_half - self.L_t) / 3.0


def laminar_rate_x(smap: StreamlineMap, r0: float, z: float) -> LaminarRates:
    """Sum over orders 1..3 of |d^k R| and |d^k R^{-1}| in both directions (no mixed partials)."""
    return _rates_from_jet(r0, z, smap.jet(r0, z))


def _rates_from_jet(r0: float, z: float, j: dict) -> LaminarRates:
    inv = inverse_jet(j)
    vals = [j[(1, 0)], j[(2, 0)], j[(3, 0)], j[(0, 1)], j[(0, 2)], j[(0, 3)],
            inv[(1, 0)], inv[(2, 0)], inv[(3, 0)], inv[(0, 1)], inv[(0, 2)], inv[(0, 3)]]
    breakdown = {k: abs(float(v)) for k, v in zip(LX_TERMS, vals)}
    return LaminarRates(float(r0), float(z), float(sum(breakdown.values())), breakdown)


def default_time_step(g: InflowProfile, t: float = 0.0) -> float:
    """1e-3 of the inflow variation timescale (1e-3 for a constant inflow)."""
    scale = g.variation_timescale(t)
    return 1e-3 * (scale if math.isfinite(scale) else 1.0)


def _time_quantities(field, t, r0, z, r_target, z_in, rel_tol, abs_tol) -> np.ndarray:
    trace = lambda x: trace_streamline(field, x, t, (z_in, z), rel_tol, abs_tol)
    j = trace(r0).jet(z)
    width = 0.05 * r0
    lo, hi = max(r0 - width, 1e-3 * r0), min(r0 + width, field.r_max * (1 - 1e-12))
    r_inv, _, _, _ = _solve_inflow_radius(trace, r_target, z, r0, lo, hi)
    return np.array([r_inv, j[(1, 0)], j[(0, 1)]])


def laminar_rate_t(
    field: AxisymmetricField,
    t: float,
    dt: float,
    r0: float,
    z: float,
    z_in: float | None = None,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> LaminarRates:
    """|d_t R^{-1}| + |d_t dR/dr0| + |d_t dR/dz| by centered differences of maps at t +- dt.

    The inverse is differentiated at the fixed point (r, z) with r = R(r0, z, t).
    The same estimate with dt/2 is kept for a Richardson check.
    """
    if not dt > 0:
        raise DomainError(f"time step must be positive, got {dt!r}")
    z_in = default_z_in(field) if z_in is None else float(z_in)
    base = trace_streamline(field, r0, t, (z_in, z), rel_tol, abs_tol)
    r_target = base.radius(z)
    q = lambda tt: _time_quantities(field, tt, r0, z, r_target, z_in, rel_tol, abs_tol)
    d_full = (q(t + dt) - q(t - dt)) / (2 * dt)
    d_half = (q(t + dt / 2) - q(t - dt / 2)) / dt
    breakdown = {k: abs(float(v)) for k, v in zip(LT_TERMS, d_full)}
    L_t = float(sum(breakdown.values()))
    L_t_half = float(np.sum(np.abs(d_half)))
    rates = _rates_from_jet(r0, z, base.jet(z))
    rates.L_t, rates.L_t_half, rates.time_breakdown, rates.dt = L_t, L_t_half, breakdown, dt
    return rates


RATE_COLUMNS = ("r0", "z", "L_x", "L_t") + LX_TERMS + LT_TERMS


def rate_row(rates: LaminarRates) -> list:
    tb = rates.time_breakdown or {}
    return ([rates.r0, rates.z, rates.L_x, rates.L_t if rates.L_t is not None else math.nan]
            + [rates.breakdown[k] for k in LX_TERMS] + [tb.get(k, math.nan) for k in LT_TERMS])


def write_rates_csv(path, rates: Sequence[LaminarRates]) -> None:
    write_csv(path, RATE_COLUMNS, [rate_row(r) for r in rates], "laminar rates")


# -- swirl transport ------------------------------------------------------------------


@dataclass
class SwirlTransport:
    """v_theta(t) = v_theta(seed) exp(-int v_r / R dtau) along a trajectory."""

    traj: Trajectory
    v_theta0: float
    sol: object = dc_field(repr=False)

    def exponent(self, t: float) -> float:
        self.traj._check_time(t)
        return float(self.sol(t)[0])

    def __call__(self, t: float) -> float:
        return self.v_theta0 * math.exp(-self.exponent(t))


def swirl_transport(field: AxisymmetricField, traj: Trajectory, rel_tol: float = 1e-12, abs_tol: float = 1e-14) -> SwirlTransport:
    r0, _, z0 = traj.seed
    v0 = field.partial(1, 0, 0, 0, r0, z0, traj.t0)

    def rhs(t, y):
        R, _, Z, _ = traj.state(t)
        if R <= field.r_min:
            raise DomainError(f"trajectory reaches the axis at t = {t!r}")
        return [field.partial(0, 0, 0, 0, R, Z, t) / R]

    sol = solve_ivp(rhs, (traj.t0, traj.t_end), [0.0], rtol=rel_tol, atol=abs_tol, dense_output=True)
    return SwirlTransport(traj, float(v0), sol.sol)
