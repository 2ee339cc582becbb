"""Particle trajectories, arc-length and axial reparametrizations."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from . import stencils, taylor
from .errors import DomainError, StagnationError, UnilateralViolation
from .fields import AxisymmetricField
from .geometry import to_cartesian

U_FLOOR = 1e-12

# status values
COMPLETED, LEFT_DOMAIN, AXIS_HIT, STAGNATION = "completed", "left_domain", "axis_hit", "stagnation"


@dataclass(frozen=True)
class IntegratorOptions:
    """Tolerances of the adaptive Runge-Kutta pair (RK45 = Dormand-Prince 5(4))."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    method: str = "RK45"
    max_step: float = math.inf

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")


def _velocity_jet_series(field: AxisymmetricField, R: np.ndarray, Z: np.ndarray, tser: np.ndarray, jets) -> list:
    """Series of (v_r, v_theta, v_z) along perturbation series of (R, Z, t)."""
    # compose_multivariate ignores the constant terms of the perturbations
    return [taylor.compose_multivariate(j, (R, Z, tser)) for j in jets]


def _angular_rate(vt: np.ndarray, R: np.ndarray, jet_theta: dict) -> np.ndarray:
    if R[0] > 0:
        return taylor.div(vt, R)
    # on the axis v_theta / R tends to d_r v_theta
    return taylor.constant(jet_theta.get((1, 0, 0), 0.0), len(R) - 1)


@dataclass
class Trajectory:
    """Dense particle path: state (R, Theta, Z, s) versus time.

    Theta is integrated as a state (unwrapped); s is the travelled arc length.
    """

    field: AxisymmetricField
    seed: tuple[float, float, float]
    t0: float
    t_end: float
    status: str
    sol: object = dc_field(repr=False)
    t_steps: np.ndarray = dc_field(repr=False, default=None)
    y_steps: np.ndarray = dc_field(repr=False, default=None)
    options: IntegratorOptions = dc_field(default_factory=IntegratorOptions)

    @property
    def span(self) -> tuple[float, float]:
        return (min(self.t0, self.t_end), max(self.t0, self.t_end))

    def _check_time(self, t: float) -> None:
        lo, hi = self.span
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if not lo - slack <= t <= hi + slack:
            raise DomainError(f"t = {t!r} outside the trajectory span [{lo!r}, {hi!r}]")

    def state(self, t: float) -> np.ndarray:
        """(R, Theta, Z, s) at time t from the dense interpolant."""
        self._check_time(t)
        return np.asarray(self.sol(t), dtype=float)

    def position(self, t: float) -> np.ndarray:
        R, th, Z, _ = self.state(t)
        return to_cartesian(R, th, Z)

    def velocity(self, t: float) -> np.ndarray:
        """Cylindrical velocity components at the particle."""
        R, _, Z, _ = self.state(t)
        return self.field.velocity(R, Z, t)

    def speed(self, t: float) -> float:
        return float(np.linalg.norm(self.velocity(t)))

    def law_residuals(self) -> np.ndarray:
        """Relative mismatch between the interpolant slope and the ODE right-hand side at each step node.

        The slope at a node is taken from the end of the preceding step's
        interpolant, so it is independent of the stage evaluated there.
        Rows are (t, residual of dR/dt, dTheta/dt, dZ/dt).
        """
        rows = []
        for ip in self.sol.interpolants[:-1]:
            if not hasattr(ip, "Q"):
                raise DomainError(f"law residuals need a Runge-Kutta dense output, not {self.options.method}")
            t = ip.t
            # dense output y(t_old + x h) = y_old + h Q [x, x^2, ...]
            slope = ip.Q @ np.arange(1, ip.Q.shape[1] + 1, dtype=float)
            R, _, Z, _ = self.state(t)
            vr, vt, vz = self.field.velocity(R, Z, t)
            law = np.array([vr, vt / R, vz])
            rows.append([t, *(np.abs(slope[:3] - law) / max(np.linalg.norm(law), U_FLOOR))])
        return np.array(rows)

    def time_series(self, t: float, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Taylor series in h of (R, Theta, Z)(t + h), exact to ``order`` via field jets."""
        R0, th0, Z0, _ = self.state(t)
        jets = self.field.jet(R0, Z0, t, max(order - 1, 1))

        def rhs(y, tser):
            R, _, Z = y
            vr, vt, vz = _velocity_jet_series(self.field, R, Z, tser, jets)
            return [vr, _angular_rate(vt, R, jets[1]), vz]

        R, th, Z = taylor.solve_ode_series(rhs, (R0, th0, Z0), t, order)
        return R, th, Z

    def cartesian_series(self, t: float, order: int) -> np.ndarray:
        """Series of the Cartesian position, shape (order + 1, 3)."""
        R, th, Z = self.time_series(t, order)
        s, c = taylor.sin_cos(th)
        return np.stack([taylor.mul(R, c), taylor.mul(R, s), Z], axis=1)

    def derivatives(self, t: float, order: int = 3) -> np.ndarray:
        """d^k eta / dt^k for k = 0..order in Cartesian components."""
        return taylor.derivatives(self.cartesian_series(t, order))

    def samples(self, times: Sequence[float] | None = None) -> np.ndarray:
        """Rows (t, s, R, Theta, Z, v_r, v_theta, v_z); defaults to the integrator steps."""
        times = self.t_steps if times is None else np.asarray(times, dtype=float)
        rows = []
        for t in times:
            R, th, Z, s = self.state(float(t))
            rows.append([float(t), s, R, th, Z, *self.field.velocity(R, Z, float(t))])
        return np.array(rows)

    def to_csv(self, path, times: Sequence[float] | None = None) -> None:
        write_csv(path, TRAJECTORY_COLUMNS, self.samples(times), "particle trajectory")


TRAJECTORY_COLUMNS = ("t", "s", "R", "Theta", "Z", "v_r", "v_theta", "v_z")


def format_float(x: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


def write_csv(path, columns: Sequence[str], rows, description: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {description}; columns: {', '.join(columns)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_format_cell(v) for v in row])


def _format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_, str)):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, np.array([[float(v) for v in row] for row in reader])


def _make_events(field: AxisymmetricField, r_seed: float):
    def speed_event(t, y):
        return float(np.linalg.norm(field.velocity(max(y[0], 0.0), y[2], t))) - U_FLOOR

    speed_event.terminal = True
    speed_event.direction = -1
    events = {STAGNATION: speed_event}

    if r_seed > field.r_min:
        def axis_event(t, y):
            return y[0] - 0.5 * field.r_min

        axis_event.terminal = True
        axis_event.direction = -1
        events[AXIS_HIT] = axis_event

    def domain_event(t, y):
        # small slack so seeds on the wall (v_r = 0 there) do not trip the event
        gaps = [field.r_max * (1.0 + 1e-9) - y[0]]
        lo, hi = field.z_range
        if math.isfinite(lo):
            gaps.append(y[2] - lo)
        if math.isfinite(hi):
            gaps.append(hi - y[2])
        return min(gaps)

    domain_event.terminal = True
    domain_event.direction = -1
    events[LEFT_DOMAIN] = domain_event
    return events


def integrate_trajectory(
    field: AxisymmetricField,
    seed: Sequence[float],
    t_span: Sequence[float],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    method: str = "RK45",
    max_step: float = math.inf,
) -> Trajectory:
    """Integrate dR/dt = v_r, dTheta/dt = v_theta / R, dZ/dt = v_z from ``seed = (r0, theta0, z0)``.

    Halts with a status instead of raising when the particle stagnates, reaches
    the axis or leaves the domain.
    """
    opts = IntegratorOptions(rel_tol, abs_tol, method, max_step)
    r0, th0, z0 = (float(v) for v in seed)
    t0, t1 = (float(v) for v in t_span)
    field.check_domain(r0, z0, t0)
    if field.speed(r0, z0, t0) <= U_FLOOR:
        raise StagnationError(f"seed {tuple(seed)} is a stagnation point at t = {t0!r}")

    def rhs(t, y):
        R = y[0]
        vr, vt, vz = field.velocity(max(R, 0.0), y[2], t)
        if R > field.r_min:
            dth = vt / R
        else:
            dth = field.partial(1, 1, 0, 0, 0.0, y[2], t)
        return [vr, dth, vz, math.sqrt(vr * vr + vt * vt + vz * vz)]

    events = _make_events(field, r0)
    sol = solve_ivp(
        rhs, (t0, t1), [r0, th0, z0, 0.0], method=method, rtol=rel_tol, atol=abs_tol,
        dense_output=True, events=list(events.values()), max_step=max_step,
    )
    if sol.status == -1:
        raise StagnationError(f"integration failed: {sol.message}")
    status = COMPLETED
    if sol.status == 1:
        for name, te in zip(events, sol.t_events):
            if len(te):
                status = name
                break
    return Trajectory(field, (r0, th0, z0), t0, float(sol.t[-1]), status, sol.sol, sol.t, sol.y.T, opts)


def speed_rate(traj: Trajectory, t: float) -> float:
    """d|u|/dt following the particle: sum_c v_c (D v_c / Dt) / |u|."""
    R, _, Z, _ = traj.state(t)
    keys = [(c, i, j, k) for c in range(3) for (i, j, k) in ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))]
    p = traj.field.partials(keys, R, Z, t).reshape(3, 4)
    v = p[:, 0]
    speed = float(np.linalg.norm(v))
    if speed <= U_FLOOR:
        raise StagnationError(f"speed below floor at t = {t!r}")
    dv = p[:, 3] + v[0] * p[:, 1] + v[2] * p[:, 2]
    return float(v @ dv / speed)


# -- arc length ---------------------------------------------------------------------


def _reparametrize(series: np.ndarray, rate: np.ndarray, order: int) -> np.ndarray:
    """Derivatives d^k f / dq^k (k = 0..order) where dq/dh = rate(h), f given as series in h."""
    out = [series[0]]
    cur = series
    for _ in range(order):
        cur = taylor.div(taylor.deriv(cur), rate[: len(cur) - 1])
        out.append(cur[0])
    return np.array(out)


@dataclass
class ArcLengthTrajectory:
    """A trajectory parametrized by arc length s, with dt/ds = 1/|u|."""

    traj: Trajectory
    _t_of_s: PchipInterpolator = dc_field(repr=False, default=None)

    def __post_init__(self):
        t, y = self.traj.t_steps, self.traj.y_steps
        order = np.argsort(y[:, 3])
        s_vals, t_vals = y[order, 3], t[order]
        if np.any(np.diff(s_vals) <= 0):
            raise StagnationError("arc length is not strictly increasing along the trajectory")
        self._t_of_s = PchipInterpolator(s_vals, t_vals)

    @property
    def total_length(self) -> float:
        return float(abs(self.traj.state(self.traj.t_end)[3]))

    @property
    def s_range(self) -> tuple[float, float]:
        a, b = self.traj.state(self.traj.t0)[3], self.traj.state(self.traj.t_end)[3]
        return (min(a, b), max(a, b))

    def t_of_s(self, s: float) -> float:
        lo, hi = self.s_range
        if not lo - 1e-12 <= s <= hi + 1e-12:
            raise DomainError(f"s = {s!r} outside the arc-length range [{lo!r}, {hi!r}]")
        t = float(self._t_of_s(s))
        t_lo, t_hi = self.traj.span
        for _ in range(20):
            t = min(max(t, t_lo), t_hi)
            st = self.traj.state(t)
            speed = self.traj.field.speed(st[0], st[2], t)
            if speed <= U_FLOOR:
                raise StagnationError(f"stagnation at t = {t!r}")
            step = (st[3] - s) / speed
            t -= step
            if abs(step) <= 1e-15 * max(1.0, abs(t)):
                break
        return min(max(t, t_lo), t_hi)

    def position(self, s: float) -> np.ndarray:
        return self.traj.position(self.t_of_s(s))

    def derivatives(self, s: float, order: int = 3, t: float | None = None) -> np.ndarray:
        """d^k eta* / ds^k for k = 0..order (Cartesian), via the chain rule."""
        t = self.t_of_s(s) if t is None else t
        xs = self.traj.cartesian_series(t, order + 1)
        R, _, Z = self.traj.time_series(t, order + 1)
        jets = self.traj.field.jet(R[0], Z[0], t, order)
        speed = _speed_series(self.traj, t, order + 1, jets)
        return _reparametrize(xs, speed, order)


def _speed_series(traj: Trajectory, t: float, order: int, jets=None) -> np.ndarray:
    R, _, Z = traj.time_series(t, order)
    jets = jets or traj.field.jet(R[0], Z[0], t, order)
    v = _velocity_jet_series(traj.field, R, Z, taylor.variable(t, order), jets)
    return taylor.sqrt(sum(taylor.mul(c, c) for c in v))


def reparametrize_arclength(traj: Trajectory) -> ArcLengthTrajectory:
    return ArcLengthTrajectory(traj)


# -- axial parametrization ----------------------------------------------------------


@dataclass
class AxisLengthView:
    """r(z), theta(z), t(z) along a unilateral (v_z > 0) trajectory."""

    traj: Trajectory
    z_range: tuple[float, float]
    _companion: Trajectory | None = dc_field(default=None, repr=False)

    def t_of_z(self, z: float, traj: Trajectory | None = None) -> float:
        traj = traj or self.traj
        lo, hi = self.z_range
        if not lo - 1e-12 <= z <= hi + 1e-12:
            raise DomainError(f"z = {z!r} outside the trajectory's axial range [{lo!r}, {hi!r}]")
        ts, zs = traj.t_steps, traj.y_steps[:, 2]
        t = float(np.interp(z, zs, ts)) if zs[-1] > zs[0] else float(np.interp(z, zs[::-1], ts[::-1]))
        t_lo, t_hi = traj.span
        for _ in range(30):
            t = min(max(t, t_lo), t_hi)
            st = traj.state(t)
            vz = traj.field.partial(2, 0, 0, 0, st[0], st[2], t)
            step = (st[2] - z) / vz
            t -= step
            if abs(step) <= 1e-15 * max(1.0, abs(t)):
                break
        return min(max(t, t_lo), t_hi)

    def state(self, z: float) -> tuple[float, float, float]:
        """(r, theta, t) at axial station z."""
        t = self.t_of_z(z)
        R, th, _, _ = self.traj.state(t)
        return float(R), float(th), t

    def derivatives(self, z: float, order: int = 3) -> np.ndarray:
        """Rows k = 0..order of (d^k r/dz^k, d^k theta/dz^k, d^k t/dz^k) by the chain rule."""
        t = self.t_of_z(z)
        R, th, Z = self.traj.time_series(t, order + 1)
        tser = taylor.variable(t, order + 1)
        rate = taylor.deriv(Z)
        rows = [_reparametrize(q, rate, order) for q in (R, th, tser)]
        return np.array(rows).T

    def companion(self) -> Trajectory:
        """Tight-tolerance high-order companion integration used by the FD cross-check."""
        if self._companion is None:
            tr = self.traj
            self._companion = integrate_trajectory(
                tr.field, tr.seed, (tr.t0, tr.t_end), rel_tol=1e-13, abs_tol=1e-15, method="DOP853"
            )
        return self._companion

    def fd_derivatives(self, z: float, order: int = 3, h: float | None = None) -> np.ndarray:
        """Same table as :meth:`derivatives` from 7-point centered differences of dense output."""
        comp = self.companion()
        h = h if h is not None else stencils.EPS ** (1.0 / 7.0) * max(1.0, abs(z))
        lo, hi = self.z_range
        if z - 3 * h < lo or z + 3 * h > hi:
            raise DomainError(f"z = {z!r} too close to the ends of the trajectory for a 7-point stencil")

        def sample(zz):
            t = self.t_of_z(zz, comp)
            st = comp.state(t)
            return np.array([st[0], st[1], t])

        out = [sample(z)]
        for k in range(1, order + 1):
            out.append(stencils.derivative(sample, z, k, h=h, npoints=7))
        return np.array(out)

    def along_axial_derivative(self, z: float, comp: int, order: int = 1) -> float:
        """d^k/dz^k of a velocity component evaluated along the path."""
        t = self.t_of_z(z)
        R, _, Z = self.traj.time_series(t, order + 1)
        jets = self.traj.field.jet(R[0], Z[0], t, order)
        v = _velocity_jet_series(self.traj.field, R, Z, taylor.variable(t, order + 1), jets)
        return float(_reparametrize(v[comp], taylor.deriv(Z), order)[order])


def axis_length_view(traj: Trajectory, check_points: int = 200) -> AxisLengthView:
    """Reparametrize a trajectory by its axial coordinate; needs v_z > 0 throughout."""
    ts = np.union1d(traj.t_steps, np.linspace(*traj.span, check_points))
    for t in ts:
        R, _, Z, _ = traj.state(float(t))
        vz = traj.field.partial(2, 0, 0, 0, R, Z, float(t))
        if not vz > 0:
            raise UnilateralViolation(f"v_z = {vz!r} <= 0 at t = {t!r} (r = {R!r}, z = {Z!r})")
    zs = traj.y_steps[:, 2]
    return AxisLengthView(traj, (float(zs.min()), float(zs.max())))
