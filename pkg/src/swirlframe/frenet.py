"""Frenet-Serret frames along arc-length trajectories and normal coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguityError, DomainError, FrameUndefinedError
from .geometry import basis
from .trajectory import ArcLengthTrajectory, AxisLengthView, Trajectory, write_csv

KAPPA_MIN = 1e-8
TORSION_FLOOR = 1e-10
MIN_METRIC = 0.1


@dataclass
class FrenetSample:
    """Frame at arc length s.

    ``orientation`` is +1 when b = tau x n and -1 when b = -(tau x n); it is
    chosen so that ``torsion`` (defined by T b = dn/ds + kappa tau) is
    nonnegative.  ``torsion_signed`` is the torsion of the right-handed frame.
    """

    s: float
    t: float
    position: np.ndarray
    tau: np.ndarray
    n: np.ndarray
    b: np.ndarray
    kappa: float
    torsion: float
    torsion_signed: float
    orientation: int
    dkappa_ds: float

    def as_row(self) -> list:
        return [self.s, *self.tau, *self.n, *self.b, self.kappa, self.torsion, self.orientation]


FRAME_COLUMNS = ("s", "tau_x", "tau_y", "tau_z", "n_x", "n_y", "n_z", "b_x", "b_y", "b_z",
                 "kappa", "torsion", "orientation")


def frame_from_derivatives(d: np.ndarray, kappa_min: float = KAPPA_MIN):
    """(tau, n, b_right, kappa, signed torsion, dkappa/ds) from curve derivatives d[1..3].

    The formulas do not assume unit speed.
    """
    d1, d2, d3 = d[1], d[2], d[3]
    speed = float(np.linalg.norm(d1))
    c = np.cross(d1, d2)
    cn = float(np.linalg.norm(c))
    kappa = cn / speed**3
    if not kappa >= kappa_min:
        raise FrameUndefinedError(f"curvature {kappa!r} below the floor {kappa_min!r}")
    tau = d1 / speed
    b_right = c / cn
    n = np.cross(b_right, tau)
    torsion = float(c @ d3) / cn**2
    dc = np.cross(d1, d3)
    dkappa_dq = float(c @ dc) / (cn * speed**3) - 3.0 * cn * float(d1 @ d2) / speed**5
    dkappa = dkappa_dq / speed
    return tau, n, b_right, kappa, torsion, dkappa


def frenet_apparatus(arc: ArcLengthTrajectory, s: float, kappa_min: float = KAPPA_MIN) -> FrenetSample:
    """Frame, curvature, torsion and dkappa/ds from chain-rule derivatives of eta*."""
    t = arc.t_of_s(s)
    return _oriented(float(s), t, arc.derivatives(s, order=3, t=t), kappa_min)


def frame_at_time(traj: Trajectory, t: float, kappa_min: float = KAPPA_MIN) -> FrenetSample:
    """Same frame computed from time derivatives of the trajectory (no arc-length inversion)."""
    return _oriented(float(traj.state(t)[3]), float(t), traj.derivatives(t, 3), kappa_min)


def _oriented(s: float, t: float, d: np.ndarray, kappa_min: float) -> FrenetSample:
    tau, n, b_right, kappa, torsion, dkappa = frame_from_derivatives(d, kappa_min)
    orientation = -1 if torsion < -TORSION_FLOOR else 1
    return FrenetSample(s, t, d[0], tau, n, orientation * b_right, kappa,
                        orientation * torsion, torsion, orientation, dkappa)


def sample_frames(arc: ArcLengthTrajectory, s_values) -> list[FrenetSample]:
    frames = [frenet_apparatus(arc, float(s)) for s in s_values]
    return frames


def torsion_sign_changes(frames: list[FrenetSample]) -> list[float]:
    """Arc lengths between consecutive samples where the signed torsion flips."""
    out = []
    for a, b in zip(frames, frames[1:]):
        if abs(a.torsion_signed) > TORSION_FLOOR and abs(b.torsion_signed) > TORSION_FLOOR:
            if a.torsion_signed * b.torsion_signed < 0:
                out.append(0.5 * (a.s + b.s))
    return out


def write_frames_csv(path, frames: list[FrenetSample]) -> None:
    write_csv(path, FRAME_COLUMNS, [f.as_row() for f in frames], "Frenet frames along the arc-length trajectory")


# -- moving frame of normal coordinates ----------------------------------------------


def moving_frame_matrices(kappa: float, torsion: float, rbar: float, zbar: float) -> tuple[np.ndarray, np.ndarray]:
    """Matrix M with (d_thetabar, d_rbar, d_zbar) = M (tau, n, b) and its inverse.

    Uses dn/ds = -kappa tau + T b and db/ds = -T n, so
    d_thetabar x = (1 - kappa rbar) tau - zbar T n + rbar T b.
    """
    a = 1.0 - kappa * rbar
    if not a > MIN_METRIC:
        raise DomainError(f"1 - kappa*rbar = {a!r} is outside the validity region (> {MIN_METRIC})")
    M = np.array([[a, -zbar * torsion, rbar * torsion], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    M_inv = np.array([[1.0 / a, zbar * torsion / a, -rbar * torsion / a], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    return M, M_inv


@dataclass
class NormalCoordinates:
    thetabar: float
    rbar: float
    zbar: float
    residual: float


def normal_coordinates(
    arc: ArcLengthTrajectory, x, samples: int = 201, frame_at=None
) -> NormalCoordinates:
    """(thetabar, rbar, zbar) with x = eta*(thetabar) + rbar n + zbar b.

    The foot point is the closest point on the curve: local minima of the
    distance on a sample grid are polished by Newton's method on
    (x - eta*(s)) . tau(s) = 0.
    """
    x = np.asarray(x, dtype=float)
    frame_at = frame_at or (lambda s: frenet_apparatus(arc, s))
    lo, hi = arc.s_range
    grid = np.linspace(lo, hi, samples)
    pts = np.array([arc.position(s) for s in grid])
    dist = np.linalg.norm(pts - x, axis=1)
    kappa_max = max(frame_at(s).kappa for s in grid[:: max(1, samples // 20)])
    tube = 1.0 / kappa_max
    minima = [i for i in range(samples) if (i == 0 or dist[i] <= dist[i - 1]) and (i == samples - 1 or dist[i] <= dist[i + 1])]
    inside = [i for i in minima if dist[i] < tube]
    if not inside:
        raise DomainError(f"point is {dist.min()!r} from the curve, outside the tube radius {tube!r}")
    feet = []
    for i in inside:
        s = grid[i]
        for _ in range(50):
            fr = frame_at(s)
            w = x - fr.position
            phi = w @ fr.tau
            dphi = -1.0 + fr.kappa * (w @ fr.n)
            step = phi / dphi
            s = min(max(s - step, lo), hi)
            if abs(step) < 1e-14 * max(1.0, abs(s)):
                break
        feet.append(s)
    distinct = []
    for s in feet:
        if all(abs(s - o) > 1e-6 for o in distinct):
            distinct.append(s)
    if len(distinct) > 1:
        d = sorted((float(np.linalg.norm(x - arc.position(s))), s) for s in distinct)
        if d[1][0] - d[0][0] < 1e-9 or len([v for v in d if v[0] < tube]) > 1:
            raise AmbiguityError(f"{len(distinct)} closest points within the tube at s = {[v[1] for v in d]}")
    s = distinct[0] if len(distinct) == 1 else min(distinct, key=lambda v: np.linalg.norm(x - arc.position(v)))
    fr = frame_at(s)
    w = x - fr.position
    rbar, zbar = float(w @ fr.n), float(w @ fr.b)
    residual = float(np.linalg.norm(fr.position + rbar * fr.n + zbar * fr.b - x))
    return NormalCoordinates(float(s), rbar, zbar, residual)


# -- axial-view diagnostics ----------------------------------------------------------


@dataclass
class ThetaDerivatives:
    """Azimuth derivatives in z with the leading-order terms driven by axial acceleration."""

    z: float
    theta1: float
    theta2: float
    theta3: float
    main2: float
    main3: float

    @property
    def remainder2(self) -> float:
        return self.theta2 - self.main2

    @property
    def remainder3(self) -> float:
        return self.theta3 - self.main3


def theta_derivatives(view: AxisLengthView, z: float) -> ThetaDerivatives:
    """theta', theta'', theta''' and their main terms.

    main2 = -v_theta dz(v_z) / (r v_z^2),
    main3 = -v_theta dz^2(v_z) / (r v_z^2) + 2 v_theta (dz v_z)^2 / (r v_z^3),
    where dz is the derivative following the path.
    """
    d = view.derivatives(z, 3)
    r = d[0, 0]
    t = d[0, 2]
    R, _, Z, _ = view.traj.state(t)
    _, vt, vz = view.traj.field.velocity(R, Z, t)
    dvz = view.along_axial_derivative(z, 2, 1)
    d2vz = view.along_axial_derivative(z, 2, 2)
    main2 = -vt * dvz / (r * vz**2)
    main3 = -vt * d2vz / (r * vz**2) + 2.0 * vt * dvz**2 / (r * vz**3)
    return ThetaDerivatives(float(z), float(d[1, 1]), float(d[2, 1]), float(d[3, 1]), float(main2), float(main3))


@dataclass
class AxialCurvature:
    """Curvature assembled from the axial parametrization (r(z), theta(z))."""

    kappa: float
    kappa_main: float
    kappa_n_e_theta: float
    n_e_theta_main: float


def curvature_from_axis_view(view: AxisLengthView, z: float) -> AxialCurvature:
    """kappa^2 = |x_zz|^2 z'^4 + 2 (x_z . x_zz) z'^2 z'' + |x_z|^2 z''^2 with z(s) the axial coordinate.

    Components are taken in the (e_r, e_theta, e_z) basis at the current
    azimuth.  ``kappa_main`` and ``n_e_theta_main`` are the leading-order
    expressions valid when theta'' dominates and is negative.
    """
    d = view.derivatives(z, 2)
    r, r1, r2 = d[0, 0], d[1, 0], d[2, 0]
    th1, th2 = d[1, 1], d[2, 1]
    xz = np.array([r1, r * th1, 1.0])
    xzz = np.array([r2 - r * th1**2, r * th2 + 2.0 * r1 * th1, 0.0])
    nz = float(np.linalg.norm(xz))
    zp = 1.0 / nz
    zpp = -float(xz @ xzz) / nz**4
    kappa2 = float(xzz @ xzz) * zp**4 + 2.0 * float(xz @ xzz) * zp**2 * zpp + float(xz @ xz) * zpp**2
    kn = xzz * zp**2 + xz * zpp
    q = 1.0 + r1**2
    kappa_main = math.sqrt((r * th2) ** 2 / q**2 + q * (r**2 * th1 * th2) ** 2 / q**4)
    n_main = -(r / q - r**2 * th1 / q**2) / math.sqrt(r**2 / q**2 + r**4 * th1**2 / q**3)
    return AxialCurvature(math.sqrt(max(kappa2, 0.0)), float(kappa_main), float(kn[1]), float(n_main))


def e_theta_at(position: np.ndarray) -> np.ndarray:
    return basis(math.atan2(position[1], position[0]))[1]
