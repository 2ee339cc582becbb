"""Pressure/curvature identities, rotation balance and key inequalities along trajectories.

All quantities are evaluated for the particle at time ``t`` on a trajectory.
``speed_rate`` denotes d|u|/dt following the particle.  Its spatial
derivatives along the frame directions use the field

    F(x) = (Du/Dt . u / |u|)(x, t),

which is the rate of the particle that sits at x at time t.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.stats import kendalltau

from . import stencils
from .atlas import default_time_step, laminar_rate_t, trace_streamline
from .errors import DomainError, FrameUndefinedError, UncertifiedFieldError
from .fields import (AxisymmetricField, InflowProfile, default_sample_grid, material_acceleration,
                     pressure_gradient_certify, swirl_nozzle_field)
from .frenet import KAPPA_MIN, FrenetSample, frame_at_time
from .geometry import basis, to_cylindrical
from .trajectory import Trajectory, integrate_trajectory, speed_rate, write_csv

REL_FLOOR = 1e-300
IDENTITY_TOL = 1e-4
BALANCE_TOL = 1e-3
IDENTITY_NAMES = ("tau", "n", "rbar", "zbar")


def frame_step(kappa: float) -> float:
    """Default step for derivatives along n and b: 1e-4 / kappa clamped to [1e-7, 1e-2]."""
    return min(max(1e-4 / kappa, 1e-7), 1e-2)


def certify(field: AxisymmetricField, t: float, tol: float = 1e-8):
    """Certification on a grid around the time of interest; raises if not an exact Euler field."""
    report = pressure_gradient_certify(field, default_sample_grid(field, t=(t - 0.5, t + 0.5)), tol)
    return report


def _require_certified(field: AxisymmetricField, t: float):
    if field.pressure_gradient is None:
        raise UncertifiedFieldError(f"field {field.name!r} carries no pressure gradient")
    report = certify(field, t)
    if not report.exact_euler:
        raise UncertifiedFieldError(
            f"field {field.name!r} is not an exact Euler solution (max|a_theta| = {report.max_a_theta!r}, "
            f"curl = {report.max_curl!r})"
        )
    return report


def rate_field(field: AxisymmetricField, x: np.ndarray, t: float) -> float:
    """F(x) = Du/Dt . u / |u| at the Cartesian point x."""
    r, _, z = to_cylindrical(x)
    a = material_acceleration(field, r, z, t)
    v = field.velocity(r, z, t)
    return float(a @ v / np.linalg.norm(v))


def pressure_gradient_cartesian(field: AxisymmetricField, x: np.ndarray, t: float) -> np.ndarray:
    r, theta, z = to_cylindrical(x)
    p_r, p_z = field.pressure_gradient(r, z, t)
    e_r, _, e_z = basis(theta)
    return p_r * e_r + p_z * e_z


def directional(fun, x: np.ndarray, direction: np.ndarray, h: float) -> float:
    """Centered difference of ``fun`` along a unit direction."""
    return float((fun(x + h * direction) - fun(x - h * direction)) / (2.0 * h))


@dataclass
class ProbeQuantities:
    """Frame and speed data at a probe."""

    t: float
    frame: FrenetSample
    speed: float
    speed_rate: float
    grad_p: np.ndarray

    @property
    def position(self) -> np.ndarray:
        return self.frame.position


def probe(field: AxisymmetricField, traj: Trajectory, t: float, kappa_min: float = KAPPA_MIN) -> ProbeQuantities:
    frame = frame_at_time(traj, t, kappa_min)
    R, _, Z, _ = traj.state(t)
    speed = field.speed(R, Z, t)
    gp = pressure_gradient_cartesian(field, frame.position, t) if field.pressure_gradient else np.full(3, math.nan)
    return ProbeQuantities(float(t), frame, speed, speed_rate(traj, t), gp)


@dataclass
class IdentityReport:
    """Residuals of the four identities at one probe.

    ``residuals`` are absolute, ``relative`` divide by the largest magnitude
    among each identity's terms.  ``slopes`` are observed convergence orders of
    the frame-direction differences under step halving.  ``diagnostics`` hold
    the Hessian form of the frame identities and the versions that keep the
    time derivative of the pressure gradient.
    """

    probe_s: float
    probe_t: float
    position: list
    residuals: dict
    relative: dict
    terms: dict
    steps: list
    slopes: dict
    diagnostics: dict
    tolerance: float = IDENTITY_TOL

    @property
    def passed(self) -> dict:
        return {k: bool(self.relative[k] < self.tolerance) for k in IDENTITY_NAMES}

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())

    def as_dict(self) -> dict:
        return {
            "probe_s": self.probe_s,
            "probe_t": self.probe_t,
            "position": list(self.position),
            "residuals": self.residuals,
            "relative": self.relative,
            "terms": self.terms,
            "steps": self.steps,
            "slopes": self.slopes,
            "diagnostics": self.diagnostics,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _relative(residual: float, *terms: float) -> float:
    return abs(residual) / max(max(abs(v) for v in terms), REL_FLOOR)


def check_pressure_identities(
    field: AxisymmetricField, traj: Trajectory, t: float, fd_steps=None, certified: bool = False
) -> IdentityReport:
    """Evaluate the tangential, normal and the two frame-derivative identities at time t.

    (tau)  -grad p . tau  = d|u|/dt
    (n)    -grad p . n    = kappa |u|^2
    (rbar) 3 kappa d|u|/dt + dkappa/ds |u|^2 = d_n F
    (zbar) T kappa |u|^2 = d_b F
    """
    if not certified:
        _require_certified(field, t)
    q = probe(field, traj, t)
    fr, u, du = q.frame, q.speed, q.speed_rate
    x = fr.position
    h0 = frame_step(fr.kappa)
    steps = list(fd_steps) if fd_steps is not None else [h0, h0 / 2, h0 / 4]
    F = lambda y: rate_field(field, y, t)
    dn = [directional(F, x, fr.n, h) for h in steps]
    db = [directional(F, x, fr.b, h) for h in steps]

    lhs_tau, rhs_tau = -float(q.grad_p @ fr.tau), du
    lhs_n, rhs_n = -float(q.grad_p @ fr.n), fr.kappa * u * u
    lhs_r = 3.0 * fr.kappa * du + fr.dkappa_ds * u * u
    lhs_z = fr.torsion * fr.kappa * u * u
    res = {
        "tau": lhs_tau - rhs_tau,
        "n": lhs_n - rhs_n,
        "rbar": lhs_r - dn[0],
        "zbar": lhs_z - db[0],
    }
    # |grad p| and kappa |grad p| keep the scale meaningful when both sides vanish
    gp_norm = float(np.linalg.norm(q.grad_p))
    rel = {
        "tau": _relative(res["tau"], lhs_tau, rhs_tau, gp_norm),
        "n": _relative(res["n"], lhs_n, rhs_n, gp_norm),
        "rbar": _relative(res["rbar"], 3.0 * fr.kappa * du, fr.dkappa_ds * u * u, dn[0], fr.kappa * gp_norm),
        "zbar": _relative(res["zbar"], lhs_z, db[0], fr.kappa * gp_norm),
    }
    slopes = {
        "rbar": stencils.richardson_slope([lhs_r - v for v in dn]) if len(steps) >= 3 else math.nan,
        "zbar": stencils.richardson_slope([lhs_z - v for v in db]) if len(steps) >= 3 else math.nan,
    }
    terms = {
        "kappa": fr.kappa,
        "torsion": fr.torsion,
        "torsion_signed": fr.torsion_signed,
        "orientation": fr.orientation,
        "dkappa_ds": fr.dkappa_ds,
        "speed": u,
        "speed_rate": du,
        "grad_p_tau": -lhs_tau,
        "grad_p_n": -lhs_n,
        "grad_p_b": float(q.grad_p @ fr.b),
        "d_n_rate": dn[0],
        "d_b_rate": db[0],
        "rbar_lhs": lhs_r,
        "zbar_lhs": lhs_z,
    }
    diagnostics = _hessian_diagnostics(field, q, steps[0], lhs_r, lhs_z)
    return IdentityReport(fr.s, float(t), [float(v) for v in x], res, rel, terms, steps, slopes, diagnostics)


def _hessian_diagnostics(field, q: ProbeQuantities, h: float, lhs_r: float, lhs_z: float) -> dict:
    """-Hess p(n, tau), -Hess p(b, tau) and the identities that keep d_t grad p."""
    fr, x, t, u = q.frame, q.position, q.t, q.speed
    gp = lambda y: pressure_gradient_cartesian(field, y, t)
    d_tau_gp = (gp(x + h * fr.tau) - gp(x - h * fr.tau)) / (2 * h)
    ht = stencils.default_step(t, 1)
    dt_gp = (pressure_gradient_cartesian(field, x, t + ht) - pressure_gradient_cartesian(field, x, t - ht)) / (2 * ht)
    hess_n = -float(d_tau_gp @ fr.n)
    hess_b = -float(d_tau_gp @ fr.b)
    corr_r = lhs_r + float(dt_gp @ fr.n) / u
    corr_z = lhs_z + float(dt_gp @ fr.b) / u
    return {
        "minus_hess_p_n_tau": hess_n,
        "minus_hess_p_b_tau": hess_b,
        "dt_grad_p_n_over_speed": float(dt_gp @ fr.n) / u,
        "dt_grad_p_b_over_speed": float(dt_gp @ fr.b) / u,
        "hessian_residual_rbar": lhs_r - hess_n,
        "hessian_residual_zbar": lhs_z - hess_b,
        "time_corrected_residual_rbar": corr_r - hess_n,
        "time_corrected_residual_zbar": corr_z - hess_b,
        "time_corrected_relative_rbar": _relative(corr_r - hess_n, corr_r, hess_n),
        "time_corrected_relative_zbar": _relative(corr_z - hess_b, corr_z, hess_b),
    }


# -- rotation balance ---------------------------------------------------------------


@dataclass
class BalanceReport:
    """The azimuthal balance and its comparators at one probe."""

    applicable: bool
    reason: str = ""
    balance: float = math.nan
    alternative: float = math.nan
    terms: dict = dc_field(default_factory=dict)
    lower_bound: float = math.nan
    scale: float = math.nan
    angular_fd: float = math.nan
    frame_decomposition: float = math.nan
    degenerate: bool = False

    @property
    def relative_balance(self) -> float:
        return abs(self.balance) / max(self.scale, REL_FLOOR)

    @property
    def angular_agreement(self) -> float:
        """|balance - angular FD| relative to the dominant term scale."""
        return abs(self.balance - self.angular_fd) / max(self.scale, REL_FLOOR)

    @property
    def passed(self) -> bool:
        return self.applicable and self.relative_balance < BALANCE_TOL and self.angular_agreement < BALANCE_TOL

    def as_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "reason": self.reason,
            "balance": self.balance,
            "alternative": self.alternative,
            "terms": self.terms,
            "lower_bound": self.lower_bound,
            "scale": self.scale,
            "angular_fd": self.angular_fd,
            "frame_decomposition": self.frame_decomposition,
            "relative_balance": self.relative_balance if self.applicable else math.nan,
            "angular_agreement": self.angular_agreement if self.applicable else math.nan,
            "degenerate": self.degenerate,
            "passed": self.passed,
        }


def rotation_balance(field: AxisymmetricField, traj: Trajectory, t: float, h: float | None = None) -> BalanceReport:
    """0 = 3 (e_theta . n)(kappa d|u|/dt + dkappa/ds |u|^2) + (e_theta . b) T kappa |u|^2.

    Also reported: the grouping 3 (e_theta.n) kappa d|u|/dt + (e_theta.n) dkappa/ds |u|^2
    + (e_theta.b) T kappa |u|^2, the comparator
    (3/2)|dkappa/ds||u|^2 - 3 kappa |d|u|/dt| - T kappa |u|^2, the azimuthal
    derivative of F by rotating the probe, and the three-direction frame
    decomposition of that derivative.
    """
    if field.pressure_gradient is None or not certify(field, t).exact_euler:
        return BalanceReport(False, "field is not a certified exact Euler solution")
    try:
        q = probe(field, traj, t)
    except FrameUndefinedError as exc:
        return BalanceReport(True, f"degenerate: {exc}", 0.0, 0.0, {}, 0.0, 0.0, 0.0, 0.0, degenerate=True)
    fr, u, du = q.frame, q.speed, q.speed_rate
    x = fr.position
    r, theta, z = to_cylindrical(x)
    e_theta = basis(theta)[1]
    n_th, b_th, tau_th = float(fr.n @ e_theta), float(fr.b @ e_theta), float(fr.tau @ e_theta)
    k_rate = fr.kappa * du
    k_s = fr.dkappa_ds * u * u
    t_k = fr.torsion * fr.kappa * u * u
    terms = {
        "n_e_theta": n_th,
        "b_e_theta": b_th,
        "tau_e_theta": tau_th,
        "three_n_kappa_rate": 3.0 * n_th * k_rate,
        "three_n_dkappa": 3.0 * n_th * k_s,
        "n_dkappa": n_th * k_s,
        "b_torsion": b_th * t_k,
    }
    balance = 3.0 * n_th * (k_rate + k_s) + b_th * t_k
    alternative = 3.0 * n_th * k_rate + n_th * k_s + b_th * t_k
    lower = 1.5 * abs(fr.dkappa_ds) * u * u - 3.0 * fr.kappa * abs(du) - t_k
    scale = max(0.5 * abs(fr.dkappa_ds) * u * u, max(abs(v) for k, v in terms.items() if not k.endswith("e_theta")))

    F = lambda y: rate_field(field, y, t)
    h = h if h is not None else frame_step(fr.kappa)
    rotate = lambda ang: np.array([r * math.cos(theta + ang), r * math.sin(theta + ang), z])
    angular = (F(rotate(h / r)) - F(rotate(-h / r))) / (2.0 * h)
    decomposition = (tau_th * directional(F, x, fr.tau, h) + n_th * directional(F, x, fr.n, h)
                     + b_th * directional(F, x, fr.b, h))
    return BalanceReport(True, "", float(balance), float(alternative), terms, float(lower), float(scale),
                         float(angular), float(decomposition))


# -- key inequalities ------------------------------------------------------------------

HOLDS, FAILS, DEGENERATE = "holds", "fails", "degenerate"


@dataclass
class KeyInequalities:
    """Margins (left minus right) of the three key estimates at a probe."""

    margins: dict
    classification: dict
    quantities: dict

    def as_dict(self) -> dict:
        return {"margins": self.margins, "classification": self.classification, "quantities": self.quantities}


def key_inequalities(field: AxisymmetricField, traj: Trajectory, t: float, dkappa_floor: float = 1e-8) -> KeyInequalities:
    """(1/6)|u|^2|dkappa/ds| > kappa d|u|/dt,  (1/2)|dkappa/ds| > |kappa T b.e_theta|,  -1 <= n.e_theta < -1/2.

    A missing frame (kappa below the floor) or vanishing swirl makes every
    margin degenerate; |dkappa/ds| below ``dkappa_floor`` * kappa makes the first
    two degenerate.
    """
    names = ("speed_rate", "torsion", "normal_azimuth")
    R, _, Z, _ = traj.state(t)
    v = field.velocity(R, Z, t)
    try:
        q = probe(field, traj, t)
    except FrameUndefinedError:
        nan = {k: math.nan for k in names}
        return KeyInequalities(nan, {k: DEGENERATE for k in names}, {"kappa": 0.0, "v_theta": float(v[1])})
    fr, u, du = q.frame, q.speed, q.speed_rate
    e_theta = basis(to_cylindrical(fr.position)[1])[1]
    n_th, b_th = float(fr.n @ e_theta), float(fr.b @ e_theta)
    m1 = abs(fr.dkappa_ds) * u * u / 6.0 - fr.kappa * du
    m2 = 0.5 * abs(fr.dkappa_ds) - abs(fr.kappa * fr.torsion * b_th)
    m3 = min(n_th + 1.0, -0.5 - n_th)
    margins = {"speed_rate": float(m1), "torsion": float(m2), "normal_azimuth": float(m3)}
    cls = {k: (HOLDS if m > 0 else FAILS) for k, m in margins.items()}
    if abs(v[1]) == 0.0:
        cls = {k: DEGENERATE for k in names}
    elif abs(fr.dkappa_ds) <= dkappa_floor * fr.kappa:
        cls["speed_rate"] = cls["torsion"] = DEGENERATE
    quantities = {
        "kappa": fr.kappa,
        "torsion": fr.torsion,
        "dkappa_ds": fr.dkappa_ds,
        "speed": u,
        "speed_rate": du,
        "n_e_theta": n_th,
        "b_e_theta": b_th,
        "v_theta": float(v[1]),
    }
    return KeyInequalities(margins, cls, quantities)


# -- instability scan ------------------------------------------------------------------


@dataclass(frozen=True)
class ScanParams:
    """Grid and admissibility settings for the inflow instability scan.

    ``g2_values`` fixes the g''(0) grid explicitly; when empty, g''(0) runs over
    ``g2_factors`` times g'(0)/delta^2 for each g'(0).  Seeds are (inflow
    radius, axial station) pairs probed at t = 0.
    """

    eps: float = 0.5
    beta: float = 2.0
    delta: float = 0.1
    g0_values: tuple = (1.0,)
    g1_values: tuple = (20.0, 40.0, 80.0, 160.0, 320.0)
    g2_values: tuple = ()
    g2_factors: tuple = (2.0, 5.0, 10.0)
    seeds: tuple = ((0.8, 0.0),)
    swirl: float = 1.0
    swirl_band: tuple = (0.5, 2.0)
    gain: float = 1e-3
    response: float = 1e-3
    contraction: float = 0.25
    z_in: float = -20.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12

    def __post_init__(self):
        for name in ("eps", "beta", "delta", "rel_tol", "abs_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"scan parameter {name} must be positive")
        lo, hi = self.swirl_band
        if not 0 <= lo <= hi:
            raise DomainError(f"swirl band {self.swirl_band!r} is not an ordered nonnegative interval")

    def grid(self) -> list[tuple[float, float, float]]:
        pts = []
        for g0 in self.g0_values:
            for g1 in self.g1_values:
                g2s = self.g2_values or tuple(f * g1 / self.delta**2 for f in self.g2_factors)
                pts.extend((float(g0), float(g1), float(g2)) for g2 in g2s)
        return pts

    def flux_admissibility(self, g0: float, g1: float, g2: float) -> str:
        """Empty string when admissible, otherwise the violated condition."""
        if not self.beta**-5 <= g0 <= self.eps**-5:
            return f"g(0) = {g0!r} outside [1/beta^5, 1/eps^5] = [{self.beta**-5!r}, {self.eps**-5!r}]"
        if not self.delta**-3 < g1 / self.delta**2:
            return f"g'(0)/delta^2 = {g1 / self.delta**2!r} not above 1/delta^3 = {self.delta**-3!r}"
        if not g1 / self.delta**2 < g2:
            return f"g''(0) = {g2!r} not above g'(0)/delta^2 = {g1 / self.delta**2!r}"
        return ""


def swirl_family(params: ScanParams, g: InflowProfile) -> AxisymmetricField:
    return swirl_nozzle_field(g, params.swirl, params.gain, params.response, params.contraction)


def no_swirl_family(params: ScanParams, g: InflowProfile) -> AxisymmetricField:
    return swirl_nozzle_field(g, 0.0, params.gain, params.response, params.contraction)


FAMILIES = {"swirl_nozzle": swirl_family, "no_swirl": no_swirl_family}

SCAN_COLUMNS = (
    "index", "g0", "g1", "g2", "eps", "beta", "delta", "seed_r0", "seed_z", "radius", "v_theta",
    "L_x", "L_t", "L_t_half", "margin_speed_rate", "margin_torsion", "margin_normal_azimuth",
    "class_speed_rate", "class_torsion", "class_normal_azimuth",
)


@dataclass
class ScanResult:
    params: ScanParams
    family: str
    rows: list
    skipped: list
    trend: dict
    diagnostic: str = ""

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "columns": list(SCAN_COLUMNS),
            "rows": self.rows,
            "skipped": self.skipped,
            "trend": self.trend,
            "diagnostic": self.diagnostic,
        }


def _scan_point(params: ScanParams, family, index: int, g: tuple, seed: tuple, check_swirl: bool):
    g0, g1, g2 = g
    profile = InflowProfile.quadratic(g0, g1, g2)
    field = family(params, profile)
    r0, z = (float(v) for v in seed)
    base = trace_streamline(field, r0, 0.0, (params.z_in, z), params.rel_tol, params.abs_tol)
    radius = base.radius(z)
    v_theta = float(field.velocity(radius, z, 0.0)[1])
    if not radius > 1.0 / params.beta:
        return None, f"seed radius {radius!r} not above 1/beta = {1.0 / params.beta!r}"
    lo, hi = params.swirl_band
    if check_swirl and not lo <= v_theta <= hi:
        return None, f"swirl {v_theta!r} outside the band [{lo!r}, {hi!r}]"
    dt = default_time_step(profile, 0.0)
    rates = laminar_rate_t(field, 0.0, dt, r0, z, params.z_in, params.rel_tol, params.abs_tol)
    traj = integrate_trajectory(field, (radius, 0.0, z), (0.0, 10.0 * dt))
    ki = key_inequalities(field, traj, 0.0)
    m, c = ki.margins, ki.classification
    row = [index, g0, g1, g2, params.eps, params.beta, params.delta, r0, z, radius, v_theta,
           rates.L_x, rates.L_t, rates.L_t_half, m["speed_rate"], m["torsion"], m["normal_azimuth"],
           c["speed_rate"], c["torsion"], c["normal_azimuth"]]
    return row, ""


def _trend(rows: list) -> dict:
    if len(rows) < 2:
        return {"kendall_tau_g1": math.nan, "p_value_g1": math.nan,
                "kendall_tau_g2": math.nan, "p_value_g2": math.nan, "n": len(rows)}
    lt = [r[SCAN_COLUMNS.index("L_t")] for r in rows]
    out = {"n": len(rows)}
    for key in ("g1", "g2"):
        res = kendalltau([r[SCAN_COLUMNS.index(key)] for r in rows], lt)
        out[f"kendall_tau_{key}"] = float(res.statistic)
        out[f"p_value_{key}"] = float(res.pvalue)
    return out


def instability_scan(params: ScanParams, family="swirl_nozzle", threads: int = 1) -> ScanResult:
    """L^x, L^t and key-inequality margins over the admissible inflow grid.

    Inadmissible grid points and seeds are skipped with the reason recorded.
    Rows are ordered by grid index regardless of ``threads``.
    """
    name = family if isinstance(family, str) else getattr(family, "__name__", "custom")
    fam = FAMILIES[family] if isinstance(family, str) else family
    check_swirl = name != "no_swirl"
    jobs, skipped = [], []
    index = 0
    for g in params.grid():
        reason = params.flux_admissibility(*g)
        for seed in params.seeds:
            if reason:
                skipped.append({"index": index, "g": list(g), "seed": list(seed), "reason": reason})
            else:
                jobs.append((index, g, tuple(seed)))
            index += 1
    run = lambda job: (job, _scan_point(params, fam, job[0], job[1], job[2], check_swirl))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    rows = []
    for (idx, g, seed), (row, reason) in results:
        if row is None:
            skipped.append({"index": idx, "g": list(g), "seed": list(seed), "reason": reason})
        else:
            rows.append(row)
    rows.sort(key=lambda r: r[0])
    skipped.sort(key=lambda s: s["index"])
    diagnostic = ""
    if not rows:
        diagnostic = "empty admissible set"
        if params.beta**-5 > params.eps**-5:
            diagnostic += f": 1/beta^5 = {params.beta**-5!r} exceeds 1/eps^5 = {params.eps**-5!r}"
    return ScanResult(params, name, rows, skipped, _trend(rows), diagnostic)


def write_scan_csv(path, result: ScanResult) -> None:
    write_csv(path, SCAN_COLUMNS, result.rows, f"instability scan, family {result.family}")
