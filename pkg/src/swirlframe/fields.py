"""Axisymmetric velocity fields, their derivatives and Euler-solution checks.

A field is evaluated in cylindrical components ``(v_r, v_theta, v_z)`` as a
function of ``(r, z, t)``.  Partial derivatives are addressed by keys
``(component, i, j, k)`` meaning ``d^i/dr^i d^j/dz^j d^k/dt^k`` of the component
(0 = v_r, 1 = v_theta, 2 = v_z).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np
import sympy as sp

from . import stencils, taylor
from .errors import DomainError

r_sym, z_sym, t_sym = sp.symbols("r z t", real=True)

R_MIN = 1e-8
ODD, EVEN = "odd", "even"
SLOPE_RADIAL, SLOPE_SWIRL = -1, -2
COMPONENTS = ("v_r", "v_theta", "v_z")

Key = tuple[int, int, int, int]


def _to_expr(value, name: str = "expression") -> sp.Expr:
    if isinstance(value, sp.Basic):
        return value
    if isinstance(value, (int, float)):
        return sp.Float(value) if isinstance(value, float) else sp.Integer(value)
    if isinstance(value, str):
        return sp.sympify(value, locals={"r": r_sym, "z": z_sym, "t": t_sym})
    raise TypeError(f"{name} must be a number, string or sympy expression, got {type(value).__name__}")


class InflowProfile:
    """Uniform inflow speed ``g(t)`` with derivatives.

    Built either from a symbolic expression in ``t`` (exact derivatives) or from
    a plain callable (derivatives by central differences).
    """

    def __init__(self, g: Any = None, *, label: str | None = None):
        if callable(g) and not isinstance(g, sp.Basic):
            self.expr = None
            self._func = g
            self._derivs = {}
        else:
            self.expr = _to_expr(g, "inflow profile")
            self._func = None
            self._derivs = {}
        self.label = label or (str(self.expr) if self.expr is not None else getattr(g, "__name__", "g"))

    @classmethod
    def constant(cls, value: float) -> "InflowProfile":
        return cls(float(value))

    @classmethod
    def quadratic(cls, g0: float, g1: float, g2: float) -> "InflowProfile":
        """``g(t) = g0 + g1 t + g2 t^2 / 2`` so that g(0), g'(0), g''(0) = g0, g1, g2."""
        expr = sp.Float(g0) + sp.Float(g1) * t_sym + sp.Float(g2) * t_sym**2 / 2
        return cls(expr, label=f"quadratic({g0!r}, {g1!r}, {g2!r})")

    def _compiled(self, k: int) -> Callable[[float], float]:
        fn = self._derivs.get(k)
        if fn is None:
            fn = sp.lambdify(t_sym, sp.diff(self.expr, t_sym, k), modules="math")
            self._derivs[k] = fn
        return fn

    def derivative(self, t: float, k: int = 1) -> float:
        if self.expr is not None:
            return float(self._compiled(k)(t))
        return float(stencils.derivative(self._func, t, k))

    def __call__(self, t: float) -> float:
        return self.derivative(t, 0)

    def d1(self, t: float) -> float:
        return self.derivative(t, 1)

    def d2(self, t: float) -> float:
        return self.derivative(t, 2)

    def variation_timescale(self, t: float = 0.0) -> float:
        """min(g/|g'|, sqrt(g/|g''|)); infinite for a constant profile."""
        g = abs(self(t))
        scales = [math.inf]
        g1, g2 = abs(self.d1(t)), abs(self.d2(t))
        if g1 > 0:
            scales.append(g / g1)
        if g2 > 0:
            scales.append(math.sqrt(g / g2))
        return min(scales)

    def check_positive(self, times: Iterable[float]) -> None:
        for t in times:
            if not self(t) > 0:
                raise DomainError(f"inflow g(t) must be positive; g({t!r}) = {self(t)!r}")

    def __repr__(self) -> str:
        return f"InflowProfile({self.label})"


def _inflow_expr(g) -> sp.Expr:
    if isinstance(g, InflowProfile):
        if g.expr is None:
            raise TypeError("catalog fields need a symbolic inflow profile (expression in t)")
        return g.expr
    return _to_expr(g, "inflow profile")


class AxisymmetricField:
    """Base class for an axisymmetric velocity field on a cylinder.

    Subclasses implement :meth:`_raw_partials`.  Points closer to the axis than
    ``r_min`` are evaluated through the declared parity of each component.
    """

    def __init__(
        self,
        *,
        name: str,
        params: dict | None = None,
        r_max: float = 1.0,
        z_range: tuple[float, float] = (-math.inf, math.inf),
        t_range: tuple[float, float] = (-math.inf, math.inf),
        parity: tuple[str, str, str] = (ODD, ODD, EVEN),
        incompressible: bool = True,
        side_wall: bool = True,
        pressure_gradient: Callable[[float, float, float], tuple[float, float]] | None = None,
        r_min: float = R_MIN,
    ):
        if not r_max > 0:
            raise DomainError(f"r_max must be positive, got {r_max!r}")
        self.name = name
        self.params = dict(params or {})
        self.r_max = float(r_max)
        self.z_range = (float(z_range[0]), float(z_range[1]))
        self.t_range = (float(t_range[0]), float(t_range[1]))
        self.parity = tuple(parity)
        self.incompressible = incompressible
        self.side_wall = side_wall
        self.pressure_gradient = pressure_gradient
        self.r_min = r_min

    # -- evaluation -----------------------------------------------------------------

    def _raw_partials(self, keys: Sequence[Key], r: float, z: float, t: float) -> np.ndarray:
        raise NotImplementedError

    def map_partials(self, keys: Sequence[Key], r: float, z: float, t: float) -> np.ndarray:
        """Like :meth:`partials`, also accepting the slope ratios as components.

        Component ``SLOPE_RADIAL`` is v_r / v_z and ``SLOPE_SWIRL`` is
        v_theta / v_z; their keys must not carry time derivatives.
        """
        keys = tuple(keys)
        ratio = [k for k in keys if k[0] < 0]
        if not ratio:
            return self.partials(keys, r, z, t)
        order = max(k[1] + k[2] for k in ratio)
        idx = [(i, j) for i, j, _ in taylor.multi_indices(order, (True, True, False))]
        nums = sorted({-k[0] - 1 for k in ratio})
        comps = sorted(set(nums) | {2})
        raw_keys = [(c, i, j, 0) for c in comps for (i, j) in idx]
        vals = self.partials(raw_keys, r, z, t).reshape(len(comps), len(idx))
        jets = {c: dict(zip(idx, vals[n])) for n, c in enumerate(comps)}
        direct = [k for k in keys if k[0] >= 0]
        direct_vals = dict(zip(direct, self.partials(direct, r, z, t))) if direct else {}
        out = []
        for key in keys:
            c, i, j, k = key
            if c >= 0:
                out.append(direct_vals[key])
            elif k:
                raise ValueError("slope ratios are taken at fixed time")
            else:
                out.append(_quotient_partial(jets[-c - 1], jets[2], i, j))
        return np.array(out, dtype=float)

    def partials(self, keys: Sequence[Key], r: float, z: float, t: float) -> np.ndarray:
        keys = tuple(keys)
        if r >= self.r_min:
            return self._raw_partials(keys, r, z, t)
        vals = np.array(self._raw_partials(keys, self.r_min, z, t), dtype=float)
        scale = max(r, 0.0) / self.r_min
        for n, (c, i, _, _) in enumerate(keys):
            odd = (self.parity[c] == ODD) != (i % 2 == 1)
            if odd:
                vals[n] *= scale
        return vals

    def partial(self, comp: int, i: int, j: int, k: int, r: float, z: float, t: float) -> float:
        return float(self.partials(((comp, i, j, k),), r, z, t)[0])

    def velocity(self, r: float, z: float, t: float) -> np.ndarray:
        return self.partials(((0, 0, 0, 0), (1, 0, 0, 0), (2, 0, 0, 0)), r, z, t)

    def speed(self, r: float, z: float, t: float) -> float:
        return float(np.linalg.norm(self.velocity(r, z, t)))

    def jet(self, r: float, z: float, t: float, order: int, active=(True, True, True)) -> list[dict]:
        """Per-component dicts ``{(i, j, k): partial}`` up to total ``order``."""
        idx = taylor.multi_indices(order, active)
        keys = [(c,) + m for c in range(3) for m in idx]
        vals = self.partials(keys, r, z, t)
        n = len(idx)
        return [dict(zip(idx, vals[c * n : (c + 1) * n])) for c in range(3)]

    def check_domain(self, r: float, z: float, t: float) -> None:
        if not r >= 0.0:
            raise DomainError(f"r = {r!r} is below the axis bound 0")
        if r > self.r_max * (1 + 1e-12):
            raise DomainError(f"r = {r!r} exceeds the radial bound r_max = {self.r_max!r}")
        if not self.z_range[0] <= z <= self.z_range[1]:
            raise DomainError(f"z = {z!r} outside the axial range {self.z_range}")
        if not self.t_range[0] <= t <= self.t_range[1]:
            raise DomainError(f"t = {t!r} outside the time range {self.t_range}")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, {self.params})"


def _quotient_partial(num: dict, den: dict, i: int, j: int) -> float:
    """Mixed partial of num/den from the partials of both (bivariate series division)."""
    order = i + j
    # Taylor coefficients a_{pq} = d^{p+q} f / (p! q!)
    a = {k: v / (math.factorial(k[0]) * math.factorial(k[1])) for k, v in num.items() if sum(k) <= order}
    b = {k: v / (math.factorial(k[0]) * math.factorial(k[1])) for k, v in den.items() if sum(k) <= order}
    q: dict = {}
    b00 = b[(0, 0)]
    for total in range(order + 1):
        for p in range(total + 1):
            qq = total - p
            acc = a.get((p, qq), 0.0)
            for (bp, bq), bv in b.items():
                if (bp, bq) == (0, 0) or bp > p or bq > qq:
                    continue
                acc -= bv * q[(p - bp, qq - bq)]
            q[(p, qq)] = acc / b00
    return q[(i, j)] * math.factorial(i) * math.factorial(j)


class SymbolicField(AxisymmetricField):
    """Field given by sympy expressions in ``r``, ``z``, ``t``; derivatives are exact."""

    def __init__(self, v_r, v_theta, v_z, *, pressure_gradient=None, **meta):
        self.exprs = tuple(_to_expr(e, n) for e, n in zip((v_r, v_theta, v_z), COMPONENTS))
        self._deriv_exprs: dict = {}
        self._compiled: dict = {}
        self._lock = threading.Lock()
        pg = None
        self.pressure_gradient_exprs = None
        if pressure_gradient is not None:
            self.pressure_gradient_exprs = tuple(_to_expr(e) for e in pressure_gradient)
            pg_fn = sp.lambdify((r_sym, z_sym, t_sym), list(self.pressure_gradient_exprs), modules="numpy")

            def pg(r, z, t):
                return tuple(float(v) for v in pg_fn(r, z, t))

        super().__init__(pressure_gradient=pg, **meta)
        self._ratios = {}
        if self.exprs[2] != 0:
            self._ratios = {
                SLOPE_RADIAL: sp.cancel(self.exprs[0] / self.exprs[2]),
                SLOPE_SWIRL: sp.cancel(self.exprs[1] / self.exprs[2]),
            }

    def derivative_expr(self, comp: int, i: int, j: int, k: int) -> sp.Expr:
        key = (comp, i, j, k)
        e = self._deriv_exprs.get(key)
        if e is None:
            e = self.exprs[comp] if comp >= 0 else self._ratios[comp]
            for sym, n in ((r_sym, i), (z_sym, j), (t_sym, k)):
                if n:
                    e = sp.diff(e, sym, n)
            self._deriv_exprs[key] = e
        return e

    def _function(self, keys: tuple):
        fn = self._compiled.get(keys)
        if fn is None:
            with self._lock:
                exprs = [self.derivative_expr(*k) for k in keys]
                fn = sp.lambdify((r_sym, z_sym, t_sym), exprs, modules="numpy", cse=True)
                self._compiled[keys] = fn
        return fn

    def _raw_partials(self, keys, r, z, t):
        return np.array(self._function(keys)(r, z, t), dtype=float)

    def map_partials(self, keys, r, z, t):
        keys = tuple(keys)
        if not self._ratios or all(k[0] >= 0 for k in keys):
            return super().map_partials(keys, r, z, t)
        # ratios are cancelled symbolically so that a common factor such as g(t)
        # drops out exactly
        return np.array(self._function(keys)(max(r, self.r_min), z, t), dtype=float)


class CallableField(AxisymmetricField):
    """Field from plain callables ``f(r, z, t)``; derivatives by finite differences.

    Nested central differences; every direction of a partial of total order n
    uses the step eps^(1/(n+2)) * max(1, |x|), so eps^(1/3) for first and
    eps^(1/4) for second derivatives.  One-sided stencils near the axis.
    """

    def __init__(self, v_r: Callable, v_theta: Callable, v_z: Callable, **meta):
        self.funcs = (v_r, v_theta, v_z)
        super().__init__(**meta)

    def _fd(self, comp: int, i: int, j: int, k: int, r: float, z: float, t: float) -> float:
        f = self.funcs[comp]
        n = i + j + k
        step = lambda x: stencils.default_step(x, n)

        # innermost derivative in t, then z, then r
        def in_t(rr, zz):
            g = lambda tt: float(f(rr, zz, tt))
            return stencils.derivative(g, t, k, h=step(t)) if k else g(t)

        def in_z(rr):
            g = lambda zz: in_t(rr, zz)
            return stencils.derivative(g, z, j, h=step(z)) if j else g(z)

        if i:
            return float(stencils.derivative(in_z, r, i, h=step(r), lower=0.0))
        return float(in_z(r))

    def _raw_partials(self, keys, r, z, t):
        return np.array([self._fd(c, i, j, k, r, z, t) for c, i, j, k in keys], dtype=float)


# -- operations ---------------------------------------------------------------------


def eval_field(field: AxisymmetricField, r: float, z: float, t: float) -> np.ndarray:
    """(v_r, v_theta, v_z) at a point, after checking the field's domain."""
    field.check_domain(r, z, t)
    return field.velocity(r, z, t)


def _over_r(num: float, r: float, what: str) -> float:
    if r > 0:
        return num / r
    if num == 0.0:
        return 0.0
    raise DomainError(f"{what} is singular on the axis: numerator {num!r} does not vanish at r = 0")


def divergence(field: AxisymmetricField, r: float, z: float, t: float) -> float:
    """(1/r) d_r(r v_r) + d_z v_z; the axis uses the limit 2 d_r v_r + d_z v_z."""
    vr, vr_r, vz_z = field.partials(((0, 0, 0, 0), (0, 1, 0, 0), (2, 0, 1, 0)), r, z, t)
    if r > 0:
        return float(vr_r + vr / r + vz_z)
    if vr != 0.0:
        raise DomainError(f"divergence undefined on the axis: v_r(0) = {vr!r} != 0")
    return float(2.0 * vr_r + vz_z)


_ACC_KEYS = tuple((c, i, j, k) for c in range(3) for (i, j, k) in ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)))


def material_acceleration(field: AxisymmetricField, r: float, z: float, t: float) -> np.ndarray:
    """Cylindrical components of D u / D t."""
    p = field.partials(_ACC_KEYS, r, z, t).reshape(3, 4)
    (vr, vr_r, vr_z, vr_t), (vt, vt_r, vt_z, vt_t), (vz, vz_r, vz_z, vz_t) = p
    a_r = vr_t + vr * vr_r + vz * vr_z - _over_r(vt * vt, r, "v_theta^2 / r")
    a_t = vt_t + vr * vt_r + vz * vt_z + _over_r(vr * vt, r, "v_r v_theta / r")
    a_z = vz_t + vr * vz_r + vz * vz_z
    return np.array([a_r, a_t, a_z])


_CURL_ORDERS = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1))
_CURL_KEYS = tuple((c,) + m for c in range(3) for m in _CURL_ORDERS)


def acceleration_curl(field: AxisymmetricField, r: float, z: float, t: float) -> tuple[np.ndarray, float]:
    """Material acceleration and the azimuthal curl d_z a_r - d_r a_z."""
    p = field.partials(_CURL_KEYS, r, z, t).reshape(3, len(_CURL_ORDERS))
    vr, vr_r, vr_z, vr_t, vr_rr, vr_rz, vr_zz, vr_rt, vr_zt = p[0]
    vt, vt_r, vt_z, vt_t = p[1][:4]
    vz, vz_r, vz_z, vz_t, vz_rr, vz_rz, vz_zz, vz_rt, vz_zt = p[2]
    a_r = vr_t + vr * vr_r + vz * vr_z - _over_r(vt * vt, r, "v_theta^2 / r")
    a_t = vt_t + vr * vt_r + vz * vt_z + _over_r(vr * vt, r, "v_r v_theta / r")
    a_z = vz_t + vr * vz_r + vz * vz_z
    dz_ar = vr_zt + vr_z * vr_r + vr * vr_rz + vz_z * vr_z + vz * vr_zz - 2.0 * _over_r(vt * vt_z, r, "v_theta d_z v_theta / r")
    dr_az = vz_rt + vr_r * vz_r + vr * vz_rr + vz_r * vz_z + vz * vz_rz
    return np.array([a_r, a_t, a_z]), float(dz_ar - dr_az)


@dataclass
class CertificationReport:
    """Outcome of checking that -Du/Dt is a gradient (single-valued pressure)."""

    max_a_theta: float
    max_curl: float
    max_accel: float
    tolerance: float
    n_points: int
    worst_point: tuple[float, float, float] | None = None

    @property
    def relative_a_theta(self) -> float:
        return self.max_a_theta / max(self.max_accel, 1e-300)

    @property
    def relative_curl(self) -> float:
        return self.max_curl / max(self.max_accel, 1e-300)

    @property
    def exact_euler(self) -> bool:
        scale = max(self.max_accel, 1e-300)
        return self.max_a_theta <= self.tolerance * scale and self.max_curl <= self.tolerance * scale

    def as_dict(self) -> dict:
        return {
            "max_a_theta": self.max_a_theta,
            "max_curl": self.max_curl,
            "max_accel": self.max_accel,
            "tolerance": self.tolerance,
            "n_points": self.n_points,
            "exact_euler": self.exact_euler,
        }


def pressure_gradient_certify(
    field: AxisymmetricField, sample_grid: Iterable[Sequence[float]], tol: float = 1e-8
) -> CertificationReport:
    """Check a_theta = 0 and d_z a_r = d_r a_z on the sample points.

    The curl residual is scaled by r_max so that both measures share the units
    of the acceleration.
    """
    max_at = max_curl = max_a = 0.0
    worst = None
    n = 0
    for r, z, t in sample_grid:
        a, curl = acceleration_curl(field, r, z, t)
        n += 1
        max_a = max(max_a, float(np.max(np.abs(a))))
        if abs(a[1]) > max_at or abs(curl) * field.r_max > max_curl:
            worst = (float(r), float(z), float(t))
        max_at = max(max_at, abs(float(a[1])))
        max_curl = max(max_curl, abs(curl) * field.r_max)
    return CertificationReport(max_at, max_curl, max_a, tol, n, worst)


def default_sample_grid(field: AxisymmetricField, z=(-1.0, 1.0), t=(0.0, 1.0), n: int = 5) -> list:
    """A small tensor grid inside the field's domain for certification."""
    z0, z1 = (max(z[0], field.z_range[0]), min(z[1], field.z_range[1]))
    t0, t1 = (max(t[0], field.t_range[0]), min(t[1], field.t_range[1]))
    rs = np.linspace(0.1, 0.9, n) * field.r_max
    return [(float(a), float(b), float(c)) for a in rs for b in np.linspace(z0, z1, n) for c in np.linspace(t0, t1, 3)]


def womersley_number(R: float, N: float, nu: float) -> float:
    """alpha = R sqrt(N / nu)."""
    for name, v in (("R", R), ("N", N), ("nu", nu)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v!r}")
    return R * math.sqrt(N / nu)


# -- catalog ------------------------------------------------------------------------


def poiseuille_field(p_s: float, nu: float, ell: float, R: float = 1.0) -> SymbolicField:
    """Steady pipe flow v_z = p_s (R^2 - r^2) / (4 nu ell)."""
    for name, v in (("p_s", p_s), ("nu", nu), ("ell", ell), ("R", R)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v!r}")
    vz = sp.Float(p_s) * (sp.Float(R) ** 2 - r_sym**2) / (4 * sp.Float(nu) * sp.Float(ell))
    return SymbolicField(0, 0, vz, name="poiseuille", params=dict(p_s=p_s, nu=nu, ell=ell, R=R), r_max=R)


def uniform_field(g=1.0, r_max: float = 1.0) -> SymbolicField:
    """Columnar flow (0, 0, g(t)); exact Euler solution with grad p = (0, -g')."""
    ge = _inflow_expr(g)
    return SymbolicField(
        0, 0, ge, name="uniform", params=dict(g=str(ge)), r_max=r_max,
        pressure_gradient=(0, -sp.diff(ge, t_sym)),
    )


def rigid_swirl_pulsatile_field(omega: float, g, r_max: float = 1.0) -> SymbolicField:
    """v = (0, omega r, g(t)); exact Euler with grad p = (omega^2 r, -g'(t))."""
    ge = _inflow_expr(g)
    w = sp.Float(omega)
    return SymbolicField(
        0, w * r_sym, ge, name="rigid_swirl_pulsatile", params=dict(omega=omega, g=str(ge)),
        r_max=r_max, pressure_gradient=(w**2 * r_sym, -sp.diff(ge, t_sym)),
    )


def rigid_rotation_axial_field(omega: float, c: float, r_max: float = 1.0) -> SymbolicField:
    """Steady rigid rotation plus constant axial speed ``c`` (which may be zero)."""
    w = sp.Float(omega)
    return SymbolicField(
        0, w * r_sym, sp.Float(c), name="rigid_rotation_axial", params=dict(omega=omega, c=c),
        r_max=r_max, pressure_gradient=(w**2 * r_sym, 0),
    )


def radial_expansion_field(rate: float = 1.0) -> SymbolicField:
    """v_r = rate * r, other components zero (compressible test field)."""
    return SymbolicField(sp.Float(rate) * r_sym, 0, 0, name="radial_expansion", params=dict(rate=rate), incompressible=False)


def stream_function_field(psi, v_theta=0, *, name: str = "stream_function", params=None, **meta) -> AxisymmetricField:
    """Divergence-free field v_r = -d_z psi / r, v_z = d_r psi / r.

    ``psi`` may be symbolic (exact) or a callable ``psi(r, z, t)``; in the
    callable case derivatives use finite differences and points with
    r < r_min use the axis limit d_r psi / r -> d_r^2 psi.
    """
    if callable(psi) and not isinstance(psi, sp.Basic):
        vt = v_theta if callable(v_theta) else (lambda r, z, t, c=float(v_theta): c)
        r_min = meta.get("r_min", R_MIN)

        def vr(r, z, t):
            rr = max(r, r_min)
            return -stencils.derivative(lambda zz: psi(rr, zz, t), z, 1) / rr

        def vz(r, z, t):
            rr = max(r, r_min)
            return stencils.derivative(lambda q: psi(q, z, t), rr, 1, lower=0.0) / rr

        return CallableField(vr, vt, vz, name=name, params=dict(params or {}), **meta)
    pe = _to_expr(psi, "stream function")
    vr = -sp.diff(pe, z_sym) / r_sym
    vz = sp.diff(pe, r_sym) / r_sym
    return SymbolicField(vr, _to_expr(v_theta, "v_theta"), vz, name=name, params=dict(params or {}, psi=str(pe)), **meta)


def nozzle_profile(contraction: float = 0.25) -> sp.Expr:
    """a(z) = 1 + contraction (1 + tanh z): unity upstream, 1 + 2 contraction downstream."""
    return 1 + sp.Float(contraction) * (1 + sp.tanh(z_sym))


def nozzle_field(g=1.0, contraction: float = 0.25, swirl=0, z_in: float = -20.0) -> AxisymmetricField:
    """Contracting stream-tube flow psi = g(t) r^2 a(z) / 2, so R = r0 / sqrt(a)."""
    ge = _inflow_expr(g)
    a = nozzle_profile(contraction)
    f = stream_function_field(
        ge * r_sym**2 * a / 2, swirl, name="nozzle",
        params=dict(g=str(ge), contraction=contraction, swirl=str(swirl)), side_wall=False,
    )
    f.params["z_in"] = z_in
    return f


def swirl_vortex_nozzle_field(g=1.0, circulation: float = 0.5, contraction: float = 0.25) -> AxisymmetricField:
    """Nozzle with a potential vortex v_theta = c / r (r v_theta conserved along paths)."""
    f = nozzle_field(g, contraction, swirl=sp.Float(circulation) / r_sym)
    f.name = "swirl_vortex_nozzle"
    f.params["circulation"] = circulation
    return f


def modulated_nozzle_field(g=1.0, amplitude: float = 0.5) -> AxisymmetricField:
    """Time-modulated nozzle a(z, t) = 1 + (1 + tanh z)(1 + amplitude sin t) / 8."""
    ge = _inflow_expr(g)
    a = 1 + (1 + sp.tanh(z_sym)) * (1 + sp.Float(amplitude) * sp.sin(t_sym)) / 8
    f = stream_function_field(ge * r_sym**2 * a / 2, 0, name="modulated_nozzle",
                              params=dict(g=str(ge), amplitude=amplitude), side_wall=False)
    f.params["z_in"] = -20.0
    return f


def swirl_nozzle_field(
    g, swirl: float = 1.0, gain: float = 1e-3, response: float = 1e-3, contraction: float = 0.25
) -> AxisymmetricField:
    """Kinematic swirl/pulsatile nozzle used by the instability scan.

    Contraction profile a(z, t) = 1 + contraction (1 + tanh z)(1 + tanh m(t)) with
    the swirl-driven modulation

        m(t) = gain * swirl^2 * [(g(t) - g(0)) + response * (g'(t) - g'(0))],

    anchored so that m(0) = 0.  Swirl v_theta = swirl * r * a(z, t) keeps
    r v_theta constant on the frozen stream surfaces.  With swirl = 0 the map
    is time independent.  This is a surrogate family, not an Euler solution.
    """
    ge = _inflow_expr(g)
    s = sp.Float(swirl)
    gp = sp.diff(ge, t_sym)
    drive = (ge - ge.subs(t_sym, 0)) + sp.Float(response) * (gp - gp.subs(t_sym, 0))
    m = sp.Float(gain) * s**2 * drive
    a = 1 + sp.Float(contraction) * (1 + sp.tanh(z_sym)) * (1 + sp.tanh(m))
    f = stream_function_field(
        ge * r_sym**2 * a / 2, s * r_sym * a, name="swirl_nozzle",
        params=dict(g=str(ge), swirl=swirl, gain=gain, response=response, contraction=contraction),
        side_wall=False,
    )
    f.params["z_in"] = -20.0
    return f


def sheared_swirl_field(omega0: float = 1.0, shear: float = 0.5, c: float = 1.0) -> SymbolicField:
    """v_theta = omega(z) r with omega(z) = omega0 (1 + shear tanh z): not an Euler solution."""
    om = sp.Float(omega0) * (1 + sp.Float(shear) * sp.tanh(z_sym))
    return SymbolicField(0, om * r_sym, sp.Float(c), name="sheared_swirl", params=dict(omega0=omega0, shear=shear, c=c))


def strained_vortex_field(strain=0.5, circulation: float = 0.5, g=1.0, z_in: float = 0.0) -> SymbolicField:
    """Potential flow v = (-s(t) r, circulation / r, 2 s(t) z + g(t)).

    An exact Euler solution (p = -d_t phi - |u|^2 / 2) with radial inflow and
    swirl; singular on the axis, so trajectories must stay off it.  The flow
    stagnates on the plane z = -g / (2 s), so the streamline inflow station
    ``z_in`` has to sit downstream of it.
    """
    se = _inflow_expr(strain)
    ge = _inflow_expr(g)
    gam = sp.Float(circulation)
    v = (-se * r_sym, gam / r_sym, 2 * se * z_sym + ge)
    # -Du/Dt is the pressure gradient
    a_r = sp.diff(v[0], t_sym) + v[0] * sp.diff(v[0], r_sym) + v[2] * sp.diff(v[0], z_sym) - v[1] ** 2 / r_sym
    a_z = sp.diff(v[2], t_sym) + v[0] * sp.diff(v[2], r_sym) + v[2] * sp.diff(v[2], z_sym)
    return SymbolicField(
        *v, name="strained_vortex", params=dict(strain=str(se), circulation=circulation, g=str(ge), z_in=z_in),
        side_wall=False, pressure_gradient=(sp.expand(-a_r), sp.expand(-a_z)),
    )


def profiled_nozzle_field(g=1.0, contraction: float = 0.25, bulge: float = 0.5) -> AxisymmetricField:
    """Nozzle whose downstream profile is non-uniform.

    psi = g r^2 a(z) (1 + bulge r^2 s(z)) / 2 with s(z) = (1 + tanh z) / 2, so
    the inflow is uniform but the radial map is nonlinear in the inflow radius.
    """
    ge = _inflow_expr(g)
    a = nozzle_profile(contraction)
    shape = (1 + sp.tanh(z_sym)) / 2
    f = stream_function_field(
        ge * r_sym**2 * a * (1 + sp.Float(bulge) * r_sym**2 * shape) / 2, 0, name="profiled_nozzle",
        params=dict(g=str(ge), contraction=contraction, bulge=bulge), side_wall=False,
    )
    f.params["z_in"] = -20.0
    return f
