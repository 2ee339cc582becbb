"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line (also collected in the pytest
terminal summary) and then asserts both the accuracy bound and the runtime
budget.
"""

import math
import time

import numpy as np
import pytest

from swirlframe import fields as F
from swirlframe.atlas import (
    build_streamline_map,
    default_time_step,
    flux_conservation,
    laminar_rate_t,
    laminar_rate_x,
    reconstruct_velocity,
    swirl_transport,
)
from swirlframe.fields import InflowProfile
from swirlframe.frenet import frenet_apparatus, moving_frame_matrices
from swirlframe.identities import (
    IDENTITY_NAMES,
    SCAN_COLUMNS,
    ScanParams,
    certify,
    check_pressure_identities,
    instability_scan,
    rotation_balance,
)
from swirlframe.trajectory import integrate_trajectory, reparametrize_arclength
from swirlframe.womersley import WomersleyParams, momentum_residual, womersley_field

from conftest import catalog_incompressible


def relerr(got, want):
    return abs(got - want) / abs(want)


def test_criterion_01_helix_frenet(acceptance):
    start = time.perf_counter()
    field = F.rigid_rotation_axial_field(1.0, 1.0, r_max=1.0)
    arc = reparametrize_arclength(integrate_trajectory(field, (1.0, 0.0, 0.0), (0.0, 2 * math.pi)))
    frames = [frenet_apparatus(arc, s) for s in np.linspace(0.5, 8.0, 10)]
    elapsed = time.perf_counter() - start
    err = max(max(relerr(f.kappa, 0.5), relerr(f.torsion, 0.5)) for f in frames)
    ok = acceptance(1, "helix curvature and torsion", err < 1e-6, elapsed, 1.0, f"max relative error {err:.2e}")
    assert err < 1e-6 and elapsed < 1.0, ok


def test_criterion_02_moving_frame_inverse(acceptance):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        kappa = rng.uniform(0.0, 5.0)
        torsion = rng.uniform(-5.0, 5.0)
        # admissible: 1 - kappa rbar > 0.1
        rbar = rng.uniform(-1.0, min(1.0, 0.9 / kappa) * (1 - 1e-9))
        zbar = rng.uniform(-1.0, 1.0)
        M, M_inv = moving_frame_matrices(kappa, torsion, rbar, zbar)
        worst = max(worst, float(np.max(np.abs(M @ M_inv - np.eye(3)))))
    elapsed = time.perf_counter() - start
    acceptance(2, "moving-frame inverse", worst < 1e-14, elapsed, 1.0, f"max |M M^-1 - I| {worst:.2e}")
    assert worst < 1e-14 and elapsed < 1.0


def test_criterion_03_velocity_reconstruction(acceptance):
    rng = np.random.default_rng(3)
    t = 0.5
    start = time.perf_counter()
    g = InflowProfile("1 + t**2")
    field = F.nozzle_field("1 + t**2")
    # the inverse lookup covers the radii swept by the inflow grid
    smap = build_streamline_map(field, t, [0.02, 0.5, 0.99], [-2.0, 0.0, 2.0])
    worst_z = worst_r = 0.0
    for r, z in zip(rng.uniform(0.05, 0.8, 200), rng.uniform(-2.0, 2.0, 200)):
        vz, vr = reconstruct_velocity(smap, g, r, z)
        ex_r, _, ex_z = field.velocity(r, z, t)
        worst_z = max(worst_z, relerr(vz, ex_z))
        worst_r = max(worst_r, relerr(vr, ex_r))
    elapsed = time.perf_counter() - start
    worst = max(worst_z, worst_r)
    acceptance(3, "velocity reconstruction on the nozzle", worst < 1e-6, elapsed, 10.0,
               f"max relative error v_z {worst_z:.2e}, v_r {worst_r:.2e} over 200 probes")
    assert worst < 1e-6 and elapsed < 10.0


def test_criterion_04_laminar_rates_of_columnar_flow(acceptance):
    start = time.perf_counter()
    field = F.uniform_field("1 + t + t**2")
    g = InflowProfile("1 + t + t**2")
    r0s, zs = [0.1, 0.3, 0.5, 0.7, 0.9], [-2.0, 0.0, 2.0]
    dx = lt = 0.0
    probes = 0
    for t in (0.0, 0.5, 1.0):
        smap = build_streamline_map(field, t, r0s, zs)
        dt = default_time_step(g, t)
        for r0 in r0s:
            for z in zs:
                dx = max(dx, abs(laminar_rate_x(smap, r0, z).L_x - 2.0))
                lt = max(lt, laminar_rate_t(field, t, dt, r0, z, smap.z_in).L_t)
                probes += 1
    elapsed = time.perf_counter() - start
    ok = dx < 1e-8 and lt < 1e-10
    acceptance(4, "laminar rates of uniform pulsatile flow", ok, elapsed, 5.0,
               f"max |L^x - 2| {dx:.2e}, max L^t {lt:.2e} over {probes} probes")
    assert ok and elapsed < 5.0


def test_criterion_05_pressure_identities(acceptance):
    start = time.perf_counter()
    field = F.rigid_swirl_pulsatile_field(1.0, "1 + t**2", r_max=2.0)
    traj = integrate_trajectory(field, (1.0, 0.0, 0.0), (0.0, 1.1))
    reports = [check_pressure_identities(field, traj, float(t)) for t in np.linspace(0.1, 1.0, 10)]
    elapsed = time.perf_counter() - start
    worst = {k: max(r.relative[k] for r in reports) for k in IDENTITY_NAMES}
    slopes = [s for r in reports for s in r.slopes.values()]
    slopes_ok = bool(slopes) and all(1.8 <= s <= 2.2 for s in slopes)
    ok = max(worst.values()) < 1e-4 and slopes_ok
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    acceptance(5, "pressure identities on rigid swirl", ok, elapsed, 30.0,
               f"max relative residual {detail}; slopes in [{min(slopes):.3f}, {max(slopes):.3f}]")
    assert slopes_ok
    assert max(worst.values()) < 1e-4, worst
    assert elapsed < 30.0


def certified_swirl_cases():
    return [
        ("rigid_swirl", F.rigid_swirl_pulsatile_field(1.0, "1 + t**2", r_max=2.0), (1.0, 0.0, 0.0), (0.2, 0.5, 0.8)),
        ("helix", F.rigid_rotation_axial_field(1.0, 1.0), (1.0, 0.0, 0.0), (0.2, 0.5, 0.8)),
        ("strained_vortex", F.strained_vortex_field(), (0.8, 0.0, 0.0), (0.2, 0.5, 0.8)),
    ]


def test_criterion_06_rotation_balance(acceptance):
    start = time.perf_counter()
    rel = agree = 0.0
    for _, field, seed, probes in certified_swirl_cases():
        assert certify(field, 0.5).exact_euler
        traj = integrate_trajectory(field, seed, (0.0, 1.0))
        for t in probes:
            bal = rotation_balance(field, traj, t)
            assert bal.applicable and not bal.degenerate
            rel = max(rel, bal.relative_balance)
            agree = max(agree, bal.angular_agreement)
    elapsed = time.perf_counter() - start
    ok = rel < 1e-3 and agree < 1e-3
    acceptance(6, "rotation balance on certified Euler fields", ok, elapsed, 30.0,
               f"max |balance|/scale {rel:.2e}, max angular-FD disagreement {agree:.2e}")
    assert rel < 1e-3 and agree < 1e-3
    assert elapsed < 30.0


def test_criterion_07_swirl_transport(acceptance):
    start = time.perf_counter()
    worst = 0.0
    for _, field, seed, _ in certified_swirl_cases():
        traj = integrate_trajectory(field, seed, (0.0, 1.0))
        transported = swirl_transport(field, traj)
        for t in np.linspace(0.0, traj.t_end, 21):
            R, _, Z, _ = traj.state(t)
            worst = max(worst, relerr(transported(t), field.velocity(R, Z, t)[1]))
    elapsed = time.perf_counter() - start
    acceptance(7, "swirl transport along trajectories", worst < 1e-6, elapsed, 10.0,
               f"max relative error {worst:.2e}")
    assert worst < 1e-6 and elapsed < 10.0


def test_criterion_08_womersley(acceptance):
    rng = np.random.default_rng(8)
    start = time.perf_counter()
    field = womersley_field(WomersleyParams(R=1.0, nu=0.5, N=2.0, p_o=3.0))
    wall = max(abs(field.axial(1.0, t)) for t in np.linspace(0.0, 2 * math.pi, 25))
    residual = max(abs(momentum_residual(field, r, t)) for r, t in zip(rng.uniform(0, 1, 20), rng.uniform(0, 10, 20)))
    slow = womersley_field(WomersleyParams(R=1.0, nu=1.0, N=1e-4, p_o=1.0))
    r = np.linspace(0.0, 1.0, 41)
    shape = np.array([slow.axial(x, 0.3) for x in r]) / slow.axial(0.0, 0.3)
    parabola = float(np.max(np.abs(shape - (1 - r**2))))
    elapsed = time.perf_counter() - start
    ok = wall == 0.0 and residual < 1e-8 and parabola < 1e-3
    acceptance(8, "Womersley profile", ok, elapsed, 5.0,
               f"wall speed {wall:.1e}, momentum residual {residual:.2e}, alpha=0.01 deviation {parabola:.2e}")
    assert ok and elapsed < 5.0


def test_criterion_09_instability_trend(acceptance):
    start = time.perf_counter()
    params = ScanParams()
    swirl = instability_scan(params, "swirl_nozzle")
    plain = instability_scan(params, "no_swirl")
    elapsed = time.perf_counter() - start
    tau = swirl.trend["kendall_tau_g1"]
    v_theta = [r[SCAN_COLUMNS.index("v_theta")] for r in swirl.rows]
    lt_plain = max(r[SCAN_COLUMNS.index("L_t")] for r in plain.rows)
    in_band = all(0.5 <= v <= 2.0 for v in v_theta)
    ok = tau > 0.8 and lt_plain < 1e-10 and in_band and len(swirl.rows) > 2
    acceptance(9, "instability trend", ok, elapsed, 300.0,
               f"Kendall tau(L^t, g'(0)) {tau:.3f} over {len(swirl.rows)} admissible points; "
               f"no-swirl max L^t {lt_plain:.1e}")
    assert ok and elapsed < 300.0


def test_criterion_10_flux_conservation(acceptance):
    start = time.perf_counter()
    worst, names = 0.0, []
    for name, field in catalog_incompressible():
        smap = build_streamline_map(field, 0.5, [0.3, 0.6], [0.5, 1.5])
        for r0 in (0.3, 0.6):
            for z in (0.5, 1.5):
                worst = max(worst, flux_conservation(smap, r0, 0.05, z).relative_error)
        names.append(name)
    elapsed = time.perf_counter() - start
    acceptance(10, "flux conservation", worst < 1e-6, elapsed, 10.0,
               f"max relative flux error {worst:.2e} over {len(names)} catalog fields")
    assert worst < 1e-6 and elapsed < 10.0
