from __future__ import annotations

import numpy as np
import pytest

from swirlframe import fields as F


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def helix_field():
    return F.rigid_rotation_axial_field(1.0, 1.0, r_max=1.0)


@pytest.fixture(scope="session")
def rigid_swirl():
    return F.rigid_swirl_pulsatile_field(1.0, "1 + t**2", r_max=2.0)


@pytest.fixture(scope="session")
def nozzle():
    return F.nozzle_field("1 + t**2")


@pytest.fixture(scope="session")
def uniform_pulsatile():
    return F.uniform_field("1 + t + t**2")


def catalog_incompressible():
    """Incompressible catalog fields with a sampling box (z range, t range)."""
    return [
        ("poiseuille", F.poiseuille_field(4, 1, 1, 1)),
        ("uniform", F.uniform_field("1 + t**2")),
        ("rigid_swirl", F.rigid_swirl_pulsatile_field(1.0, "1 + t**2")),
        ("helix", F.rigid_rotation_axial_field(1.0, 1.0)),
        ("nozzle", F.nozzle_field("1 + t**2")),
        ("swirl_vortex_nozzle", F.swirl_vortex_nozzle_field()),
        ("modulated_nozzle", F.modulated_nozzle_field()),
        ("swirl_nozzle", F.swirl_nozzle_field("1 + 20*t + 200*t**2")),
        ("strained_vortex", F.strained_vortex_field()),
        ("profiled_nozzle", F.profiled_nozzle_field()),
    ]


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion; echoed in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number: int, title: str, ok: bool, elapsed: float, budget: float, detail: str) -> bool:
        passed = ok and elapsed < budget
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}; {elapsed:.2f} s (budget {budget:g} s)"
        print(line)
        lines.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
