import math
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hkdrop.geometry import CapSpec, cap_profile, profile_report  # noqa: E402
from hkdrop.torsion import compute_gamma, mesh_meridian, solve_torsion  # noqa: E402

UNIT_CAP = CapSpec(1.0, 2.0 * math.pi / 3.0)


@pytest.fixture(scope="session")
def unit_cap():
    return UNIT_CAP


@pytest.fixture(scope="session")
def unit_cap_profile():
    return cap_profile(UNIT_CAP, 4000)


@pytest.fixture(scope="session")
def cap_solutions(unit_cap_profile):
    """Torsion solves of the unit hydrophilic cap at h = 0.08, 0.04, 0.02."""
    g = profile_report(unit_cap_profile)
    gamma = compute_gamma(g)
    return {h: solve_torsion(mesh_meridian(unit_cap_profile, h=h), gamma) for h in (0.08, 0.04, 0.02)}


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def record_acceptance(request):
    log = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number, passed, detail):
        log[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log):
        passed, detail = log[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
