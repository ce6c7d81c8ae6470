import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from hkdrop import kernels
from hkdrop._accel import HAVE_NUMBA
from hkdrop.geometry import CapSpec, cap_profile, cap_report
from hkdrop.heintze_karcher import _Curve
from hkdrop.torsion import mesh_meridian

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable or disabled")


@pytest.fixture(scope="module")
def cap():
    return cap_profile(CapSpec(1.0, 2.2), 1500)


@needs_numba
def test_max_pair_distance_equivalent(cap):
    a = kernels.max_pair_distance_np(cap.rho, cap.z)
    b = kernels.max_pair_distance_nb(cap.rho, cap.z)
    assert a == b


@needs_numba
def test_element_arrays_equivalent(cap):
    nodes = mesh_meridian(cap, h=0.05).element_nodes()
    Ka, Fa = kernels.p2_element_arrays_np(nodes)
    Kb, Fb = kernels.p2_element_arrays_nb(nodes)
    np.testing.assert_allclose(Ka, Kb, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(Fa, Fb, rtol=1e-12, atol=1e-16)


@needs_numba
def test_hermite_nearest_equivalent(cap):
    curve = _Curve(cap)
    rng = np.random.default_rng(5)
    y = np.stack([0.9 * rng.random(3000), 0.4 * rng.random(3000)], axis=-1)
    _, idx = curve.tree.query(y, k=6)
    seg = np.sort(np.where(idx < curve.nseg, idx, -1), axis=1)
    a = kernels.hermite_nearest_np(y, seg, curve.P, curve.T, curve.ds)
    b = kernels.hermite_nearest_nb(y, seg, curve.P, curve.T, curve.ds)
    np.testing.assert_array_equal(a[0], b[0])
    for u, v in zip(a[1:], b[1:]):
        np.testing.assert_allclose(u, v, rtol=1e-10, atol=1e-12)


def test_element_arrays_reproduce_area_and_volume(cap):
    # sum of the load vector is 2 pi int rho = volume; the stiffness annihilates constants
    m = mesh_meridian(cap, h=0.05)
    K, F = kernels.p2_element_arrays(m.element_nodes())
    vol = cap_report(CapSpec(1.0, 2.2)).volume
    assert F.sum() == pytest.approx(vol, rel=1e-6)
    assert np.max(np.abs(K.sum(axis=2))) < 1e-12


def test_numpy_backend_via_env_flag(tmp_path):
    env = dict(os.environ, HKDROP_DISABLE_NUMBA="1")
    code = (
        "import json, math; from hkdrop._accel import backend; "
        "from hkdrop.geometry import CapSpec, cap_profile, profile_report; "
        "g = profile_report(cap_profile(CapSpec(1.0, 2*math.pi/3), 2000)); "
        "print(json.dumps([backend(), g.diameter, g.volume]))"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, diameter, volume = json.loads(out.stdout)
    assert name == "numpy"
    assert diameter == pytest.approx(math.sqrt(3), rel=1e-9)
    assert volume == pytest.approx(5 * math.pi / 24, rel=1e-6)
