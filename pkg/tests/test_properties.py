import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from hkdrop.capillary import wedge_gap
from hkdrop.cli import parse_angle
from hkdrop.geometry import CapSpec, cap_report
from hkdrop.heintze_karcher import hk_deficit
from oracles import wedge_facets

radii = st.floats(0.05, 20.0)
angles = st.floats(0.02, math.pi - 0.02).filter(lambda t: abs(t - math.pi / 2) > 1e-6)
sigmas = st.floats(0.01, 0.99).flatmap(lambda a: st.sampled_from([a, -a]))


@given(radii, angles)
def test_caps_are_equality_cases(r, theta):
    d = hk_deficit(cap_report(CapSpec(r, theta)))
    assert abs(d.relative_deficit) <= 1e-12


@given(radii, angles, st.floats(0.1, 10.0))
def test_cap_report_scaling(r, theta, k):
    a, b = cap_report(CapSpec(r, theta)), cap_report(CapSpec(k * r, theta))
    assert math.isclose(b.volume, k**3 * a.volume, rel_tol=1e-12)
    assert math.isclose(b.area_M, k**2 * a.area_M, rel_tol=1e-12)
    assert math.isclose(b.gamma, k * a.gamma, rel_tol=1e-12)


@given(radii, angles)
def test_gamma_lambda_sign(r, theta):
    g = cap_report(CapSpec(r, theta))
    assert math.isclose(g.gamma * g.area_Sigma, -math.copysign(g.lambda_volume, math.cos(theta)),
                        rel_tol=1e-10, abs_tol=1e-14)


@given(st.integers(2, 6), radii, angles)
def test_cap_equality_any_dimension(n, r, theta):
    d = hk_deficit(cap_report(CapSpec(r, theta, n)))
    assert abs(d.relative_deficit) <= 1e-10


@given(st.floats(0.01, 10.0), st.floats(1e-3, 10.0), sigmas)
def test_wedge_closed_form_vs_facets(l, r, sigma):
    w = wedge_gap(l, r, sigma)
    scale = max(1.0, l * r, r * r)
    assert abs(w.gap - w.direct_gap) <= 1e-12 * scale
    assert abs(w.gap - wedge_facets(l, r, sigma)) <= 1e-12 * scale


@given(st.floats(0.01, 10.0), sigmas, st.integers(2, 5), st.floats(0.01, 0.99))
def test_wedge_sign_matches_threshold(l, sigma, n, frac):
    thr = wedge_gap(l, 1.0, sigma, n).positivity_threshold
    assert wedge_gap(l, frac * thr, sigma, n).gap > 0
    assert wedge_gap(l, thr / frac, sigma, n).gap < 0


@settings(max_examples=50)
@given(st.floats(-720.0, 720.0, allow_nan=False))
def test_angle_parse_roundtrip(deg):
    assert math.isclose(parse_angle(f"{deg!r}deg"), np.deg2rad(deg), rel_tol=1e-15, abs_tol=1e-15)
