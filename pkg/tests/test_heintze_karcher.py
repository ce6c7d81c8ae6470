import math

import numpy as np
import pytest

from hkdrop.errors import NotClosed, RegimeMissing
from hkdrop.geometry import (
    CapSpec,
    cap_profile,
    cap_report,
    profile_report,
    sphere_profile,
    spheroid_cap_profile,
    spheroid_profile,
)
from hkdrop.heintze_karcher import (
    classical_hk,
    coverage_sample,
    hk_deficit,
    max_curvature,
    montiel_ros_integral,
    normal_map_jacobian,
    richardson_deficit,
    sphere_hk,
    write_violations_csv,
)
from oracles import spheroid_cap_oracle


@pytest.mark.parametrize("theta", np.linspace(0.1, math.pi - 0.1, 12))
def test_closed_form_cap_equality(theta):
    if abs(theta - math.pi / 2) < 1e-3:
        pytest.skip("degenerate angle")
    for r in (0.5, 1.0, 2.0):
        d = hk_deficit(cap_report(CapSpec(r, theta)))
        assert abs(d.relative_deficit) <= 1e-12
        assert d.equality


def test_profile_cap_equality_both_regimes():
    for th in (math.pi / 3, 2 * math.pi / 3):
        d = hk_deficit(profile_report(cap_profile(CapSpec(1.0, th), 2000)))
        assert abs(d.relative_deficit) <= 1e-4
        assert not d.equality  # quadrature error is far above the cap tolerance


def test_lambda_slope_tan_breaks_equality():
    d = hk_deficit(cap_report(CapSpec(1.0, 2 * math.pi / 3), lambda_slope="tan"))
    assert abs(d.relative_deficit) > 0.1


@pytest.mark.parametrize("ratio", [1.2, 1.5, 2.0])
def test_spheroid_caps_strict(ratio):
    fine, err = richardson_deficit(lambda n: spheroid_cap_profile(1.0, ratio, -0.5, n), 1000)
    o = spheroid_cap_oracle(1.0, ratio, -0.5 * ratio)
    assert fine.deficit > 10 * err
    assert fine.deficit == pytest.approx(o["deficit"], abs=1e-5)


def test_classical_sphere():
    c = sphere_hk(1.0)
    assert c.lhs == pytest.approx(4 * math.pi, rel=1e-14)
    assert c.rhs == pytest.approx(4 * math.pi, rel=1e-14)
    p = classical_hk(sphere_profile(1.0, 2000))
    assert p.lhs == pytest.approx(4 * math.pi, rel=1e-4)
    assert p.rhs == pytest.approx(4 * math.pi, rel=1e-4)
    assert p.cmc_identity_residual is not None and p.cmc_identity_residual < 1e-4


def test_classical_spheroid_strict_and_not_cmc():
    p = classical_hk(spheroid_profile(1.0, 2.0, 2000))
    assert p.rhs > p.lhs * 1.01
    assert p.cmc_identity_residual is None


def test_classical_needs_closed(unit_cap_profile):
    with pytest.raises(NotClosed):
        classical_hk(unit_cap_profile)


def test_montiel_ros_chain():
    for p in (cap_profile(CapSpec(1.0, 1.0), 2000), cap_profile(CapSpec(1.0, 2.5), 2000), sphere_profile(1.0, 2000)):
        mr = montiel_ros_integral(p)
        assert abs(mr.gap) <= 1e-10 * mr.amgm_bound
    for c in (1.2, 2.0):
        mr = montiel_ros_integral(spheroid_cap_profile(1.0, c, -0.5, 2000))
        assert mr.gap > 1e-6


def test_normal_map_jacobian(unit_cap_profile):
    k = max_curvature(unit_cap_profile)
    assert np.allclose(k, 1.0, atol=1e-9)
    s = normal_map_jacobian(unit_cap_profile, 100, 0.5)
    assert s.jacobian == pytest.approx(0.25, rel=1e-8)


@pytest.mark.parametrize("theta", [math.pi / 3, 2 * math.pi / 3])
def test_coverage_full(theta):
    p = cap_profile(CapSpec(1.0, theta), 2000)
    g = profile_report(p)
    cov = coverage_sample(p, g, num_samples=20000, seed=3)
    assert cov.covered_fraction == 1.0
    assert cov.num_samples == 20000


def test_coverage_lambda_region():
    p = cap_profile(CapSpec(1.0, 2 * math.pi / 3), 2000)
    cov = coverage_sample(p, profile_report(p), num_samples=5000, region="lambda")
    assert cov.covered_fraction == 1.0


def test_coverage_deterministic_and_worker_independent(tmp_path):
    p = cap_profile(CapSpec(1.0, 2.5), 2000)
    g = profile_report(p)
    a = coverage_sample(p, g, num_samples=4000, seed=11)
    b = coverage_sample(p, g, num_samples=4000, seed=11, workers=4)
    assert a == b
    write_violations_csv(a, tmp_path / "v.csv")
    assert (tmp_path / "v.csv").read_text().startswith("y_rho,y_z,nearest_s,t,kappa_max")


def test_coverage_argument_validation():
    p = cap_profile(CapSpec(1.0, 2.0), 2000)
    g = profile_report(p)
    with pytest.raises(ValueError):
        coverage_sample(p, g, num_samples=10)
    with pytest.raises(ValueError):
        coverage_sample(p, g, num_samples=2000, region="nowhere")


def test_regime_missing():
    g = cap_report(CapSpec(1.0, 2.0))
    from dataclasses import replace

    with pytest.raises(RegimeMissing):
        hk_deficit(replace(g, regime=None))
