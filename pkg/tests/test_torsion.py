import math

import numpy as np
import pytest

from hkdrop.errors import MeshFailure, RegimeViolation
from hkdrop.geometry import (
    CapSpec,
    ContainerModel,
    bowl_cap_profile,
    cap_profile,
    cap_report,
    flatness_metrics,
    perturbed_cap_profile,
    profile_report,
)
from hkdrop.torsion import (
    ON_AXIS,
    ON_M,
    ON_SIGMA,
    compute_gamma,
    deficit_bound_check,
    hessian_deficit,
    integrals,
    linf_check,
    mesh_meridian,
    reilly_report,
    solve_torsion,
    stability_chain,
    substrate_term_bound,
    wetted_bounds,
)
from oracles import cap_torsion


def test_mesh_structure(unit_cap_profile):
    m = mesh_meridian(unit_cap_profile, h=0.05)
    assert m.elements.shape[1] == 6
    assert set(np.unique(m.boundary_tags)) == {ON_M, ON_SIGMA, ON_AXIS}
    # free-surface nodes lie on the unit sphere about (0, -1/2)
    d = m.nodes[m.dirichlet_nodes()] - np.array([0.0, -0.5])
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-10)
    assert m.element_areas().sum() == pytest.approx(
        # meridian cross-section area of the unit cap
        math.pi / 4 - math.sqrt(3) / 8 - math.pi / 12, rel=1e-3
    )
    finer = mesh_meridian(unit_cap_profile, h=0.025)
    assert 3.0 < finer.elements.shape[0] / m.elements.shape[0] < 5.0


def test_mesh_size_guard(unit_cap_profile):
    with pytest.raises(MeshFailure):
        mesh_meridian(unit_cap_profile, h=0.5)


def test_mesh_export(tmp_path, unit_cap_profile):
    m = mesh_meridian(unit_cap_profile, h=0.1)
    paths = m.export_csv(tmp_path / "mesh")
    assert [open(p).readline().strip() for p in paths] == [
        "id,rho,z", "id,n0,n1,n2,n3,n4,n5", "a,b,mid,tag"
    ]


def test_convergence_against_exact(cap_solutions, unit_cap):
    exact = cap_torsion(unit_cap.r, unit_cap.theta)
    errs = [cap_solutions[h].max_error(exact) for h in (0.08, 0.04, 0.02)]
    assert errs[2] <= 5e-4
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


def test_linf_bounds(cap_solutions):
    g = cap_report(CapSpec(1.0, 2 * math.pi / 3))
    for s in cap_solutions.values():
        lc = linf_check(s, g)
        assert lc.u_min >= -1e-8 and lc.ok
        assert lc.u_max == pytest.approx(1 / 6 - 0.25 / 6, abs=1e-6)  # (r^2 - c^2)/6 at the origin


def test_reilly_identities(cap_solutions):
    res = {h: reilly_report(s).residuals for h, s in cap_solutions.items()}
    r = reilly_report(cap_solutions[0.02])
    assert r.lhs_first == pytest.approx(2 * math.pi / 9, abs=1e-3)
    assert abs(r.lhs_big) < 1e-3
    assert res[0.02]["first"] <= 1e-3 and res[0.02]["big"] <= 1e-3
    assert res[0.02]["first"] < res[0.04]["first"] < res[0.08]["first"]
    assert res[0.02]["big"] < res[0.08]["big"]
    assert hessian_deficit(cap_solutions[0.02]) < 1e-5


def test_integrals_of_cap(cap_solutions):
    I = integrals(cap_solutions[0.02])
    assert I.V == pytest.approx(math.pi / 3, rel=1e-6)
    assert I.int_grad == pytest.approx(I.V, rel=1e-4)
    assert I.area_M == pytest.approx(math.pi, rel=1e-8)
    assert I.area_Sigma == pytest.approx(0.75 * math.pi, rel=1e-10)


def test_hydrophobic_rejected_unless_overridden():
    p = cap_profile(CapSpec(1.0, math.pi / 3), 2000)
    m = mesh_meridian(p, h=0.1)
    with pytest.raises(RegimeViolation):
        solve_torsion(m, -1 / 6)
    s = solve_torsion(m, -1 / 6, allow_hydrophobic=True)
    assert not s.conforming and s.notes


def test_stability_chain_exact_cap(cap_solutions):
    g = profile_report(cap_profile(CapSpec(1.0, 2 * math.pi / 3), 4000))
    ch = stability_chain(cap_solutions[0.02], g, eps=0.0)
    assert ch.monotone_ok
    assert abs(ch.line1) <= 1e-3 and abs(ch.line2) <= 1e-3


@pytest.mark.parametrize("mode", [2, 3, 4])
def test_perturbed_family_bounds(mode):
    for t in (0.01, 0.04):
        p = perturbed_cap_profile(amplitude=t, mode=mode, n_points=4000)
        g = profile_report(p)
        s = solve_torsion(mesh_meridian(p, h=0.04), compute_gamma(g))
        ch = stability_chain(s, g, 0.0)
        assert ch.monotone_ok
        assert ch.line1 > 0
        db = deficit_bound_check(g, 0.0, 0.0, g.h_dev)
        assert 0 < db.lhs < db.budget
        wb = wetted_bounds(g, 0.0, 0.0, g.h_dev)
        assert wb.perimeter_bound_ok and wb.ratio_ok


def test_caps_satisfy_wetted_identity_and_zero_deficit():
    g = cap_report(CapSpec(1.0, 2 * math.pi / 3))
    wb = wetted_bounds(g, 0.0, 0.0, 0.0)
    assert wb.identity_lhs == pytest.approx(1.5 * math.pi, rel=1e-14)
    assert wb.identity_rhs == pytest.approx(1.5 * math.pi, rel=1e-14)
    db = deficit_bound_check(g, 0.0, 0.0, 0.0)
    assert db.lhs <= 1e-12
    assert db.lambdabound_verified <= 1e-12
    # the printed sign of the cos(theta0) term does not vanish on caps
    assert db.lambdabound_printed > 1.0


def test_bowl_self_consistent_under_refinement():
    c = ContainerModel.bowl(10.0)
    p = bowl_cap_profile(1.0, 2 * math.pi / 3, 10.0, 4000)
    g = profile_report(p, c)
    gamma = compute_gamma(g)
    eps = flatness_metrics(c, 1.0)
    res, big = [], []
    for h in (0.08, 0.04, 0.02):
        s = solve_torsion(mesh_meridian(p, c, h=h), gamma)
        rr = reilly_report(s, g, c)
        res.append(rr.residuals)
        big.append(rr.lhs_big)
        assert substrate_term_bound(s, g, eps).ok
        assert stability_chain(s, g, eps).monotone_ok
        assert integrals(s).substrate > 0
    assert res[2]["first"] < res[1]["first"] < res[0]["first"]
    assert res[2]["divergence"] < res[1]["divergence"] < res[0]["divergence"]
    # the integrated identity changes sign between levels; both sides settle
    assert max(r["big"] for r in res) < 1e-5
    assert abs(big[2] - big[1]) < abs(big[1] - big[0])


def test_solution_export(tmp_path, cap_solutions):
    s = cap_solutions[0.08]
    s.export_csv(tmp_path / "u.csv")
    lines = (tmp_path / "u.csv").read_text().splitlines()
    assert lines[0] == "rho,z,u" and len(lines) == s.mesh.n_nodes + 1
