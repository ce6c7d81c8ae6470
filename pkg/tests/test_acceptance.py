"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
(and by ``python3 tests/test_acceptance.py``). Criterion 9 is not attainable
as stated; its test pins the measured behaviour instead, see the notes there.
"""
import math
import os
import sys
import tempfile
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hkdrop.capillary import CapillaryConfig, extrapolate_limit, scaling_study, solve_droplet, wedge_gap
from hkdrop.cli import run
from hkdrop.geometry import (
    CapSpec,
    ContainerModel,
    bowl_cap_profile,
    cap_profile,
    cap_report,
    flatness_metrics,
    perturbed_cap_profile,
    profile_report,
    sphere_profile,
    spheroid_cap_profile,
    spheroid_profile,
)
from hkdrop.heintze_karcher import (
    classical_hk,
    coverage_sample,
    hk_deficit,
    montiel_ros_integral,
    richardson_deficit,
    sphere_hk,
)
from hkdrop.torsion import (
    compute_gamma,
    deficit_bound_check,
    linf_check,
    mesh_meridian,
    reilly_report,
    solve_torsion,
    stability_chain,
    wetted_bounds,
)
from oracles import wedge_facets

UNIT = CapSpec(1.0, 2 * math.pi / 3)
FAMILY = [(t, k) for k in (2, 3, 4) for t in (0.01, 0.02, 0.03, 0.04)]


def _angles():
    lo = np.linspace(0.05, 0.5 * math.pi - 0.05, 50)
    hi = np.linspace(0.5 * math.pi + 0.05, math.pi - 0.05, 50)
    return np.concatenate([lo, hi])


def _flat_cap_solves():
    p = cap_profile(UNIT, 4000)
    gamma = compute_gamma(profile_report(p))
    return p, {h: solve_torsion(mesh_meridian(p, h=h), gamma) for h in (0.08, 0.04, 0.02)}


_cache = {}


def _family():
    if "family" not in _cache:
        out = []
        for t, k in FAMILY:
            p = perturbed_cap_profile(amplitude=t, mode=k, n_points=4000)
            g = profile_report(p)
            s = solve_torsion(mesh_meridian(p, h=0.04), compute_gamma(g))
            out.append((t, k, g, s))
        _cache["family"] = out
    return _cache["family"]


# --------------------------------------------------------------------------
def criterion_1():
    t0 = time.perf_counter()
    worst_exact = worst_profile = 0.0
    for th in _angles():
        for r in (0.5, 1.0, 2.0):
            cap = CapSpec(r, float(th))
            worst_exact = max(worst_exact, abs(hk_deficit(cap_report(cap)).relative_deficit))
            worst_profile = max(worst_profile, abs(hk_deficit(profile_report(cap_profile(cap, 2000))).relative_deficit))
    dt = time.perf_counter() - t0
    ok = worst_exact <= 1e-12 and worst_profile <= 1e-4 and dt < 5
    return ok, f"max|rel| closed {worst_exact:.1e}, profile {worst_profile:.1e}, {dt:.2f}s"


def criterion_2():
    t0 = time.perf_counter()
    parts, ok = [], True
    for c in (1.2, 1.5, 2.0):
        fine, err = richardson_deficit(lambda n: spheroid_cap_profile(1.0, c, -0.5, n), 1000)
        ok &= fine.deficit > 10 * err
        parts.append(f"{c}: {fine.deficit:.4f}/{err:.0e}")
    dt = time.perf_counter() - t0
    return ok and dt < 5, "deficit/error " + ", ".join(parts) + f", {dt:.2f}s"


def criterion_3():
    c = sphere_hk(1.0)
    p = classical_hk(sphere_profile(1.0, 2000))
    e_c = max(abs(c.lhs - 4 * math.pi), abs(c.rhs - 4 * math.pi))
    e_p = max(abs(p.lhs - 4 * math.pi), abs(p.rhs - 4 * math.pi), p.cmc_identity_residual)
    return e_c <= 1e-12 and e_p <= 1e-4, f"closed {e_c:.1e}, profile {e_p:.1e}"


def criterion_4():
    caps = [cap_profile(CapSpec(r, th), 2000) for r in (0.5, 1.0) for th in (0.7, 2 * math.pi / 3)]
    eq = caps + [sphere_profile(1.0, 2000)]
    strict = [spheroid_cap_profile(1.0, c, -0.5, 2000) for c in (1.2, 1.5, 2.0)] + [spheroid_profile(1.0, 2.0, 2000)]
    others = [perturbed_cap_profile(amplitude=0.04, mode=k) for k in (2, 3, 4)]
    mr_eq = [montiel_ros_integral(p) for p in eq]
    mr_strict = [montiel_ros_integral(p) for p in strict]
    mr_other = [montiel_ros_integral(p) for p in others]
    chain = all(m.gamma_integral <= m.amgm_bound * (1 + 1e-12) for m in mr_eq + mr_strict + mr_other)
    eq_ok = max(abs(m.gap) for m in mr_eq) <= 1e-10
    gap_ok = min(m.gap for m in mr_strict) > 0
    fracs = []
    for th in (math.pi / 3, 2 * math.pi / 3):
        p = cap_profile(CapSpec(1.0, th), 2000)
        fracs.append(coverage_sample(p, profile_report(p), num_samples=100_000, seed=0).covered_fraction)
    ok = chain and eq_ok and gap_ok and all(f == 1.0 for f in fracs)
    return ok, (f"chain {chain}, max|gap| caps/sphere {max(abs(m.gap) for m in mr_eq):.1e}, "
                f"min gap spheroids {min(m.gap for m in mr_strict):.2e}, coverage {fracs}")


def criterion_5():
    t0 = time.perf_counter()
    _, sols = _flat_cap_solves()
    _cache["flat"] = sols
    exact = UNIT.exact_torsion
    e = [sols[h].max_error(exact) for h in (0.08, 0.04, 0.02)]
    dt = time.perf_counter() - t0
    r1, r2 = e[0] / e[1], e[1] / e[2]
    ok = min(r1, r2) >= 3.5 and e[2] <= 5e-4 and dt < 60
    return ok, f"errors {e[0]:.1e} {e[1]:.1e} {e[2]:.1e}, ratios {r1:.2f} {r2:.2f}, {dt:.2f}s"


def _bowl_solves():
    if "bowl" not in _cache:
        out = []
        for R in (10.0, 100.0):
            c = ContainerModel.bowl(R)
            p = bowl_cap_profile(1.0, 2 * math.pi / 3, R, 4000)
            g = profile_report(p, c)
            for h in (0.08, 0.04, 0.02):
                out.append((R, h, c, g, solve_torsion(mesh_meridian(p, c, h=h), compute_gamma(g))))
        _cache["bowl"] = out
    return _cache["bowl"]


def criterion_6():
    if "flat" not in _cache:
        criterion_5()
    g_cap = cap_report(UNIT)
    solves = [(g_cap, s) for s in _cache["flat"].values()]
    solves += [(g, s) for _, _, _, g, s in _bowl_solves()]
    solves += [(g, s) for _, _, g, s in _family()]
    checks = [linf_check(s, g) for g, s in solves if s.conforming]
    ok = all(c.u_min >= -1e-8 and c.ok for c in checks)
    return ok, (f"{len(checks)} solves, min u {min(c.u_min for c in checks):.1e}, "
                f"max u/bound {max(c.u_max / c.bound for c in checks):.3f}")


def criterion_7():
    if "flat" not in _cache:
        criterion_5()
    rr = {h: reilly_report(s) for h, s in _cache["flat"].items()}
    r2 = rr[0.02]
    res = {h: r.residuals for h, r in rr.items()}
    ref_ok = abs(r2.lhs_first - 2 * math.pi / 9) <= 1e-3 and abs(r2.lhs_big) <= 1e-3
    flat_ok = res[0.02]["first"] <= 1e-3 and res[0.02]["big"] <= 1e-3
    dec = res[0.02]["first"] < res[0.04]["first"] < res[0.08]["first"] and res[0.02]["big"] < res[0.08]["big"]
    bowl_ok = True
    for R in (10.0, 100.0):
        rows = [(h, reilly_report(s, g, c)) for RR, h, c, g, s in _bowl_solves() if RR == R]
        first = [r.residuals["first"] for _, r in rows]
        big = [r.lhs_big for _, r in rows]
        bowl_ok &= first[0] > first[1] > first[2] and abs(big[2] - big[1]) < abs(big[1] - big[0])
        bowl_ok &= max(r.residuals["big"] for _, r in rows) < 1e-4
    ok = ref_ok and flat_ok and dec and bowl_ok
    return ok, (f"h=0.02 first {res[0.02]['first']:.1e} (lhs {r2.lhs_first:.5f}), big {res[0.02]['big']:.1e}, "
                f"decreasing {dec}, bowls consistent {bowl_ok}")


def criterion_8():
    fam_ok = True
    for t, k, g, s in _family():
        fam_ok &= stability_chain(s, g, 0.0).monotone_ok
    if "flat" not in _cache:
        criterion_5()
    ch = stability_chain(_cache["flat"][0.02], profile_report(cap_profile(UNIT, 4000)), 0.0)
    eq = max(abs(ch.line1), abs(ch.line2))
    return fam_ok and eq <= 1e-3, f"12-member ordering {fam_ok}, exact-cap lines {eq:.1e}"


def criterion_9():
    caps = [cap_report(CapSpec(r, th)) for r in (0.5, 1.0, 2.0) for th in (1.8, 2 * math.pi / 3, 2.6)]
    cap_lhs = max(deficit_bound_check(g, 0.0, 0.0, 0.0).lhs for g in caps)
    spreads, within = {}, True
    for k in (2, 3, 4):
        ratios = []
        for t in (0.01, 0.02, 0.04):
            g = profile_report(perturbed_cap_profile(amplitude=t, mode=k, n_points=4000))
            db = deficit_bound_check(g, 0.0, g.theta_max - g.theta_min, g.h_dev)
            within &= db.lhs <= db.budget
            ratios.append(db.ratio)
        spreads[k] = max(ratios) / min(ratios)
    worst = max(spreads.values())
    _cache["c9"] = (cap_lhs, spreads, within)
    ok = cap_lhs <= 1e-10 and worst <= 2.0
    return ok, (f"cap lhs {cap_lhs:.1e}, lhs<=budget {within}, ratio spread per mode "
                + ", ".join(f"k={k}: {v:.2f}" for k, v in spreads.items())
                + " (lhs is O(t^2) while the budget is O(t); see decisions ledger)")


def criterion_10():
    worst = 0.0
    for r in (0.5, 1.0, 2.0):
        for th in (1.8, 2 * math.pi / 3, 2.6):
            wb = wetted_bounds(cap_report(CapSpec(r, th)), 0.0, 0.0, 0.0)
            worst = max(worst, abs(wb.identity_lhs - wb.identity_rhs))
    unit = wetted_bounds(cap_report(UNIT), 0.0, 0.0, 0.0)
    unit_ok = abs(unit.identity_lhs - 1.5 * math.pi) <= 1e-12 and abs(unit.identity_rhs - 1.5 * math.pi) <= 1e-12
    fam_ok = True
    for t, k, g, s in _family():
        wb = wetted_bounds(g, 0.0, g.theta_max - g.theta_min, g.h_dev)
        fam_ok &= wb.perimeter_bound_ok and wb.ratio_ok
    return worst <= 1e-12 and unit_ok and fam_ok, f"identity max diff {worst:.1e}, unit cap 1.5pi {unit_ok}, family bounds {fam_ok}"


def criterion_11():
    t0 = time.perf_counter()
    sol = solve_droplet(CapillaryConfig(sigma=-0.5, bond=0.0, volume_target=0.625 * math.pi / 3))
    dt = time.perf_counter() - t0
    r = float(np.max(np.hypot(sol.profile.rho, sol.profile.z + 0.5)))
    errs = [abs(r - 1), abs(sol.lagrange_multiplier - 2), abs(sol.contact_angle - 2 * math.pi / 3),
            sol.el_residual, sol.young_residual, abs(sol.volume - 0.625 * math.pi / 3)]
    return max(errs) <= 1e-8 and dt < 1, f"max residual {max(errs):.1e}, {dt:.3f}s"


def criterion_12():
    t0 = time.perf_counter()
    ms = [0.5**j for j in range(7)]
    rows = scaling_study(CapillaryConfig(sigma=-0.5, bond=1.0), ms)
    dt = time.perf_counter() - t0
    sd = [r.sym_diff for r in rows]
    mono = all(b <= a for a, b in zip(sd, sd[1:]))
    lim = extrapolate_limit(rows, 1.0)
    ok = mono and sd[-1] / sd[0] <= 0.25 and lim <= 1e-3 and dt < 30
    return ok, f"monotone {mono}, final/first {sd[-1] / sd[0]:.3f}, extrapolated {lim:.1e}, {dt:.2f}s"


def criterion_13():
    worst = worst_o = 0.0
    for l in np.linspace(0.1, 2.0, 10):
        for r in np.linspace(0.01, 1.0, 10):
            w = wedge_gap(float(l), float(r), -0.5, 2)
            worst = max(worst, abs(w.gap - w.direct_gap))
            worst_o = max(worst_o, abs(w.gap - wedge_facets(l, r, -0.5)))
    g = wedge_gap(1.0, 0.1, -0.5, 2).gap
    ok = worst <= 1e-12 and worst_o <= 1e-12 and abs(g - 0.1136068) <= 1e-7
    return ok, f"grid max |closed-direct| {worst:.1e}, gap(1,0.1,-0.5) = {g:.7f}"


def criterion_14():
    commands = [
        ["hk-verify", "--samples", "20000", "--seed", "3", "--workers", "4"],
        ["torsion-check", "--h", "0.04"],
        ["droplet", "--bond", "0.3"],
        ["scaling-study", "--steps", "4", "--workers", "2"],
        ["wedge"],
        ["calibrate"],
        ["report"],
    ]
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [os.path.join(tmp, "a"), os.path.join(tmp, "b")]
        codes = []
        for d in dirs:
            codes.append([run(c + ["--output-dir", d]) for c in commands])
        names = sorted(os.listdir(dirs[0]))
        same = names == sorted(os.listdir(dirs[1])) and all(
            open(os.path.join(dirs[0], f), "rb").read() == open(os.path.join(dirs[1], f), "rb").read()
            for f in names
        )
    ok = same and codes[0] == codes[1] == [0] * len(commands)
    return ok, f"{len(names)} files byte-identical {same}, exit codes {codes[0]}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 15)}


@pytest.mark.parametrize("number", [n for n in CRITERIA if n != 9])
def test_criterion(number, record_acceptance):
    ok, detail = CRITERIA[number]()
    record_acceptance(number, ok, detail)
    assert ok, detail


def test_criterion_9_quantitative_deficit(record_acceptance):
    """The exact-cap part holds; the 2x spread does not and is recorded as FAIL.

    On the axisymmetric perturbed family theta_dev = eps = 0, so the budget is
    h_dev (d + 1/lambda) H(M) = O(t) while the deficit is O(t^2): the ratio
    grows linearly in t and spans a factor near 4 over t in {0.01, 0.02, 0.04}.
    The test pins that behaviour so a regression in either side is caught.
    """
    ok, detail = criterion_9()
    record_acceptance(9, ok, detail)
    cap_lhs, spreads, within = _cache["c9"]
    assert cap_lhs <= 1e-10
    assert within
    for k, v in spreads.items():
        assert 3.0 < v < 5.5, (k, v)


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
    sys.exit(1 if failed else 0)
