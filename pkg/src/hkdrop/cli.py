"""Batch front end: verification suites, sweeps and reports.

Every subcommand writes ``<command>.json`` (sorted keys, convention ledger
attached) plus CSV tables and gnuplot data into ``--output-dir`` and prints
the JSON to stdout. Exit codes: 0 success, 2 identity or inequality outside
tolerance, 1 usage or numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, is_dataclass
from enum import Enum

import numpy as np

from . import capillary as cap_mod
from . import geometry as geo
from . import heintze_karcher as hk
from ._accel import backend
from .conventions import ledger
from .errors import HKDropError

EXIT_OK, EXIT_FAIL, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------
def parse_angle(text) -> float:
    """'120deg' or '2.0944rad' to radians. A bare number is rejected."""
    if isinstance(text, (int, float)):
        raise UsageError("angles need an explicit 'deg' or 'rad' suffix")
    t = str(text).strip().lower()
    for suffix, scale in (("deg", math.pi / 180.0), ("rad", 1.0)):
        if t.endswith(suffix):
            try:
                return float(t[: -len(suffix)]) * scale
            except ValueError:
                break
    raise UsageError(f"cannot parse angle {text!r}; use e.g. 120deg or 2.0944rad")


def parse_cap(text) -> geo.CapSpec:
    if isinstance(text, dict):
        items = dict(text)
    else:
        items = {}
        for part in str(text).split(","):
            if "=" not in part:
                raise UsageError(f"cap entry {part!r} is not key=value")
            k, v = part.split("=", 1)
            items[k.strip()] = v.strip()
    unknown = set(items) - {"r", "theta", "n"}
    if unknown or "theta" not in items:
        raise UsageError(f"cap needs r=...,theta=... (got keys {sorted(items)})")
    try:
        r = float(items.get("r", 1.0))
        n = int(items.get("n", 2))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return geo.CapSpec(r=r, theta=parse_angle(items["theta"]), n=n)


def _clean(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _clean(asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_dat(path, columns: dict) -> None:
    """Whitespace-delimited columns with a '#' header, for gnuplot."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    with open(path, "w") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for row in data:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


class Outcome:
    """Collects named checks and output files for one subcommand."""

    def __init__(self, command: str, args):
        self.command = command
        self.args = args
        self.body: dict = {}
        self.checks: dict = {}
        self.files: list = []

    def check(self, name, value, tol, ok=None):
        if ok is None:
            ok = abs(value) <= tol
        self.checks[name] = {"value": value, "tol": tol, "ok": bool(ok)}
        return ok

    def path(self, name):
        self.files.append(name)
        return os.path.join(self.args.output_dir, name)

    @property
    def violations(self):
        return sorted(k for k, v in self.checks.items() if not v["ok"])

    def finish(self) -> int:
        code = EXIT_VIOLATION if self.violations else EXIT_OK
        cfg = {k: v for k, v in vars(self.args).items() if k not in ("func", "config", "output_dir")}
        doc = {
            "command": self.command,
            "config": cfg,
            "conventions": ledger(getattr(self.args, "lambda_slope", "cot")),
            "backend": backend(),
            "results": self.body,
            "checks": self.checks,
            "violations": self.violations,
            "status": "violation" if code else "ok",
            "exit_code": code,
            "files": sorted(self.files + [f"{self.command}.json"]),
        }
        text = dumps(doc)
        with open(os.path.join(self.args.output_dir, f"{self.command}.json"), "w") as fh:
            fh.write(text)
        sys.stdout.write(text)
        return code


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------
def cmd_hk_verify(args) -> int:
    out = Outcome("hk-verify", args)
    cap = parse_cap(args.cap)
    g = geo.cap_report(cap, args.lambda_slope)
    d = hk.hk_deficit(g)
    out.body["closed_form"] = {"geometry": g.to_dict(), "deficit": d.to_dict()}
    out.check("closed_form_relative_deficit", d.relative_deficit, args.tol)
    if cap.n == 2:
        p = geo.cap_profile(cap, args.n_points)
        gp = geo.profile_report(p, lambda_slope=args.lambda_slope)
        dp = hk.hk_deficit(gp)
        mr = hk.montiel_ros_integral(p)
        out.body["profile"] = {"geometry": gp.to_dict(), "deficit": dp.to_dict()}
        out.body["montiel_ros"] = {"gamma_integral": mr.gamma_integral,
                                   "amgm_bound": mr.amgm_bound, "gap": mr.gap}
        out.check("profile_relative_deficit", dp.relative_deficit, args.profile_tol)
        out.check("montiel_ros_gap", mr.gap, 1e-10, ok=mr.gap >= -1e-10)
        geo.write_profile_csv(p, out.path("hk-verify_profile.csv"))
        write_dat(out.path("hk-verify_profile.dat"),
                  {"s": p.s, "rho": p.rho, "z": p.z, "phi": p.phi, "H": p.mean_curvature()})
        if args.samples:
            cov = hk.coverage_sample(p, gp, num_samples=args.samples, seed=args.seed,
                                     workers=args.workers)
            out.body["coverage"] = {
                "covered_fraction": cov.covered_fraction,
                "num_samples": cov.num_samples,
                "boundary_hits": cov.boundary_hits,
                "obtuse_ok": cov.obtuse_ok,
                "num_violations": len(cov.violations),
            }
            out.check("coverage_uncovered_fraction", 1.0 - cov.covered_fraction, 0.0)
            hk.write_violations_csv(cov, out.path("hk-verify_violations.csv"))
    return out.finish()


def _torsion_profile(args):
    cap = parse_cap(args.cap)
    if args.container == "flat":
        return cap, geo.FLAT, geo.cap_profile(cap, args.n_points)
    c = geo.ContainerModel.bowl(args.bowl_radius)
    return cap, c, geo.bowl_cap_profile(cap.r, cap.theta, args.bowl_radius, args.n_points)


def cmd_torsion_check(args) -> int:
    from . import torsion

    out = Outcome("torsion-check", args)
    if not args.h > 0:
        raise UsageError("--h must be positive")
    cap, c, p = _torsion_profile(args)
    g = geo.profile_report(p, c, lambda_slope=args.lambda_slope)
    gamma = -cap.r * math.cos(cap.theta) / (cap.n + 1) if c.is_flat else torsion.compute_gamma(g)
    mesh = torsion.mesh_meridian(p, c, h=args.h)
    s = torsion.solve_torsion(mesh, gamma, allow_hydrophobic=args.allow_hydrophobic)
    rr = torsion.reilly_report(s, g, c)
    lc = torsion.linf_check(s, g)
    eps = args.eps if args.eps is not None else (
        0.0 if c.is_flat else geo.flatness_metrics(c, float(np.max(np.hypot(p.rho, p.z)))))
    out.body.update({
        "gamma": gamma,
        "eps": eps,
        "mesh": {"h": args.h, "nodes": mesh.n_nodes, "elements": int(mesh.elements.shape[0])},
        "solver": {"iterations": s.iterations, "relative_residual": s.residual_linear_solve,
                   "conforming": s.conforming, "notes": list(s.notes)},
        "reilly": rr.to_dict(),
        "linf": asdict(lc),
        "integrals": torsion.integrals(s).by_name(),
    })
    if c.is_flat:
        out.body["max_error_vs_exact"] = s.max_error(cap.exact_torsion)
    if s.conforming:
        res = rr.residuals
        out.check("reilly_first_residual", res["first"], args.tol)
        out.check("reilly_big_residual", res["big"], args.tol)
        out.check("divergence_residual", res["divergence"], args.tol)
        out.check("u_lower_bound", lc.u_min, 1e-8, ok=lc.u_min >= -1e-8)
        out.check("u_upper_bound", lc.u_max, lc.bound, ok=lc.ok)
        ch = torsion.stability_chain(s, g, eps)
        out.body["stability_chain"] = asdict(ch)
        out.check("stability_chain_ordering", ch.line1 - ch.line2, 1e-3, ok=ch.monotone_ok)
        if not c.is_flat:
            sb = torsion.substrate_term_bound(s, g, eps)
            out.body["substrate_bound"] = asdict(sb)
            out.check("substrate_term_bound", sb.lhs, sb.rhs, ok=sb.ok)
    s.export_csv(out.path("torsion-check_u.csv"))
    nodes = mesh.nodes
    write_dat(out.path("torsion-check_u.dat"), {"rho": nodes[:, 0], "z": nodes[:, 1], "u": s.u})
    return out.finish()


def cmd_droplet(args) -> int:
    out = Outcome("droplet", args)
    cfg = cap_mod.CapillaryConfig(sigma=args.sigma, bond=args.bond, volume_target=args.volume)
    sol = cap_mod.solve_droplet(cfg, n_points=args.n_points)
    out.body["solution"] = sol.scalars()
    out.body["newton_trace"] = sol.trace
    out.check("el_residual", sol.el_residual, args.tol)
    out.check("young_residual", sol.young_residual, args.tol)
    out.check("volume_residual", sol.volume - args.volume, args.tol * max(1.0, args.volume))
    p = sol.profile
    geo.write_profile_csv(p, out.path("droplet_profile.csv"))
    write_dat(out.path("droplet_profile.dat"), {"s": p.s, "rho": p.rho, "z": p.z, "phi": p.phi})
    return out.finish()


def cmd_scaling_study(args) -> int:
    out = Outcome("scaling-study", args)
    if args.steps < 3:
        raise UsageError("--steps must be at least 3")
    ms = [args.m0 * 0.5**k for k in range(args.steps + 1)]
    cfg = cap_mod.CapillaryConfig(sigma=args.sigma, bond=args.bond, volume_target=args.m0)
    rows = cap_mod.scaling_study(cfg, ms, workers=args.workers)
    sd = [r.sym_diff for r in rows]
    limit = cap_mod.extrapolate_limit(rows, args.bond)
    monotone = all(b <= a + 1e-12 for a, b in zip(sd, sd[1:]))
    out.body["rows"] = [asdict(r) for r in rows]
    out.body["extrapolated_limit"] = limit
    out.body["final_over_first"] = sd[-1] / sd[0] if sd[0] > 0 else 0.0
    out.check("monotone_nonincreasing", 0.0, 0.0, ok=monotone)
    out.check("extrapolated_limit", limit, args.tol)
    if sd[0] > args.tol:
        out.check("final_over_first", sd[-1] / sd[0], 0.25)
    cap_mod.write_scaling_csv(rows, out.path("scaling.csv"))
    write_dat(out.path("scaling.dat"), {
        "m": [r.m for r in rows], "sym_diff": sd, "theta_star": [r.theta_star for r in rows],
        "bond_m23": [args.bond * r.m ** (2.0 / 3.0) for r in rows],
    })
    return out.finish()


def cmd_wedge(args) -> int:
    out = Outcome("wedge", args)
    w = cap_mod.wedge_gap(args.l, args.r, args.sigma, args.n)
    out.body.update(asdict(w))
    if w.direct_gap is not None:
        out.check("closed_form_vs_direct", w.gap - w.direct_gap, args.tol)
    rs = np.linspace(0.0, 1.5 * w.positivity_threshold, 61)[1:]
    gaps = [cap_mod.wedge_gap(args.l, float(r), args.sigma, args.n).gap for r in rs]
    write_dat(out.path("wedge_gap.dat"), {"r": rs, "gap": gaps})
    return out.finish()


def cmd_calibrate(args) -> int:
    """Exact-cap identity suite; stops at the first drift."""
    from . import torsion

    out = Outcome("calibrate", args)
    thetas = {
        "hydrophobic": np.linspace(0.2, 0.5 * math.pi - 0.2, 6),
        "hydrophilic": np.linspace(0.5 * math.pi + 0.2, math.pi - 0.2, 6),
    }

    def suite():
        worst = 0.0
        for th in np.concatenate(list(thetas.values())):
            for r in (0.5, 1.0, 2.0):
                d = hk.hk_deficit(geo.cap_report(geo.CapSpec(r, float(th))))
                worst = max(worst, abs(d.relative_deficit))
        yield "cap_relative_deficit", worst, args.tol

        sph = hk.sphere_hk(1.0)
        yield "sphere_hk", abs(sph.lhs - sph.rhs) / sph.rhs, args.tol
        yield "sphere_cmc_identity", sph.cmc_identity_residual, args.tol

        worst_gamma = worst_wet = worst_lam = worst_q = 0.0
        for th in thetas["hydrophilic"]:
            for r in (0.5, 1.0, 2.0):
                g = geo.cap_report(geo.CapSpec(r, float(th)))
                lam_signed = -math.copysign(1.0, math.cos(th)) * g.lambda_volume
                worst_gamma = max(worst_gamma, abs(g.gamma * g.area_Sigma - lam_signed) / g.volume)
                wb = torsion.wetted_bounds(g, 0.0, 0.0, 0.0)
                worst_wet = max(worst_wet, abs(wb.identity_lhs - wb.identity_rhs) / wb.identity_rhs)
                db = torsion.deficit_bound_check(g, 0.0, 0.0, 0.0)
                worst_lam = max(worst_lam, db.lambdabound_verified / g.area_M)
                worst_q = max(worst_q, db.lhs / g.area_M)
        yield "gamma_sigma_vs_lambda", worst_gamma, args.tol
        yield "wetted_identity", worst_wet, args.tol
        yield "volume_lambda_relation", worst_lam, args.tol
        yield "quantitative_deficit_on_caps", worst_q, args.tol

        w = cap_mod.wedge_gap(1.0, 0.1, -0.5, 2)
        yield "wedge_closed_vs_direct", abs(w.gap - w.direct_gap), args.tol

        m = math.pi * 0.625 / 3.0
        sol = cap_mod.solve_droplet(cap_mod.CapillaryConfig(sigma=-0.5, bond=0.0, volume_target=m))
        yield "droplet_zero_gravity", max(abs(sol.lagrange_multiplier - 2.0),
                                          abs(sol.contact_angle - 2 * math.pi / 3),
                                          sol.el_residual, sol.young_residual), 1e-8

        cap = geo.CapSpec(1.0, 2.0 * math.pi / 3.0)
        p = geo.cap_profile(cap, 4000)
        s = torsion.solve_torsion(torsion.mesh_meridian(p, h=0.04), -math.cos(cap.theta) / 3.0)
        rr = torsion.reilly_report(s).residuals
        yield "torsion_max_error", s.max_error(cap.exact_torsion), 5e-4
        yield "torsion_reilly_first", rr["first"], 1e-3
        yield "torsion_reilly_big", rr["big"], 1e-3

    for name, value, tol in suite():
        if not out.check(name, value, tol):
            break
    return out.finish()


def cmd_report(args) -> int:
    names = sorted(
        f for f in os.listdir(args.output_dir)
        if f.endswith(".json") and f != "report.json"
    )
    if not names:
        raise UsageError(f"no JSON summaries found in {args.output_dir}")
    summary = {}
    for f in names:
        with open(os.path.join(args.output_dir, f)) as fh:
            doc = json.load(fh)
        if "command" not in doc:
            continue
        summary[doc["command"]] = {
            "status": doc["status"],
            "exit_code": doc["exit_code"],
            "violations": doc["violations"],
            "checks": {k: v["ok"] for k, v in doc["checks"].items()},
        }
    out = Outcome("report", args)
    out.body["commands"] = summary
    for cmd, v in summary.items():
        out.check(f"{cmd}_status", v["exit_code"], 0, ok=v["exit_code"] == 0)
    lines = [f"{'command':<16} {'status':<10} violations"]
    for cmd, v in summary.items():
        lines.append(f"{cmd:<16} {v['status']:<10} {','.join(v['violations']) or '-'}")
    with open(out.path("report.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return out.finish()


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys override flags")
    common.add_argument("--output-dir", default="hkdrop_out")
    common.add_argument("--seed", type=int, default=0)

    ap = _Parser(prog="hkdrop", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, func, help_, tol):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--tol", type=float, default=tol)
        p.set_defaults(func=func)
        return p

    p = add("hk-verify", cmd_hk_verify, "Heintze-Karcher deficit of a cap", 1e-12)
    p.add_argument("--cap", default="r=1,theta=120deg")
    p.add_argument("--n-points", type=int, default=2000)
    p.add_argument("--profile-tol", type=float, default=1e-4)
    p.add_argument("--samples", type=int, default=0, help="coverage samples (0 to skip)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--lambda-slope", choices=("cot", "tan"), default="cot")

    p = add("torsion-check", cmd_torsion_check, "torsion solve and Reilly identities", 1e-3)
    p.add_argument("--cap", default="r=1,theta=120deg")
    p.add_argument("--h", type=float, default=0.02)
    p.add_argument("--n-points", type=int, default=4000)
    p.add_argument("--container", choices=("flat", "bowl"), default="flat")
    p.add_argument("--bowl-radius", type=float, default=10.0)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--allow-hydrophobic", action="store_true")
    p.add_argument("--lambda-slope", choices=("cot", "tan"), default="cot")

    p = add("droplet", cmd_droplet, "volume and contact-angle constrained droplet", 1e-8)
    p.add_argument("--sigma", type=float, default=-0.5)
    p.add_argument("--bond", type=float, default=0.0)
    p.add_argument("--volume", type=float, default=math.pi * 0.625 / 3.0)
    p.add_argument("--n-points", type=int, default=2001)

    p = add("scaling-study", cmd_scaling_study, "small-volume convergence to a cap", 1e-3)
    p.add_argument("--sigma", type=float, default=-0.5)
    p.add_argument("--bond", type=float, default=1.0)
    p.add_argument("--m0", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--workers", type=int, default=1)

    p = add("wedge", cmd_wedge, "energy gap of the wedge competitor", 1e-12)
    p.add_argument("--l", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=-0.5)
    p.add_argument("--n", type=int, default=2)

    add("calibrate", cmd_calibrate, "exact-cap identity suite", 1e-10)
    add("report", cmd_report, "collect JSON summaries in the output directory", 0.0)
    return ap


def _apply_config(args, parser):
    with open(args.config) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    known = vars(args)
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("func", "command", "config") or dest not in known:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        setattr(args, dest, val)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.config:
            _apply_config(args, parser)
        os.makedirs(args.output_dir, exist_ok=True)
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hkdrop: error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (HKDropError, ValueError, OSError) as exc:
        print(f"hkdrop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> int:
    return run(sys.argv[1:])
