"""Heintze-Karcher deficits on a substrate, the classical closed-surface
version, the Montiel-Ros normal-map integral and a Monte Carlo check of the
inclusion behind it.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.spatial import cKDTree

from . import kernels
from .errors import EmptyTestRegion, H2Violation, NotClosed, RegimeMissing
from .geometry import (
    FLAT,
    GeometryReport,
    MeridianProfile,
    Regime,
    ball_measure,
    profile_report,
    sphere_measure,
)

CAP_TOL = 1e-10
UMBILIC_TOL = 1e-12


@dataclass(frozen=True)
class DeficitReport:
    regime: Regime
    int_n_over_H: float
    signed_volume: float
    deficit: float
    relative_deficit: float
    equality: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value
        return d


def hk_deficit(g: GeometryReport, cap_tol: float = CAP_TOL) -> DeficitReport:
    """Deficit of the substrate Heintze-Karcher inequality for one geometry."""
    if g.regime is None:
        raise RegimeMissing("geometry report carries no regime (theta = pi/2?)")
    sign = -1.0 if g.regime is Regime.HYDROPHOBIC else 1.0
    signed = (g.n + 1) * (g.volume + sign * g.lambda_volume)
    deficit = g.int_n_over_H - signed
    rel = deficit / g.int_n_over_H
    return DeficitReport(
        regime=g.regime,
        int_n_over_H=g.int_n_over_H,
        signed_volume=signed,
        deficit=deficit,
        relative_deficit=rel,
        equality=abs(rel) < cap_tol,
    )


def richardson_deficit(make_profile: Callable[[int], MeridianProfile], n_points: int,
                       container=FLAT) -> tuple[DeficitReport, float]:
    """Deficit on ``2N`` nodes together with a Richardson error estimate from ``N`` and ``2N``."""
    coarse = hk_deficit(profile_report(make_profile(n_points), container))
    fine = hk_deficit(profile_report(make_profile(2 * n_points), container))
    # second-order quadrature: error(2N) ~ (d(2N) - d(N)) / 3
    return fine, abs(fine.deficit - coarse.deficit) / 3.0


@dataclass(frozen=True)
class ClassicalHK:
    lhs: float
    rhs: float
    cmc_identity_residual: Optional[float]


def classical_hk(closed_profile: MeridianProfile, cmc_tol: float = 1e-6) -> ClassicalHK:
    """Both sides of (n+1)|Omega| <= int n/H for a closed surface of revolution.

    When the mean curvature is constant (relative spread below ``cmc_tol``)
    the residual of (n+1)|Omega| = n H^n(bd Omega)/H is returned as well.
    """
    p = closed_profile
    if not p.closed:
        raise NotClosed("profile must start and end on the axis")
    H = p.mean_curvature()
    if np.any(H <= 0):
        raise H2Violation("mean curvature must be positive on a closed mean-convex surface")
    w = p.area_weights()
    area = float(w.sum())
    volume = math.pi * float(trapezoid(p.rho**2 * np.sin(p.phi), p.s))
    lhs = 3.0 * volume
    rhs = float(w @ (2.0 / H))
    h_mean = float(w @ H) / area
    residual = None
    if float(np.max(np.abs(H - h_mean))) <= cmc_tol * h_mean:
        residual = abs(lhs - 2.0 * area / h_mean)
    return ClassicalHK(lhs=lhs, rhs=rhs, cmc_identity_residual=residual)


def sphere_hk(r: float = 1.0, n: int = 2) -> ClassicalHK:
    """Closed-form sides of the classical inequality for a round sphere."""
    vol = ball_measure(n + 1) * r ** (n + 1)
    area = sphere_measure(n) * r**n
    lhs = (n + 1) * vol
    rhs = n * area / (n / r)
    return ClassicalHK(lhs=lhs, rhs=rhs, cmc_identity_residual=abs(lhs - n * area / (n / r)))


# --------------------------------------------------------------------------
# Montiel-Ros normal map
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class NormalMapSample:
    surface_point_index: int
    t: float
    jacobian: float


def principal_curvatures(p: MeridianProfile):
    k1 = p.kappa_meridian()
    k2 = p.kappa_parallel()
    return k1, k2


def max_curvature(p: MeridianProfile) -> np.ndarray:
    k1, k2 = principal_curvatures(p)
    umb = np.abs(k1 - k2) < UMBILIC_TOL
    return np.where(umb, 0.5 * (k1 + k2), np.maximum(k1, k2))


def normal_map_jacobian(p: MeridianProfile, index: int, t: float) -> NormalMapSample:
    k1, k2 = principal_curvatures(p)
    jac = (1.0 - t * k1[index]) * (1.0 - t * k2[index])
    return NormalMapSample(surface_point_index=int(index), t=float(t), jacobian=float(jac))


@dataclass(frozen=True)
class MontielRos:
    gamma_integral: float
    amgm_bound: float

    @property
    def gap(self) -> float:
        return self.amgm_bound - self.gamma_integral


def montiel_ros_integral(p: MeridianProfile) -> MontielRos:
    """int_M int_0^{1/kappa_max} (1 - t k1)(1 - t k2) dt, with the AM-GM bound (1/3) int 2/H."""
    k1, k2 = principal_curvatures(p)
    H = k1 + k2
    if np.any(H <= 0):
        raise H2Violation("mean curvature must be positive for the normal-map integral")
    umb = np.abs(k1 - k2) < UMBILIC_TOL
    T = np.where(umb, 2.0 / H, 1.0 / np.maximum(k1, k2))
    inner = T - 0.5 * H * T**2 + k1 * k2 * T**3 / 3.0
    w = p.area_weights()
    return MontielRos(gamma_integral=float(w @ inner), amgm_bound=float(w @ (2.0 / H)) / 3.0)


# --------------------------------------------------------------------------
# coverage sampling
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class Coverage:
    covered_fraction: float
    num_samples: int
    violations: list = field(default_factory=list)
    boundary_hits: int = 0
    obtuse_ok: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def lambda_height(g: GeometryReport, rho):
    """Height (or depth) of the cone Lambda above (below) the wetted disk."""
    slope = abs(math.cos(g.theta_min) / math.sin(g.theta_min))
    return np.clip(g.contact_radius - np.asarray(rho, dtype=float), 0.0, None) * slope


class _Curve:
    """Nearest-point queries on the Hermite interpolant of a profile."""

    def __init__(self, p: MeridianProfile):
        self.p = p
        self.P, self.T, self.ds = p.hermite()
        self.tree = cKDTree(self.P)
        self.kmax = max_curvature(p)
        self.nseg = self.ds.size

    def nearest(self, y, k=8):
        k = min(k, self.P.shape[0])
        _, idx = self.tree.query(y, k=k)
        idx = np.atleast_2d(idx)
        cand = np.concatenate([idx, idx - 1], axis=1)
        cand = np.where((cand >= 0) & (cand < self.nseg), cand, -1)
        cand = np.sort(cand, axis=1)
        # drop duplicates so every segment is searched once
        dup = np.zeros_like(cand, dtype=bool)
        dup[:, 1:] = cand[:, 1:] == cand[:, :-1]
        cand = np.where(dup, -1, cand)
        return kernels.hermite_nearest(y, cand, self.P, self.T, self.ds)


def _in_omega(p: MeridianProfile, rho, z):
    # z decreases along the profile, so rho_M(z) is single valued
    zs, rs = p.z[::-1], p.rho[::-1]
    inside_z = (z > 0.0) & (z < p.z[0])
    return inside_z & (rho < np.interp(z, zs, rs))


def _test_region(p, g, rho, z, region):
    lam = lambda_height(g, rho)
    in_disk = rho < g.contact_radius
    hydrophobic = g.regime is Regime.HYDROPHOBIC
    if region == "lambda":
        if hydrophobic:
            return in_disk & (z > 0) & (z < lam)
        return in_disk & (z < 0) & (z > -lam)
    omega = _in_omega(p, rho, z)
    if hydrophobic:
        return omega & ~(in_disk & (z <= lam))
    return omega | (in_disk & (z < 0) & (z > -lam))


def _shard(p, g, curve, bbox, quota, seed_seq, region, angle_tol, batch):
    rng = np.random.default_rng(seed_seq)
    rho_max, z_lo, z_hi = bbox
    accepted = []
    tries = 0
    need = quota
    while need > 0:
        tries += 1
        if tries > 1000:
            raise EmptyTestRegion("test region has (numerically) zero volume")
        rho = rho_max * np.sqrt(rng.random(batch))
        z = z_lo + (z_hi - z_lo) * rng.random(batch)
        keep = _test_region(p, g, rho, z, region)
        if not keep.any():
            continue
        y = np.stack([rho[keep], z[keep]], axis=-1)
        seg, tau, pos, tang, dist = curve.nearest(y)
        nu = np.stack([-tang[:, 1], tang[:, 0]], axis=-1)
        # samples in the thin sliver between the polyline and the smooth curve
        outside = np.einsum("ij,ij->i", y - pos, nu) > 0
        keep2 = ~outside if region != "lambda" else np.ones(y.shape[0], dtype=bool)
        idx = np.nonzero(keep2)[0][:need]
        accepted.append((y[idx], seg[idx], tau[idx], pos[idx], nu[idx], dist[idx]))
        need -= idx.size
    return [np.concatenate(parts) for parts in zip(*accepted)]


def coverage_sample(
    p: MeridianProfile,
    g: GeometryReport,
    num_samples: int = 100_000,
    seed: int = 0,
    region: str = "test",
    angle_tol: float = 1e-6,
    shards: int = 8,
    workers: int = 1,
    batch: int = 8192,
) -> Coverage:
    """Check that nearest points of M see test-region samples along the inner normal.

    ``region="test"`` samples Omega minus Lambda (hydrophobic) or Omega union
    Lambda (hydrophilic); ``region="lambda"`` samples Lambda alone. Sampling is
    uniform in volume (density proportional to rho in the meridian plane) and
    split over ``shards`` independent streams spawned from ``seed``.
    """
    if num_samples < 1000:
        raise ValueError("coverage_sample needs at least 1000 samples")
    if region not in ("test", "lambda"):
        raise ValueError(f"unknown region {region!r}")
    if g.regime is None:
        raise RegimeMissing("geometry report carries no regime")
    if np.any(np.diff(p.z) >= 0):
        raise ValueError("coverage sampling needs a profile with z strictly decreasing")
    lam_max = float(lambda_height(g, 0.0))
    if region == "lambda" and lam_max <= 0:
        raise EmptyTestRegion("Lambda is empty")
    curve = _Curve(p)
    z_lo = -lam_max if g.regime is Regime.HYDROPHILIC else 0.0
    z_hi = float(p.z[0]) if region == "test" else max(lam_max, 0.0)
    bbox = (float(p.rho.max()), z_lo, z_hi)
    children = np.random.SeedSequence(seed).spawn(shards)
    quotas = [num_samples // shards + (1 if i < num_samples % shards else 0) for i in range(shards)]

    def job(i):
        return _shard(p, g, curve, bbox, quotas[i], children[i], region, angle_tol, batch)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(shards)))
    else:
        parts = [job(i) for i in range(shards)]
    y, seg, tau, pos, nu, dist = (np.concatenate(c) for c in zip(*parts))

    kmax = curve.kmax
    k_at = (1.0 - tau) * kmax[seg] + tau * kmax[seg + 1]
    s_at = p.s[seg] + tau * curve.ds[seg]
    on_boundary = (seg == curve.nseg - 1) & (tau >= 1.0 - 1e-12)
    reach_ok = dist * k_at <= 1.0 + 1e-9
    d = pos - y
    dn = np.linalg.norm(d, axis=1)
    cosang = np.einsum("ij,ij->i", d, nu) / np.where(dn > 0, dn, 1.0)
    angle = np.arccos(np.clip(cosang, -1.0, 1.0))
    aligned = (angle <= angle_tol) | (dn == 0)
    ok = reach_ok & aligned & ~on_boundary

    # obtuseness test at the contact circle: (x0 - y)/|x0 - y| = cos(a) nu_H + sin(a) nu_Sigma
    alpha = np.arctan2(d[:, 0], -d[:, 1])
    obtuse = np.sin(g.theta_min - alpha) <= 0
    violations = []
    for i in np.nonzero(~ok)[0]:
        violations.append(
            {
                "y_rho": float(y[i, 0]),
                "y_z": float(y[i, 1]),
                "nearest_s": float(s_at[i]),
                "t": float(dist[i]),
                "kappa_max": float(k_at[i]),
                "boundary": bool(on_boundary[i]),
                "obtuse": bool(obtuse[i]) if on_boundary[i] else None,
            }
        )
    return Coverage(
        covered_fraction=float(ok.mean()),
        num_samples=int(ok.size),
        violations=violations,
        boundary_hits=int(on_boundary.sum()),
        obtuse_ok=int((obtuse & on_boundary).sum()),
    )


def write_violations_csv(cov: Coverage, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y_rho", "y_z", "nearest_s", "t", "kappa_max"])
        for v in cov.violations:
            w.writerow([repr(v[k]) for k in ("y_rho", "y_z", "nearest_s", "t", "kappa_max")])
