"""Sessile droplets: Gauss energy, Young-Laplace shooting, the volume and
contact-angle constrained solver, the small-volume scaling study and the wedge
competitor energy gap.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.optimize import minimize_scalar

from .errors import ApexSingularity, InvalidSigma, NoSubstrateHit, RootFindDiverged
from .geometry import CapSpec, MeridianProfile, cap_report


@dataclass(frozen=True)
class CapillaryConfig:
    sigma: float
    bond: float = 0.0
    volume_target: float = 1.0

    def __post_init__(self):
        if not -1.0 < self.sigma < 1.0:
            raise InvalidSigma(f"|sigma| must be < 1, got {self.sigma!r}")
        if self.bond < 0:
            raise ValueError("bond must be >= 0 (sessile configuration)")
        if not self.volume_target > 0:
            raise ValueError("volume_target must be positive")

    @property
    def theta0(self) -> float:
        return math.acos(self.sigma)


def _volume_cap(r, theta):
    c = math.cos(theta)
    return math.pi / 3.0 * r**3 * (1 + c) ** 2 * (2 - c)


def cap_radius_for_volume(m: float, theta: float) -> float:
    return (m / _volume_cap(1.0, theta)) ** (1.0 / 3.0)


# --------------------------------------------------------------------------
# energy and residuals
# --------------------------------------------------------------------------
def gauss_energy(p: MeridianProfile, cfg: CapillaryConfig) -> float:
    """H^2(M) + sigma H^2(Sigma) + B int_Omega z on a flat substrate."""
    area = float(p.area_weights().sum())
    wet = math.pi * float(p.rho[-1]) ** 2
    potential = math.pi * float(trapezoid(p.rho**2 * p.z * np.sin(p.phi), p.s))
    return area + cfg.sigma * wet + cfg.bond * potential


@dataclass(frozen=True)
class ELResiduals:
    max_mc_residual: float
    young_residual: float
    lambda_hat: float


def el_residuals(p: MeridianProfile, cfg: CapillaryConfig) -> ELResiduals:
    """Pointwise |H + B z - lambda_hat| and |cos(theta) - sigma| on a flat substrate."""
    q = p.mean_curvature() + cfg.bond * p.z
    w = p.area_weights()
    lam = float(w @ q) / float(w.sum())
    return ELResiduals(
        max_mc_residual=float(np.max(np.abs(q - lam))),
        young_residual=abs(math.cos(p.contact_angle()) - cfg.sigma),
        lambda_hat=lam,
    )


# --------------------------------------------------------------------------
# shooting
# --------------------------------------------------------------------------
def _rhs(lam, B):
    def f(s, y):
        rho, z, phi, _ = y
        k = lam - B * z
        if rho < 1e-12:
            dphi = 0.5 * k
        else:
            dphi = k - math.sin(phi) / rho
        return [math.cos(phi), -math.sin(phi), dphi, math.pi * rho * rho * math.sin(phi)]

    return f


def shoot_profile(
    apex_height: float,
    lam: float,
    B: float = 0.0,
    n_points: int = 2001,
    s_max: Optional[float] = None,
    rtol: float = 1e-12,
    atol: float = 1e-13,
) -> MeridianProfile:
    """Integrate the axisymmetric Young-Laplace equation from the apex down to z = 0.

    The profile satisfies d(rho)/ds = cos(phi), dz/ds = -sin(phi) and
    dphi/ds = (lam - B z) - sin(phi)/rho, with dphi/ds = (lam - B z)/2 on the
    axis. Integration stops at the first crossing of z = 0.
    """
    if not apex_height > 0:
        raise ValueError("apex_height must be positive")
    k0 = 0.5 * (lam - B * apex_height)
    if k0 <= 0:
        raise NoSubstrateHit("apex curvature is not positive; the profile never bends down")
    scale = max(apex_height, 1.0 / k0)
    if s_max is None:
        s_max = 20.0 * scale
    # short series start away from the axis
    s0 = 1e-6 * scale
    y0 = [s0 - k0**2 * s0**3 / 6.0, apex_height - 0.5 * k0 * s0**2, k0 * s0, 0.0]

    def hit(s, y):
        return y[1]

    hit.terminal = True
    hit.direction = -1

    def turned(s, y):
        return y[2] - math.pi

    turned.terminal = True

    sol = solve_ivp(
        _rhs(lam, B), (s0, s0 + s_max), y0, method="DOP853", rtol=rtol, atol=atol,
        events=(hit, turned), dense_output=True,
    )
    if sol.status < 0:
        if sol.t.size < 3:
            raise ApexSingularity(f"integration failed near the axis: {sol.message}")
        raise NoSubstrateHit(f"integration failed: {sol.message}")
    if sol.t_events[0].size == 0:
        raise NoSubstrateHit("profile did not reach z = 0 within the arclength budget")
    s_end = float(sol.t_events[0][0])
    s = np.linspace(s0, s_end, n_points - 1)
    Y = sol.sol(s)
    rho = np.concatenate([[0.0], Y[0]])
    z = np.concatenate([[apex_height], Y[1]])
    phi = np.concatenate([[0.0], Y[2]])
    z[-1] = 0.0
    s_full = np.concatenate([[0.0], s])
    with np.errstate(divide="ignore", invalid="ignore"):
        kp = np.where(rho > 0, np.sin(phi) / np.where(rho > 0, rho, 1.0), 0.5 * (lam - B * z))
    km = (lam - B * z) - kp
    return MeridianProfile(s=s_full, rho=rho, z=z, phi=phi, curvature=km)


def shot_volume(p: MeridianProfile) -> float:
    return math.pi * float(trapezoid(p.rho**2 * np.sin(p.phi), p.s))


def _shoot_scalars(h0, lam, B):
    """(volume, contact angle) of one shot, with the volume carried by the ODE."""
    k0 = 0.5 * (lam - B * h0)
    if k0 <= 0 or h0 <= 0:
        raise NoSubstrateHit("invalid apex data")
    scale = max(h0, 1.0 / k0)
    s0 = 1e-6 * scale
    y0 = [s0 - k0**2 * s0**3 / 6.0, h0 - 0.5 * k0 * s0**2, k0 * s0, math.pi * k0 * s0**4 / 4.0]

    def hit(s, y):
        return y[1]

    hit.terminal = True
    hit.direction = -1

    def turned(s, y):
        return y[2] - math.pi

    turned.terminal = True
    sol = solve_ivp(
        _rhs(lam, B), (s0, s0 + 20 * scale), y0, method="DOP853", rtol=1e-12, atol=1e-14,
        events=(hit, turned),
    )
    if sol.t_events[0].size == 0:
        raise NoSubstrateHit("profile did not reach the substrate")
    ye = sol.y_events[0][0]
    return float(ye[3]), math.pi - float(ye[2])


# --------------------------------------------------------------------------
# droplet solver
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class DropletSolution:
    profile: MeridianProfile
    lagrange_multiplier: float
    contact_angle: float
    volume: float
    energy: float
    el_residual: float
    young_residual: float
    apex_height: float
    iterations: int
    trace: list = field(default_factory=list)

    def scalars(self) -> dict:
        return {
            "lagrange_multiplier": self.lagrange_multiplier,
            "contact_angle": self.contact_angle,
            "volume": self.volume,
            "energy": self.energy,
            "el_residual": self.el_residual,
            "young_residual": self.young_residual,
            "apex_height": self.apex_height,
            "iterations": self.iterations,
        }


BOND_LIMIT = 20.0  # B m^(2/3) above this is outside the documented convex branch


def _newton(x, m, B, sig, tol, max_iter, trace):
    """Damped Newton on (volume - m)/m and cos(theta) - sigma; step halved until the residual drops."""

    def F(v):
        vol, th = _shoot_scalars(v[0], v[1], B)
        return np.array([(vol - m) / m, math.cos(th) - sig])

    x = np.asarray(x, dtype=float)
    try:
        f = F(x)
    except NoSubstrateHit as exc:
        raise RootFindDiverged(f"initial shot failed at B={B:g}: {exc}", trace) from exc
    for it in range(1, max_iter + 1):
        trace.append({"bond": B, "iter": it, "apex_height": float(x[0]), "lambda": float(x[1]),
                      "residual": float(np.max(np.abs(f)))})
        if np.max(np.abs(f)) <= tol:
            return x, it
        J = np.empty((2, 2))
        for j in range(2):
            dx = 1e-7 * max(abs(x[j]), 1e-3)
            xp = x.copy()
            xp[j] += dx
            try:
                J[:, j] = (F(xp) - f) / dx
            except NoSubstrateHit as exc:
                raise RootFindDiverged("Jacobian probe left the admissible branch", trace) from exc
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise RootFindDiverged("singular Jacobian", trace) from exc
        t = 1.0
        while True:
            xn = x + t * step
            try:
                if xn[0] <= 0:
                    raise NoSubstrateHit("negative apex height")
                fn = F(xn)
                if np.max(np.abs(fn)) < np.max(np.abs(f)) or t < 1e-3:
                    break
            except NoSubstrateHit:
                if t < 1e-3:
                    raise RootFindDiverged("line search failed", trace)
            t *= 0.5
        x, f = xn, fn
    raise RootFindDiverged(f"no convergence in {max_iter} iterations", trace)


def solve_droplet(
    cfg: CapillaryConfig,
    n_points: int = 2001,
    tol: float = 1e-11,
    max_iter: int = 50,
) -> DropletSolution:
    """Find (apex height, lambda) with |Omega| = m and cos(theta) = sigma by damped Newton.

    The iteration starts from the zero-gravity cap of the same volume; when that
    seed misses the substrate the Bond number is ramped up in eight steps.
    """
    m, B, sig = cfg.volume_target, cfg.bond, cfg.sigma
    if B * m ** (2.0 / 3.0) > BOND_LIMIT:
        raise RootFindDiverged(
            f"B m^(2/3) = {B * m ** (2 / 3):.3g} exceeds the supported range {BOND_LIMIT}", []
        )
    th0 = cfg.theta0
    r0 = cap_radius_for_volume(m, th0)
    x0 = np.array([r0 * (1.0 + math.cos(th0)), 2.0 / r0])
    trace = []
    try:
        _shoot_scalars(x0[0], x0[1], B)
        x, it = _newton(x0, m, B, sig, tol, max_iter, trace)
    except NoSubstrateHit:
        # the zero-gravity seed has no substrate hit at this Bond number: continue in B
        x, steps = x0, 8
        for j in range(1, steps + 1):
            x, it = _newton(x, m, B * j / steps, sig, tol, max_iter, trace)
    p = shoot_profile(x[0], x[1], B, n_points=n_points)
    vol, th = _shoot_scalars(x[0], x[1], B)
    res = el_residuals(p, cfg)
    return DropletSolution(
        profile=p,
        lagrange_multiplier=float(x[1]),
        contact_angle=th,
        volume=vol,
        energy=gauss_energy(p, cfg),
        el_residual=res.max_mc_residual,
        young_residual=abs(math.cos(th) - sig),
        apex_height=float(x[0]),
        iterations=it,
        trace=trace,
    )


# --------------------------------------------------------------------------
# symmetric differences and the scaling study
# --------------------------------------------------------------------------
def _radius_sq_profile(p: MeridianProfile, scale: float = 1.0):
    zs = p.z[::-1] * scale
    r2 = (p.rho[::-1] * scale) ** 2
    top = float(zs[-1])

    def f(z):
        z = np.asarray(z, dtype=float)
        return np.where(z <= top, np.interp(z, zs, r2), 0.0)

    return f, top


def _radius_sq_cap(theta: float, volume: float = 1.0):
    r = cap_radius_for_volume(volume, theta)
    c = r * math.cos(theta)
    top = r + c

    def f(z):
        z = np.asarray(z, dtype=float)
        return np.clip(r * r - (z - c) ** 2, 0.0, None) * (z <= top)

    return f, top


def symmetric_difference(f1, top1, f2, top2, n_slices: int = 20001) -> float:
    """pi int |rho_1(z)^2 - rho_2(z)^2| dz for two bodies of revolution resting on z = 0."""
    z = np.linspace(0.0, max(top1, top2), n_slices)
    return math.pi * float(trapezoid(np.abs(f1(z) - f2(z)), z))


@dataclass(frozen=True)
class ScalingRow:
    m: float
    sym_diff: float
    theta_star: float
    lam: float
    energy: float


def _best_cap(p: MeridianProfile, m: float, theta_guess: float):
    f1, top1 = _radius_sq_profile(p, m ** (-1.0 / 3.0))

    def obj(th):
        f2, top2 = _radius_sq_cap(th)
        return symmetric_difference(f1, top1, f2, top2)

    lo = max(1e-3, theta_guess - 0.6)
    hi = min(math.pi - 1e-3, theta_guess + 0.6)
    res = minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return float(res.fun), float(res.x)


def scaling_study(
    cfg_base: CapillaryConfig,
    m_sequence: Sequence[float],
    workers: int = 1,
) -> list[ScalingRow]:
    """Normalised symmetric difference between each droplet and its best-fit unit-volume cap."""
    ms = [float(v) for v in m_sequence]
    if len(ms) < 4:
        raise ValueError("scaling_study needs at least 4 volumes")
    if any(b >= a for a, b in zip(ms, ms[1:])):
        raise ValueError("m_sequence must be strictly decreasing")

    def one(m):
        cfg = CapillaryConfig(sigma=cfg_base.sigma, bond=cfg_base.bond, volume_target=m)
        sol = solve_droplet(cfg)
        sd, th = _best_cap(sol.profile, m, cfg.theta0)
        return ScalingRow(m=m, sym_diff=sd, theta_star=th, lam=sol.lagrange_multiplier,
                          energy=sol.energy)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, ms))
    return [one(m) for m in ms]


def extrapolate_limit(rows: Sequence[ScalingRow], bond: float) -> float:
    """Intercept of the straight-line fit of sym_diff against B m^(2/3)."""
    x = np.array([bond * r.m ** (2.0 / 3.0) for r in rows])
    y = np.array([r.sym_diff for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    return float(intercept)


def write_scaling_csv(rows: Sequence[ScalingRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "sym_diff", "theta_star", "lambda", "energy"])
        for r in rows:
            w.writerow([repr(r.m), repr(r.sym_diff), repr(r.theta_star), repr(r.lam), repr(r.energy)])


# --------------------------------------------------------------------------
# wedge competitor
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class WedgeGap:
    gap: float
    positivity_threshold: float
    direct_gap: Optional[float]


def _polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    nrm = np.zeros(3)
    for i in range(len(v)):
        nrm += np.cross(v[i], v[(i + 1) % len(v)])
    return 0.5 * float(np.linalg.norm(nrm))


def wedge_direct_gap(l: float, r: float, sigma: float) -> float:
    """Perimeter of the wedge minus that of the competitor inside a prism of side l (n = 2).

    Coordinates (x1, x2, z); the prism is |x2| <= l/2, the notch is z >= |x1|/|sigma|.
    """
    a = abs(sigma)
    y0, y1 = -0.5 * l, 0.5 * l
    slanted = [
        [(0, y0, 0), (0, y1, 0), (s * a * r, y1, r), (s * a * r, y0, r)] for s in (1.0, -1.0)
    ]
    top = [(-a * r, y0, r), (a * r, y0, r), (a * r, y1, r), (-a * r, y1, r)]
    sides = [[(0, y, 0), (a * r, y, r), (-a * r, y, r)] for y in (y0, y1)]
    removed = sum(_polygon_area(f) for f in slanted)
    added = _polygon_area(top) + sum(_polygon_area(f) for f in sides)
    return removed - added


def wedge_gap(l: float, r: float, sigma: float, n: int = 2) -> WedgeGap:
    """Energy gap of the filled-notch competitor against the wedge between two tangent balls."""
    if not 0.0 < abs(sigma) < 1.0:
        raise InvalidSigma(f"need 0 < |sigma| < 1, got {sigma!r}")
    if not (l > 0 and r > 0) or int(n) != n or n < 2:
        raise ValueError("need l > 0, r > 0 and integer n >= 2")
    a = abs(sigma)
    q = math.sqrt(1.0 + sigma * sigma) - a
    gap = 2.0 * l ** (n - 1) * r * q - 2.0 * a * (n - 1) * l ** (n - 2) * r * r
    thr = l * q / (a * (n - 1))
    direct = wedge_direct_gap(l, r, sigma) if n == 2 else None
    return WedgeGap(gap=gap, positivity_threshold=thr, direct_gap=direct)
