"""Axisymmetric droplets on a flat or spherical-bowl substrate.

Meridian conventions used throughout the package: a profile runs from the
apex (rho = 0) down to the contact point, with unit tangent
``(cos phi, -sin phi)`` and outward normal ``(sin phi, cos phi)`` in the
(rho, z) half-plane. The meridian curvature is ``dphi/ds`` and the parallel
curvature is ``sin(phi)/rho``; both are positive on a sphere. The contact
angle is defined by ``cos(theta) = nu_M . nu_K`` with ``nu_K`` the outer
normal of the container, so on a flat substrate ``theta = pi - phi_end``.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import gamma as gamma_fn

from . import kernels
from .errors import (
    DegenerateProfile,
    InvalidCap,
    MixedRegime,
    NonPositiveCurvature,
    ThetaDegenerate,
)

HALF_PI = 0.5 * math.pi
# contact angles this close to pi/2 count as pi/2
THETA_EPS = 1e-12


class Regime(str, enum.Enum):
    HYDROPHOBIC = "hydrophobic"
    HYDROPHILIC = "hydrophilic"


def regime_of(theta_min: float, theta_max: float) -> Regime:
    if 0.0 < theta_min <= theta_max < HALF_PI - THETA_EPS:
        return Regime.HYDROPHOBIC
    if HALF_PI + THETA_EPS < theta_min <= theta_max < math.pi:
        return Regime.HYDROPHILIC
    raise MixedRegime(
        f"contact-angle range [{theta_min!r}, {theta_max!r}] is not inside "
        "(0, pi/2) or (pi/2, pi)"
    )


def sphere_measure(k: int) -> float:
    """Surface measure of the unit sphere S^k."""
    return 2.0 * math.pi ** ((k + 1) / 2) / float(gamma_fn((k + 1) / 2))


def ball_measure(k: int) -> float:
    """Volume of the unit ball in R^k."""
    return math.pi ** (k / 2) / float(gamma_fn(k / 2 + 1))


def _sin_power_integral(k: int, x: float) -> float:
    # int_0^x sin^k via the standard reduction formula
    if k == 0:
        return x
    if k == 1:
        return 1.0 - math.cos(x)
    return -(math.sin(x) ** (k - 1)) * math.cos(x) / k + (k - 1) / k * _sin_power_integral(
        k - 2, x
    )


# --------------------------------------------------------------------------
# containers
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class ContainerModel:
    """Flat substrate z = 0 or a spherical bowl tangent to it at the origin.

    The bowl is the ball of radius ``bowl_radius`` centred at
    ``(0, bowl_radius)``; the droplet sits inside it.
    """

    kind: str = "flat"
    bowl_radius: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("flat", "bowl"):
            raise ValueError(f"unknown container kind {self.kind!r}")
        if self.kind == "bowl" and not (self.bowl_radius and self.bowl_radius > 0):
            raise ValueError("bowl container needs bowl_radius > 0")

    @classmethod
    def flat(cls) -> "ContainerModel":
        return cls("flat")

    @classmethod
    def bowl(cls, radius: float) -> "ContainerModel":
        return cls("bowl", float(radius))

    @property
    def is_flat(self) -> bool:
        return self.kind == "flat"

    @property
    def curvature(self) -> float:
        """Principal curvature of the container wall (0 for a plane)."""
        return 0.0 if self.is_flat else 1.0 / self.bowl_radius

    def surface_z(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.is_flat:
            return np.zeros_like(rho)
        R = self.bowl_radius
        return R - np.sqrt(R * R - rho * rho)

    def outer_normal(self, rho):
        """Outer normal of the container at wall points of radius ``rho``."""
        rho = np.asarray(rho, dtype=float)
        if self.is_flat:
            return np.stack([np.zeros_like(rho), -np.ones_like(rho)], axis=-1)
        R = self.bowl_radius
        return np.stack([rho / R, (self.surface_z(rho) - R) / R], axis=-1)

    def wetted_area(self, a: float) -> float:
        if self.is_flat:
            return math.pi * a * a
        return 2.0 * math.pi * self.bowl_radius * float(self.surface_z(a))

    def volume_below(self, z_contact: float) -> float:
        """Volume of the bowl between its bottom and the contact height."""
        if self.is_flat:
            return 0.0
        R, h = self.bowl_radius, z_contact
        return math.pi * (R * h * h - h**3 / 3.0)

    def distance(self, rho, z):
        """Signed distance-like residual of points from the wall (0 on it)."""
        return np.asarray(z, dtype=float) - self.surface_z(rho)


FLAT = ContainerModel.flat()


# --------------------------------------------------------------------------
# exact caps
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class CapSpec:
    """Spherical cap ``H ∩ B_r(r cos(theta) e_{n+1})`` in R^{n+1}."""

    r: float
    theta: float
    n: int = 2

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise InvalidCap(f"cap radius must be positive, got {self.r!r}")
        if not (0.0 < self.theta < math.pi):
            raise InvalidCap(f"theta must lie in (0, pi), got {self.theta!r}")
        if int(self.n) != self.n or self.n < 2:
            raise InvalidCap(f"n must be an integer >= 2, got {self.n!r}")

    @property
    def center_height(self) -> float:
        return self.r * math.cos(self.theta)

    @property
    def contact_radius(self) -> float:
        return self.r * math.sin(self.theta)

    @property
    def apex_height(self) -> float:
        return self.r * (1.0 + math.cos(self.theta))

    def exact_torsion(self, rho, z):
        """Torsion potential of the cap with Neumann datum gamma = -r cos(theta)/(n+1)."""
        rho = np.asarray(rho, dtype=float)
        z = np.asarray(z, dtype=float)
        return (self.r**2 - rho**2 - (z - self.center_height) ** 2) / (2.0 * (self.n + 1))


@dataclass(frozen=True)
class GeometryReport:
    n: int
    volume: float
    area_M: float
    area_Sigma: float
    len_bdSigma: float
    int_n_over_H: float
    lambda_volume: float
    gamma: float
    theta_min: float
    theta_max: float
    regime: Optional[Regime]
    diameter: float
    contact_radius: float
    h_mean: float
    h_dev: float
    int_inv_H: float
    lambda_slope: str = "cot"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value if self.regime is not None else None
        return d


def _lambda_volume(n, a, theta, slope):
    if slope == "cot":
        factor = abs(math.cos(theta) / math.sin(theta))
    elif slope == "tan":
        factor = abs(math.tan(theta))
    else:
        raise ValueError(f"lambda_slope must be 'cot' or 'tan', got {slope!r}")
    return ball_measure(n) * a**n * a * factor / (n + 1)


def gamma_constant(n: int, area_sigma: float, tan_integral: float) -> float:
    """Neumann datum of the torsion problem from |Sigma| and the boundary integral of tan(theta)."""
    if tan_integral == 0 or not math.isfinite(tan_integral):
        raise ThetaDegenerate("integral of tan(theta) over the contact line is degenerate")
    return -(n / (n + 1.0)) * area_sigma / tan_integral


def cap_report(cap: CapSpec, lambda_slope: str = "cot") -> GeometryReport:
    """Closed-form report for an exact spherical cap in any dimension."""
    n, r, th = cap.n, cap.r, cap.theta
    if abs(th - HALF_PI) <= THETA_EPS:
        raise ThetaDegenerate("theta = pi/2: the cone over the wetted region degenerates")
    beta = math.pi - th
    area_M = sphere_measure(n - 1) * r**n * _sin_power_integral(n - 1, beta)
    volume = ball_measure(n) * r ** (n + 1) * _sin_power_integral(n + 1, beta)
    if n == 2:
        c = math.cos(th)
        area_M = 2.0 * math.pi * r * r * (1.0 + c)
        volume = math.pi / 3.0 * r**3 * (1.0 + c) ** 2 * (2.0 - c)
    a = r * math.sin(th)
    area_sigma = ball_measure(n) * a**n
    len_bd = sphere_measure(n - 1) * a ** (n - 1)
    gam = -r * math.cos(th) / (n + 1.0)
    regime = Regime.HYDROPHOBIC if th < HALF_PI else Regime.HYDROPHILIC
    return GeometryReport(
        n=n,
        volume=volume,
        area_M=area_M,
        area_Sigma=area_sigma,
        len_bdSigma=len_bd,
        int_n_over_H=r * area_M,
        lambda_volume=_lambda_volume(n, a, th, lambda_slope),
        gamma=gam,
        theta_min=th,
        theta_max=th,
        regime=regime,
        diameter=2.0 * r if th <= HALF_PI else 2.0 * a,
        contact_radius=a,
        h_mean=n / r,
        h_dev=0.0,
        int_inv_H=r * area_M / n,
        lambda_slope=lambda_slope,
    )


# --------------------------------------------------------------------------
# discretised meridian profiles
# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class MeridianProfile:
    """Generating curve of a surface of revolution in R^3.

    ``curvature`` optionally carries the meridian curvature at the nodes when
    it is known analytically; otherwise it is obtained by differentiating
    ``phi`` with respect to arclength.
    """

    s: np.ndarray
    rho: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    curvature: Optional[np.ndarray] = None
    n: int = field(default=2)

    def __post_init__(self):
        arrays = {}
        for name in ("s", "rho", "z", "phi"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        size = arrays["s"].size
        if self.n != 2:
            raise DegenerateProfile("discretised profiles are surfaces of revolution in R^3 (n = 2)")
        if size < 2 or any(a.shape != (size,) for a in arrays.values()):
            raise DegenerateProfile("profile arrays must be 1-D of equal length >= 2")
        if not np.all(np.isfinite(np.stack(list(arrays.values())))):
            raise DegenerateProfile("profile contains non-finite values")
        if np.any(np.diff(arrays["s"]) <= 0):
            raise DegenerateProfile("arclength must be strictly increasing (repeated points)")
        scale = max(float(np.ptp(arrays["rho"])), float(np.ptp(arrays["z"])), 1e-300)
        if np.any(arrays["rho"] < -1e-12 * scale):
            raise DegenerateProfile("negative rho in profile")
        object.__setattr__(self, "rho", np.clip(arrays["rho"], 0.0, None))
        self.rho.setflags(write=False)
        if self.curvature is not None:
            k = np.array(self.curvature, dtype=float)
            if k.shape != (size,):
                raise DegenerateProfile("curvature array has the wrong length")
            k.setflags(write=False)
            object.__setattr__(self, "curvature", k)

    def __len__(self):
        return self.s.size

    @property
    def scale(self) -> float:
        return max(float(np.ptp(self.rho)), float(np.ptp(self.z)))

    @property
    def closed(self) -> bool:
        tol = 1e-9 * self.scale
        return bool(self.rho[0] <= tol and self.rho[-1] <= tol)

    @property
    def tangents(self) -> np.ndarray:
        return np.stack([np.cos(self.phi), -np.sin(self.phi)], axis=-1)

    @property
    def normals(self) -> np.ndarray:
        return np.stack([np.sin(self.phi), np.cos(self.phi)], axis=-1)

    @property
    def points(self) -> np.ndarray:
        return np.stack([self.rho, self.z], axis=-1)

    def kappa_meridian(self) -> np.ndarray:
        if self.curvature is not None:
            return self.curvature
        return np.gradient(self.phi, self.s, edge_order=2)

    def kappa_parallel(self) -> np.ndarray:
        km = self.kappa_meridian()
        on_axis = self.rho <= 1e-12 * max(self.scale, 1e-300)
        safe = np.where(on_axis, 1.0, self.rho)
        return np.where(on_axis, km, np.sin(self.phi) / safe)

    def mean_curvature(self) -> np.ndarray:
        """Scalar mean curvature (sum of principal curvatures)."""
        return self.kappa_meridian() + self.kappa_parallel()

    def area_weights(self) -> np.ndarray:
        """Trapezoid weights for integrals over the surface, including 2*pi*rho."""
        ds = np.diff(self.s)
        w = np.zeros_like(self.s)
        w[:-1] += 0.5 * ds
        w[1:] += 0.5 * ds
        return 2.0 * math.pi * self.rho * w

    def integrate(self, values) -> float:
        return float(np.dot(self.area_weights(), np.asarray(values, dtype=float)))

    def contact_normal(self, container: ContainerModel = FLAT) -> np.ndarray:
        return np.asarray(container.outer_normal(self.rho[-1]), dtype=float)

    def contact_angle(self, container: ContainerModel = FLAT) -> float:
        nu_m = self.normals[-1]
        c = float(np.clip(nu_m @ self.contact_normal(container), -1.0, 1.0))
        return math.acos(c)

    def hermite(self):
        """Cubic Hermite data (points, unit tangents, segment lengths)."""
        return self.points, self.tangents, np.diff(self.s)

    def point_at(self, s_query) -> np.ndarray:
        """Positions at arclengths ``s_query`` by cubic Hermite interpolation."""
        sq = np.atleast_1d(np.asarray(s_query, dtype=float))
        k = np.clip(np.searchsorted(self.s, sq, side="right") - 1, 0, self.s.size - 2)
        ds = self.s[k + 1] - self.s[k]
        t = ((sq - self.s[k]) / ds)[:, None]
        T = self.tangents
        P = self.points
        t2, t3 = t * t, t * t * t
        return (
            (2 * t3 - 3 * t2 + 1) * P[k]
            + (t3 - 2 * t2 + t) * ds[:, None] * T[k]
            + (-2 * t3 + 3 * t2) * P[k + 1]
            + (t3 - t2) * ds[:, None] * T[k + 1]
        )


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _cumulative_arclength(t, d1):
    """Arclength at parameter nodes ``t`` for a curve with derivative ``d1``."""
    a, b = t[:-1], t[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    tq = mid[:, None] + half[:, None] * _GL_X[None, :]
    dr, dz = d1(tq)
    speed = np.hypot(dr, dz)
    seg = half * (speed @ _GL_W)
    return np.concatenate([[0.0], np.cumsum(seg)])


def parametric_profile(
    t: np.ndarray,
    pos: Callable,
    d1: Callable,
    d2: Callable,
) -> MeridianProfile:
    """Sample a smooth parametric meridian curve with analytic curvature."""
    t = np.asarray(t, dtype=float)
    rho, z = pos(t)
    dr, dz = d1(t)
    ddr, ddz = d2(t)
    speed = np.hypot(dr, dz)
    phi = np.unwrap(np.arctan2(-dz, dr))
    kappa = (dz * ddr - dr * ddz) / speed**3
    s = _cumulative_arclength(t, d1)
    return MeridianProfile(s=s, rho=rho, z=z, phi=phi, curvature=kappa)


def _polar_profile(center, radius_fn, beta_end, n_points):
    """Profile of a star-shaped curve R(beta) about ``(0, center)``, beta from the apex."""
    R, dR, ddR = radius_fn

    def pos(b):
        return R(b) * np.sin(b), center + R(b) * np.cos(b)

    def d1(b):
        return (
            dR(b) * np.sin(b) + R(b) * np.cos(b),
            dR(b) * np.cos(b) - R(b) * np.sin(b),
        )

    def d2(b):
        return (
            ddR(b) * np.sin(b) + 2 * dR(b) * np.cos(b) - R(b) * np.sin(b),
            ddR(b) * np.cos(b) - 2 * dR(b) * np.sin(b) - R(b) * np.cos(b),
        )

    beta = np.linspace(0.0, beta_end, n_points)
    return parametric_profile(beta, pos, d1, d2)


def cap_profile(cap: CapSpec, n_points: int = 2000) -> MeridianProfile:
    """Sample the meridian arc of an exact cap uniformly in arclength."""
    if cap.n != 2:
        raise DegenerateProfile("discretised caps are only available for n = 2")
    r = cap.r
    const = (lambda b: np.full_like(b, r), lambda b: np.zeros_like(b), lambda b: np.zeros_like(b))
    p = _polar_profile(cap.center_height, const, math.pi - cap.theta, n_points)
    z = p.z.copy()
    z[-1] = 0.0
    return MeridianProfile(s=r * np.linspace(0, math.pi - cap.theta, n_points), rho=p.rho, z=z,
                           phi=np.linspace(0, math.pi - cap.theta, n_points), curvature=p.curvature)


def sphere_profile(r: float = 1.0, n_points: int = 2000) -> MeridianProfile:
    """Closed meridian of the sphere of radius ``r`` (pole to pole)."""
    beta = np.linspace(0.0, math.pi, n_points)
    return MeridianProfile(
        s=r * beta,
        rho=r * np.sin(beta),
        z=r * np.cos(beta),
        phi=beta,
        curvature=np.full(n_points, 1.0 / r),
    )


def _ellipse_fns(a, c, zc):
    def pos(t):
        return a * np.sin(t), zc + c * np.cos(t)

    def d1(t):
        return a * np.cos(t), -c * np.sin(t)

    def d2(t):
        return -a * np.sin(t), -c * np.cos(t)

    return pos, d1, d2


def spheroid_profile(a: float = 1.0, c: float = 2.0, n_points: int = 2000) -> MeridianProfile:
    """Closed meridian of the spheroid with equatorial semi-axis ``a`` and polar semi-axis ``c``."""
    t = np.linspace(0.0, math.pi, n_points)
    p = parametric_profile(t, *_ellipse_fns(a, c, 0.0))
    rho = p.rho.copy()
    rho[-1] = 0.0
    return MeridianProfile(s=p.s, rho=rho, z=p.z, phi=p.phi, curvature=p.curvature)


def spheroid_cap_profile(
    a: float = 1.0, c: float = 2.0, center: float = -0.5, n_points: int = 2000
) -> MeridianProfile:
    """Spheroid truncated by z = 0; ``center`` is the centre height in units of ``c``."""
    if not -1.0 < center < 1.0:
        raise DegenerateProfile("spheroid centre must lie strictly inside (-c, c)")
    zc = center * c
    t_end = math.acos(-zc / c)
    t = np.linspace(0.0, t_end, n_points)
    p = parametric_profile(t, *_ellipse_fns(a, c, zc))
    z = p.z.copy()
    z[-1] = 0.0
    return MeridianProfile(s=p.s, rho=p.rho, z=z, phi=p.phi, curvature=p.curvature)


def perturbed_cap_profile(
    r: float = 1.0,
    theta: float = 2.0 * math.pi / 3.0,
    amplitude: float = 0.02,
    mode: int = 2,
    n_points: int = 2000,
) -> MeridianProfile:
    """Cap whose polar radius about the cap centre is ``r (1 + amplitude cos(mode*beta))``."""
    from scipy.optimize import brentq

    center = r * math.cos(theta)

    def R(b):
        return r * (1.0 + amplitude * np.cos(mode * b))

    def dR(b):
        return -r * amplitude * mode * np.sin(mode * b)

    def ddR(b):
        return -r * amplitude * mode * mode * np.cos(mode * b)

    def height(b):
        return center + float(R(b)) * math.cos(b)

    b0 = math.pi - theta
    lo, hi = max(1e-9, b0 - 0.5), min(math.pi - 1e-9, b0 + 0.5)
    beta_end = brentq(height, lo, hi, xtol=1e-15, maxiter=200)
    p = _polar_profile(center, (R, dR, ddR), beta_end, n_points)
    z = p.z.copy()
    z[-1] = 0.0
    return MeridianProfile(s=p.s, rho=p.rho, z=z, phi=p.phi, curvature=p.curvature)


def bowl_cap_profile(
    r: float, theta: float, bowl_radius: float, n_points: int = 2000
) -> MeridianProfile:
    """Spherical free surface of radius ``r`` centred at ``(0, r cos(theta))``, cut by a bowl.

    The contact angle with the bowl differs slightly from ``theta``; use
    ``profile.contact_angle(ContainerModel.bowl(R))`` for the actual value.
    """
    c = r * math.cos(theta)
    R = bowl_radius
    z_c = (r * r - c * c) / (2.0 * (R - c))
    beta_end = math.acos((z_c - c) / r)
    beta = np.linspace(0.0, beta_end, n_points)
    return MeridianProfile(
        s=r * beta,
        rho=r * np.sin(beta),
        z=c + r * np.cos(beta),
        phi=beta,
        curvature=np.full(n_points, 1.0 / r),
    )


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------
def _profile_volume(p: MeridianProfile) -> float:
    # pi * int rho^2 (-dz) along the profile
    return math.pi * float(trapezoid(p.rho**2 * np.sin(p.phi), p.s))


def profile_diameter(p: MeridianProfile, container: ContainerModel = FLAT) -> float:
    rho, z = p.rho, p.z
    if not p.closed:
        ws = np.linspace(0.0, p.rho[-1], 64)
        rho = np.concatenate([rho, ws])
        z = np.concatenate([z, container.surface_z(ws)])
    return float(kernels.max_pair_distance(rho, z))


def profile_report(
    p: MeridianProfile, c: ContainerModel = FLAT, lambda_slope: str = "cot"
) -> GeometryReport:
    """Report of a droplet profile by composite trapezoidal quadrature."""
    if len(p) < 32:
        raise DegenerateProfile("profile_report needs at least 32 points")
    if p.closed:
        raise DegenerateProfile("closed profile has no contact line; use classical_hk")
    tol = 1e-9 * max(p.scale, 1e-300)
    if abs(float(c.distance(p.rho[-1], p.z[-1]))) > tol:
        raise DegenerateProfile("last profile point is not on the container wall")
    H = p.mean_curvature()
    if np.any(H <= 0):
        raise NonPositiveCurvature(
            f"mean curvature is non-positive at {int(np.sum(H <= 0))} nodes"
        )
    w = p.area_weights()
    area_M = float(w.sum())
    a = float(p.rho[-1])
    z_c = float(p.z[-1])
    theta = p.contact_angle(c)
    if abs(theta - HALF_PI) <= THETA_EPS:
        regime = None
    else:
        regime = Regime.HYDROPHOBIC if theta < HALF_PI else Regime.HYDROPHILIC
    area_sigma = c.wetted_area(a)
    len_bd = 2.0 * math.pi * a
    try:
        gam = gamma_constant(2, area_sigma, math.tan(theta) * len_bd)
    except ThetaDegenerate:
        gam = math.nan
    h_mean = float(w @ H) / area_M
    return GeometryReport(
        n=2,
        volume=_profile_volume(p) + c.volume_below(z_c),
        area_M=area_M,
        area_Sigma=area_sigma,
        len_bdSigma=len_bd,
        int_n_over_H=float(w @ (2.0 / H)),
        lambda_volume=_lambda_volume(2, a, theta, lambda_slope),
        gamma=gam,
        theta_min=theta,
        theta_max=theta,
        regime=regime,
        diameter=profile_diameter(p, c),
        contact_radius=a,
        h_mean=h_mean,
        h_dev=float(np.max(np.abs(H - h_mean))) / h_mean,
        int_inv_H=float(w @ (1.0 / H)),
        lambda_slope=lambda_slope,
    )


@dataclass(frozen=True)
class HypothesisCheck:
    regime: Regime
    theta_min: float
    theta_max: float
    h2_ok: bool


def check_hypotheses(p: MeridianProfile, container: ContainerModel = FLAT) -> HypothesisCheck:
    """Classify the substrate regime and test positivity of the mean curvature."""
    theta = p.contact_angle(container)
    if not 0.0 < theta < math.pi:
        raise MixedRegime(f"contact angle {theta!r} outside (0, pi)")
    regime = regime_of(theta, theta)
    h2_ok = bool(np.all(p.mean_curvature() > 0))
    return HypothesisCheck(regime=regime, theta_min=theta, theta_max=theta, h2_ok=h2_ok)


def flatness_metrics(c: ContainerModel, region_radius: float, samples: int = 512) -> float:
    """Almost-flatness parameter: sup of |A|, |1 + e_z . nu_K| and |x . nu_K|/|x|."""
    if region_radius <= 0:
        raise ValueError("region_radius must be positive")
    if c.is_flat:
        return 0.0
    R = c.bowl_radius
    if region_radius >= R:
        raise ValueError("region radius exceeds the bowl radius")
    rho = np.linspace(0.0, region_radius, samples)[1:]
    z = c.surface_z(rho)
    nu = c.outer_normal(rho)
    tilt = np.abs(1.0 + nu[:, 1])
    x_dot_nu = np.abs(rho * nu[:, 0] + z * nu[:, 1]) / np.hypot(rho, z)
    return float(max(1.0 / R, tilt.max(), x_dot_nu.max()))


def conormal_reconstruction(p: MeridianProfile, container: ContainerModel = FLAT):
    """Normal and conormal of M at the contact line rebuilt from (theta, nu_K, nu_Sigma).

    Returns ``(cos(theta) nu_K + sin(theta) nu_Sigma, sin(theta) nu_K - cos(theta) nu_Sigma)``
    in meridian components; they should match the last normal and tangent of ``p``.
    """
    theta = p.contact_angle(container)
    nu_k = p.contact_normal(container)
    # nu_Sigma: unit tangent of the wall pointing away from the axis
    nu_sigma = np.array([-nu_k[1], nu_k[0]])
    normal = math.cos(theta) * nu_k + math.sin(theta) * nu_sigma
    conormal = math.sin(theta) * nu_k - math.cos(theta) * nu_sigma
    return normal, conormal


# --------------------------------------------------------------------------
# profile CSV format: s,rho,z,phi
# --------------------------------------------------------------------------
def write_profile_csv(p: MeridianProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "rho", "z", "phi"])
        for row in zip(p.s, p.rho, p.z, p.phi):
            w.writerow([repr(float(v)) for v in row])


def read_profile_csv(path) -> MeridianProfile:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["s", "rho", "z", "phi"]:
            raise DegenerateProfile("profile CSV header must be 's,rho,z,phi'")
        rows = [[float(r[k]) for k in ("s", "rho", "z", "phi")] for r in reader]
    if not rows:
        raise DegenerateProfile("empty profile CSV")
    data = np.array(rows)
    return MeridianProfile(s=data[:, 0], rho=data[:, 1], z=data[:, 2], phi=data[:, 3])
