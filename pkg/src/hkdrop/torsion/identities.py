"""Integral identities and bounds built on the torsion potential.

Sign conventions are calibrated on exact caps: with u = 0 on M and
du/dnu_K = gamma on Sigma, the divergence theorem gives

    int_M |grad u| = |Omega| + gamma H^n(Sigma) =: V,

and V replaces every occurrence of ``|Omega| - gamma H^n(Sigma)`` in the
Reilly-type identities and the stability chain.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import RegimeViolation, ThetaDegenerate
from ..geometry import GeometryReport, Regime, gamma_constant
from .fem import TorsionSolution
from .mesh import ON_M, ON_SIGMA

N_DIM = 2  # discretised geometry lives in R^3


def compute_gamma(g: GeometryReport) -> float:
    """Neumann datum -(n/(n+1)) H^n(Sigma) / int_{bd Sigma} tan(theta) for constant theta."""
    th = g.theta_min
    if g.regime is None or abs(th - 0.5 * math.pi) < 1e-12 or g.theta_min != g.theta_max:
        raise ThetaDegenerate("gamma needs a constant contact angle away from pi/2")
    return gamma_constant(g.n, g.area_Sigma, math.tan(th) * g.len_bdSigma)


def _require_hydrophilic(g: GeometryReport, what: str):
    if g.regime is not Regime.HYDROPHILIC:
        raise RegimeViolation(f"{what} is stated for hydrophilic substrates only")


class Integrals:
    """All volume and boundary integrals of a torsion solution, computed once."""

    def __init__(self, s: TorsionSolution):
        self.s = s
        self.n = N_DIM
        m = s.mesh
        w = s._quad[0]
        hq = s.hessian_at_quadrature()
        urr, urz, uzz, ua = hq[..., 0], hq[..., 1], hq[..., 2], hq[..., 3]
        lap = urr + uzz + ua
        hess2 = urr**2 + 2 * urz**2 + uzz**2 + ua**2
        t = lap / (self.n + 1)
        tracefree2 = (urr - t) ** 2 + 2 * urz**2 + (uzz - t) ** 2 + (ua - t) ** 2
        self.volume = float(w.sum())
        self.int_hess2 = float(np.sum(w * hess2))
        self.int_lap2 = float(np.sum(w * lap**2))
        self.hess_deficit = float(np.sum(w * tracefree2))
        self.min_lap, self.max_lap = float(lap.min()), float(lap.max())

        tm = s.edge_trace(ON_M)
        p = m.profile
        H = np.interp(tm["s"], p.s, p.mean_curvature())
        wm = tm["weights"]
        gn = np.linalg.norm(tm["grad"], axis=-1)
        self.H_M = H
        self.w_M = wm
        self.gradnorm_M = gn
        self.area_M = float(wm.sum())
        self.int_grad = float(np.sum(wm * gn))
        self.int_grad2 = float(np.sum(wm * gn**2))
        self.int_grad2_H = float(np.sum(wm * gn**2 * H))
        self.int_inv_H = float(np.sum(wm / H))
        self.max_inv_H = float(np.max(1.0 / p.mean_curvature()))
        self.min_H = float(np.min(p.mean_curvature()))

        ts = s.edge_trace(ON_SIGMA)
        self.area_Sigma = float(ts["weights"].sum())
        c = m.container
        if c.is_flat:
            self.substrate = 0.0
        else:
            k = c.curvature
            u_t = np.einsum("bqi,bqi->bq", ts["grad"], ts["tangent"])
            self.substrate = float(np.sum(ts["weights"] * (s.gamma**2 * N_DIM * k + k * u_t**2)))
        self.V = self.volume + s.gamma * self.area_Sigma

    def by_name(self) -> dict:
        keys = (
            "volume", "area_M", "area_Sigma", "int_grad", "int_grad2", "int_grad2_H",
            "int_inv_H", "max_inv_H", "int_hess2", "int_lap2", "hess_deficit", "substrate", "V",
        )
        return {k: getattr(self, k) for k in keys}


def integrals(s: TorsionSolution) -> Integrals:
    cache = s.__dict__.setdefault("_integrals", None)
    if cache is None:
        cache = Integrals(s)
        s.__dict__["_integrals"] = cache
    return cache


# --------------------------------------------------------------------------
@dataclass(frozen=True)
class LinfCheck:
    u_max: float
    u_min: float
    bound: float
    ok: bool


def linf_check(s: TorsionSolution, g: GeometryReport) -> LinfCheck:
    """Maximum of u against 4 (d^2 + gamma^2)."""
    bound = 4.0 * (g.diameter**2 + s.gamma**2)
    u_max = float(s.u.max())
    return LinfCheck(u_max=u_max, u_min=float(s.u.min()), bound=bound, ok=u_max <= bound)


def hessian_deficit(s: TorsionSolution) -> float:
    """int_Omega |D^2 u - (Delta u / (n+1)) Id|^2 including the azimuthal eigenvalue u_rho/rho."""
    return integrals(s).hess_deficit


@dataclass(frozen=True)
class ReillyReport:
    lhs_first: float
    rhs_first: float
    lhs_big: float
    rhs_big: float
    divergence_lhs: float
    divergence_rhs: float
    conforming: bool

    @property
    def residuals(self) -> dict:
        return {
            "first": abs(self.lhs_first - self.rhs_first),
            "big": abs(self.lhs_big - self.rhs_big),
            "divergence": abs(self.divergence_lhs - self.divergence_rhs),
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["residuals"] = self.residuals
        return d


def reilly_report(s: TorsionSolution, g: GeometryReport = None, c=None) -> ReillyReport:
    """Both sides of the first and the integrated Reilly identities.

    First identity:
        n/(n+1) V + int((Delta u)^2/(n+1) - |D^2u|^2) = int_M H u_nu^2 + S,
    integrated form:
        V/(n+1) (int n/H - (n+1) V) = int 1/H (Q + int_M |grad u|^2 H + S) - (int_M |grad u|)^2,
    with S the substrate term and Q the trace-free Hessian deficit.
    """
    I = integrals(s)
    n = I.n
    lhs1 = n / (n + 1) * I.V + (I.int_lap2 / (n + 1) - I.int_hess2)
    rhs1 = I.int_grad2_H + I.substrate
    int_n_over_H = n * I.int_inv_H
    lhs_big = I.V / (n + 1) * (int_n_over_H - (n + 1) * I.V)
    rhs_big = I.int_inv_H * (I.hess_deficit + I.int_grad2_H + I.substrate) - I.int_grad**2
    return ReillyReport(
        lhs_first=lhs1,
        rhs_first=rhs1,
        lhs_big=lhs_big,
        rhs_big=rhs_big,
        divergence_lhs=I.int_grad,
        divergence_rhs=I.V,
        conforming=s.conforming,
    )


@dataclass(frozen=True)
class StabilityChain:
    line1: float
    line2: float
    line3: float
    cauchy_schwarz_lhs: float
    cauchy_schwarz_rhs: float
    monotone_ok: bool


def stability_chain(
    s: TorsionSolution, g: GeometryReport, eps: float, tol: float = 1e-3
) -> StabilityChain:
    """The three displayed lines of the curvature-bounded Reilly estimate."""
    _require_hydrophilic(g, "the stability chain")
    I = integrals(s)
    n = I.n
    C = 2.0 * (n + 1)
    V = I.V
    D = n * I.int_inv_H - (n + 1) * V
    d2g2 = 4.0 * (g.diameter**2 + s.gamma**2)
    line1 = V / (n + 1) * D + C * eps * (
        I.int_inv_H * (I.volume / (n + 1) + d2g2 * V) + I.max_inv_H * V**2
    )
    grad_H_eps = float(np.sum(I.w_M * I.gradnorm_M**2 * (I.H_M - C * eps)))
    line2 = (
        (1.0 - C * eps) * I.int_inv_H * I.hess_deficit
        + I.int_inv_H * grad_H_eps
        - (1.0 - C * eps * I.max_inv_H) * I.int_grad**2
    )
    weight = np.sqrt(np.clip((I.H_M - C * eps) / I.H_M, 0.0, None))
    cs_lhs = float(np.sum(I.w_M * I.gradnorm_M * weight)) ** 2
    cs_rhs = I.int_inv_H * grad_H_eps
    ok = (line1 >= line2 - tol) and (line2 >= -tol) and (cs_lhs <= cs_rhs * (1 + 1e-12) + 1e-15)
    return StabilityChain(
        line1=line1,
        line2=line2,
        line3=0.0,
        cauchy_schwarz_lhs=cs_lhs,
        cauchy_schwarz_rhs=cs_rhs,
        monotone_ok=bool(ok),
    )


@dataclass(frozen=True)
class DeficitBound:
    lhs: float
    budget: float
    ratio: float
    lambda_used: float
    lambdabound_printed: float
    lambdabound_verified: float


def deficit_bound_check(
    g: GeometryReport,
    eps: float,
    theta_dev: float,
    h_dev: float,
    theta0: float = None,
    lam: float = None,
) -> DeficitBound:
    """|(n+1) V - int n/H| against (eps + theta_dev + h_dev)(d + 1/lambda) H^n(M).

    Also returns the residuals of the intermediate volume relation in the
    printed form (n+1)|Omega| + cos(theta0) n Sigma/lambda - n M/lambda and in
    the cap-verified form (n+1)|Omega| - (n/lambda)(M + cos(theta0) Sigma).
    """
    _require_hydrophilic(g, "the quantitative deficit bound")
    n = g.n
    lam = g.h_mean if lam is None else lam
    th0 = g.theta_min if theta0 is None else theta0
    V = g.volume + g.gamma * g.area_Sigma
    lhs = abs((n + 1) * V - g.int_n_over_H)
    budget = (eps + theta_dev + h_dev) * (g.diameter + 1.0 / lam) * g.area_M
    printed = abs((n + 1) * g.volume + math.cos(th0) * n * g.area_Sigma / lam - n * g.area_M / lam)
    verified = abs((n + 1) * g.volume - n / lam * (g.area_M + math.cos(th0) * g.area_Sigma))
    return DeficitBound(
        lhs=lhs,
        budget=budget,
        ratio=lhs / budget if budget > 0 else (0.0 if lhs == 0 else math.inf),
        lambda_used=lam,
        lambdabound_printed=printed,
        lambdabound_verified=verified,
    )


@dataclass(frozen=True)
class WettedBounds:
    identity_lhs: float
    identity_rhs: float
    perimeter: float
    perimeter_bound: float
    perimeter_bound_ok: bool
    ratio_lhs: float
    ratio_bound: float
    ratio_ok: bool


def wetted_bounds(
    g: GeometryReport, eps: float, theta_dev: float, h_dev: float, lam: float = None,
    theta0: float = None,
) -> WettedBounds:
    """Perimeter and ratio bounds on the wetted region.

    ``h_dev`` is relative, so ||H - lambda|| = h_dev * lambda. The ratio
    budget uses |cot(theta0)| since cot is negative on hydrophilic angles.
    """
    _require_hydrophilic(g, "the wetted-region bounds")
    lam = g.h_mean if lam is None else lam
    th0 = g.theta_min if theta0 is None else theta0
    sin0 = math.sin(th0)
    per = g.len_bdSigma
    per_bound = 2.0 / sin0 * (lam * g.area_Sigma + h_dev * lam * g.area_M)
    ratio_lhs = abs(math.cos(th0) / lam - g.area_Sigma / (math.tan(th0) * per))
    ratio_bound = abs(math.cos(th0) / sin0) * (
        6.0 / sin0 * (eps + theta_dev) + h_dev
    ) * g.area_M / per
    return WettedBounds(
        identity_lhs=lam * g.area_Sigma,
        identity_rhs=sin0 * per,
        perimeter=per,
        perimeter_bound=per_bound,
        perimeter_bound_ok=per <= per_bound,
        ratio_lhs=ratio_lhs,
        ratio_bound=ratio_bound,
        ratio_ok=ratio_lhs <= ratio_bound * (1 + 1e-12) + 1e-14,
    )


@dataclass(frozen=True)
class SubstrateBound:
    lhs: float
    rhs: float
    ok: bool


def substrate_term_bound(s: TorsionSolution, g: GeometryReport, eps: float) -> SubstrateBound:
    """|int_Sigma gamma^2 H_Sigma + A[grad u, grad u]| against its curvature budget."""
    I = integrals(s)
    n = I.n
    lhs = abs(I.substrate)
    rhs = 2.0 * (n + 1) * eps * (
        4.0 * (g.diameter**2 + s.gamma**2) * I.V + I.int_hess2 + I.int_grad2
    )
    return SubstrateBound(lhs=lhs, rhs=rhs, ok=lhs <= rhs)
