"""Quadratic finite elements for -Delta u = 1 in axisymmetric form.

Dirichlet u = 0 on the free surface, du/dnu_K = gamma on the wetted region,
natural symmetry condition on the axis. Elements along curved boundaries are
isoparametric, which keeps boundary gradients second-order accurate.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from .. import kernels, p2
from ..errors import RegimeViolation, SolveDiverged
from .mesh import ON_SIGMA, MeridianMesh

TWO_PI = 2.0 * math.pi


def mesh_is_hydrophilic(mesh: MeridianMesh) -> bool:
    return mesh.profile.contact_angle(mesh.container) > 0.5 * math.pi


@dataclass(frozen=True, eq=False)
class TorsionSolution:
    mesh: MeridianMesh
    u: np.ndarray
    gamma: float
    residual_linear_solve: float
    iterations: int
    conforming: bool = True
    notes: tuple = field(default_factory=tuple)

    # -- element-level derived fields ------------------------------------
    @cached_property
    def _quad(self):
        """Weights (with 2 pi rho), rho, gradients and Hessians at element quadrature points."""
        X = self.mesh.element_nodes()
        d = p2.iso_derivatives(X, self.u[self.mesh.elements], p2.QUAD_POINTS[:, 0], p2.QUAD_POINTS[:, 1])
        rho = d["x"][..., 0]
        w = TWO_PI * 0.5 * np.abs(d["det"]) * p2.QUAD_WEIGHTS[None, :] * rho
        return w, rho, d["grad"], d["hess"]

    @property
    def hessian_per_element(self) -> np.ndarray:
        """In-plane Hessian (u_rr, u_rz, u_zz) at the element quadrature points, shape (E, Q, 3)."""
        return self._quad[3]

    def hessian_at_quadrature(self):
        """(u_rr, u_rz, u_zz, u_r/rho) at every element quadrature point, shape (E, Q, 4)."""
        _, rho, grad_u, hess = self._quad
        return np.concatenate([hess, (grad_u[..., 0] / rho)[..., None]], axis=-1)

    def volume_integral(self, values) -> float:
        return float(np.sum(self._quad[0] * values))

    # -- boundary traces -------------------------------------------------
    def edge_trace(self, tag: int):
        """Values on boundary edges with the given tag at 5-point Gauss nodes.

        Returns a dict with points (B,P,2), weights 2 pi rho |dx/dt| w (B,P),
        gradients (B,P,2), unit tangents and outward normals (B,P,2) and
        profile arclength parameters (B,P) (NaN off the free surface).
        """
        m = self.mesh
        idx = m.edges_with_tag(tag)
        edges = m.boundary_edges[idx]
        owners = m.boundary_owner[idx]
        t = p2.GAUSS5_X
        B, P = idx.size, t.size
        xi = np.empty((B, P))
        eta = np.empty((B, P))
        dref = np.empty((B, 2))
        tris = m.triangles
        for k, (e, (a, b, _)) in enumerate(zip(owners, edges)):
            la = int(np.nonzero(tris[e] == a)[0][0])
            lb = int(np.nonzero(tris[e] == b)[0][0])
            for le, (i0, i1, _) in enumerate(p2.EDGES):
                if {i0, i1} == {la, lb}:
                    break
            xi[k], eta[k], dref[k, 0], dref[k, 1] = p2.edge_reference_points(le, i0 == la, t)
        X = m.nodes[m.elements[owners]]
        d = p2.iso_derivatives(X, self.u[m.elements[owners]], xi, eta)
        dxdt = np.einsum("bpij,bj->bpi", d["J"], dref)
        speed = np.linalg.norm(dxdt, axis=-1)
        tang = dxdt / speed[..., None]
        # boundary runs counter-clockwise, so the outward normal is the tangent turned clockwise
        normal = np.stack([tang[..., 1], -tang[..., 0]], axis=-1)
        pts = d["x"]
        wts = TWO_PI * pts[..., 0] * speed * p2.GAUSS5_W[None, :]
        s = m.boundary_s[idx]
        s_q = s[:, 0:1] + t[None, :] * (s[:, 1:2] - s[:, 0:1])
        return {
            "points": pts,
            "weights": wts,
            "grad": d["grad"],
            "tangent": tang,
            "normal": normal,
            "s": s_q,
        }

    # -- exports ---------------------------------------------------------
    def export_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rho", "z", "u"])
            for (r, z), val in zip(self.mesh.nodes, self.u):
                w.writerow([repr(float(r)), repr(float(z)), repr(float(val))])

    def max_error(self, exact) -> float:
        nodes = self.mesh.nodes
        return float(np.max(np.abs(self.u - exact(nodes[:, 0], nodes[:, 1]))))


def assemble(mesh: MeridianMesh, gamma: float):
    """Global stiffness matrix and load vector (before Dirichlet elimination)."""
    Ke, Fe = kernels.p2_element_arrays(mesh.element_nodes())
    el = mesh.elements
    N = mesh.n_nodes
    rows = np.repeat(el, 6, axis=1).ravel()
    cols = np.tile(el, (1, 6)).ravel()
    K = sp.csr_matrix((Ke.ravel(), (rows, cols)), shape=(N, N))
    F = np.bincount(el.ravel(), weights=Fe.ravel(), minlength=N)
    if gamma != 0.0:
        edges = mesh.boundary_edges[mesh.edges_with_tag(ON_SIGMA)]
        Xe = mesh.nodes[edges]  # (B, 3, 2): end a, end b, midpoint
        t = p2.GAUSS5_X
        Nq = p2.edge_shape(t)
        x = np.einsum("bki,qk->bqi", Xe, Nq)
        dx = np.einsum("bki,qk->bqi", Xe, p2.edge_shape_deriv(t))
        w = TWO_PI * gamma * x[..., 0] * np.linalg.norm(dx, axis=-1) * p2.GAUSS5_W[None, :]
        contrib = np.einsum("bq,qk->bk", w, Nq)
        F += np.bincount(edges.ravel(), weights=contrib.ravel(), minlength=N)
    return K, F


def solve_torsion(
    mesh: MeridianMesh,
    gamma: float,
    allow_hydrophobic: bool = False,
    rtol: float = 1e-10,
    maxiter: int = 20000,
) -> TorsionSolution:
    """Solve the mixed torsion problem with quadratic elements and Jacobi-preconditioned CG."""
    hydrophilic = mesh_is_hydrophilic(mesh)
    notes = []
    if not hydrophilic:
        if not allow_hydrophobic:
            raise RegimeViolation(
                "torsion solves need a hydrophilic contact angle (pass allow_hydrophobic=True to override)"
            )
        notes.append("hydrophobic override: C^1 regularity fails, identities not conforming")
    K, F = assemble(mesh, gamma)
    N = mesh.n_nodes
    fixed = np.zeros(N, dtype=bool)
    fixed[mesh.dirichlet_nodes()] = True
    free = np.nonzero(~fixed)[0]
    A = K[free][:, free].tocsr()
    b = F[free]
    dinv = 1.0 / A.diagonal()
    prec = LinearOperator(A.shape, matvec=lambda v: dinv * v, dtype=float)
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = cg(A, b, rtol=rtol, atol=0.0, maxiter=maxiter, M=prec, callback=cb)
    res = float(np.linalg.norm(b - A @ x) / np.linalg.norm(b))
    if info != 0 or not np.all(np.isfinite(x)) or res > 10 * rtol:
        raise SolveDiverged(f"CG stopped with info={info}, relative residual {res:.3e}")
    u = np.zeros(N)
    u[free] = x
    return TorsionSolution(
        mesh=mesh,
        u=u,
        gamma=float(gamma),
        residual_linear_solve=res,
        iterations=count[0],
        conforming=hydrophilic,
        notes=tuple(notes),
    )
