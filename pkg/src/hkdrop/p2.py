"""Quadratic Lagrange triangle: reference basis, derivatives and quadrature.

Local node order is the three vertices followed by the edge midpoints
(0-1), (1-2), (2-0).
"""
import numpy as np

# Dunavant degree-4 rule on the reference triangle, weights summing to one.
_A1, _W1 = 0.445948490915965, 0.223381589678011
_A2, _W2 = 0.091576213509771, 0.109951743655322
QUAD_POINTS = np.array(
    [
        [_A1, _A1],
        [1.0 - 2.0 * _A1, _A1],
        [_A1, 1.0 - 2.0 * _A1],
        [_A2, _A2],
        [1.0 - 2.0 * _A2, _A2],
        [_A2, 1.0 - 2.0 * _A2],
    ]
)
QUAD_WEIGHTS = np.array([_W1, _W1, _W1, _W2, _W2, _W2])

GAUSS3_X = np.array([0.5 - np.sqrt(0.15), 0.5, 0.5 + np.sqrt(0.15)])
GAUSS3_W = np.array([5.0, 8.0, 5.0]) / 18.0

# (local node a, local node b, local midpoint)
EDGES = ((0, 1, 3), (1, 2, 4), (2, 0, 5))


def shape(xi, eta):
    """Basis values, shape (..., 6)."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l0, l1, l2 = 1.0 - xi - eta, xi, eta
    return np.stack(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l0 * l1,
            4 * l1 * l2,
            4 * l2 * l0,
        ],
        axis=-1,
    )


def shape_grad(xi, eta):
    """Reference gradients, shape (..., 6, 2)."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l0, l1, l2 = 1.0 - xi - eta, xi, eta
    zero = np.zeros_like(xi)
    dxi = np.stack(
        [-(4 * l0 - 1), 4 * l1 - 1, zero, 4 * (l0 - l1), 4 * l2, -4 * l2], axis=-1
    )
    deta = np.stack(
        [-(4 * l0 - 1), zero, 4 * l2 - 1, -4 * l1, 4 * l1, 4 * (l0 - l2)], axis=-1
    )
    return np.stack([dxi, deta], axis=-1)


# Constant reference second derivatives, rows (xi-xi, xi-eta, eta-eta).
SHAPE_HESS = np.array(
    [
        [4.0, 4.0, 4.0],
        [4.0, 0.0, 0.0],
        [0.0, 0.0, 4.0],
        [-8.0, -4.0, 0.0],
        [0.0, 4.0, 0.0],
        [0.0, -4.0, -8.0],
    ]
)

QUAD_SHAPE = shape(QUAD_POINTS[:, 0], QUAD_POINTS[:, 1])  # (Q, 6)
QUAD_GRAD = shape_grad(QUAD_POINTS[:, 0], QUAD_POINTS[:, 1])  # (Q, 6, 2)


# Five-point Gauss rule on [0, 1] for (possibly curved) boundary edges.
_gx, _gw = np.polynomial.legendre.leggauss(5)
GAUSS5_X = 0.5 * (_gx + 1.0)
GAUSS5_W = 0.5 * _gw


def edge_shape(t):
    """Quadratic 1-D basis on an edge (end a, end b, midpoint), shape (..., 3)."""
    t = np.asarray(t, dtype=float)
    return np.stack([(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)], axis=-1)


def edge_shape_deriv(t):
    t = np.asarray(t, dtype=float)
    return np.stack([4 * t - 3, 4 * t - 1, 4 - 8 * t], axis=-1)


def edge_reference_points(le, forward, t):
    """Reference coordinates of the points at fraction ``t`` along local edge ``le``.

    ``forward`` says whether the edge is traversed from EDGES[le][0] to
    EDGES[le][1]. Returns ``(xi, eta, dxi_dt, deta_dt)``.
    """
    ref = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    a, b, _ = EDGES[le]
    if not forward:
        a, b = b, a
    t = np.asarray(t, dtype=float)
    pts = ref[a] + t[..., None] * (ref[b] - ref[a])
    d = ref[b] - ref[a]
    return pts[..., 0], pts[..., 1], d[0], d[1]


def iso_derivatives(X, ue, xi, eta):
    """Geometry and solution derivatives of quadratic (isoparametric) triangles.

    ``X`` is (E, 6, 2) node coordinates, ``ue`` (E, 6) nodal values, and
    ``xi``/``eta`` reference points of shape (P,) or (E, P). Returns a dict
    with ``x`` (E,P,2), ``det`` (E,P), ``grad`` (E,P,2) and ``hess`` (E,P,3)
    holding (u_rr, u_rz, u_zz).
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    N = shape(xi, eta)
    dN = shape_grad(xi, eta)
    if xi.ndim == 1:
        x = np.einsum("eni,pn->epi", X, N)
        J = np.einsum("eni,pnj->epij", X, dN)
        gref = np.einsum("en,pnj->epj", ue, dN)
    else:
        x = np.einsum("eni,epn->epi", X, N)
        J = np.einsum("eni,epnj->epij", X, dN)
        gref = np.einsum("en,epnj->epj", ue, dN)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1] / det
    inv[..., 0, 1] = -J[..., 0, 1] / det
    inv[..., 1, 0] = -J[..., 1, 0] / det
    inv[..., 1, 1] = J[..., 0, 0] / det
    # grad_x u = J^{-T} grad_xi u
    grad = np.einsum("epji,epj->epi", inv, gref)
    Href = np.zeros((6, 2, 2))
    Href[:, 0, 0] = SHAPE_HESS[:, 0]
    Href[:, 0, 1] = Href[:, 1, 0] = SHAPE_HESS[:, 1]
    Href[:, 1, 1] = SHAPE_HESS[:, 2]
    Hu = np.einsum("en,njl->ejl", ue, Href)
    Hx = np.einsum("eni,njl->eijl", X, Href)  # second derivatives of the map
    corr = np.einsum("epk,ekjl->epjl", grad, Hx)
    Hxi = Hu[:, None] - corr
    Hphys = np.einsum("epja,epjl,eplb->epab", inv, Hxi, inv)
    hess = np.stack([Hphys[..., 0, 0], Hphys[..., 0, 1], Hphys[..., 1, 1]], axis=-1)
    return {"x": x, "det": det, "grad": grad, "hess": hess, "inv": inv, "J": J}
