"""Triangulation of the meridian cross-section of a droplet."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np
import triangle

from ..errors import MeshFailure
from ..geometry import FLAT, ContainerModel, MeridianProfile

ON_M, ON_SIGMA, ON_AXIS = 1, 2, 3
TAG_NAMES = {ON_M: "OnM", ON_SIGMA: "OnSigma", ON_AXIS: "OnAxis"}


@dataclass(frozen=True, eq=False)
class MeridianMesh:
    """Quadratic-triangle mesh of the (rho, z) cross-section.

    Elements touching the free surface (or a bowl wall) are curved: their
    boundary midpoints sit on the true curve. ``nodes`` holds the vertices followed by edge midpoints; ``elements`` are
    the six-node connectivities (vertices, then midpoints of edges 01, 12, 20).
    Boundary edges are stored as (vertex a, vertex b, midpoint) with a tag,
    the owning element, and for OnM edges the profile arclength at a and b.
    """

    nodes: np.ndarray
    elements: np.ndarray
    n_vertices: int
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    boundary_owner: np.ndarray
    boundary_s: np.ndarray
    h: float
    profile: MeridianProfile
    container: ContainerModel

    @property
    def vertices(self) -> np.ndarray:
        return self.nodes[: self.n_vertices]

    @property
    def triangles(self) -> np.ndarray:
        return self.elements[:, :3]

    def element_vertices(self) -> np.ndarray:
        return self.nodes[self.triangles]

    def element_nodes(self) -> np.ndarray:
        return self.nodes[self.elements]

    def element_areas(self) -> np.ndarray:
        v = self.element_vertices()
        a = v[:, 1] - v[:, 0]
        b = v[:, 2] - v[:, 0]
        return 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])

    def edges_with_tag(self, tag: int) -> np.ndarray:
        return np.nonzero(self.boundary_tags == tag)[0]

    def dirichlet_nodes(self) -> np.ndarray:
        e = self.boundary_edges[self.boundary_tags == ON_M]
        return np.unique(e.ravel())

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def export_csv(self, prefix) -> tuple[str, str, str]:
        """Write ``<prefix>_nodes.csv``, ``_elements.csv`` and ``_tags.csv``."""
        paths = tuple(f"{prefix}_{k}.csv" for k in ("nodes", "elements", "tags"))
        os.makedirs(os.path.dirname(os.path.abspath(paths[0])), exist_ok=True)
        with open(paths[0], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "rho", "z"])
            for i, (r, z) in enumerate(self.nodes):
                w.writerow([i, repr(float(r)), repr(float(z))])
        with open(paths[1], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "n0", "n1", "n2", "n3", "n4", "n5"])
            for i, row in enumerate(self.elements):
                w.writerow([i, *map(int, row)])
        with open(paths[2], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["a", "b", "mid", "tag"])
            for (a, b, m), t in zip(self.boundary_edges, self.boundary_tags):
                w.writerow([int(a), int(b), int(m), TAG_NAMES[int(t)]])
        return paths


def _substrate_points(c: ContainerModel, a: float, h: float):
    """Wall points from the contact radius back to the axis (excluding rho = a)."""
    if c.is_flat:
        k = max(2, math.ceil(a / h))
        rho = np.linspace(a, 0.0, k + 1)[1:]
        return np.stack([rho, np.zeros_like(rho)], axis=-1)
    R = c.bowl_radius
    psi_c = math.asin(a / R)
    k = max(2, math.ceil(R * psi_c / h))
    psi = np.linspace(psi_c, 0.0, k + 1)[1:]
    return np.stack([R * np.sin(psi), R - R * np.cos(psi)], axis=-1)


def mesh_meridian(
    p: MeridianProfile, c: ContainerModel = FLAT, h: float = 0.05, min_angle: float = 30.0
) -> MeridianMesh:
    """Conforming quadratic mesh of the droplet cross-section with target size ``h``."""
    a = float(p.rho[-1])
    if not (h > 0 and h < a / 8.0):
        raise MeshFailure(f"mesh size h={h!r} must satisfy 0 < h < a/8 = {a / 8.0!r}")
    if p.closed:
        raise MeshFailure("closed profiles have no wetted region to mesh")
    if abs(p.rho[0]) > 1e-12 * max(p.scale, 1.0):
        raise MeshFailure("profile must start on the axis")
    if abs(float(c.distance(p.rho[-1], p.z[-1]))) > 1e-9 * max(p.scale, 1.0):
        raise MeshFailure("profile does not end on the container wall")

    L = float(p.s[-1])
    nM = max(8, math.ceil(L / h))
    sM = np.linspace(0.0, L, nM + 1)
    ptsM = p.point_at(sM)
    ptsM[0] = (0.0, p.z[0])
    ptsM[-1] = (a, p.z[-1])
    ptsS = _substrate_points(c, a, h)
    z_bot = float(ptsS[-1, 1])
    nA = max(2, math.ceil((p.z[0] - z_bot) / h))
    zA = np.linspace(z_bot, p.z[0], nA + 1)[1:-1]
    ptsA = np.stack([np.zeros_like(zA), zA], axis=-1)

    pts = np.concatenate([ptsM, ptsS, ptsA])
    npts = pts.shape[0]
    seg = np.stack([np.arange(npts), (np.arange(npts) + 1) % npts], axis=-1)
    markers = np.concatenate(
        [
            np.full(nM, ON_M),
            np.full(ptsS.shape[0], ON_SIGMA),
            np.full(ptsA.shape[0] + 1, ON_AXIS),
        ]
    )
    max_area = math.sqrt(3.0) / 4.0 * h * h
    opts = f"pq{min_angle:g}a{max_area:.16f}YQ"
    try:
        out = triangle.triangulate(
            {"vertices": pts, "segments": seg, "segment_markers": markers}, opts
        )
    except Exception as exc:  # pragma: no cover - mesher internals
        raise MeshFailure(f"triangle failed: {exc}") from exc
    verts = np.asarray(out["vertices"], dtype=float)
    tris = np.asarray(out["triangles"], dtype=np.int64)
    if verts.shape[0] < npts or not np.array_equal(verts[:npts], pts):
        raise MeshFailure("mesher altered the boundary vertices")
    # counter-clockwise orientation
    d = verts[tris]
    det = (d[:, 1, 0] - d[:, 0, 0]) * (d[:, 2, 1] - d[:, 0, 1]) - (
        d[:, 1, 1] - d[:, 0, 1]
    ) * (d[:, 2, 0] - d[:, 0, 0])
    flip = det < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    areas = 0.5 * np.abs(det)
    if areas.min() < 1e-3 * h * h:
        raise MeshFailure(f"sliver element with area {areas.min():.3e} < 1e-3 h^2")

    # edge midpoints
    nv = verts.shape[0]
    local = np.array([[0, 1], [1, 2], [2, 0]])
    all_edges = np.sort(tris[:, local], axis=-1).reshape(-1, 2)
    uniq, inv = np.unique(all_edges, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    mids = 0.5 * (verts[uniq[:, 0]] + verts[uniq[:, 1]])
    nodes = np.concatenate([verts, mids])
    elements = np.concatenate([tris, nv + inv.reshape(-1, 3)], axis=1)

    # boundary edges follow the input segments (no Steiner points on the boundary)
    key = {(int(i), int(j)): k for k, (i, j) in enumerate(uniq)}
    owner_of = {}
    for e in range(tris.shape[0]):
        for le, (i, j) in enumerate(local):
            owner_of[tuple(sorted((int(tris[e, i]), int(tris[e, j]))))] = (e, le)
    b_edges, b_owner = [], []
    for i, j in seg:
        k2 = tuple(sorted((int(i), int(j))))
        if k2 not in key:
            raise MeshFailure("boundary segment missing from triangulation")
        b_edges.append((int(i), int(j), nv + key[k2]))
        b_owner.append(owner_of[k2][0])
    b_edges = np.array(b_edges, dtype=np.int64)
    b_s = np.full((seg.shape[0], 2), np.nan)
    b_s[:nM, 0] = sM[:-1]
    b_s[:nM, 1] = sM[1:]

    # curved boundary: midpoints of free-surface (and bowl) edges go onto the true curve
    nodes[b_edges[:nM, 2]] = p.point_at(0.5 * (sM[:-1] + sM[1:]))
    if not c.is_flat:
        on_s = b_edges[markers == ON_SIGMA, 2]
        ctr = np.array([0.0, c.bowl_radius])
        d = nodes[on_s] - ctr
        nodes[on_s] = ctr + c.bowl_radius * d / np.linalg.norm(d, axis=1)[:, None]
    return MeridianMesh(
        nodes=nodes,
        elements=elements,
        n_vertices=nv,
        boundary_edges=b_edges,
        boundary_tags=markers.astype(np.int64),
        boundary_owner=np.array(b_owner, dtype=np.int64),
        boundary_s=b_s,
        h=float(h),
        profile=p,
        container=c,
    )
