"""Independent brute-force geometry oracles used by the test suite.

These deliberately avoid the BVH code paths: ray intersection iterates all
triangles with vectorized numpy, containment uses generalized winding
numbers, and distance queries scan every triangle.
"""

from __future__ import annotations

import math

import numpy as np

from scenesmith.geometry import Mesh


def triangle_soup(objects):
    """(v0, v1, v2, object_index) arrays over a list of (name, Mesh)."""
    v0s, v1s, v2s, owners = [], [], [], []
    for index, (_, mesh) in enumerate(objects):
        v0s.append(mesh.vertices[mesh.faces[:, 0]])
        v1s.append(mesh.vertices[mesh.faces[:, 1]])
        v2s.append(mesh.vertices[mesh.faces[:, 2]])
        owners.append(np.full(len(mesh.faces), index))
    return (
        np.concatenate(v0s),
        np.concatenate(v1s),
        np.concatenate(v2s),
        np.concatenate(owners),
    )


def brute_force_ray(v0, v1, v2, owners, origin, direction, t_max=math.inf):
    """Nearest hit over all triangles; returns (t, owner_index) or None."""
    e1 = v1 - v0
    e2 = v2 - v0
    d = np.asarray(direction, dtype=np.float64)
    o = np.asarray(origin, dtype=np.float64)
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) > 1e-13
    inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = o - v0
    u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
    qvec = np.cross(tvec, e1)
    v = (qvec @ d) * inv_det
    t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    eps = 1e-10
    hit = ok & (u >= -eps) & (u <= 1 + eps) & (v >= -eps) & (u + v <= 1 + eps)
    hit &= (t > 1e-7) & (t <= t_max)
    if not hit.any():
        return None
    ts = np.where(hit, t, math.inf)
    best = int(np.argmin(ts))
    return float(ts[best]), int(owners[best])


def winding_number(mesh: Mesh, point) -> float:
    """Generalized winding number via the van Oosterom-Strackee solid angle."""
    p = np.asarray(point, dtype=np.float64)
    a = mesh.vertices[mesh.faces[:, 0]] - p
    b = mesh.vertices[mesh.faces[:, 1]] - p
    c = mesh.vertices[mesh.faces[:, 2]] - p
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    lc = np.linalg.norm(c, axis=1)
    numerator = np.einsum("ij,ij->i", a, np.cross(b, c))
    denominator = (
        la * lb * lc
        + np.einsum("ij,ij->i", a, b) * lc
        + np.einsum("ij,ij->i", b, c) * la
        + np.einsum("ij,ij->i", c, a) * lb
    )
    omega = 2.0 * np.arctan2(numerator, denominator)
    return float(omega.sum() / (4.0 * math.pi))


def brute_min_distance(v0, v1, v2, point) -> float:
    """Minimum point-triangle distance over all triangles (vectorized Ericson)."""
    p = np.asarray(point, dtype=np.float64)
    ab = v1 - v0
    ac = v2 - v0
    ap = p - v0
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - v1
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - v2
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    n = len(v0)
    closest = np.empty_like(v0)

    region_a = (d1 <= 0) & (d2 <= 0)
    region_b = (d3 >= 0) & (d4 <= d3)
    region_c = (d6 >= 0) & (d5 <= d6)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
        t_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
        seg = (d4 - d3) + (d5 - d6)
        t_bc = np.where(seg != 0, (d4 - d3) / seg, 0.0)
    region_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    region_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    region_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)

    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(denom != 0, vb / denom, 0.0)
        w = np.where(denom != 0, vc / denom, 0.0)

    closest[:] = v0 + ab * v[:, None] + ac * w[:, None]  # interior default
    closest[region_bc] = (v1 + (v2 - v1) * t_bc[:, None])[region_bc]
    closest[region_ac] = (v0 + ac * t_ac[:, None])[region_ac]
    closest[region_ab] = (v0 + ab * t_ab[:, None])[region_ab]
    closest[region_c] = v2[region_c]
    closest[region_b] = v1[region_b]
    closest[region_a] = v0[region_a]

    return float(np.min(np.linalg.norm(closest - p, axis=1)))


def icosphere(subdivisions: int = 2, radius: float = 0.5) -> Mesh:
    """Closed icosphere built by midpoint subdivision of an icosahedron."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    base_vertices = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    vertices = [np.array(v, dtype=np.float64) for v in base_vertices]
    vertices = [v / np.linalg.norm(v) for v in vertices]

    cache: dict[tuple[int, int], int] = {}

    def midpoint(i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        if key not in cache:
            mid = (vertices[i] + vertices[j]) / 2.0
            mid = mid / np.linalg.norm(mid)
            vertices.append(mid)
            cache[key] = len(vertices) - 1
        return cache[key]

    for _ in range(subdivisions):
        next_faces = []
        for a, b, c in faces:
            ab = midpoint(a, b)
            bc = midpoint(b, c)
            ca = midpoint(c, a)
            next_faces.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        faces = next_faces

    scaled = np.array(vertices) * radius
    return Mesh.from_faces(scaled, np.array(faces, dtype=np.int32))
