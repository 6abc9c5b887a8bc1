"""Triangle-mesh math: AABBs, transforms, BVH, ray casting, containment.

The BVH is a median-split binary tree over all mesh objects of a scene and
answers three query families: nearest ray hit, point containment (per
closed mesh, odd-parity with a 3-axis majority vote), and minimum distance
to any triangle. Containment plus a clearance distance test gives the
free-space predicate used to vet transceiver placements.

All tolerances live in one table below.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ScenesmithError

#: Minimum parametric distance for a ray hit (skips the ray origin itself).
SURFACE_EPSILON = 1e-7
#: Two hits along one ray closer than this (in t) count as one crossing.
HIT_DEDUP_EPSILON = 1e-9
#: Geometric agreement tolerance used throughout the test suite.
TEST_TOLERANCE = 1e-6

TOLERANCES = {
    "surface_epsilon": SURFACE_EPSILON,
    "hit_dedup": HIT_DEDUP_EPSILON,
    "test": TEST_TOLERANCE,
}


class GeometryError(ScenesmithError):
    code = "geometry"


class EmptySceneError(GeometryError):
    code = "empty_scene"


@dataclass
class Mesh:
    """Indexed triangle mesh with per-vertex unit normals."""

    vertices: np.ndarray  # (n, 3) float64
    normals: np.ndarray  # (n, 3) float64, unit length
    faces: np.ndarray  # (m, 3) int32

    def __post_init__(self) -> None:
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int32).reshape(-1, 3)

    @classmethod
    def from_faces(cls, vertices, faces, normals=None) -> "Mesh":
        """Build a mesh, dropping zero-area faces and deriving normals if absent."""
        vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        faces = np.asarray(faces, dtype=np.int32).reshape(-1, 3)
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise GeometryError("face index out of range")
        if len(faces):
            v0 = vertices[faces[:, 0]]
            cross = np.cross(vertices[faces[:, 1]] - v0, vertices[faces[:, 2]] - v0)
            areas = 0.5 * np.linalg.norm(cross, axis=1)
            faces = faces[areas > 1e-14]
        if normals is None:
            normals = _vertex_normals(vertices, faces)
        else:
            normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
            lengths = np.linalg.norm(normals, axis=1)
            lengths[lengths == 0.0] = 1.0
            normals = normals / lengths[:, None]
        return cls(vertices, normals, faces)

    def validate(self) -> None:
        if len(self.vertices) == 0 or len(self.faces) == 0:
            raise GeometryError("mesh has no geometry")
        if self.faces.min() < 0 or self.faces.max() >= len(self.vertices):
            raise GeometryError("face index out of range")
        if len(self.normals) != len(self.vertices):
            raise GeometryError("normals must be per-vertex")
        lengths = np.linalg.norm(self.normals, axis=1)
        if np.any(np.abs(lengths - 1.0) > 1e-4):
            raise GeometryError("normals must be unit length")
        v0 = self.vertices[self.faces[:, 0]]
        cross = np.cross(self.vertices[self.faces[:, 1]] - v0, self.vertices[self.faces[:, 2]] - v0)
        if np.any(0.5 * np.linalg.norm(cross, axis=1) <= 1e-14):
            raise GeometryError("mesh contains degenerate faces")

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def volume(self) -> float:
        """Signed volume via the divergence theorem (exact for closed meshes)."""
        v0 = self.vertices[self.faces[:, 0]]
        v1 = self.vertices[self.faces[:, 1]]
        v2 = self.vertices[self.faces[:, 2]]
        return float(np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0)

    def is_closed(self) -> bool:
        """True iff every undirected edge is shared by exactly two faces."""
        edges = Counter()
        for a, b, c in self.faces:
            for u, v in ((a, b), (b, c), (c, a)):
                edges[(min(u, v), max(u, v))] += 1
        return bool(edges) and all(count == 2 for count in edges.values())

    def copy(self) -> "Mesh":
        return Mesh(self.vertices.copy(), self.normals.copy(), self.faces.copy())


def _vertex_normals(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    normals = np.zeros_like(vertices)
    if len(faces):
        v0 = vertices[faces[:, 0]]
        face_n = np.cross(vertices[faces[:, 1]] - v0, vertices[faces[:, 2]] - v0)
        for column in range(3):
            np.add.at(normals, faces[:, column], face_n)
    lengths = np.linalg.norm(normals, axis=1)
    lengths[lengths == 0.0] = 1.0
    return normals / lengths[:, None]


_EXACT_COS = {0: 1.0, 90: 0.0, 180: -1.0, 270: 0.0}
_EXACT_SIN = {0: 0.0, 90: 1.0, 180: 0.0, 270: -1.0}


def _cos_sin_deg(angle_deg: float) -> tuple[float, float]:
    # Right-angle rotations snap to exact values so golden exports stay
    # byte-stable across libm implementations.
    remainder = angle_deg % 360.0
    if remainder == int(remainder) and int(remainder) in _EXACT_COS:
        key = int(remainder)
        return _EXACT_COS[key], _EXACT_SIN[key]
    radians = math.radians(angle_deg)
    return math.cos(radians), math.sin(radians)


def euler_matrix_deg(rx: float, ry: float, rz: float) -> np.ndarray:
    """Rotation matrix for XYZ Euler angles in degrees (R = Rz @ Ry @ Rx)."""
    cx, sx = _cos_sin_deg(rx)
    cy, sy = _cos_sin_deg(ry)
    cz, sz = _cos_sin_deg(rz)
    rx_m = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=np.float64)
    ry_m = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=np.float64)
    rz_m = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=np.float64)
    return rz_m @ ry_m @ rx_m


def identity_affine() -> np.ndarray:
    return np.eye(4, dtype=np.float64)


def translation(offset) -> np.ndarray:
    m = np.eye(4, dtype=np.float64)
    m[:3, 3] = np.asarray(offset, dtype=np.float64)
    return m


def scaling(factors) -> np.ndarray:
    m = np.eye(4, dtype=np.float64)
    m[0, 0], m[1, 1], m[2, 2] = (float(f) for f in np.asarray(factors).reshape(3))
    return m


def rotation_affine(rx: float, ry: float, rz: float) -> np.ndarray:
    m = np.eye(4, dtype=np.float64)
    m[:3, :3] = euler_matrix_deg(rx, ry, rz)
    return m


def apply_affine(mesh: Mesh, affine: np.ndarray) -> Mesh:
    """Transform a mesh; normals use the inverse-transpose of the linear part."""
    linear = affine[:3, :3]
    vertices = mesh.vertices @ linear.T + affine[:3, 3]
    normal_matrix = np.linalg.inv(linear).T
    normals = mesh.normals @ normal_matrix.T
    lengths = np.linalg.norm(normals, axis=1)
    lengths[lengths == 0.0] = 1.0
    return Mesh(vertices, normals / lengths[:, None], mesh.faces.copy())


@dataclass(frozen=True)
class RayHit:
    t: float
    point: tuple[float, float, float]
    face_normal: tuple[float, float, float]
    object_name: str


@dataclass
class _Node:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    left: int = -1
    right: int = -1
    start: int = 0
    count: int = 0  # > 0 marks a leaf

    @property
    def is_leaf(self) -> bool:
        return self.count > 0


class Bvh:
    """Median-split BVH over the triangles of one or more named meshes.

    Leaves hold at most four triangles; the split axis is the longest axis
    of the node bounds and the split point is the centroid median, so the
    build is deterministic for a fixed input order.
    """

    LEAF_SIZE = 4

    def __init__(self, objects: list[tuple[str, Mesh]]):
        if not objects:
            raise EmptySceneError("no meshes to index")
        self.object_names = [name for name, _ in objects]
        self.object_closed = [mesh.is_closed() for _, mesh in objects]

        tri_v0, tri_e1, tri_e2, tri_obj = [], [], [], []
        for obj_index, (_, mesh) in enumerate(objects):
            if len(mesh.faces) == 0:
                continue
            v0 = mesh.vertices[mesh.faces[:, 0]]
            v1 = mesh.vertices[mesh.faces[:, 1]]
            v2 = mesh.vertices[mesh.faces[:, 2]]
            tri_v0.append(v0)
            tri_e1.append(v1 - v0)
            tri_e2.append(v2 - v0)
            tri_obj.append(np.full(len(mesh.faces), obj_index, dtype=np.int32))
        if not tri_v0:
            raise EmptySceneError("meshes contain no triangles")
        self.tri_v0 = np.concatenate(tri_v0)
        self.tri_e1 = np.concatenate(tri_e1)
        self.tri_e2 = np.concatenate(tri_e2)
        self.tri_obj = np.concatenate(tri_obj)

        v1 = self.tri_v0 + self.tri_e1
        v2 = self.tri_v0 + self.tri_e2
        self._tri_lo = np.minimum(np.minimum(self.tri_v0, v1), v2)
        self._tri_hi = np.maximum(np.maximum(self.tri_v0, v1), v2)
        centroids = (self._tri_lo + self._tri_hi) / 2.0

        self.order = np.arange(len(self.tri_v0))
        self.nodes: list[_Node] = []
        self._build(0, len(self.order), centroids)

        # Flat python-float copies for the scalar traversal hot path.
        v0_list = self.tri_v0.tolist()
        e1_list = self.tri_e1.tolist()
        e2_list = self.tri_e2.tolist()
        obj_list = self.tri_obj.tolist()
        self._flat_tris = [
            (tuple(v0_list[i]), tuple(e1_list[i]), tuple(e2_list[i]), obj_list[i])
            for i in self.order.tolist()
        ]

    def _build(self, start: int, end: int, centroids: np.ndarray) -> int:
        segment = self.order[start:end]
        lo = self._tri_lo[segment].min(axis=0)
        hi = self._tri_hi[segment].max(axis=0)
        node_index = len(self.nodes)
        node = _Node(lo=tuple(lo.tolist()), hi=tuple(hi.tolist()))
        self.nodes.append(node)
        count = end - start
        if count <= self.LEAF_SIZE:
            node.start, node.count = start, count
            return node_index
        axis = int(np.argmax(hi - lo))
        keys = centroids[segment, axis]
        local = np.argsort(keys, kind="stable")
        self.order[start:end] = segment[local]
        mid = start + count // 2
        node.left = self._build(start, mid, centroids)
        node.right = self._build(mid, end, centroids)
        return node_index

    # --- queries ---------------------------------------------------------

    def ray_cast(self, origin, direction, t_max: float = math.inf) -> RayHit | None:
        """Nearest triangle hit with t in (SURFACE_EPSILON, t_max], or None."""
        ox, oy, oz = (float(v) for v in origin)
        dx, dy, dz = (float(v) for v in direction)
        inv_x = 1.0 / dx if dx != 0.0 else math.inf
        inv_y = 1.0 / dy if dy != 0.0 else math.inf
        inv_z = 1.0 / dz if dz != 0.0 else math.inf

        best_t = t_max
        best: tuple[float, int, int] | None = None  # (t, tri_slot, obj)
        stack = [0]
        nodes = self.nodes
        tris = self._flat_tris
        while stack:
            node = nodes[stack.pop()]
            t_near, t_far = _slab_test(node.lo, node.hi, ox, oy, oz, inv_x, inv_y, inv_z)
            if t_near > min(t_far, best_t) or t_far < SURFACE_EPSILON:
                continue
            if node.is_leaf:
                for slot in range(node.start, node.start + node.count):
                    v0, e1, e2, obj = tris[slot]
                    t = _moller_trumbore(v0, e1, e2, ox, oy, oz, dx, dy, dz)
                    if t is not None and SURFACE_EPSILON < t <= best_t:
                        best_t = t
                        best = (t, slot, obj)
            else:
                stack.append(node.left)
                stack.append(node.right)
        if best is None:
            return None
        t, slot, obj = best
        v0, e1, e2, _ = tris[slot]
        nx = e1[1] * e2[2] - e1[2] * e2[1]
        ny = e1[2] * e2[0] - e1[0] * e2[2]
        nz = e1[0] * e2[1] - e1[1] * e2[0]
        norm = math.sqrt(nx * nx + ny * ny + nz * nz) or 1.0
        return RayHit(
            t=t,
            point=(ox + t * dx, oy + t * dy, oz + t * dz),
            face_normal=(nx / norm, ny / norm, nz / norm),
            object_name=self.object_names[obj],
        )

    def ray_all_hits(self, origin, direction) -> list[tuple[float, int]]:
        """All (t, object_index) intersections with t > SURFACE_EPSILON."""
        ox, oy, oz = (float(v) for v in origin)
        dx, dy, dz = (float(v) for v in direction)
        inv_x = 1.0 / dx if dx != 0.0 else math.inf
        inv_y = 1.0 / dy if dy != 0.0 else math.inf
        inv_z = 1.0 / dz if dz != 0.0 else math.inf
        hits: list[tuple[float, int]] = []
        stack = [0]
        nodes = self.nodes
        tris = self._flat_tris
        while stack:
            node = nodes[stack.pop()]
            t_near, t_far = _slab_test(node.lo, node.hi, ox, oy, oz, inv_x, inv_y, inv_z)
            if t_near > t_far or t_far < SURFACE_EPSILON:
                continue
            if node.is_leaf:
                for slot in range(node.start, node.start + node.count):
                    v0, e1, e2, obj = tris[slot]
                    t = _moller_trumbore(v0, e1, e2, ox, oy, oz, dx, dy, dz)
                    if t is not None and t > SURFACE_EPSILON:
                        hits.append((t, obj))
            else:
                stack.append(node.left)
                stack.append(node.right)
        return hits

    def min_distance(self, point) -> float:
        """Minimum distance from a point to any indexed triangle."""
        px, py, pz = (float(v) for v in point)
        best = math.inf
        stack = [(0, _aabb_distance(self.nodes[0].lo, self.nodes[0].hi, px, py, pz))]
        nodes = self.nodes
        tris = self._flat_tris
        while stack:
            node_index, lower = stack.pop()
            if lower >= best:
                continue
            node = nodes[node_index]
            if node.is_leaf:
                for slot in range(node.start, node.start + node.count):
                    v0, e1, e2, _ = tris[slot]
                    d = _point_triangle_distance(v0, e1, e2, px, py, pz)
                    if d < best:
                        best = d
            else:
                for child in (node.left, node.right):
                    child_node = nodes[child]
                    lower = _aabb_distance(child_node.lo, child_node.hi, px, py, pz)
                    if lower < best:
                        stack.append((child, lower))
        return best

    def contains_point(self, point) -> bool:
        """True iff the point lies inside any closed mesh.

        Per closed mesh: crossing parity along the +x, +y and +z rays
        (crossings deduplicated within HIT_DEDUP_EPSILON), decided by
        majority vote across the three axes.
        """
        votes = [0] * len(self.object_names)
        for direction in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)):
            per_object: dict[int, list[float]] = {}
            for t, obj in self.ray_all_hits(point, direction):
                per_object.setdefault(obj, []).append(t)
            for obj, ts in per_object.items():
                if not self.object_closed[obj]:
                    continue
                ts.sort()
                crossings = 1
                for previous, current in zip(ts, ts[1:]):
                    if current - previous > HIT_DEDUP_EPSILON:
                        crossings += 1
                if crossings % 2 == 1:
                    votes[obj] += 1
        return any(v >= 2 for v in votes)

    def is_free_space(self, point, clearance: float) -> bool:
        """Free iff inside no closed mesh and no triangle is nearer than clearance."""
        if clearance < 0:
            raise GeometryError("clearance must be >= 0")
        if self.contains_point(point):
            return False
        if clearance == 0.0:
            return True
        return self.min_distance(point) >= clearance


def _slab_test(lo, hi, ox, oy, oz, inv_x, inv_y, inv_z) -> tuple[float, float]:
    t1 = (lo[0] - ox) * inv_x
    t2 = (hi[0] - ox) * inv_x
    if t1 > t2:
        t1, t2 = t2, t1
    t3 = (lo[1] - oy) * inv_y
    t4 = (hi[1] - oy) * inv_y
    if t3 > t4:
        t3, t4 = t4, t3
    t5 = (lo[2] - oz) * inv_z
    t6 = (hi[2] - oz) * inv_z
    if t5 > t6:
        t5, t6 = t6, t5
    t_near = max(t1, t3, t5)
    t_far = min(t2, t4, t6)
    # A zero direction component against a zero-width slab yields NaN; treat
    # those limits as non-binding.
    if t_near != t_near:
        t_near = -math.inf
    if t_far != t_far:
        t_far = math.inf
    return t_near, t_far


def _moller_trumbore(v0, e1, e2, ox, oy, oz, dx, dy, dz) -> float | None:
    # Scalar Moller-Trumbore with slightly inclusive barycentric bounds so
    # edge-grazing rays are not dropped between adjacent triangles.
    px = dy * e2[2] - dz * e2[1]
    py = dz * e2[0] - dx * e2[2]
    pz = dx * e2[1] - dy * e2[0]
    det = e1[0] * px + e1[1] * py + e1[2] * pz
    if -1e-13 < det < 1e-13:
        return None
    inv_det = 1.0 / det
    tx = ox - v0[0]
    ty = oy - v0[1]
    tz = oz - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv_det
    if u < -1e-10 or u > 1.0 + 1e-10:
        return None
    qx = ty * e1[2] - tz * e1[1]
    qy = tz * e1[0] - tx * e1[2]
    qz = tx * e1[1] - ty * e1[0]
    v = (dx * qx + dy * qy + dz * qz) * inv_det
    if v < -1e-10 or u + v > 1.0 + 1e-10:
        return None
    return (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv_det


def _aabb_distance(lo, hi, px, py, pz) -> float:
    dx = max(lo[0] - px, 0.0, px - hi[0])
    dy = max(lo[1] - py, 0.0, py - hi[1])
    dz = max(lo[2] - pz, 0.0, pz - hi[2])
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def _point_triangle_distance(v0, e1, e2, px, py, pz) -> float:
    # Ericson, "Real-Time Collision Detection": closest point on triangle.
    ax, ay, az = v0
    bx, by, bz = v0[0] + e1[0], v0[1] + e1[1], v0[2] + e1[2]
    cx, cy, cz = v0[0] + e2[0], v0[1] + e2[1], v0[2] + e2[2]

    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az

    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return math.sqrt(apx * apx + apy * apy + apz * apz)

    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return math.sqrt(bpx * bpx + bpy * bpy + bpz * bpz)

    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        t = d1 / (d1 - d3)
        qx, qy, qz = ax + t * abx - px, ay + t * aby - py, az + t * abz - pz
        return math.sqrt(qx * qx + qy * qy + qz * qz)

    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return math.sqrt(cpx * cpx + cpy * cpy + cpz * cpz)

    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        t = d2 / (d2 - d6)
        qx, qy, qz = ax + t * acx - px, ay + t * acy - py, az + t * acz - pz
        return math.sqrt(qx * qx + qy * qy + qz * qz)

    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        qx = bx + t * (cx - bx) - px
        qy = by + t * (cy - by) - py
        qz = bz + t * (cz - bz) - pz
        return math.sqrt(qx * qx + qy * qy + qz * qz)

    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    qx = ax + abx * v + acx * w - px
    qy = ay + aby * v + acy * w - py
    qz = az + abz * v + acz * w - pz
    return math.sqrt(qx * qx + qy * qy + qz * qz)


def build_bvh(objects: list[tuple[str, Mesh]]) -> Bvh:
    """Build a BVH over named meshes (insertion order is significant)."""
    return Bvh(objects)
