"""Local 3D asset catalog: procedural primitives, imported meshes, and a
semantic description index.

Assets carry one to six textual descriptions. Descriptions are embedded
(deterministic hashed bag-of-words by default, or an external embedding
service) into an exact cosine-similarity index; a query returns the top-k
assets where each asset scores as the max over its description entries.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import ScenesmithError
from .geometry import Mesh
from .types import Vec3

DEFAULT_EMBEDDING_DIM = 384


class LibraryError(ScenesmithError):
    code = "library"


class NonPositiveExtentsError(LibraryError):
    code = "non_positive_extents"


class EmptyIndexError(LibraryError):
    code = "empty_index"


class EmbedderUnavailableError(LibraryError):
    code = "embedder_unavailable"


class MeshImportError(LibraryError):
    code = "mesh_import"


# --------------------------------------------------------------------------
# Procedural primitives
# --------------------------------------------------------------------------

PRIMITIVE_KINDS = ("box", "cylinder", "sphere", "plane", "wedge")

#: Default primitive shape and full extents (meters) per common object type.
PRIMITIVE_CATALOG: dict[str, tuple[str, tuple[float, float, float]]] = {
    "table": ("box", (1.6, 0.9, 0.75)),
    "desk": ("box", (1.4, 0.7, 0.75)),
    "chair": ("box", (0.5, 0.5, 0.9)),
    "stool": ("box", (0.4, 0.4, 0.5)),
    "sofa": ("box", (2.0, 0.9, 0.8)),
    "couch": ("box", (2.0, 0.9, 0.8)),
    "bed": ("box", (2.0, 1.6, 0.5)),
    "nightstand": ("box", (0.5, 0.4, 0.6)),
    "dresser": ("box", (1.2, 0.5, 0.9)),
    "cabinet": ("box", (0.9, 0.45, 1.8)),
    "shelf": ("box", (0.9, 0.3, 1.8)),
    "bookshelf": ("box", (0.9, 0.3, 1.8)),
    "wardrobe": ("box", (1.2, 0.6, 2.0)),
    "bench": ("box", (1.5, 0.4, 0.45)),
    "counter": ("box", (1.8, 0.6, 0.9)),
    "whiteboard": ("box", (1.8, 0.05, 1.2)),
    "monitor": ("box", (0.55, 0.05, 0.35)),
    "tv": ("box", (1.2, 0.08, 0.7)),
    "screen": ("box", (1.6, 0.05, 0.9)),
    "pillar": ("box", (0.4, 0.4, 3.0)),
    "column": ("cylinder", (0.4, 0.4, 3.0)),
    "bowl": ("cylinder", (0.3, 0.3, 0.12)),
    "plate": ("cylinder", (0.25, 0.25, 0.03)),
    "cup": ("cylinder", (0.08, 0.08, 0.1)),
    "vase": ("cylinder", (0.2, 0.2, 0.4)),
    "lamp": ("cylinder", (0.3, 0.3, 0.5)),
    "plant": ("cylinder", (0.4, 0.4, 1.0)),
    "trash_can": ("cylinder", (0.3, 0.3, 0.4)),
    "ball": ("sphere", (0.3, 0.3, 0.3)),
    "sphere": ("sphere", (1.0, 1.0, 1.0)),
    "globe": ("sphere", (0.3, 0.3, 0.3)),
    "box": ("box", (1.0, 1.0, 1.0)),
    "cube": ("box", (1.0, 1.0, 1.0)),
    "crate": ("box", (0.6, 0.6, 0.6)),
    "rug": ("plane", (2.0, 1.5, 0.0)),
    "carpet": ("plane", (2.0, 1.5, 0.0)),
    "ramp": ("wedge", (1.0, 1.0, 0.5)),
    "wedge": ("wedge", (1.0, 1.0, 0.5)),
    "door": ("box", (0.9, 0.05, 2.0)),
    "window": ("box", (1.2, 0.05, 1.0)),
    "fridge": ("box", (0.7, 0.7, 1.8)),
    "refrigerator": ("box", (0.7, 0.7, 1.8)),
}

DEFAULT_PRIMITIVE: tuple[str, tuple[float, float, float]] = ("box", (0.5, 0.5, 0.5))


def primitive_for(object_type: str) -> tuple[str, Vec3]:
    """Primitive kind and default extents for an object type."""
    kind, extents = PRIMITIVE_CATALOG.get(object_type.lower(), DEFAULT_PRIMITIVE)
    return kind, Vec3(*extents)


def make_primitive(kind: str, extents: Vec3, segments: int = 24) -> Mesh:
    """Generate a primitive mesh centered at the origin.

    The result is watertight (except ``plane``) and its AABB extents equal
    the request within 1e-6 (the generated shape is rescaled per axis onto
    the requested box).
    """
    if kind not in PRIMITIVE_KINDS:
        raise LibraryError(f"unknown primitive kind '{kind}'")
    required_positive = ("x", "y") if kind == "plane" else ("x", "y", "z")
    for axis in required_positive:
        if getattr(extents, axis) <= 0:
            raise NonPositiveExtentsError(f"extents.{axis} must be > 0 for {kind}")
    if segments < 3:
        raise LibraryError("segments must be >= 3")

    if kind == "box":
        mesh = _unit_box()
    elif kind == "plane":
        mesh = _unit_plane()
    elif kind == "cylinder":
        mesh = _unit_cylinder(segments)
    elif kind == "sphere":
        mesh = _unit_sphere(segments)
    else:
        mesh = _unit_wedge()

    lo, hi = mesh.aabb()
    span = hi - lo
    target = np.array(extents.to_tuple())
    scale = np.where(span > 1e-12, target / np.where(span > 1e-12, span, 1.0), 1.0)
    center = (lo + hi) / 2.0
    vertices = (mesh.vertices - center) * scale
    return Mesh.from_faces(vertices, mesh.faces, _rescale_normals(mesh.normals, scale))


def _rescale_normals(normals: np.ndarray, scale: np.ndarray) -> np.ndarray:
    # Normal transform for a diagonal scale is division by the factors.
    safe = np.where(np.abs(scale) > 1e-12, scale, 1.0)
    scaled = normals / safe
    lengths = np.linalg.norm(scaled, axis=1)
    lengths[lengths == 0.0] = 1.0
    return scaled / lengths[:, None]


def _unit_box() -> Mesh:
    # 8 shared vertices, 12 triangles, outward winding.
    v = np.array(
        [
            [-0.5, -0.5, -0.5],
            [0.5, -0.5, -0.5],
            [0.5, 0.5, -0.5],
            [-0.5, 0.5, -0.5],
            [-0.5, -0.5, 0.5],
            [0.5, -0.5, 0.5],
            [0.5, 0.5, 0.5],
            [-0.5, 0.5, 0.5],
        ]
    )
    f = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom (-z)
            [4, 5, 6], [4, 6, 7],  # top (+z)
            [0, 1, 5], [0, 5, 4],  # front (-y)
            [2, 3, 7], [2, 7, 6],  # back (+y)
            [1, 2, 6], [1, 6, 5],  # right (+x)
            [3, 0, 4], [3, 4, 7],  # left (-x)
        ]
    )
    normals = v / np.linalg.norm(v, axis=1)[:, None]
    return Mesh(v, normals, f)


def _unit_plane() -> Mesh:
    v = np.array([[-0.5, -0.5, 0.0], [0.5, -0.5, 0.0], [0.5, 0.5, 0.0], [-0.5, 0.5, 0.0]])
    f = np.array([[0, 1, 2], [0, 2, 3]])
    n = np.tile([0.0, 0.0, 1.0], (4, 1))
    return Mesh(v, n, f)


def _unit_cylinder(segments: int) -> Mesh:
    angles = 2.0 * math.pi * np.arange(segments) / segments
    ring = np.stack([0.5 * np.cos(angles), 0.5 * np.sin(angles)], axis=1)
    bottom = np.column_stack([ring, np.full(segments, -0.5)])
    top = np.column_stack([ring, np.full(segments, 0.5)])
    centers = np.array([[0.0, 0.0, -0.5], [0.0, 0.0, 0.5]])
    vertices = np.vstack([bottom, top, centers])
    bottom_center = 2 * segments
    top_center = 2 * segments + 1

    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces.append([i, j, segments + j])  # side quad, two triangles
        faces.append([i, segments + j, segments + i])
        faces.append([bottom_center, j, i])  # bottom cap (faces -z)
        faces.append([top_center, segments + i, segments + j])  # top cap (+z)

    radial = np.column_stack([ring * 2.0, np.zeros(segments)])
    normals = np.vstack([radial, radial, [[0, 0, -1.0], [0, 0, 1.0]]])
    return Mesh(np.asarray(vertices), normals, np.asarray(faces))


def _unit_sphere(segments: int) -> Mesh:
    stacks = max(3, segments // 2)
    vertices = [[0.0, 0.0, 0.5]]
    for stack in range(1, stacks):
        phi = math.pi * stack / stacks
        z = 0.5 * math.cos(phi)
        r = 0.5 * math.sin(phi)
        for meridian in range(segments):
            theta = 2.0 * math.pi * meridian / segments
            vertices.append([r * math.cos(theta), r * math.sin(theta), z])
    vertices.append([0.0, 0.0, -0.5])
    vertices = np.asarray(vertices)

    def ring_index(stack: int, meridian: int) -> int:
        return 1 + (stack - 1) * segments + (meridian % segments)

    faces = []
    for meridian in range(segments):
        faces.append([0, ring_index(1, meridian), ring_index(1, meridian + 1)])
    for stack in range(1, stacks - 1):
        for meridian in range(segments):
            a = ring_index(stack, meridian)
            b = ring_index(stack, meridian + 1)
            c = ring_index(stack + 1, meridian + 1)
            d = ring_index(stack + 1, meridian)
            faces.append([a, d, c])
            faces.append([a, c, b])
    south = len(vertices) - 1
    for meridian in range(segments):
        faces.append([south, ring_index(stacks - 1, meridian + 1), ring_index(stacks - 1, meridian)])

    normals = vertices / np.linalg.norm(vertices, axis=1)[:, None]
    return Mesh(vertices, normals, np.asarray(faces))


def _unit_wedge() -> Mesh:
    # Ramp rising toward -x, full height on the -x face.
    v = np.array(
        [
            [-0.5, -0.5, -0.5],
            [0.5, -0.5, -0.5],
            [0.5, 0.5, -0.5],
            [-0.5, 0.5, -0.5],
            [-0.5, -0.5, 0.5],
            [-0.5, 0.5, 0.5],
        ]
    )
    f = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom
            [0, 1, 4],  # front triangle (-y)
            [1, 2, 5], [1, 5, 4],  # slope
            [2, 3, 5],  # back triangle (+y)
            [3, 0, 4], [3, 4, 5],  # left face (-x)
        ]
    )
    centroid = v.mean(axis=0)
    offsets = v - centroid
    normals = offsets / np.linalg.norm(offsets, axis=1)[:, None]
    return Mesh(v, normals, f)


# --------------------------------------------------------------------------
# Mesh import (ASCII PLY and OBJ)
# --------------------------------------------------------------------------


def import_mesh(path: str | Path) -> Mesh:
    path = Path(path)
    suffix = path.suffix.lower()
    text = path.read_text(encoding="utf-8", errors="replace")
    if suffix == ".ply":
        return read_ascii_ply(text)
    if suffix == ".obj":
        return read_obj(text)
    raise MeshImportError(f"unsupported mesh format '{suffix}'")


def read_ascii_ply(text: str) -> Mesh:
    """Minimal ASCII PLY reader for vertex (x y z [nx ny nz]) + face elements."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshImportError("not a PLY file")
    n_vertices = n_faces = 0
    vertex_props: list[str] = []
    current_element = None
    body_start = None
    for i, line in enumerate(lines[1:], start=1):
        parts = line.strip().split()
        if not parts:
            continue
        if parts[0] == "format":
            if parts[1] != "ascii":
                raise MeshImportError("only ASCII PLY is supported")
        elif parts[0] == "element":
            current_element = parts[1]
            if parts[1] == "vertex":
                n_vertices = int(parts[2])
            elif parts[1] == "face":
                n_faces = int(parts[2])
        elif parts[0] == "property" and current_element == "vertex" and parts[1] != "list":
            vertex_props.append(parts[-1])
        elif parts[0] == "end_header":
            body_start = i + 1
            break
    if body_start is None:
        raise MeshImportError("missing end_header")

    try:
        coords = {name: vertex_props.index(name) for name in ("x", "y", "z")}
    except ValueError:
        raise MeshImportError("vertex element lacks x/y/z properties") from None
    has_normals = all(name in vertex_props for name in ("nx", "ny", "nz"))

    rows = [line.split() for line in lines[body_start:] if line.strip()]
    if len(rows) < n_vertices + n_faces:
        raise MeshImportError("truncated PLY body")
    try:
        vertices = np.array(
            [[float(row[coords[c]]) for c in ("x", "y", "z")] for row in rows[:n_vertices]]
        )
        normals = None
        if has_normals:
            idx = [vertex_props.index(name) for name in ("nx", "ny", "nz")]
            normals = np.array([[float(row[i]) for i in idx] for row in rows[:n_vertices]])
        faces = []
        for row in rows[n_vertices : n_vertices + n_faces]:
            count = int(row[0])
            poly = [int(v) for v in row[1 : 1 + count]]
            for k in range(1, count - 1):
                faces.append([poly[0], poly[k], poly[k + 1]])
    except (ValueError, IndexError) as exc:
        raise MeshImportError(f"malformed PLY body: {exc}") from None
    return Mesh.from_faces(vertices, faces, normals)


def read_obj(text: str) -> Mesh:
    """Minimal OBJ reader; polygons are fan-triangulated."""
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif parts[0] == "f":
            indices = []
            for token in parts[1:]:
                raw = token.split("/")[0]
                index = int(raw)
                indices.append(index - 1 if index > 0 else len(vertices) + index)
            for k in range(1, len(indices) - 1):
                faces.append([indices[0], indices[k], indices[k + 1]])
    if not vertices or not faces:
        raise MeshImportError("OBJ contains no triangles")
    return Mesh.from_faces(np.asarray(vertices), np.asarray(faces))


# --------------------------------------------------------------------------
# Embeddings and the semantic index
# --------------------------------------------------------------------------


class EmbedderBackend(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


class DeterministicEmbedder:
    """Hashed bag-of-words embedder: stable across runs and machines.

    Tokens are lowercased alphanumeric runs; each token lands in a hash
    bucket with a hash-derived sign and the accumulated vector is
    L2-normalized.
    """

    def __init__(self, dim: int = DEFAULT_EMBEDDING_DIM):
        if dim < 1:
            raise LibraryError("embedding dim must be >= 1")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise LibraryError("cannot embed empty text")
        tokens = [t for t in _TOKEN_SPLIT.split(text.lower()) if t]
        if not tokens:
            tokens = [text]
        vector = np.zeros(self.dim, dtype=np.float64)
        for token in tokens:
            digest = hashlib.sha1(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            vector[bucket] += sign
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            vector[0] = 1.0
            norm = 1.0
        return vector / norm


class ServiceEmbedder:
    """Embedding backend that delegates to an HTTP embedding service."""

    def __init__(self, client, dim: int = DEFAULT_EMBEDDING_DIM):
        self.client = client
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        try:
            reply = self.client.exchange(text)
        except ScenesmithError as exc:
            raise EmbedderUnavailableError(str(exc)) from exc
        values = np.asarray(json.loads(reply), dtype=np.float64)
        if values.shape != (self.dim,):
            raise EmbedderUnavailableError(
                f"embedding service returned shape {values.shape}, expected ({self.dim},)"
            )
        norm = float(np.linalg.norm(values))
        return values / norm if norm else values


@dataclass(frozen=True)
class IndexEntry:
    asset_id: str
    ordinal: int


class EmbeddingIndex:
    """Exact cosine-similarity index over asset descriptions."""

    def __init__(self, dim: int, vectors: np.ndarray, entries: list[IndexEntry]):
        self.dim = dim
        self.vectors = vectors
        self.entries = entries

    @classmethod
    def build(cls, assets: list["Asset"], embedder: EmbedderBackend) -> "EmbeddingIndex":
        vectors = []
        entries = []
        for asset in assets:
            for ordinal, description in enumerate(asset.descriptions):
                vectors.append(embedder.embed(description))
                entries.append(IndexEntry(asset.asset_id, ordinal))
        matrix = np.vstack(vectors) if vectors else np.zeros((0, embedder.dim))
        return cls(embedder.dim, matrix, entries)

    def search(self, embedder: EmbedderBackend, query: str, k: int) -> list[tuple[str, float]]:
        """Top-k assets by max-over-descriptions cosine similarity.

        Ties break by lexicographic asset_id. Exact (no approximation).
        """
        if k < 1:
            raise LibraryError("k must be >= 1")
        if not self.entries:
            raise EmptyIndexError("the embedding index is empty")
        query_vector = embedder.embed(query)
        scores = self.vectors @ query_vector
        best: dict[str, float] = {}
        for entry, score in zip(self.entries, scores):
            value = float(score)
            if entry.asset_id not in best or value > best[entry.asset_id]:
                best[entry.asset_id] = value
        ranked = sorted(best.items(), key=lambda item: (-item[1], item[0]))
        return ranked[:k]


# --------------------------------------------------------------------------
# The library itself
# --------------------------------------------------------------------------

MAX_DESCRIPTIONS = 6


@dataclass
class Asset:
    asset_id: str
    object_type: str
    mesh: Mesh
    descriptions: list[str]
    default_extents: Vec3

    def __post_init__(self) -> None:
        if not self.descriptions:
            raise LibraryError(f"asset '{self.asset_id}' needs at least one description")
        if len(self.descriptions) > MAX_DESCRIPTIONS:
            raise LibraryError(
                f"asset '{self.asset_id}' has {len(self.descriptions)} descriptions"
                f" (max {MAX_DESCRIPTIONS})"
            )
        if len(self.mesh.faces) == 0:
            raise LibraryError(f"asset '{self.asset_id}' has an empty mesh")


class AssetLibrary:
    """Assets plus their semantic index; immutable index, atomic rebuild."""

    def __init__(self, embedder: EmbedderBackend | None = None, meshgen_client=None):
        self.embedder: EmbedderBackend = embedder or DeterministicEmbedder()
        self.meshgen_client = meshgen_client
        self.assets: dict[str, Asset] = {}
        self._index: EmbeddingIndex | None = None

    @classmethod
    def load_manifest(cls, directory: str | Path, embedder=None, meshgen_client=None) -> "AssetLibrary":
        """Load assets from a directory with a manifest.json plus mesh files."""
        directory = Path(directory)
        manifest_path = directory / "manifest.json"
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise LibraryError(f"no manifest.json in {directory}") from None
        except ValueError as exc:
            raise LibraryError(f"malformed manifest: {exc}") from None
        library = cls(embedder=embedder, meshgen_client=meshgen_client)
        for record in manifest.get("assets", []):
            mesh = import_mesh(directory / record["mesh_file"])
            library.add(
                Asset(
                    asset_id=record["asset_id"],
                    object_type=record["object_type"],
                    mesh=mesh,
                    descriptions=list(record["descriptions"]),
                    default_extents=Vec3(**record["default_extents"]),
                )
            )
        library.rebuild_index()
        return library

    def add(self, asset: Asset) -> None:
        if asset.asset_id in self.assets:
            raise LibraryError(f"duplicate asset_id '{asset.asset_id}'")
        self.assets[asset.asset_id] = asset
        self._index = None

    def get(self, asset_id: str) -> Asset:
        try:
            return self.assets[asset_id]
        except KeyError:
            raise LibraryError(f"no asset '{asset_id}'") from None

    def rebuild_index(self) -> None:
        ordered = [self.assets[k] for k in sorted(self.assets)]
        self._index = EmbeddingIndex.build(ordered, self.embedder)

    @property
    def index(self) -> EmbeddingIndex:
        if self._index is None:
            self.rebuild_index()
        assert self._index is not None
        return self._index

    def __len__(self) -> int:
        return len(self.assets)

    def search(self, query: str, k: int) -> list[tuple[str, float]]:
        return self.index.search(self.embedder, query, k)

    def generate_mesh(self, prompt: str) -> Mesh | None:
        """Ask the configured mesh-generation service for a mesh; None if unset
        or unreachable (callers fall back to the primitive catalog)."""
        if self.meshgen_client is None:
            return None
        try:
            reply = self.meshgen_client.exchange(prompt)
            return read_ascii_ply(reply)
        except ScenesmithError:
            return None
