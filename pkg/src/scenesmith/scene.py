"""The mutable scene graph: room slabs, named objects, sequential execution.

Coordinates are right-handed, z-up, meters; rotations are Euler XYZ in
degrees applied about an object's geometric center. The room interior
spans x in [-sx/2, sx/2], y in [-sy/2, sy/2], z in [0, sz] with the floor
top at z = 0; object origins sit at the AABB bottom-center so "on the
floor" means origin z = 0.

The scene is single-writer: all mutations are funneled through one
execution context (the API layer holds a lock); snapshots are immutable
value copies safe to share across readers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import geometry, library, materials
from .errors import ScenesmithError
from .geometry import Mesh
from .resolved import ActionResult, ResolvedAction, ResolvedKind
from .types import Vec3

SCHEMA_VERSION = 1
DEFAULT_WALL_THICKNESS = 0.1
DEFAULT_MATERIAL = "itu_wood"

ROOM_SLAB_NAMES = ("floor", "ceiling", "wall_north", "wall_south", "wall_east", "wall_west")
DIRECTION_NAMES = ("north", "south", "east", "west")


class SceneError(ScenesmithError):
    code = "scene"


class UnknownObjectError(SceneError):
    code = "unknown_object"

    def __init__(self, name: str):
        super().__init__(f"no object named '{name}' in the scene", name=name)
        self.name = name


class NameCollisionError(SceneError):
    code = "name_collision"


class NameExhaustedError(SceneError):
    code = "name_exhausted"


class NonPositiveSizeError(SceneError):
    code = "non_positive_size"


class NonPositiveScaleError(SceneError):
    code = "non_positive_scale"


class UnsupportedSchemaVersionError(SceneError):
    code = "unsupported_schema_version"


class CorruptDocumentError(SceneError):
    code = "corrupt_document"


@dataclass(frozen=True)
class RoomSpec:
    size: Vec3
    wall_thickness: float = DEFAULT_WALL_THICKNESS

    def interior_min(self) -> Vec3:
        return Vec3(-self.size.x / 2.0, -self.size.y / 2.0, 0.0)

    def interior_max(self) -> Vec3:
        return Vec3(self.size.x / 2.0, self.size.y / 2.0, self.size.z)


class SceneObject:
    """A named mesh instance; derived AABB fields recomputed on every mutation."""

    def __init__(
        self,
        name: str,
        object_type: str,
        base_mesh: Mesh,
        affine: np.ndarray,
        material: str,
        mesh_ref: str,
        visible: bool = True,
        rotation_deg: Vec3 = Vec3(0.0, 0.0, 0.0),
    ):
        self.name = name
        self.object_type = object_type
        self.base_mesh = base_mesh
        self.affine = np.asarray(affine, dtype=np.float64)
        self.material = material
        self.mesh_ref = mesh_ref
        self.visible = visible
        self.rotation_deg = rotation_deg
        self._world_mesh: Mesh | None = None
        self._recompute()

    def _recompute(self) -> None:
        self._world_mesh = geometry.apply_affine(self.base_mesh, self.affine)
        lo, hi = self._world_mesh.aabb()
        self.aabb_min = Vec3(*lo)
        self.aabb_max = Vec3(*hi)
        self.size = Vec3(*(hi - lo))
        self.geometric_center = Vec3(*((lo + hi) / 2.0))
        # Object origin: bottom-center of the world AABB.
        self.location = Vec3(self.geometric_center.x, self.geometric_center.y, self.aabb_min.z)

    @property
    def world_mesh(self) -> Mesh:
        assert self._world_mesh is not None
        return self._world_mesh

    def translate(self, offset: Vec3) -> None:
        self.affine = geometry.translation(offset.to_tuple()) @ self.affine
        self._recompute()

    def rotate_about_center(self, rotation: Vec3) -> None:
        center = np.array(self.geometric_center.to_tuple())
        pivot = (
            geometry.translation(center)
            @ geometry.rotation_affine(rotation.x, rotation.y, rotation.z)
            @ geometry.translation(-center)
        )
        self.affine = pivot @ self.affine
        self.rotation_deg = self.rotation_deg.add(rotation)
        self._recompute()

    def scale_about_center(self, factors: Vec3) -> None:
        center = np.array(self.geometric_center.to_tuple())
        pivot = (
            geometry.translation(center)
            @ geometry.scaling(factors.to_tuple())
            @ geometry.translation(-center)
        )
        self.affine = pivot @ self.affine
        self._recompute()

    def copy_as(self, name: str) -> "SceneObject":
        return SceneObject(
            name=name,
            object_type=self.object_type,
            base_mesh=self.base_mesh,
            affine=self.affine.copy(),
            material=self.material,
            mesh_ref=self.mesh_ref,
            visible=self.visible,
            rotation_deg=self.rotation_deg,
        )


@dataclass(frozen=True)
class ObjectSnapshot:
    name: str
    object_type: str
    location: Vec3
    rotation_deg: Vec3
    size: Vec3
    geometric_center: Vec3
    aabb_min: Vec3
    aabb_max: Vec3
    material: str
    visible: bool

    def to_jsonable(self) -> dict:
        return {
            "name": self.name,
            "object_type": self.object_type,
            "location": self.location.to_json(),
            "rotation_deg": self.rotation_deg.to_json(),
            "size": self.size.to_json(),
            "geometric_center": self.geometric_center.to_json(),
            "aabb_min": self.aabb_min.to_json(),
            "aabb_max": self.aabb_max.to_json(),
            "material": self.material,
            "visible": self.visible,
        }


@dataclass(frozen=True)
class SceneSnapshot:
    room: RoomSpec | None
    objects: tuple[ObjectSnapshot, ...]
    materials: tuple[str, ...]
    directions: tuple[str, ...]
    version: int

    def names(self) -> set[str]:
        return {o.name for o in self.objects}

    def find(self, name: str) -> ObjectSnapshot | None:
        for obj in self.objects:
            if obj.name == name:
                return obj
        return None

    def to_jsonable(self) -> dict:
        return {
            "version": self.version,
            "room": None
            if self.room is None
            else {"size": self.room.size.to_json(), "wall_thickness": self.room.wall_thickness},
            "objects": [o.to_jsonable() for o in self.objects],
            "materials": list(self.materials),
            "directions": list(self.directions),
        }


class Scene:
    """Ordered name -> object map plus the optional room; version counts mutations."""

    def __init__(self, material_table: materials.MaterialTable | None = None):
        self.room: RoomSpec | None = None
        self.objects: dict[str, SceneObject] = {}
        self.version = 0
        self.material_table = material_table or materials.MaterialTable()

    def names(self) -> set[str]:
        return set(self.objects)

    def get(self, name: str) -> SceneObject:
        try:
            return self.objects[name]
        except KeyError:
            raise UnknownObjectError(name) from None


def generate_unique_name(taken, object_type: str) -> str:
    """Smallest free "<object_type>.NNN" name, NNN a zero-padded integer >= 001."""
    if not object_type:
        raise SceneError("object_type must be non-empty")
    taken_names = taken.names() if isinstance(taken, Scene) else set(taken)
    for number in range(1, 1000):
        candidate = f"{object_type}.{number:03d}"
        if candidate not in taken_names:
            return candidate
    raise NameExhaustedError(f"all names {object_type}.001-.999 are taken")


def snapshot(scene: Scene) -> SceneSnapshot:
    objects = tuple(
        ObjectSnapshot(
            name=o.name,
            object_type=o.object_type,
            location=o.location,
            rotation_deg=o.rotation_deg,
            size=o.size,
            geometric_center=o.geometric_center,
            aabb_min=o.aabb_min,
            aabb_max=o.aabb_max,
            material=o.material,
            visible=o.visible,
        )
        for o in scene.objects.values()
    )
    return SceneSnapshot(
        room=scene.room,
        objects=objects,
        materials=tuple(scene.material_table.names()),
        directions=DIRECTION_NAMES,
        version=scene.version,
    )


def _slab(name: str, lo: Vec3, hi: Vec3, material: str) -> SceneObject:
    extents = hi.sub(lo)
    center = Vec3((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0, (lo.z + hi.z) / 2.0)
    base = library.make_primitive("box", Vec3(1.0, 1.0, 1.0))
    affine = geometry.translation(center.to_tuple()) @ geometry.scaling(extents.to_tuple())
    object_type = "wall" if name.startswith("wall") else name
    return SceneObject(
        name=name,
        object_type=object_type,
        base_mesh=base,
        affine=affine,
        material=material,
        mesh_ref="primitive:box",
    )


def setup_room(scene: Scene, size: Vec3, wall_thickness: float = DEFAULT_WALL_THICKNESS) -> None:
    """Replace the room with six axis-aligned slabs enclosing the interior.

    Interior: x in [-sx/2, sx/2], y in [-sy/2, sy/2], z in [0, sz]; the floor
    top sits at z = 0. Floor is itu_floorboard, walls and ceiling itu_concrete.
    """
    if size.x <= 0 or size.y <= 0 or size.z <= 0:
        raise NonPositiveSizeError(f"room size must be positive, got {size.to_tuple()}")
    if wall_thickness <= 0:
        raise NonPositiveSizeError("wall thickness must be positive")
    t = wall_thickness
    hx, hy, sz = size.x / 2.0, size.y / 2.0, size.z

    for name in ROOM_SLAB_NAMES:
        scene.objects.pop(name, None)

    slabs = {
        "floor": (Vec3(-hx - t, -hy - t, -t), Vec3(hx + t, hy + t, 0.0), "itu_floorboard"),
        "ceiling": (Vec3(-hx - t, -hy - t, sz), Vec3(hx + t, hy + t, sz + t), "itu_concrete"),
        "wall_north": (Vec3(-hx - t, hy, 0.0), Vec3(hx + t, hy + t, sz), "itu_concrete"),
        "wall_south": (Vec3(-hx - t, -hy - t, 0.0), Vec3(hx + t, -hy, sz), "itu_concrete"),
        "wall_east": (Vec3(hx, -hy, 0.0), Vec3(hx + t, hy, sz), "itu_concrete"),
        "wall_west": (Vec3(-hx - t, -hy, 0.0), Vec3(-hx, hy, sz), "itu_concrete"),
    }
    # Insert in the canonical slab order so exports are stable.
    rebuilt = {name: _slab(name, lo, hi, mat) for name, (lo, hi, mat) in slabs.items()}
    remaining = {k: v for k, v in scene.objects.items()}
    scene.objects = {name: rebuilt[name] for name in ROOM_SLAB_NAMES}
    scene.objects.update(remaining)
    scene.room = RoomSpec(size=size, wall_thickness=wall_thickness)


def _build_base_mesh(resolved: ResolvedAction) -> tuple[Mesh, str]:
    if resolved.mesh is not None:
        return resolved.mesh, resolved.mesh_source or "imported"
    source = resolved.mesh_source or "primitive:box"
    if source.startswith("primitive:"):
        parts = source.split(":")
        kind = parts[1]
        segments = int(parts[2]) if len(parts) > 2 else 24
        return library.make_primitive(kind, Vec3(1.0, 1.0, 1.0), segments=segments), source
    raise SceneError(f"resolved creation '{resolved.name}' carries no mesh for '{source}'")


def _creation_affine(base: Mesh, position: Vec3, extents: Vec3, rotation: Vec3) -> np.ndarray:
    lo, hi = base.aabb()
    span = hi - lo
    span = np.where(span > 1e-12, span, 1.0)
    scale = np.array(extents.to_tuple()) / span
    scale = np.where(np.abs(scale) > 1e-12, scale, 1.0)
    base_center = (lo + hi) / 2.0
    center = np.array([position.x, position.y, position.z + extents.z / 2.0])
    affine = (
        geometry.translation(center)
        @ geometry.scaling(scale)
        @ geometry.translation(-base_center)
    )
    if rotation.x or rotation.y or rotation.z:
        pivot = (
            geometry.translation(center)
            @ geometry.rotation_affine(rotation.x, rotation.y, rotation.z)
            @ geometry.translation(-center)
        )
        affine = pivot @ affine
    return affine


def _apply_one(scene: Scene, resolved: ResolvedAction) -> list[str]:
    """Execute one resolved action; returns names of objects it created."""
    kind = resolved.kind
    if kind is ResolvedKind.SETUP_ROOM:
        assert resolved.room_size is not None
        setup_room(scene, resolved.room_size, resolved.wall_thickness or DEFAULT_WALL_THICKNESS)
        return list(ROOM_SLAB_NAMES)
    if kind is ResolvedKind.CLEAR_SCENE:
        scene.objects.clear()
        scene.room = None
        return []
    if kind is ResolvedKind.CREATE:
        assert resolved.name is not None and resolved.extents is not None
        if resolved.name in scene.objects:
            raise NameCollisionError(f"object '{resolved.name}' already exists")
        material = materials.normalize_material_name(
            resolved.material or DEFAULT_MATERIAL, scene.material_table
        )
        base, mesh_ref = _build_base_mesh(resolved)
        rotation = resolved.rotation_deg or Vec3(0.0, 0.0, 0.0)
        position = resolved.position or Vec3(0.0, 0.0, 0.0)
        affine = _creation_affine(base, position, resolved.extents, rotation)
        scene.objects[resolved.name] = SceneObject(
            name=resolved.name,
            object_type=resolved.object_type or "object",
            base_mesh=base,
            affine=affine,
            material=material,
            mesh_ref=mesh_ref,
            rotation_deg=rotation,
        )
        return [resolved.name]

    assert resolved.name is not None
    obj = scene.get(resolved.name)

    if kind is ResolvedKind.MOVE_TO:
        assert resolved.position is not None
        obj.translate(resolved.position.sub(obj.location))
    elif kind is ResolvedKind.MOVE_BY:
        assert resolved.offset is not None
        obj.translate(resolved.offset)
    elif kind is ResolvedKind.ROTATE:
        assert resolved.rotation_deg is not None
        obj.rotate_about_center(resolved.rotation_deg)
    elif kind is ResolvedKind.RESIZE:
        assert resolved.size is not None
        target = resolved.size
        if target.x <= 0 or target.y <= 0 or target.z <= 0:
            raise NonPositiveScaleError(f"target size must be positive, got {target.to_tuple()}")
        current = obj.size
        factors = []
        for axis in ("x", "y", "z"):
            span = getattr(current, axis)
            if span <= 1e-12:
                raise NonPositiveScaleError(
                    f"cannot resize '{obj.name}' along {axis}: current extent is zero"
                )
            factors.append(getattr(target, axis) / span)
        obj.scale_about_center(Vec3(*factors))
    elif kind is ResolvedKind.SCALE:
        assert resolved.scale_factor is not None
        if resolved.scale_factor <= 0:
            raise NonPositiveScaleError("scale factor must be > 0")
        obj.scale_about_center(
            Vec3(resolved.scale_factor, resolved.scale_factor, resolved.scale_factor)
        )
    elif kind is ResolvedKind.DELETE:
        del scene.objects[obj.name]
    elif kind is ResolvedKind.CHANGE_MATERIAL:
        assert resolved.material is not None
        obj.material = materials.normalize_material_name(resolved.material, scene.material_table)
    elif kind is ResolvedKind.RENAME:
        assert resolved.new_name is not None
        if resolved.new_name == obj.name:
            return []
        if resolved.new_name in scene.objects:
            raise NameCollisionError(f"object '{resolved.new_name}' already exists")
        del scene.objects[obj.name]
        obj.name = resolved.new_name
        scene.objects[resolved.new_name] = obj
    elif kind is ResolvedKind.DUPLICATE:
        assert resolved.new_name is not None
        if resolved.new_name in scene.objects:
            raise NameCollisionError(f"object '{resolved.new_name}' already exists")
        clone = obj.copy_as(resolved.new_name)
        if resolved.offset is not None:
            clone.translate(resolved.offset)
        scene.objects[resolved.new_name] = clone
        return [resolved.new_name]
    else:  # pragma: no cover - exhaustive over ResolvedKind
        raise SceneError(f"unhandled resolved action kind {kind}")
    return []


def apply_actions(scene: Scene, resolved: list[ResolvedAction]) -> list[ActionResult]:
    """Apply resolved actions sequentially, stopping at the first failure.

    Mutations from earlier successful actions are kept (partial apply); the
    failing index is reported in its result. Version increments once per
    successful mutating action.
    """
    results: list[ActionResult] = []
    for index, action in enumerate(resolved):
        try:
            created = _apply_one(scene, action)
        except ScenesmithError as exc:
            results.append(
                ActionResult(
                    index=index,
                    source_index=action.source_index,
                    status="error",
                    error_code=exc.code,
                    message=str(exc),
                )
            )
            break
        scene.version += 1
        results.append(
            ActionResult(
                index=index,
                source_index=action.source_index,
                status="ok",
                created_names=created,
            )
        )
    return results


# --------------------------------------------------------------------------
# Persistence
# --------------------------------------------------------------------------


def save_scene(scene: Scene) -> dict:
    """Serialize a scene to a JSON-compatible document (schema-versioned)."""
    objects = []
    for obj in scene.objects.values():
        record: dict = {
            "name": obj.name,
            "object_type": obj.object_type,
            "mesh_ref": obj.mesh_ref,
            "affine": [float(v) for v in obj.affine.reshape(-1)],
            "rotation_deg": obj.rotation_deg.to_json(),
            "material": obj.material,
            "visible": obj.visible,
        }
        if not obj.mesh_ref.startswith("primitive:"):
            record["mesh"] = {
                "vertices": [float(v) for v in obj.base_mesh.vertices.reshape(-1)],
                "normals": [float(v) for v in obj.base_mesh.normals.reshape(-1)],
                "faces": [int(v) for v in obj.base_mesh.faces.reshape(-1)],
            }
        objects.append(record)
    return {
        "schema_version": SCHEMA_VERSION,
        "version": scene.version,
        "room": None
        if scene.room is None
        else {"size": scene.room.size.to_json(), "wall_thickness": scene.room.wall_thickness},
        "objects": objects,
    }


def load_scene(document: dict) -> Scene:
    """Rebuild a scene from a persisted document."""
    if not isinstance(document, dict):
        raise CorruptDocumentError("scene document must be a JSON object")
    schema_version = document.get("schema_version")
    if schema_version != SCHEMA_VERSION:
        raise UnsupportedSchemaVersionError(
            f"unsupported scene schema version {schema_version!r}"
        )
    scene = Scene()
    try:
        room = document.get("room")
        if room is not None:
            scene.room = RoomSpec(
                size=Vec3(**room["size"]), wall_thickness=float(room["wall_thickness"])
            )
        for record in document["objects"]:
            mesh_ref = record["mesh_ref"]
            if mesh_ref.startswith("primitive:"):
                parts = mesh_ref.split(":")
                segments = int(parts[2]) if len(parts) > 2 else 24
                base = library.make_primitive(parts[1], Vec3(1.0, 1.0, 1.0), segments=segments)
            else:
                data = record["mesh"]
                vertices = np.asarray(data["vertices"], dtype=np.float64).reshape(-1, 3)
                normals = np.asarray(data["normals"], dtype=np.float64).reshape(-1, 3)
                faces = np.asarray(data["faces"], dtype=np.int32).reshape(-1, 3)
                base = Mesh(vertices, normals, faces)
            affine = np.asarray(record["affine"], dtype=np.float64).reshape(4, 4)
            obj = SceneObject(
                name=record["name"],
                object_type=record["object_type"],
                base_mesh=base,
                affine=affine,
                material=record["material"],
                mesh_ref=mesh_ref,
                visible=bool(record["visible"]),
                rotation_deg=Vec3(**record["rotation_deg"]),
            )
            scene.objects[obj.name] = obj
        scene.version = int(document.get("version", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptDocumentError(f"malformed scene document: {exc}") from None
    return scene


def save_scene_text(scene: Scene) -> str:
    return json.dumps(save_scene(scene), sort_keys=True)


def load_scene_text(text: str) -> Scene:
    try:
        document = json.loads(text)
    except ValueError as exc:
        raise CorruptDocumentError(f"not valid JSON: {exc}") from None
    return load_scene(document)
