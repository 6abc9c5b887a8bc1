"""Turns validated abstract actions into concrete resolved operations.

Resolution walks the action list in order, keeping a pending-name table so
"#" local-id references map to the exact names the engine will create.
Spatial relations become absolute coordinates computed from bounding boxes
(subject origin = AABB bottom-center); quantities expand into grid-arranged
per-instance placements; descriptions pick an asset (library search,
mesh-generation service, or the primitive catalog).

Resolution is pure: the same snapshot, actions and library always produce
the same resolved list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import library as library_mod
from . import scene as scene_mod
from .actions import Action, ActionType, SpatialRelation
from .errors import ScenesmithError
from .geometry import euler_matrix_deg
from .resolved import ResolvedAction, ResolvedKind
from .scene import ObjectSnapshot, SceneSnapshot, generate_unique_name
from .types import Vec3

#: Clearance between a subject and its reference for lateral relations.
DEFAULT_GAP = 0.10
#: Minimum edge-to-edge spacing inside quantity grids.
DEFAULT_GRID_SPACING = 0.02
#: Library matches scoring below this are rejected.
DEFAULT_MIN_SIMILARITY = 0.2


class ResolveError(ScenesmithError):
    code = "resolve"


class UnknownReferenceError(ResolveError):
    code = "unknown_reference"

    def __init__(self, name: str):
        super().__init__(f"cannot resolve reference '{name}'", name=name)
        self.name = name


class NoLibraryMatchError(ResolveError):
    code = "no_library_match"

    def __init__(self, query: str, best_score: float | None):
        super().__init__(
            f"no library asset matches '{query}' (best score {best_score})",
            query=query,
            best_score=best_score,
        )
        self.query = query
        self.best_score = best_score


class PlacementInfeasibleError(ResolveError):
    code = "placement_infeasible"


class MissingReferenceError(ResolveError):
    code = "missing_reference"


class ReferenceDegenerateError(ResolveError):
    code = "reference_degenerate"


@dataclass(frozen=True)
class Rect:
    """Axis-aligned footprint on a horizontal plane at height z."""

    cx: float
    cy: float
    z: float
    width: float
    depth: float


@dataclass(frozen=True)
class _RefGeom:
    """Bounding geometry of a reference object (existing or pending)."""

    name: str
    center: Vec3
    aabb_min: Vec3
    aabb_max: Vec3

    @property
    def size(self) -> Vec3:
        return self.aabb_max.sub(self.aabb_min)

    def top_rect(self) -> Rect:
        return Rect(self.center.x, self.center.y, self.aabb_max.z, self.size.x, self.size.y)


def _geom_of_snapshot(obj: ObjectSnapshot) -> _RefGeom:
    return _RefGeom(obj.name, obj.geometric_center, obj.aabb_min, obj.aabb_max)


def rotated_extents(extents: Vec3, rotation: Vec3) -> Vec3:
    """World-AABB extents of a box with the given extents after rotation."""
    if not (rotation.x or rotation.y or rotation.z):
        return extents
    matrix = euler_matrix_deg(rotation.x, rotation.y, rotation.z)
    half = [extents.x / 2.0, extents.y / 2.0, extents.z / 2.0]
    spans = []
    for row in matrix:
        spans.append(2.0 * sum(abs(row[j]) * half[j] for j in range(3)))
    return Vec3(*spans)


def resolve_relation(
    subject_extents: Vec3,
    relation: SpatialRelation,
    reference: _RefGeom | scene_mod.RoomSpec | None,
    gap: float = DEFAULT_GAP,
) -> Vec3:
    """Absolute origin (bottom-center) placing the subject per the relation."""
    if subject_extents.x < 0 or subject_extents.y < 0 or subject_extents.z < 0:
        raise ResolveError("subject extents must be non-negative")

    if relation is SpatialRelation.CENTER_OF_ROOM:
        return Vec3(0.0, 0.0, 0.0)

    if relation in (
        SpatialRelation.AGAINST_WALL_NORTH,
        SpatialRelation.AGAINST_WALL_SOUTH,
        SpatialRelation.AGAINST_WALL_EAST,
        SpatialRelation.AGAINST_WALL_WEST,
    ):
        if not isinstance(reference, scene_mod.RoomSpec):
            raise MissingReferenceError(f"relation '{relation.value}' requires a room")
        hx, hy = reference.size.x / 2.0, reference.size.y / 2.0
        if relation is SpatialRelation.AGAINST_WALL_NORTH:
            return Vec3(0.0, hy - subject_extents.y / 2.0, 0.0)
        if relation is SpatialRelation.AGAINST_WALL_SOUTH:
            return Vec3(0.0, -hy + subject_extents.y / 2.0, 0.0)
        if relation is SpatialRelation.AGAINST_WALL_EAST:
            return Vec3(hx - subject_extents.x / 2.0, 0.0, 0.0)
        return Vec3(-hx + subject_extents.x / 2.0, 0.0, 0.0)

    if not isinstance(reference, _RefGeom):
        raise MissingReferenceError(f"relation '{relation.value}' requires a reference object")
    ref = reference
    if max(ref.size.x, ref.size.y, ref.size.z) <= 0.0:
        raise ReferenceDegenerateError(f"reference '{ref.name}' has zero extent")

    cx, cy = ref.center.x, ref.center.y
    if relation is SpatialRelation.ON_TOP_OF:
        return Vec3(cx, cy, ref.aabb_max.z)
    if relation is SpatialRelation.UNDER:
        return Vec3(cx, cy, ref.aabb_min.z - subject_extents.z)
    if relation is SpatialRelation.INSIDE:
        return Vec3(cx, cy, ref.center.z - subject_extents.z / 2.0)

    base_z = ref.aabb_min.z
    if relation is SpatialRelation.LEFT_OF:
        return Vec3(cx - (ref.size.x + subject_extents.x) / 2.0 - gap, cy, base_z)
    if relation is SpatialRelation.RIGHT_OF:
        return Vec3(cx + (ref.size.x + subject_extents.x) / 2.0 + gap, cy, base_z)
    if relation is SpatialRelation.IN_FRONT_OF:
        return Vec3(cx, cy - (ref.size.y + subject_extents.y) / 2.0 - gap, base_z)
    if relation is SpatialRelation.BEHIND:
        return Vec3(cx, cy + (ref.size.y + subject_extents.y) / 2.0 + gap, base_z)
    if relation is SpatialRelation.NEXT_TO:
        raise ResolveError("next_to requires the occupancy-aware path")  # pragma: no cover
    raise ResolveError(f"unhandled relation {relation}")  # pragma: no cover


def arrange_grid(
    n: int, footprint: Rect, item_extents: Vec3, spacing: float = DEFAULT_GRID_SPACING
) -> list[Vec3]:
    """Positions for n items on a ceil(sqrt(n))-column grid centered in the
    footprint, row-major, with at least ``spacing`` between item edges."""
    if n < 1:
        raise ResolveError("grid count must be >= 1")
    columns = math.ceil(math.sqrt(n))
    rows = math.ceil(n / columns)
    grid_width = columns * item_extents.x + (columns - 1) * spacing
    grid_depth = rows * item_extents.y + (rows - 1) * spacing
    if grid_width > footprint.width + 1e-9 or grid_depth > footprint.depth + 1e-9:
        raise PlacementInfeasibleError(
            f"{n} items of {item_extents.x:.3g} x {item_extents.y:.3g} m do not fit in a "
            f"{footprint.width:.3g} x {footprint.depth:.3g} m footprint"
        )
    x0 = footprint.cx - grid_width / 2.0 + item_extents.x / 2.0
    y0 = footprint.cy - grid_depth / 2.0 + item_extents.y / 2.0
    pitch_x = item_extents.x + spacing
    pitch_y = item_extents.y + spacing
    positions = []
    for index in range(n):
        row, column = divmod(index, columns)
        positions.append(Vec3(x0 + column * pitch_x, y0 + row * pitch_y, footprint.z))
    return positions


@dataclass
class _Pending:
    """An object this resolution will create (or has targeted), AABB included."""

    name: str
    object_type: str
    geom: _RefGeom


class _Resolver:
    def __init__(
        self,
        snapshot: SceneSnapshot,
        library: library_mod.AssetLibrary | None,
        gap: float,
        grid_spacing: float,
        min_similarity: float,
    ):
        self.snapshot = snapshot
        self.library = library
        self.gap = gap
        self.grid_spacing = grid_spacing
        self.min_similarity = min_similarity
        self.taken: set[str] = snapshot.names()
        self.pending: dict[str, _Pending] = {}  # overlay over snapshot geometry
        self.deleted: set[str] = set()
        self.groups: dict[str, list[str]] = {}  # local_id -> created names
        self.results: list[ResolvedAction] = []

    # -- reference lookup --------------------------------------------------

    def lookup_names(self, reference: str) -> list[str]:
        """Concrete names for an object reference; "#id" may name a group."""
        if reference.startswith("#"):
            names = self.groups.get(reference[1:])
            if not names:
                raise UnknownReferenceError(reference)
            return list(names)
        if reference in self.taken:
            return [reference]
        raise UnknownReferenceError(reference)

    def geom_for(self, name: str) -> _RefGeom:
        pending = self.pending.get(name)
        if pending is not None:
            return pending.geom
        if name in self.deleted:
            raise UnknownReferenceError(name)
        obj = self.snapshot.find(name)
        if obj is None:
            raise UnknownReferenceError(name)
        return _geom_of_snapshot(obj)

    def object_type_of(self, name: str) -> str:
        if name in self.pending:
            return self.pending[name].object_type
        obj = self.snapshot.find(name)
        return obj.object_type if obj is not None else "object"

    def occupied(self) -> list[_RefGeom]:
        geoms = [
            _geom_of_snapshot(o)
            for o in self.snapshot.objects
            if o.name not in self.pending and o.name not in self.deleted
        ]
        geoms.extend(p.geom for p in self.pending.values())
        return geoms

    # -- creation ------------------------------------------------------------

    def pick_asset(self, action: Action) -> tuple[str, Vec3 | None, object]:
        """Mesh source string, default extents, and optional Mesh payload."""
        object_type = action.object_type or "object"
        source = action.source
        if action.action_type is ActionType.CREATE_OBJECT_FROM_LIBRARY and source is None:
            source = "library"
        source = source or "primitive"

        if source == "library":
            if self.library is None or len(self.library) == 0:
                raise NoLibraryMatchError(object_type, None)
            ranked = self.library.search(object_type, k=1)
            asset_id, score = ranked[0]
            if score < self.min_similarity:
                raise NoLibraryMatchError(object_type, score)
            asset = self.library.get(asset_id)
            return f"library:{asset_id}", asset.default_extents, asset.mesh
        if source == "generate":
            mesh = self.library.generate_mesh(object_type) if self.library else None
            if mesh is not None:
                return "generated", None, mesh
            # Service unavailable: documented fallback to the primitive catalog.
            kind, extents = library_mod.primitive_for(object_type)
            return f"primitive:{kind}", extents, None
        kind, extents = library_mod.primitive_for(object_type)
        return f"primitive:{kind}", extents, None

    def clamp_to_room(self, position: Vec3, extents: Vec3) -> tuple[Vec3, bool]:
        room = self.snapshot.room
        if room is None:
            return position, False
        lo, hi = room.interior_min(), room.interior_max()
        px, py, pz = position.x, position.y, position.z
        clamped = False

        def clamp_axis(value: float, half: float, low: float, high: float) -> float:
            nonlocal clamped
            if high - low < 2 * half:  # wider than the room: center it
                result = (low + high) / 2.0
            else:
                result = min(max(value, low + half), high - half)
            if result != value:
                clamped = True
            return result

        px = clamp_axis(px, extents.x / 2.0, lo.x, hi.x)
        py = clamp_axis(py, extents.y / 2.0, lo.y, hi.y)
        new_z = pz
        if pz < lo.z:
            new_z = lo.z
        elif pz + extents.z > hi.z:
            new_z = max(lo.z, hi.z - extents.z)
        if new_z != pz:
            clamped = True
        return Vec3(px, py, new_z), clamped

    def place_next_to(self, subject_extents: Vec3, ref: _RefGeom) -> Vec3:
        order = (
            SpatialRelation.RIGHT_OF,
            SpatialRelation.LEFT_OF,
            SpatialRelation.BEHIND,
            SpatialRelation.IN_FRONT_OF,
        )
        room = self.snapshot.room
        occupied = self.occupied()
        for relation in order:
            candidate = resolve_relation(subject_extents, relation, ref, self.gap)
            if self._spot_free(candidate, subject_extents, occupied, room):
                return candidate
        raise PlacementInfeasibleError(
            f"no free side next to '{ref.name}' for extents {subject_extents.to_tuple()}"
        )

    @staticmethod
    def _spot_free(origin: Vec3, extents: Vec3, occupied: list[_RefGeom], room) -> bool:
        lo = (origin.x - extents.x / 2.0, origin.y - extents.y / 2.0, origin.z)
        hi = (origin.x + extents.x / 2.0, origin.y + extents.y / 2.0, origin.z + extents.z)
        if room is not None:
            rmin, rmax = room.interior_min(), room.interior_max()
            if (
                lo[0] < rmin.x - 1e-9
                or lo[1] < rmin.y - 1e-9
                or lo[2] < rmin.z - 1e-9
                or hi[0] > rmax.x + 1e-9
                or hi[1] > rmax.y + 1e-9
                or hi[2] > rmax.z + 1e-9
            ):
                return False
        for geom in occupied:
            if (
                lo[0] < geom.aabb_max.x - 1e-9
                and hi[0] > geom.aabb_min.x + 1e-9
                and lo[1] < geom.aabb_max.y - 1e-9
                and hi[1] > geom.aabb_min.y + 1e-9
                and lo[2] < geom.aabb_max.z - 1e-9
                and hi[2] > geom.aabb_min.z + 1e-9
            ):
                return False
        return True

    def reserve_name(self, object_type: str) -> str:
        name = generate_unique_name(self.taken, object_type)
        self.taken.add(name)
        return name

    def register_pending(self, name: str, object_type: str, origin: Vec3, world_extents: Vec3):
        center = Vec3(origin.x, origin.y, origin.z + world_extents.z / 2.0)
        half = Vec3(world_extents.x / 2.0, world_extents.y / 2.0, world_extents.z / 2.0)
        geom = _RefGeom(
            name,
            center,
            Vec3(center.x - half.x, center.y - half.y, center.z - half.z),
            Vec3(center.x + half.x, center.y + half.y, center.z + half.z),
        )
        self.pending[name] = _Pending(name, object_type, geom)

    def resolve_creation(self, index: int, action: Action) -> None:
        object_type = action.object_type or "object"
        mesh_source, asset_extents, mesh = self.pick_asset(action)
        extents = action.size or asset_extents or library_mod.primitive_for(object_type)[1]
        rotation = action.rotation_deg or Vec3(0.0, 0.0, 0.0)
        world_extents = rotated_extents(extents, rotation)
        quantity = action.quantity or 1

        reference: _RefGeom | scene_mod.RoomSpec | None = None
        if action.relation is not None:
            if action.reference_name is not None:
                ref_name = self.lookup_names(action.reference_name)[0]
                reference = self.geom_for(ref_name)
            else:
                reference = self.snapshot.room

        if action.position is not None:
            anchor = action.position
        elif action.relation is SpatialRelation.NEXT_TO:
            assert isinstance(reference, _RefGeom)
            anchor = self.place_next_to(world_extents, reference)
        elif action.relation is not None:
            anchor = resolve_relation(world_extents, action.relation, reference, self.gap)
        else:
            anchor = Vec3(0.0, 0.0, 0.0)

        if quantity == 1:
            positions = [anchor]
        else:
            if action.relation in (SpatialRelation.ON_TOP_OF, SpatialRelation.INSIDE) and isinstance(
                reference, _RefGeom
            ):
                rect = reference.top_rect()
                footprint = Rect(rect.cx, rect.cy, anchor.z, rect.width, rect.depth)
            else:
                columns = math.ceil(math.sqrt(quantity))
                rows = math.ceil(quantity / columns)
                width = columns * world_extents.x + (columns - 1) * self.grid_spacing
                depth = rows * world_extents.y + (rows - 1) * self.grid_spacing
                footprint = Rect(anchor.x, anchor.y, anchor.z, width, depth)
            positions = arrange_grid(quantity, footprint, world_extents, self.grid_spacing)

        group: list[str] = []
        for position in positions:
            final, clamped = self.clamp_to_room(position, world_extents)
            name = self.reserve_name(object_type)
            group.append(name)
            self.register_pending(name, object_type, final, world_extents)
            self.results.append(
                ResolvedAction(
                    kind=ResolvedKind.CREATE,
                    source_index=index,
                    name=name,
                    object_type=object_type,
                    mesh_source=mesh_source,
                    position=final,
                    extents=extents,
                    rotation_deg=rotation if (rotation.x or rotation.y or rotation.z) else None,
                    material=action.material,
                    note="clamped to room interior" if clamped else None,
                    mesh=mesh,  # type: ignore[arg-type]
                )
            )
        if action.local_id is not None:
            self.groups[action.local_id] = group

    # -- modification ---------------------------------------------------------

    def resolve_modification(self, index: int, action: Action) -> None:
        kind = action.action_type
        assert action.object_name is not None
        names = self.lookup_names(action.object_name)

        if kind is ActionType.MOVE_OBJECT_OFFSET:
            for name in names:
                self.results.append(
                    ResolvedAction(
                        kind=ResolvedKind.MOVE_BY, source_index=index, name=name, offset=action.offset
                    )
                )
                self._shift_pending(name, action.offset)
        elif kind is ActionType.MOVE_OBJECT_ABSOLUTE:
            name = names[0]
            self.results.append(
                ResolvedAction(
                    kind=ResolvedKind.MOVE_TO, source_index=index, name=name, position=action.position
                )
            )
            self._relocate_pending(name, action.position)
        elif kind is ActionType.MOVE_OBJECT_RELATIVE:
            name = names[0]
            geom = self.geom_for(name)
            extents = geom.size
            reference: _RefGeom | scene_mod.RoomSpec | None = None
            if action.reference_name is not None:
                ref_name = self.lookup_names(action.reference_name)[0]
                reference = self.geom_for(ref_name)
            else:
                reference = self.snapshot.room
            if action.relation is SpatialRelation.NEXT_TO:
                assert isinstance(reference, _RefGeom)
                position = self.place_next_to(extents, reference)
            else:
                assert action.relation is not None
                position = resolve_relation(extents, action.relation, reference, self.gap)
            position, clamped = self.clamp_to_room(position, extents)
            self.results.append(
                ResolvedAction(
                    kind=ResolvedKind.MOVE_TO,
                    source_index=index,
                    name=name,
                    position=position,
                    note="clamped to room interior" if clamped else None,
                )
            )
            self._relocate_pending(name, position)
        elif kind is ActionType.ROTATE_OBJECT:
            assert action.rotation_deg is not None
            for name in names:
                self.results.append(
                    ResolvedAction(
                        kind=ResolvedKind.ROTATE,
                        source_index=index,
                        name=name,
                        rotation_deg=action.rotation_deg,
                    )
                )
                geom = self.geom_for(name)
                self._set_extents_about_center(name, rotated_extents(geom.size, action.rotation_deg))
        elif kind is ActionType.RESIZE_OBJECT:
            assert action.size is not None
            for name in names:
                self.results.append(
                    ResolvedAction(
                        kind=ResolvedKind.RESIZE, source_index=index, name=name, size=action.size
                    )
                )
                self._set_extents_about_center(name, action.size)
        elif kind is ActionType.SCALE_OBJECT:
            assert action.scale_factor is not None
            for name in names:
                self.results.append(
                    ResolvedAction(
                        kind=ResolvedKind.SCALE,
                        source_index=index,
                        name=name,
                        scale_factor=action.scale_factor,
                    )
                )
                geom = self.geom_for(name)
                self._set_extents_about_center(name, geom.size.scaled(action.scale_factor))
        elif kind is ActionType.DELETE_OBJECT:
            for name in names:
                self.results.append(
                    ResolvedAction(kind=ResolvedKind.DELETE, source_index=index, name=name)
                )
                self.pending.pop(name, None)
                self.deleted.add(name)
                self.taken.discard(name)
        elif kind is ActionType.CHANGE_OBJECT_MATERIAL:
            for name in names:
                self.results.append(
                    ResolvedAction(
                        kind=ResolvedKind.CHANGE_MATERIAL,
                        source_index=index,
                        name=name,
                        material=action.material,
                    )
                )
        elif kind is ActionType.RENAME_OBJECT:
            name = names[0]
            assert action.new_name is not None
            self.results.append(
                ResolvedAction(
                    kind=ResolvedKind.RENAME, source_index=index, name=name, new_name=action.new_name
                )
            )
            self._rename_tracking(name, action.new_name)
        elif kind is ActionType.ALIGN_OBJECTS:
            name = names[0]
            assert action.reference_name is not None and action.axis is not None
            geom = self.geom_for(name)
            ref_name = self.lookup_names(action.reference_name)[0]
            ref = self.geom_for(ref_name)
            position = Vec3(geom.center.x, geom.center.y, geom.aabb_min.z)
            if action.axis == "x":
                position = Vec3(ref.center.x, position.y, position.z)
            elif action.axis == "y":
                position = Vec3(position.x, ref.center.y, position.z)
            else:
                position = Vec3(position.x, position.y, ref.center.z - geom.size.z / 2.0)
            self.results.append(
                ResolvedAction(
                    kind=ResolvedKind.MOVE_TO, source_index=index, name=name, position=position
                )
            )
            self._relocate_pending(name, position)
        elif kind is ActionType.DUPLICATE_OBJECT:
            name = names[0]
            geom = self.geom_for(name)
            object_type = self.object_type_of(name)
            new_name = action.new_name or self.reserve_name(object_type)
            if action.new_name is not None:
                self.taken.add(new_name)
            offset = action.offset or Vec3(geom.size.x + self.gap, 0.0, 0.0)
            self.results.append(
                ResolvedAction(
                    kind=ResolvedKind.DUPLICATE,
                    source_index=index,
                    name=name,
                    new_name=new_name,
                    offset=offset,
                )
            )
            origin = Vec3(geom.center.x + offset.x, geom.center.y + offset.y, geom.aabb_min.z + offset.z)
            self.register_pending(new_name, object_type, origin, geom.size)
            if action.local_id is not None:
                self.groups[action.local_id] = [new_name]
        else:  # pragma: no cover - dispatch is exhaustive
            raise ResolveError(f"unhandled action type {kind}")

    def _shift_pending(self, name: str, offset: Vec3 | None) -> None:
        if offset is None:
            return
        geom = self.geom_for(name)
        origin = Vec3(
            geom.center.x + offset.x, geom.center.y + offset.y, geom.aabb_min.z + offset.z
        )
        self.register_pending(name, self.object_type_of(name), origin, geom.size)

    def _relocate_pending(self, name: str, position: Vec3 | None) -> None:
        if position is None:
            return
        geom = self.geom_for(name)
        self.register_pending(name, self.object_type_of(name), position, geom.size)

    def _set_extents_about_center(self, name: str, extents: Vec3) -> None:
        geom = self.geom_for(name)
        origin = Vec3(geom.center.x, geom.center.y, geom.center.z - extents.z / 2.0)
        self.register_pending(name, self.object_type_of(name), origin, extents)

    def _rename_tracking(self, old: str, new: str) -> None:
        if old in self.pending:
            pending = self.pending.pop(old)
            self.pending[new] = _Pending(new, pending.object_type, pending.geom)
        self.taken.discard(old)
        self.taken.add(new)
        for group in self.groups.values():
            for i, name in enumerate(group):
                if name == old:
                    group[i] = new

    def run(self, actions: list[Action]) -> list[ResolvedAction]:
        for index, action in enumerate(actions):
            kind = action.action_type
            if kind is ActionType.SETUP_ROOM:
                self.results.append(
                    ResolvedAction(
                        kind=ResolvedKind.SETUP_ROOM,
                        source_index=index,
                        room_size=action.room_size,
                        wall_thickness=scene_mod.DEFAULT_WALL_THICKNESS,
                    )
                )
                # Later relations see the new room.
                assert action.room_size is not None
                self.snapshot = SceneSnapshot(
                    room=scene_mod.RoomSpec(size=action.room_size),
                    objects=self.snapshot.objects,
                    materials=self.snapshot.materials,
                    directions=self.snapshot.directions,
                    version=self.snapshot.version,
                )
            elif kind is ActionType.CLEAR_SCENE:
                self.results.append(
                    ResolvedAction(kind=ResolvedKind.CLEAR_SCENE, source_index=index)
                )
                self.snapshot = SceneSnapshot(
                    room=None,
                    objects=(),
                    materials=self.snapshot.materials,
                    directions=self.snapshot.directions,
                    version=self.snapshot.version,
                )
                self.taken = set()
                self.pending = {}
                self.groups = {}
            elif kind is ActionType.DUPLICATE_OBJECT or not action.is_creation():
                self.resolve_modification(index, action)
            else:
                self.resolve_creation(index, action)
        return self.results


def resolve(
    snapshot: SceneSnapshot,
    actions: list[Action],
    library: library_mod.AssetLibrary | None = None,
    *,
    gap: float = DEFAULT_GAP,
    grid_spacing: float = DEFAULT_GRID_SPACING,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
) -> list[ResolvedAction]:
    """Resolve abstract actions against a snapshot (see module docstring)."""
    resolver = _Resolver(snapshot, library, gap, grid_spacing, min_similarity)
    return resolver.run(actions)
