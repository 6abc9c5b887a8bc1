"""Concrete (fully resolved) scene operations and per-action results.

A :class:`ResolvedAction` contains no "#" references, no spatial relations
and no descriptions: object names are concrete, positions are absolute,
quantity has been expanded to one action per instance, and the mesh source
is pinned. This is the only vocabulary the scene engine executes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dataclass_fields
from enum import Enum
from typing import TYPE_CHECKING, Any

from .types import Vec3

if TYPE_CHECKING:  # pragma: no cover
    from .geometry import Mesh


class ResolvedKind(str, Enum):
    SETUP_ROOM = "setup_room"
    CLEAR_SCENE = "clear_scene"
    CREATE = "create"
    MOVE_TO = "move_to"
    MOVE_BY = "move_by"
    ROTATE = "rotate"
    RESIZE = "resize"
    SCALE = "scale"
    DELETE = "delete"
    CHANGE_MATERIAL = "change_material"
    RENAME = "rename"
    DUPLICATE = "duplicate"


@dataclass(frozen=True)
class ResolvedAction:
    kind: ResolvedKind
    source_index: int
    name: str | None = None
    object_type: str | None = None
    mesh_source: str | None = None  # e.g. "primitive:box", "library:<id>", "generated"
    position: Vec3 | None = None
    extents: Vec3 | None = None
    rotation_deg: Vec3 | None = None
    offset: Vec3 | None = None
    size: Vec3 | None = None
    scale_factor: float | None = None
    material: str | None = None
    new_name: str | None = None
    room_size: Vec3 | None = None
    wall_thickness: float | None = None
    note: str | None = None
    mesh: "Mesh | None" = field(default=None, repr=False, compare=False)

    def to_jsonable(self) -> dict[str, Any]:
        result: dict[str, Any] = {"kind": self.kind.value, "source_index": self.source_index}
        for f in dataclass_fields(self):
            if f.name in ("kind", "source_index", "mesh"):
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            result[f.name] = value.to_json() if isinstance(value, Vec3) else value
        return result


@dataclass
class ActionResult:
    index: int
    source_index: int
    status: str  # "ok" | "error"
    created_names: list[str] = field(default_factory=list)
    error_code: str | None = None
    message: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_jsonable(self) -> dict[str, Any]:
        result: dict[str, Any] = {
            "index": self.index,
            "source_index": self.source_index,
            "status": self.status,
        }
        if self.created_names:
            result["created_names"] = list(self.created_names)
        if self.error_code:
            result["error_code"] = self.error_code
        if self.message:
            result["message"] = self.message
        return result
