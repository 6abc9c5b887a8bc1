"""Structured action vocabulary: the JSON wire format and its validation.

An action list is a JSON array of objects, each tagged by ``action_type``.
The vocabulary is a closed set of 16 types split into creation actions
(which carry a ``local_id`` so later actions can reference the new object
via a ``"#"`` prefix), modification actions (which target an existing
``object_name``), and room setup.

All functions here are pure; parsing is total and raises only
:class:`SchemaError` subclasses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields as dataclass_fields, replace
from enum import Enum
from typing import Any, Iterable

from .errors import ScenesmithError
from .types import Vec3


class ActionType(str, Enum):
    SETUP_ROOM = "setup_room"
    CREATE_OBJECT_ABSOLUTE = "create_object_absolute"
    CREATE_OBJECT_RELATIVE = "create_object_relative"
    CREATE_OBJECT_FROM_LIBRARY = "create_object_from_library"
    MOVE_OBJECT_ABSOLUTE = "move_object_absolute"
    MOVE_OBJECT_OFFSET = "move_object_offset"
    MOVE_OBJECT_RELATIVE = "move_object_relative"
    ROTATE_OBJECT = "rotate_object"
    RESIZE_OBJECT = "resize_object"
    SCALE_OBJECT = "scale_object"
    DELETE_OBJECT = "delete_object"
    CHANGE_OBJECT_MATERIAL = "change_object_material"
    DUPLICATE_OBJECT = "duplicate_object"
    RENAME_OBJECT = "rename_object"
    ALIGN_OBJECTS = "align_objects"
    CLEAR_SCENE = "clear_scene"


class SpatialRelation(str, Enum):
    ON_TOP_OF = "on_top_of"
    UNDER = "under"
    LEFT_OF = "left_of"
    RIGHT_OF = "right_of"
    IN_FRONT_OF = "in_front_of"
    BEHIND = "behind"
    NEXT_TO = "next_to"
    INSIDE = "inside"
    CENTER_OF_ROOM = "center_of_room"
    AGAINST_WALL_NORTH = "against_wall_north"
    AGAINST_WALL_SOUTH = "against_wall_south"
    AGAINST_WALL_EAST = "against_wall_east"
    AGAINST_WALL_WEST = "against_wall_west"


#: Relations that are anchored to the room rather than another object.
RELATIONS_WITHOUT_REFERENCE = frozenset(
    {
        SpatialRelation.CENTER_OF_ROOM,
        SpatialRelation.AGAINST_WALL_NORTH,
        SpatialRelation.AGAINST_WALL_SOUTH,
        SpatialRelation.AGAINST_WALL_EAST,
        SpatialRelation.AGAINST_WALL_WEST,
    }
)

#: Action types that create objects and therefore carry a local_id.
CREATION_TYPES = frozenset(
    {
        ActionType.CREATE_OBJECT_ABSOLUTE,
        ActionType.CREATE_OBJECT_RELATIVE,
        ActionType.CREATE_OBJECT_FROM_LIBRARY,
        ActionType.DUPLICATE_OBJECT,
    }
)

AXES = ("x", "y", "z")
SOURCES = ("primitive", "library", "generate")


class SchemaError(ScenesmithError):
    code = "schema"


class JsonSyntaxError(SchemaError):
    code = "json_syntax"


class NotAnArrayError(SchemaError):
    code = "not_an_array"


class UnknownActionTypeError(SchemaError):
    code = "unknown_action_type"


class MissingFieldError(SchemaError):
    code = "missing_field"

    def __init__(self, field: str, index: int | None = None):
        at = "" if index is None else f" (action {index})"
        super().__init__(f"missing required field '{field}'{at}", field=field, index=index)
        self.field = field


class WrongTypeError(SchemaError):
    code = "wrong_type"

    def __init__(self, field: str, message: str, index: int | None = None):
        super().__init__(message, field=field, index=index)
        self.field = field


class UnexpectedFieldError(SchemaError):
    code = "unexpected_field"

    def __init__(self, field: str, action_type: str, index: int | None = None):
        super().__init__(
            f"field '{field}' is not allowed for action_type '{action_type}'",
            field=field,
            index=index,
        )
        self.field = field


class BadLocalIdSequenceError(SchemaError):
    code = "bad_local_id_sequence"


class DanglingReferenceError(SchemaError):
    code = "dangling_reference"

    def __init__(self, local_id: str, index: int | None = None):
        super().__init__(
            f"reference '#{local_id}' does not resolve to an earlier local_id",
            local_id=local_id,
            index=index,
        )
        self.local_id = local_id


class UnmappableReferenceError(SchemaError):
    code = "unmappable_reference"

    def __init__(self, local_id: str):
        super().__init__(
            f"reference '#{local_id}' names a local_id no creation action carries",
            local_id=local_id,
        )
        self.local_id = local_id


class ValidationError(ScenesmithError):
    code = "validation"


class UnknownSceneObjectError(ValidationError):
    code = "unknown_scene_object"

    def __init__(self, name: str, index: int | None = None):
        super().__init__(f"object '{name}' does not exist in the scene", name=name, index=index)
        self.name = name


@dataclass(frozen=True)
class Action:
    """One scene operation. Only fields applicable to ``action_type`` are set."""

    action_type: ActionType
    object_type: str | None = None
    quantity: int | None = None
    local_id: str | None = None
    object_name: str | None = None
    relation: SpatialRelation | None = None
    reference_name: str | None = None
    position: Vec3 | None = None
    offset: Vec3 | None = None
    rotation_deg: Vec3 | None = None
    size: Vec3 | None = None
    scale_factor: float | None = None
    material: str | None = None
    room_size: Vec3 | None = None
    new_name: str | None = None
    axis: str | None = None
    source: str | None = None

    def is_creation(self) -> bool:
        return self.action_type in CREATION_TYPES


_VEC3_FIELDS = {"position", "offset", "rotation_deg", "size", "room_size"}
_STRING_FIELDS = {
    "object_type",
    "local_id",
    "object_name",
    "reference_name",
    "material",
    "new_name",
}

# Required / optional field matrix per action type. Everything not listed
# (beyond action_type itself) is rejected; hallucinated extra fields are a
# primary failure mode this schema exists to catch.
_FIELD_MATRIX: dict[ActionType, tuple[frozenset[str], frozenset[str]]] = {
    ActionType.SETUP_ROOM: (frozenset({"room_size"}), frozenset()),
    ActionType.CREATE_OBJECT_ABSOLUTE: (
        frozenset({"object_type", "quantity", "local_id"}),
        frozenset({"position", "size", "rotation_deg", "material", "source"}),
    ),
    ActionType.CREATE_OBJECT_RELATIVE: (
        frozenset({"object_type", "quantity", "local_id", "relation"}),
        frozenset({"reference_name", "size", "rotation_deg", "material", "source"}),
    ),
    ActionType.CREATE_OBJECT_FROM_LIBRARY: (
        frozenset({"object_type", "quantity", "local_id"}),
        frozenset(
            {"relation", "reference_name", "position", "size", "rotation_deg", "material", "source"}
        ),
    ),
    ActionType.MOVE_OBJECT_ABSOLUTE: (frozenset({"object_name", "position"}), frozenset()),
    ActionType.MOVE_OBJECT_OFFSET: (frozenset({"object_name", "offset"}), frozenset()),
    ActionType.MOVE_OBJECT_RELATIVE: (
        frozenset({"object_name", "relation"}),
        frozenset({"reference_name"}),
    ),
    ActionType.ROTATE_OBJECT: (frozenset({"object_name", "rotation_deg"}), frozenset()),
    ActionType.RESIZE_OBJECT: (frozenset({"object_name", "size"}), frozenset()),
    ActionType.SCALE_OBJECT: (frozenset({"object_name", "scale_factor"}), frozenset()),
    ActionType.DELETE_OBJECT: (frozenset({"object_name"}), frozenset()),
    ActionType.CHANGE_OBJECT_MATERIAL: (frozenset({"object_name", "material"}), frozenset()),
    ActionType.DUPLICATE_OBJECT: (
        frozenset({"object_name", "local_id"}),
        frozenset({"new_name", "offset"}),
    ),
    ActionType.RENAME_OBJECT: (frozenset({"object_name", "new_name"}), frozenset()),
    ActionType.ALIGN_OBJECTS: (
        frozenset({"object_name", "reference_name", "axis"}),
        frozenset(),
    ),
    ActionType.CLEAR_SCENE: (frozenset(), frozenset()),
}

_ALL_FIELD_NAMES = {f.name for f in dataclass_fields(Action)} - {"action_type"}


def _parse_number(field: str, value: Any, index: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WrongTypeError(field, f"'{field}' must be a number, got {type(value).__name__}", index)
    result = float(value)
    if result != result or result in (float("inf"), float("-inf")):
        raise WrongTypeError(field, f"'{field}' must be finite", index)
    return result


def _parse_vec3(field: str, value: Any, index: int) -> Vec3:
    if not isinstance(value, dict):
        raise WrongTypeError(field, f"'{field}' must be an object with x, y, z", index)
    extra = set(value) - {"x", "y", "z"}
    if extra:
        raise WrongTypeError(field, f"'{field}' has unexpected keys {sorted(extra)}", index)
    components = []
    for axis in AXES:
        if axis not in value:
            raise WrongTypeError(field, f"'{field}' is missing component '{axis}'", index)
        components.append(_parse_number(f"{field}.{axis}", value[axis], index))
    return Vec3(*components)


def _parse_string(field: str, value: Any, index: int) -> str:
    if not isinstance(value, str) or not value:
        raise WrongTypeError(field, f"'{field}' must be a non-empty string", index)
    return value


def parse_action_object(raw: Any, index: int = 0) -> Action:
    """Validate and convert one JSON object into an :class:`Action`."""
    if not isinstance(raw, dict):
        raise WrongTypeError("action", f"action {index} must be a JSON object", index)
    if "action_type" not in raw:
        raise MissingFieldError("action_type", index)
    type_value = raw["action_type"]
    if not isinstance(type_value, str):
        raise WrongTypeError("action_type", "'action_type' must be a string", index)
    try:
        action_type = ActionType(type_value)
    except ValueError:
        raise UnknownActionTypeError(
            f"unknown action_type '{type_value}'", action_type=type_value, index=index
        ) from None

    required, optional = _FIELD_MATRIX[action_type]
    allowed = required | optional
    values: dict[str, Any] = {"action_type": action_type}
    for key, value in raw.items():
        if key == "action_type":
            continue
        if key not in _ALL_FIELD_NAMES:
            raise UnexpectedFieldError(key, action_type.value, index)
        if key not in allowed:
            raise UnexpectedFieldError(key, action_type.value, index)
        if key in _VEC3_FIELDS:
            values[key] = _parse_vec3(key, value, index)
        elif key in _STRING_FIELDS:
            values[key] = _parse_string(key, value, index)
        elif key == "quantity":
            if isinstance(value, bool) or not isinstance(value, int):
                raise WrongTypeError("quantity", "'quantity' must be an integer", index)
            if value < 1:
                raise WrongTypeError("quantity", "'quantity' must be >= 1", index)
            values[key] = value
        elif key == "scale_factor":
            factor = _parse_number("scale_factor", value, index)
            if factor <= 0:
                raise WrongTypeError("scale_factor", "'scale_factor' must be > 0", index)
            values[key] = factor
        elif key == "relation":
            text = _parse_string("relation", value, index)
            try:
                values[key] = SpatialRelation(text)
            except ValueError:
                raise WrongTypeError("relation", f"unknown relation '{text}'", index) from None
        elif key == "axis":
            text = _parse_string("axis", value, index)
            if text not in AXES:
                raise WrongTypeError("axis", f"'axis' must be one of {AXES}", index)
            values[key] = text
        elif key == "source":
            text = _parse_string("source", value, index)
            if text not in SOURCES:
                raise WrongTypeError("source", f"'source' must be one of {SOURCES}", index)
            values[key] = text
        else:  # pragma: no cover - matrix and field sets are in sync
            raise UnexpectedFieldError(key, action_type.value, index)

    for field in required:
        if field not in values:
            raise MissingFieldError(field, index)

    action = Action(**values)
    if action.local_id is not None and not action.local_id.isdigit():
        raise WrongTypeError("local_id", "'local_id' must be a string of decimal digits", index)
    if action.relation is not None:
        needs_ref = action.relation not in RELATIONS_WITHOUT_REFERENCE
        if needs_ref and action.reference_name is None:
            raise MissingFieldError("reference_name", index)
        if not needs_ref and action.reference_name is not None:
            raise UnexpectedFieldError("reference_name", action_type.value, index)
    return action


def _check_local_id_sequence(actions: list[Action]) -> None:
    expected = 1
    for i, action in enumerate(actions):
        if action.is_creation():
            if action.local_id != str(expected):
                raise BadLocalIdSequenceError(
                    f"local_id '{action.local_id}' at action {i}: expected '{expected}'",
                    index=i,
                )
            expected += 1


def _references_of(action: Action) -> Iterable[tuple[str, str]]:
    for field in ("object_name", "reference_name"):
        value = getattr(action, field)
        if value is not None and value.startswith("#"):
            yield field, value[1:]


def _check_references_within_list(actions: list[Action]) -> None:
    declared: set[str] = set()
    for i, action in enumerate(actions):
        for _, local_id in _references_of(action):
            if local_id not in declared:
                raise DanglingReferenceError(local_id, index=i)
        if action.is_creation() and action.local_id is not None:
            declared.add(action.local_id)


def parse_action_list(json_text: str, *, strict_local_ids: bool = True) -> list[Action]:
    """Parse a JSON array of action objects.

    With ``strict_local_ids`` (the default) the creation actions must carry
    the consecutive local_id sequence "1", "2", ... and every ``"#"``
    reference must point at an earlier local_id. Relaxed mode skips both
    checks so that :func:`resequence_local_ids` can repair generator output.
    """
    try:
        data = json.loads(json_text)
    except (ValueError, RecursionError) as exc:
        raise JsonSyntaxError(f"invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise NotAnArrayError("top-level JSON value must be an array")
    actions = [parse_action_object(element, index=i) for i, element in enumerate(data)]
    if strict_local_ids:
        _check_local_id_sequence(actions)
        _check_references_within_list(actions)
    return actions


def action_to_jsonable(action: Action) -> dict[str, Any]:
    result: dict[str, Any] = {"action_type": action.action_type.value}
    for field in dataclass_fields(Action):
        if field.name == "action_type":
            continue
        value = getattr(action, field.name)
        if value is None:
            continue
        if isinstance(value, Vec3):
            result[field.name] = value.to_json()
        elif isinstance(value, Enum):
            result[field.name] = value.value
        else:
            result[field.name] = value
    return result


def serialize_action_list(actions: Iterable[Action]) -> str:
    return json.dumps([action_to_jsonable(a) for a in actions], sort_keys=True)


def canonicalize(actions: Iterable[Action]) -> str:
    """Deterministic canonical string used as a dedup key.

    Keys are sorted, whitespace is dropped, and floats use Python's
    shortest-roundtrip repr, so equal action lists map to equal strings.
    """
    return json.dumps(
        [action_to_jsonable(a) for a in actions],
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=True,
    )


def resequence_local_ids(actions: list[Action]) -> tuple[list[Action], bool]:
    """Renumber creation local_ids to "1", "2", ... and rewrite "#" references.

    References are rewritten against the nearest earlier declaration of the
    old id; a forward reference maps to the first later declaration. A "#"
    reference whose id no creation action carries at all raises
    :class:`UnmappableReferenceError`. Idempotent.
    """
    creations = [i for i, a in enumerate(actions) if a.is_creation()]
    new_id_at = {index: str(n + 1) for n, index in enumerate(creations)}
    old_ids = [actions[i].local_id for i in creations]

    def map_reference(old: str, position: int) -> str:
        # Nearest earlier declaration wins; fall back to the first later one.
        for n in range(len(creations) - 1, -1, -1):
            if creations[n] < position and old_ids[n] == old:
                return new_id_at[creations[n]]
        for n, index in enumerate(creations):
            if old_ids[n] == old:
                return new_id_at[index]
        raise UnmappableReferenceError(old)

    changed = False
    result: list[Action] = []
    for i, action in enumerate(actions):
        updates: dict[str, Any] = {}
        for field in ("object_name", "reference_name"):
            value = getattr(action, field)
            if value is not None and value.startswith("#"):
                new_ref = "#" + map_reference(value[1:], i)
                if new_ref != value:
                    updates[field] = new_ref
        if action.is_creation() and action.local_id != new_id_at[i]:
            updates["local_id"] = new_id_at[i]
        if updates:
            changed = True
            action = replace(action, **updates)
        result.append(action)
    return result, changed


def validate_reference_closure(actions: list[Action], scene_names: set[str]) -> None:
    """Check that every object reference resolves.

    Non-"#" names must exist in ``scene_names``; "#" references must point
    at a local_id declared by an earlier action in the list.
    """
    declared: set[str] = set()
    for i, action in enumerate(actions):
        for field in ("object_name", "reference_name"):
            value = getattr(action, field)
            if value is None:
                continue
            if value.startswith("#"):
                if value[1:] not in declared:
                    raise DanglingReferenceError(value[1:], index=i)
            elif value not in scene_names:
                raise UnknownSceneObjectError(value, index=i)
        if action.is_creation() and action.local_id is not None:
            declared.add(action.local_id)
