"""Command parsing pipeline: prompt construction, backend invocation, JSON
extraction and validation.

Backends are interchangeable: an external chat-completion service (live or
replayed from fixtures) and the offline grammar parser satisfy the same
contract (scene snapshot + command in, validated actions out). Every
failure is typed and carries the pipeline stage at which it occurred.
"""

from __future__ import annotations

import json
import re
from importlib import resources as importlib_resources
from typing import Protocol

from . import grammar
from .actions import (
    Action,
    ActionType,
    SchemaError,
    ValidationError,
    parse_action_list,
    resequence_local_ids,
    validate_reference_closure,
)
from .clients import RecordReplayClient
from .errors import ScenesmithError
from .scene import SceneSnapshot

ROLE_DIRECTIVE = (
    "You are an AI assistant for a 3D scene editor. Convert the user's natural"
    " language command into a JSON array of action objects that edit the scene."
    " Reply with nothing but the actions enclosed in a JSON code block."
)

SCHEMA_RULES = """\
Rules for the JSON output:
- The output is a JSON array; each element is one action object executed in order.
- "action_type" must be one of: setup_room, create_object_absolute,
  create_object_relative, create_object_from_library, move_object_absolute,
  move_object_offset, move_object_relative, rotate_object, resize_object,
  scale_object, delete_object, change_object_material, duplicate_object,
  rename_object, align_objects, clear_scene.
- Creation actions require "object_type", "quantity" (positive integer) and
  "local_id"; local_ids count "1", "2", ... in order of appearance.
- Later actions may reference a created object as "#<local_id>"
  (e.g. "#1"); otherwise "object_name"/"reference_name" must be an existing
  scene object name.
- create_object_relative requires "relation": one of on_top_of, under,
  left_of, right_of, in_front_of, behind, next_to, inside, center_of_room,
  against_wall_north, against_wall_south, against_wall_east,
  against_wall_west. All but center_of_room and against_wall_* also need
  "reference_name".
- setup_room requires "room_size" {x, y, z} in meters.
- Vectors are objects {"x": ..., "y": ..., "z": ...}; lengths are meters,
  angles degrees. Do not invent fields the schema does not define.
"""


class ParseFailure(ScenesmithError):
    code = "parse_failure"

    def __init__(self, stage: str, message: str, raw_reply: str | None = None):
        super().__init__(message, stage=stage)
        self.stage = stage
        self.raw_reply = raw_reply


class NoJsonFoundError(ScenesmithError):
    code = "no_json_found"


def load_few_shot_examples() -> list[dict]:
    """The versioned few-shot examples bundled with the package."""
    text = (
        importlib_resources.files("scenesmith.resources")
        .joinpath("few_shot_examples.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)["examples"]


def _render_object_line(obj) -> str:
    return (
        f"- {obj.name} ({obj.object_type}, {obj.material}, size "
        f"{obj.size.x:.2f} x {obj.size.y:.2f} x {obj.size.z:.2f} m, center "
        f"({obj.geometric_center.x:.2f}, {obj.geometric_center.y:.2f}, "
        f"{obj.geometric_center.z:.2f}))"
    )


def build_prompt(snapshot: SceneSnapshot, command: str) -> str:
    """Deterministic prompt: role, scene context, schema rules, examples, command."""
    if not command.strip():
        raise ParseFailure("backend", "command must be non-empty")
    lines = [ROLE_DIRECTIVE, "", "Scene context:"]
    if snapshot.room is not None:
        size = snapshot.room.size
        lines.append(f"- Room: {size.x:.2f} x {size.y:.2f} x {size.z:.2f} m (x, y, z)")
    else:
        lines.append("- Room: none set up yet")
    if snapshot.objects:
        lines.append("- Objects:")
        lines.extend("  " + _render_object_line(obj) for obj in snapshot.objects)
    else:
        lines.append("- Objects: the scene is empty")
    lines.append("- Valid materials: " + ", ".join(snapshot.materials))
    lines.append(
        "- Directions: north (+y), south (-y), east (+x), west (-x); z is up,"
        " the floor is at z = 0"
    )
    lines.extend(["", SCHEMA_RULES, "Examples:"])
    for example in load_few_shot_examples():
        lines.append("")
        lines.append(f"Command: {example['command']}")
        lines.append("Actions:")
        lines.append("```json")
        lines.append(json.dumps(example["actions"], indent=2))
        lines.append("```")
    lines.extend(
        [
            "",
            f"Command: {command}",
            "Reply with the actions enclosed in a JSON code block.",
        ]
    )
    return "\n".join(lines)


_FENCE = re.compile(r"```[A-Za-z0-9_+-]*[ \t]*\r?\n(.*?)```", re.DOTALL)


def extract_json_block(llm_reply: str) -> str:
    """Contents of the first fenced code block, else the longest parseable
    bracket-balanced substring starting with '['."""
    fence = _FENCE.search(llm_reply)
    if fence is not None:
        return fence.group(1).strip()

    best: str | None = None
    for start, char in enumerate(llm_reply):
        if char != "[":
            continue
        depth = 0
        in_string = False
        escaped = False
        for end in range(start, len(llm_reply)):
            ch = llm_reply[end]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch in "[{":
                depth += 1
            elif ch in "]}":
                depth -= 1
                if depth == 0:
                    candidate = llm_reply[start : end + 1]
                    if best is None or len(candidate) > len(best):
                        try:
                            json.loads(candidate)
                        except ValueError:
                            pass
                        else:
                            best = candidate
                    break
                if depth < 0:
                    break
    if best is None:
        raise NoJsonFoundError("no JSON code block or array found in the reply")
    return best


class ParserBackend(Protocol):
    """Scene snapshot + command in, schema-parsed actions out."""

    name: str

    def raw_actions(self, snapshot: SceneSnapshot, command: str) -> list[Action]: ...


class GrammarBackend:
    """Offline deterministic backend built on the controlled-English grammar."""

    name = "fallback_grammar"

    def raw_actions(self, snapshot: SceneSnapshot, command: str) -> list[Action]:
        try:
            return grammar.fallback_parse(snapshot, command)
        except grammar.UnrecognizedClauseError as exc:
            raise ParseFailure("grammar", str(exc)) from exc


class ChatBackend:
    """Backend that prompts a chat-completion service (live, record or replay)."""

    name = "external_chat_service"

    def __init__(self, client: RecordReplayClient):
        self.client = client

    def raw_actions(self, snapshot: SceneSnapshot, command: str) -> list[Action]:
        prompt = build_prompt(snapshot, command)
        try:
            reply = self.client.exchange(prompt)
        except ScenesmithError as exc:
            raise ParseFailure("backend", str(exc)) from exc
        try:
            block = extract_json_block(reply)
        except NoJsonFoundError as exc:
            raise ParseFailure("extract", str(exc), raw_reply=reply) from exc
        try:
            return parse_action_list(block, strict_local_ids=False)
        except SchemaError as exc:
            raise ParseFailure("schema", str(exc), raw_reply=reply) from exc


def parse_command(
    backend: ParserBackend, snapshot: SceneSnapshot, command: str
) -> list[Action]:
    """Full pipeline: backend -> resequence local ids -> reference closure.

    Never mutates the snapshot. Raises :class:`ParseFailure` carrying the
    stage name ("backend", "extract", "schema", "grammar", "resequence",
    "closure").
    """
    if not command.strip():
        raise ParseFailure("backend", "command must be non-empty")
    actions = backend.raw_actions(snapshot, command)
    try:
        actions, _ = resequence_local_ids(actions)
    except SchemaError as exc:
        raise ParseFailure("resequence", str(exc)) from exc
    try:
        validate_reference_closure(actions, snapshot.names())
    except (ValidationError, SchemaError) as exc:
        raise ParseFailure("closure", str(exc)) from exc
    return actions
