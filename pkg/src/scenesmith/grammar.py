"""Deterministic controlled-English command parser (offline backend).

Grammar summary (case-insensitive; clauses joined by "then" or by commas
followed by a verb; numbers are integers or decimals; word numbers
one..twelve are accepted):

    setup a W x D x H room
    create|add|put|place [N] [W x D x H] [material] <type> [from the library]
        [at x, y, z | in the center [of the room] | against the <dir> wall
         | on [top of] <ref> | under <ref> | left of <ref> | right of <ref>
         | in front of <ref> | behind <ref> | next to <ref> | inside <ref>]
    move <name> by dx, dy, dz
    move <name> to x, y, z
    move|put|place <name> <relation phrase>        (existing objects)
    rotate <name> [about|around [the] x|y|z [axis]] by A degrees
    resize <name> to w x d x h | w, d, h
    scale <name> by f
    delete|remove <name>
    change <name>['s] material to <m>
    rename <name> to <new>
    duplicate|copy <name>
    align <name> with <ref> on|along [the] x|y|z [axis]
    clear the scene

``<name>``/``<ref>`` may be an exact scene name ("table.001"), a "#" local
id, "it" (the object created by the previous clause), or a type phrase
("the table") resolved against pending creations first, then the scene
(most recent match wins). Materials are matched against the material
table (with or without the "itu_" prefix) and passed through as written.
"""

from __future__ import annotations

import re

from .actions import Action, ActionType, SpatialRelation
from .errors import ScenesmithError
from .materials import MaterialTable
from .scene import SceneSnapshot
from .types import Vec3


class UnrecognizedClauseError(ScenesmithError):
    code = "unrecognized_clause"

    def __init__(self, clause: str, hint: str = ""):
        detail = f" ({hint})" if hint else ""
        super().__init__(f"cannot parse clause: '{clause}'{detail}", clause=clause)
        self.clause = clause


_NUM = r"-?\d+(?:\.\d+)?"
_WORD_NUMBERS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

_VERBS = (
    "setup", "set up", "create", "add", "put", "place", "make", "build",
    "move", "rotate", "resize", "scale", "delete", "remove", "change",
    "rename", "duplicate", "copy", "clear", "align",
)
_VERB_ALT = "|".join(sorted(_VERBS, key=len, reverse=True)).replace(" ", r"\s+")

_CLAUSE_SPLIT = re.compile(
    rf"\s*(?:,\s*(?:and\s+)?then\s+|\bthen\s+|;\s*|,\s*(?=(?:{_VERB_ALT})\b))",
    re.IGNORECASE,
)

_TRIPLE = rf"({_NUM})\s*(?:x|,)\s*({_NUM})\s*(?:x|,)\s*({_NUM})"

_SETUP = re.compile(
    rf"(?:setup|set\s+up|build|create|make)\s+an?\s+{_TRIPLE}\s*(?:m(?:eters?)?\s+)?room$"
)
_CLEAR = re.compile(r"(?:clear|reset)\s+(?:the\s+)?scene$")
_MOVE_BY = re.compile(rf"move\s+(.+?)\s+by\s+({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})$")
_MOVE_TO = re.compile(rf"move\s+(.+?)\s+to\s+({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})$")
_ROTATE = re.compile(
    rf"rotate\s+(.+?)(?:\s+(?:about|around)\s+(?:the\s+)?([xyz])(?:\s+axis)?)?"
    rf"\s+by\s+({_NUM})\s*(?:degrees?|deg)?$"
)
_RESIZE = re.compile(rf"resize\s+(.+?)\s+to\s+{_TRIPLE}\s*(?:m(?:eters?)?)?$")
_SCALE = re.compile(rf"scale\s+(.+?)\s+by\s+({_NUM})$")
_DELETE = re.compile(r"(?:delete|remove)\s+(.+)$")
_CHANGE_MATERIAL = re.compile(r"change\s+(.+?)(?:'s)?\s+material\s+to\s+([a-z_][a-z0-9_.]*)$")
_RENAME = re.compile(r"rename\s+(.+?)\s+to\s+(.+)$")
_DUPLICATE = re.compile(r"(?:duplicate|copy)\s+(.+)$")
_ALIGN = re.compile(r"align\s+(.+?)\s+with\s+(.+?)\s+(?:on|along)\s+(?:the\s+)?([xyz])(?:\s+axis)?$")
_CREATE_HEAD = re.compile(r"(?:create|add|put|place|make)\s+(.+)$")

_AT_POSITION = re.compile(rf"\s+at\s+({_NUM})\s*,\s*({_NUM})\s*,\s*({_NUM})$")
_CENTER = re.compile(r"\s+(?:in|at|to)\s+the\s+(?:center|middle)(?:\s+of\s+the\s+room)?$")
_AGAINST_WALL = re.compile(r"\s+against\s+the\s+(north|south|east|west)\s+wall$")
_FROM_LIBRARY = re.compile(r"\s+from\s+(?:the\s+)?library$")
_MADE_OF = re.compile(r"\s+(?:made\s+of|out\s+of)\s+([a-z_][a-z0-9_.]*)$")
_SIZE_PHRASE = re.compile(rf"^{_TRIPLE}\s*(?:m(?:eters?)?\s+)?\s*")

_RELATIONS: list[tuple[re.Pattern[str], SpatialRelation]] = [
    (re.compile(r"\s+on\s+top\s+of\s+(.+)$"), SpatialRelation.ON_TOP_OF),
    (re.compile(r"\s+on(?:to)?\s+(.+)$"), SpatialRelation.ON_TOP_OF),
    (re.compile(r"\s+(?:under|below|beneath)\s+(.+)$"), SpatialRelation.UNDER),
    (re.compile(r"\s+(?:to\s+the\s+left\s+of|left\s+of)\s+(.+)$"), SpatialRelation.LEFT_OF),
    (re.compile(r"\s+(?:to\s+the\s+right\s+of|right\s+of)\s+(.+)$"), SpatialRelation.RIGHT_OF),
    (re.compile(r"\s+in\s+front\s+of\s+(.+)$"), SpatialRelation.IN_FRONT_OF),
    (re.compile(r"\s+behind\s+(.+)$"), SpatialRelation.BEHIND),
    (re.compile(r"\s+(?:next\s+to|beside)\s+(.+)$"), SpatialRelation.NEXT_TO),
    (re.compile(r"\s+in(?:side|to)?\s+(.+)$"), SpatialRelation.INSIDE),
]

_ARTICLES = ("the ", "a ", "an ")


def _strip_articles(phrase: str) -> str:
    phrase = phrase.strip()
    for article in _ARTICLES:
        if phrase.startswith(article):
            return phrase[len(article):].strip()
    return phrase


def _material_words(table: MaterialTable) -> set[str]:
    words = set()
    for name in table.names():
        words.add(name)
        words.add(name.removeprefix("itu_"))
    return words


class _Context:
    """Per-command parsing state: pending creations and the id counter."""

    def __init__(self, snapshot: SceneSnapshot, table: MaterialTable):
        self.snapshot = snapshot
        self.material_words = _material_words(table)
        self.pending: list[tuple[str, str]] = []  # (local_id, object_type)
        self.next_local_id = 1

    def allocate_local_id(self, object_type: str) -> str:
        local_id = str(self.next_local_id)
        self.next_local_id += 1
        self.pending.append((local_id, object_type))
        return local_id

    def resolve_target(self, phrase: str, clause: str) -> str:
        """Map a noun phrase to a scene name or '#id' reference."""
        phrase = phrase.strip().rstrip(".")
        stripped = _strip_articles(phrase)
        if not stripped:
            raise UnrecognizedClauseError(clause, "empty object reference")
        if stripped.startswith("#"):
            return stripped
        if stripped == "it":
            if not self.pending:
                raise UnrecognizedClauseError(clause, "'it' has no antecedent in this command")
            return "#" + self.pending[-1][0]
        lowered = stripped.lower()
        # Exact scene names pass through verbatim.
        for obj in self.snapshot.objects:
            if obj.name.lower() == lowered:
                return obj.name
        normalized = re.sub(r"\s+", "_", lowered)
        # Type phrases: latest pending creation first, then latest scene match.
        for local_id, object_type in reversed(self.pending):
            if object_type == normalized:
                return "#" + local_id
        for obj in reversed(self.snapshot.objects):
            if obj.object_type.lower() == normalized:
                return obj.name
            if obj.name.lower().startswith(normalized + "."):
                return obj.name
        return normalized

    def is_definite_or_existing(self, phrase: str) -> bool:
        phrase = phrase.strip()
        if phrase.startswith("the ") or phrase.startswith("#") or phrase == "it":
            return True
        stripped = _strip_articles(phrase).lower()
        if any(obj.name.lower() == stripped for obj in self.snapshot.objects):
            return True
        return False


def _parse_quantity(word: str) -> int | None:
    if word.isdigit():
        return int(word)
    return _WORD_NUMBERS.get(word)


def _singularize(word: str) -> str:
    if word.endswith("ies") and len(word) > 3:
        return word[:-3] + "y"
    if word.endswith(("xes", "ses", "ches", "shes")):
        return word[:-2]
    if word.endswith("ves") and len(word) > 3:
        return word[:-3] + "f"
    if word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    return word


def _parse_create(rest: str, context: _Context, clause: str) -> Action:
    source = None
    if (match := _FROM_LIBRARY.search(rest)) is not None:
        source = "library"
        rest = rest[: match.start()]

    material = None
    if (match := _MADE_OF.search(rest)) is not None:
        candidate = match.group(1)
        if candidate in context.material_words:
            material = candidate
            rest = rest[: match.start()]

    position = None
    relation = None
    reference = None
    if (match := _AT_POSITION.search(rest)) is not None:
        position = Vec3(*(float(g) for g in match.groups()))
        rest = rest[: match.start()]
    elif (match := _CENTER.search(rest)) is not None:
        relation = SpatialRelation.CENTER_OF_ROOM
        rest = rest[: match.start()]
    elif (match := _AGAINST_WALL.search(rest)) is not None:
        relation = SpatialRelation[f"AGAINST_WALL_{match.group(1).upper()}"]
        rest = rest[: match.start()]
    else:
        for pattern, candidate_relation in _RELATIONS:
            if (match := pattern.search(rest)) is not None:
                relation = candidate_relation
                reference = context.resolve_target(match.group(1), clause)
                rest = rest[: match.start()]
                break

    rest = rest.strip()
    quantity = 1
    first, _, tail = rest.partition(" ")
    if first in ("a", "an"):
        rest = tail
    elif (parsed := _parse_quantity(first)) is not None:
        quantity = parsed
        rest = tail
    elif first == "the":
        rest = tail

    size = None
    if (match := _SIZE_PHRASE.match(rest)) is not None:
        size = Vec3(*(float(g) for g in match.groups()))
        rest = rest[match.end():]

    words = rest.split()
    if words and words[0] in context.material_words and len(words) > 1 and material is None:
        material = words[0]
        words = words[1:]
    if not words:
        raise UnrecognizedClauseError(clause, "missing object type")
    if quantity > 1:
        words[-1] = _singularize(words[-1])
    object_type = "_".join(words)

    if relation is not None:
        action_type = ActionType.CREATE_OBJECT_RELATIVE
    elif source == "library":
        action_type = ActionType.CREATE_OBJECT_FROM_LIBRARY
    else:
        action_type = ActionType.CREATE_OBJECT_ABSOLUTE
    local_id = context.allocate_local_id(object_type)
    return Action(
        action_type=action_type,
        object_type=object_type,
        quantity=quantity,
        local_id=local_id,
        relation=relation,
        reference_name=reference,
        position=position,
        size=size,
        material=material,
        source=source if action_type is not ActionType.CREATE_OBJECT_FROM_LIBRARY else None,
    )


def _parse_move_relative(rest: str, context: _Context, clause: str) -> Action | None:
    """move/put/place an EXISTING object somewhere."""
    if (match := _CENTER.search(rest)) is not None:
        target = context.resolve_target(rest[: match.start()], clause)
        return Action(
            action_type=ActionType.MOVE_OBJECT_RELATIVE,
            object_name=target,
            relation=SpatialRelation.CENTER_OF_ROOM,
        )
    if (match := _AGAINST_WALL.search(rest)) is not None:
        target = context.resolve_target(rest[: match.start()], clause)
        return Action(
            action_type=ActionType.MOVE_OBJECT_RELATIVE,
            object_name=target,
            relation=SpatialRelation[f"AGAINST_WALL_{match.group(1).upper()}"],
        )
    if (match := _AT_POSITION.search(rest)) is not None:
        target = context.resolve_target(rest[: match.start()], clause)
        return Action(
            action_type=ActionType.MOVE_OBJECT_ABSOLUTE,
            object_name=target,
            position=Vec3(*(float(g) for g in match.groups())),
        )
    for pattern, relation in _RELATIONS:
        if (match := pattern.search(rest)) is not None:
            target = context.resolve_target(rest[: match.start()], clause)
            reference = context.resolve_target(match.group(1), clause)
            return Action(
                action_type=ActionType.MOVE_OBJECT_RELATIVE,
                object_name=target,
                relation=relation,
                reference_name=reference,
            )
    return None


def _parse_clause(clause: str, context: _Context) -> Action:
    text = clause.strip().rstrip(".").strip()
    lowered = re.sub(r"\s+", " ", text.lower())
    if not lowered:
        raise UnrecognizedClauseError(clause, "empty clause")

    if (match := _SETUP.fullmatch(lowered)) is not None:
        return Action(
            action_type=ActionType.SETUP_ROOM,
            room_size=Vec3(*(float(g) for g in match.groups())),
        )
    if _CLEAR.fullmatch(lowered) is not None:
        return Action(action_type=ActionType.CLEAR_SCENE)
    if (match := _MOVE_BY.fullmatch(lowered)) is not None:
        return Action(
            action_type=ActionType.MOVE_OBJECT_OFFSET,
            object_name=context.resolve_target(match.group(1), clause),
            offset=Vec3(float(match.group(2)), float(match.group(3)), float(match.group(4))),
        )
    if (match := _MOVE_TO.fullmatch(lowered)) is not None:
        return Action(
            action_type=ActionType.MOVE_OBJECT_ABSOLUTE,
            object_name=context.resolve_target(match.group(1), clause),
            position=Vec3(float(match.group(2)), float(match.group(3)), float(match.group(4))),
        )
    if (match := _ROTATE.fullmatch(lowered)) is not None:
        axis = match.group(2) or "z"
        angle = float(match.group(3))
        rotation = {
            "x": Vec3(angle, 0.0, 0.0),
            "y": Vec3(0.0, angle, 0.0),
            "z": Vec3(0.0, 0.0, angle),
        }[axis]
        return Action(
            action_type=ActionType.ROTATE_OBJECT,
            object_name=context.resolve_target(match.group(1), clause),
            rotation_deg=rotation,
        )
    if (match := _RESIZE.fullmatch(lowered)) is not None:
        return Action(
            action_type=ActionType.RESIZE_OBJECT,
            object_name=context.resolve_target(match.group(1), clause),
            size=Vec3(float(match.group(2)), float(match.group(3)), float(match.group(4))),
        )
    if (match := _SCALE.fullmatch(lowered)) is not None:
        return Action(
            action_type=ActionType.SCALE_OBJECT,
            object_name=context.resolve_target(match.group(1), clause),
            scale_factor=float(match.group(2)),
        )
    if (match := _CHANGE_MATERIAL.fullmatch(lowered)) is not None:
        return Action(
            action_type=ActionType.CHANGE_OBJECT_MATERIAL,
            object_name=context.resolve_target(match.group(1), clause),
            material=match.group(2),
        )
    if (match := _RENAME.fullmatch(lowered)) is not None:
        new_name = re.sub(r"\s+", "_", match.group(2).strip())
        return Action(
            action_type=ActionType.RENAME_OBJECT,
            object_name=context.resolve_target(match.group(1), clause),
            new_name=new_name,
        )
    if (match := _ALIGN.fullmatch(lowered)) is not None:
        return Action(
            action_type=ActionType.ALIGN_OBJECTS,
            object_name=context.resolve_target(match.group(1), clause),
            reference_name=context.resolve_target(match.group(2), clause),
            axis=match.group(3),
        )
    if (match := _DUPLICATE.fullmatch(lowered)) is not None:
        target = context.resolve_target(match.group(1), clause)
        object_type = target.split(".")[0] if "." in target else "object"
        local_id = context.allocate_local_id(object_type)
        return Action(
            action_type=ActionType.DUPLICATE_OBJECT, object_name=target, local_id=local_id
        )
    if (match := _DELETE.fullmatch(lowered)) is not None:
        return Action(
            action_type=ActionType.DELETE_OBJECT,
            object_name=context.resolve_target(match.group(1), clause),
        )
    if lowered.startswith("move "):
        moved = _parse_move_relative(lowered[5:], context, clause)
        if moved is not None:
            return moved
        raise UnrecognizedClauseError(clause, "unsupported move phrase")
    if (match := _CREATE_HEAD.fullmatch(lowered)) is not None:
        rest = match.group(1)
        verb = lowered.split()[0]
        # "put"/"place"/"move" acting on an existing object is a move, not a
        # creation: definite article, exact name, "#" id, or "it".
        if verb in ("put", "place", "move"):
            head = rest
            for pattern, _ in _RELATIONS + [(_CENTER, None), (_AGAINST_WALL, None), (_AT_POSITION, None)]:
                if (m2 := pattern.search(rest)) is not None:
                    head = rest[: m2.start()]
                    break
            if context.is_definite_or_existing(head):
                moved = _parse_move_relative(rest, context, clause)
                if moved is not None:
                    return moved
        return _parse_create(rest, context, clause)
    raise UnrecognizedClauseError(clause)


def split_clauses(command: str) -> list[str]:
    parts = [part.strip() for part in _CLAUSE_SPLIT.split(command)]
    return [part for part in parts if part]


def fallback_parse(
    snapshot: SceneSnapshot, command: str, material_table: MaterialTable | None = None
) -> list[Action]:
    """Parse a controlled-English command into actions (see module docstring)."""
    if not command or not command.strip():
        raise UnrecognizedClauseError(command, "empty command")
    context = _Context(snapshot, material_table or MaterialTable())
    actions = []
    for clause in split_clauses(command):
        actions.append(_parse_clause(clause, context))
    return actions
