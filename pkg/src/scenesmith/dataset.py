"""Synthetic-dataset factory and evaluation metrics.

Generation prompts a chat backend for batches of (command, existing
objects, actions) samples with controlled diversity; validation runs four
stages — JSON syntax, rule-based format fixing, dedup, semantic check —
and reports the per-stage rates plus the overall usability rate (the
product of the four conditional rates by construction).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from . import resolver as resolver_mod
from . import scene as scene_mod
from .actions import (
    Action,
    ActionType,
    SchemaError,
    ValidationError,
    canonicalize,
    parse_action_list,
    resequence_local_ids,
    serialize_action_list,
    validate_reference_closure,
)
from .errors import ScenesmithError
from .library import primitive_for
from .pipeline import SCHEMA_RULES, extract_json_block, NoJsonFoundError
from .types import Vec3

DEFAULT_SAMPLES_PER_TRIAL = 5

SCENE_COMPLEXITIES = ("none", "few", "some", "many")
COMMAND_COMPLEXITIES = ("simple", "medium", "complex")

_SCENE_COMPLEXITY_TEXT = {
    "none": "an empty scene with no objects",
    "few": "a scene containing 1-3 objects",
    "some": "a scene containing 4-8 objects",
    "many": "a scene containing 9-20 objects",
}


class DatasetError(ScenesmithError):
    code = "dataset"


class LengthMismatchError(DatasetError):
    code = "length_mismatch"


@dataclass(frozen=True)
class GenerationSpec:
    n_samples: int
    scene_complexity: str = "some"
    command_complexity: str = "medium"
    required_action: ActionType | None = None
    seed: int = 0
    samples_per_trial: int = DEFAULT_SAMPLES_PER_TRIAL

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise DatasetError("n_samples must be >= 1")
        if self.scene_complexity not in SCENE_COMPLEXITIES:
            raise DatasetError(f"scene_complexity must be one of {SCENE_COMPLEXITIES}")
        if self.command_complexity not in COMMAND_COMPLEXITIES:
            raise DatasetError(f"command_complexity must be one of {COMMAND_COMPLEXITIES}")
        if self.samples_per_trial < 1:
            raise DatasetError("samples_per_trial must be >= 1")


@dataclass
class RawSample:
    raw_text: str
    provenance: dict

    def to_jsonable(self) -> dict:
        return {"raw_text": self.raw_text, "provenance": self.provenance}

    @classmethod
    def from_jsonable(cls, data: dict) -> "RawSample":
        return cls(raw_text=data["raw_text"], provenance=dict(data.get("provenance", {})))


@dataclass
class DatasetSample:
    command: str
    existing_objects: list[dict]
    gold_actions: list[Action]
    provenance: dict = field(default_factory=dict)

    def object_names(self) -> set[str]:
        return {entry["name"] for entry in self.existing_objects}

    def dedup_key(self) -> str:
        return self.command + "\x00" + canonicalize(self.gold_actions)

    def to_jsonable(self) -> dict:
        return {
            "command": self.command,
            "existing_objects": self.existing_objects,
            "actions": json.loads(serialize_action_list(self.gold_actions)),
            "provenance": self.provenance,
        }


def build_generation_prompt(spec: GenerationSpec, trial: int, required_action: ActionType) -> str:
    """Prompt for one generation trial (deterministic given its arguments)."""
    return "\n".join(
        [
            "You generate training data for a 3D scene-editing command parser.",
            f"Produce exactly {spec.samples_per_trial} distinct samples as one JSON array.",
            "Each sample is an object with keys:",
            '  "command": a natural language scene-editing command,',
            '  "existing_objects": names of objects already in the scene,',
            '  "actions": the JSON action array the command translates to.',
            "",
            SCHEMA_RULES,
            f"Scene complexity: {_SCENE_COMPLEXITY_TEXT[spec.scene_complexity]}.",
            f"Command complexity: {spec.command_complexity}.",
            f"At least one sample must use the action type '{required_action.value}'.",
            f"Trial: {trial}.",
            "Reply with only the JSON array in a JSON code block.",
        ]
    )


class GeneratorBackend(Protocol):
    def exchange(self, prompt: str) -> str: ...


def generate(spec: GenerationSpec, generator: GeneratorBackend) -> list[RawSample]:
    """Run generation trials; each trial asks for ``samples_per_trial`` samples.

    The raw-sample count per surviving trial is exactly ``samples_per_trial``
    (short or unparseable replies are padded with invalid placeholders) so
    downstream rates use the trials x samples denominator. Trials whose
    backend call fails are dropped; the rest are returned.
    """
    rng = random.Random(spec.seed)
    trials = math.ceil(spec.n_samples / spec.samples_per_trial)
    raw: list[RawSample] = []
    for trial in range(trials):
        required = spec.required_action or rng.choice(list(ActionType))
        prompt = build_generation_prompt(spec, trial, required)
        try:
            reply = generator.exchange(prompt)
        except ScenesmithError:
            continue
        raw.extend(_split_reply(reply, spec, trial))
    return raw


def _split_reply(reply: str, spec: GenerationSpec, trial: int) -> list[RawSample]:
    generator_id = getattr(spec, "generator_id", "chat")
    try:
        block = extract_json_block(reply)
    except NoJsonFoundError:
        block = reply
    try:
        data = json.loads(block)
    except (ValueError, RecursionError):
        data = None
    samples: list[RawSample] = []
    if isinstance(data, list):
        elements = data[: spec.samples_per_trial]
        for index, element in enumerate(elements):
            samples.append(
                RawSample(
                    raw_text=json.dumps(element, sort_keys=True),
                    provenance={"generator_id": generator_id, "trial": trial, "index": index},
                )
            )
    elif data is not None:
        samples.append(
            RawSample(
                raw_text=json.dumps(data, sort_keys=True),
                provenance={"generator_id": generator_id, "trial": trial, "index": 0},
            )
        )
    while len(samples) < spec.samples_per_trial:
        samples.append(
            RawSample(
                raw_text=reply if data is None else "",
                provenance={
                    "generator_id": generator_id,
                    "trial": trial,
                    "index": len(samples),
                    "missing": True,
                },
            )
        )
    return samples


# --------------------------------------------------------------------------
# Validation stages
# --------------------------------------------------------------------------


def stage_json(raw: RawSample) -> dict | None:
    """Stage 1: the sample text parses as JSON and carries a JSON actions list."""
    try:
        data = json.loads(raw.raw_text)
    except (ValueError, RecursionError):
        return None
    if not isinstance(data, dict):
        return None
    if not isinstance(data.get("actions"), list):
        return None
    return data


def _normalize_existing(entries) -> list[dict] | None:
    normalized = []
    for entry in entries:
        if isinstance(entry, str) and entry:
            normalized.append({"name": entry})
        elif isinstance(entry, dict) and isinstance(entry.get("name"), str) and entry["name"]:
            normalized.append(dict(entry))
        else:
            return None
    return normalized


def stage_format(parsed: dict, provenance: dict | None = None) -> DatasetSample | None:
    """Stage 2: rule-based fix + schema check.

    Inconsistent local-id sequencing is repaired (a repaired sample counts
    as format-valid); field names, action types, value types and reference
    closure against the declared scene objects must hold.
    """
    command = parsed.get("command")
    if not isinstance(command, str) or not command.strip():
        return None
    existing = _normalize_existing(parsed.get("existing_objects", []))
    if existing is None:
        return None
    try:
        actions = parse_action_list(json.dumps(parsed["actions"]), strict_local_ids=False)
        actions, changed = resequence_local_ids(actions)
        validate_reference_closure(actions, {entry["name"] for entry in existing})
    except (SchemaError, ValidationError):
        return None
    provenance = dict(provenance or {})
    if changed:
        provenance["resequenced"] = True
    return DatasetSample(
        command=command, existing_objects=existing, gold_actions=actions, provenance=provenance
    )


def stage_dedup(samples: list[DatasetSample]) -> list[DatasetSample]:
    """Stage 3: drop duplicates by canonical (command + actions) key; stable."""
    seen: set[str] = set()
    unique: list[DatasetSample] = []
    for sample in samples:
        key = sample.dedup_key()
        if key in seen:
            continue
        seen.add(key)
        unique.append(sample)
    return unique


class SemanticValidator(Protocol):
    def judge(self, sample: DatasetSample) -> tuple[bool, str]: ...


class ChatSemanticValidator:
    """Stage-4 validator backed by a reasoning chat service.

    Protocol: the first reply line must be PASS or FAIL; anything else is a
    validator error and the sample is kept aside for manual review instead
    of being silently dropped.
    """

    def __init__(self, client):
        self.client = client

    def build_prompt(self, sample: DatasetSample) -> str:
        return "\n".join(
            [
                "You check whether a JSON action array logically interprets a",
                "scene-editing command according to the schema rules.",
                "Reply PASS or FAIL on the first line, then a one-line reason.",
                "",
                f"Command: {sample.command}",
                "Existing objects: "
                + json.dumps([entry["name"] for entry in sample.existing_objects]),
                "Actions: " + serialize_action_list(sample.gold_actions),
            ]
        )

    def judge(self, sample: DatasetSample) -> tuple[bool, str]:
        reply = self.client.exchange(self.build_prompt(sample))
        first_line = reply.strip().splitlines()[0].strip().upper() if reply.strip() else ""
        if first_line.startswith("PASS"):
            return True, reply.strip()
        if first_line.startswith("FAIL"):
            return False, reply.strip()
        raise DatasetError(f"validator protocol violation: {reply[:80]!r}")


class ExecutionSemanticValidator:
    """Deterministic offline stage-4 validator: the actions must actually
    execute against a scene holding the declared objects."""

    room_size = Vec3(12.0, 12.0, 4.0)

    def judge(self, sample: DatasetSample) -> tuple[bool, str]:
        world = scene_mod.Scene()
        scene_mod.setup_room(world, self.room_size)
        spacing = 1.5
        for index, entry in enumerate(sample.existing_objects):
            name = entry["name"]
            object_type = str(entry.get("object_type") or name.split(".")[0] or "object")
            _, extents = primitive_for(object_type)
            column, row = index % 7, index // 7
            position = Vec3(-4.5 + column * spacing, -4.5 + row * spacing, 0.0)
            world.objects[name] = scene_mod.SceneObject(
                name=name,
                object_type=object_type,
                base_mesh=scene_mod.library.make_primitive("box", Vec3(1.0, 1.0, 1.0)),
                affine=scene_mod.geometry.translation(
                    (position.x, position.y, position.z + extents.z / 2.0)
                )
                @ scene_mod.geometry.scaling(extents.to_tuple()),
                material=scene_mod.DEFAULT_MATERIAL,
                mesh_ref="primitive:box",
            )
        snapshot = scene_mod.snapshot(world)
        try:
            resolved = resolver_mod.resolve(snapshot, sample.gold_actions)
            results = scene_mod.apply_actions(world, resolved)
        except ScenesmithError as exc:
            return False, f"resolution failed: {exc}"
        failed = [r for r in results if not r.ok]
        if failed:
            return False, f"execution failed at action {failed[0].source_index}: {failed[0].message}"
        return True, "executed cleanly"


@dataclass
class MetricsReport:
    """Stage survivor counts and the five conditional rates.

    Each rate conditions on the previous stage's survivors, so the overall
    usability rate equals the product of the four stage rates (to floating
    point); stages with zero-count denominators report a rate of 0 and are
    listed in ``zero_denominator_stages``.
    """

    n_raw: int
    n_json: int
    n_format: int
    n_unique: int
    n_matched: int
    n_validator_errors: int = 0
    _rates: tuple[float, float, float, float] | None = None

    @staticmethod
    def _ratio(numerator: int, denominator: int) -> float:
        return numerator / denominator if denominator else 0.0

    @property
    def json_validity_rate(self) -> float:
        return self._rates[0] if self._rates else self._ratio(self.n_json, self.n_raw)

    @property
    def format_validity_rate(self) -> float:
        return self._rates[1] if self._rates else self._ratio(self.n_format, self.n_json)

    @property
    def unique_sample_rate(self) -> float:
        return self._rates[2] if self._rates else self._ratio(self.n_unique, self.n_format)

    @property
    def meaning_matched_rate(self) -> float:
        return self._rates[3] if self._rates else self._ratio(self.n_matched, self.n_unique)

    @property
    def overall_usability_rate(self) -> float:
        if self._rates:
            rate = 1.0
            for value in self._rates:
                rate *= value
            return rate
        return self._ratio(self.n_matched, self.n_raw)

    @property
    def zero_denominator_stages(self) -> list[str]:
        stages = []
        if self.n_raw == 0:
            stages.append("json")
        if self.n_json == 0:
            stages.append("format")
        if self.n_format == 0:
            stages.append("unique")
        if self.n_unique == 0:
            stages.append("meaning")
        return stages

    @classmethod
    def from_rates(
        cls, json_rate: float, format_rate: float, unique_rate: float, meaning_rate: float
    ) -> "MetricsReport":
        """Report built from recorded stage rates (overall = their product)."""
        return cls(
            n_raw=0,
            n_json=0,
            n_format=0,
            n_unique=0,
            n_matched=0,
            _rates=(json_rate, format_rate, unique_rate, meaning_rate),
        )

    def to_jsonable(self) -> dict:
        return {
            "counts": {
                "raw": self.n_raw,
                "json_valid": self.n_json,
                "format_valid": self.n_format,
                "unique": self.n_unique,
                "meaning_matched": self.n_matched,
                "validator_errors": self.n_validator_errors,
            },
            "rates": {
                "json_validity": self.json_validity_rate,
                "format_validity": self.format_validity_rate,
                "unique_sample": self.unique_sample_rate,
                "meaning_matched": self.meaning_matched_rate,
                "overall_usability": self.overall_usability_rate,
            },
            "zero_denominator_stages": self.zero_denominator_stages,
        }

    def as_table(self) -> str:
        """Aligned text table, one row, rates as one-decimal percentages."""
        headers = ("JSON", "Format", "Unique", "Meaning", "Overall")
        values = (
            self.json_validity_rate,
            self.format_validity_rate,
            self.unique_sample_rate,
            self.meaning_matched_rate,
            self.overall_usability_rate,
        )
        header = " | ".join(f"{h:>8}" for h in headers)
        row = " | ".join(f"{100.0 * v:>7.1f}%" for v in values)
        return header + "\n" + row


def run_validation(
    raw: list[RawSample], validator: SemanticValidator | None = None
) -> tuple[list[DatasetSample], MetricsReport]:
    """Run stages 1-4; returns accepted samples plus the metrics report.

    Samples on which the validator itself errors are excluded from the
    accepted set but tracked in ``n_validator_errors`` for manual review.
    """
    validator = validator or ExecutionSemanticValidator()
    parsed: list[tuple[dict, dict]] = []
    for sample in raw:
        data = stage_json(sample)
        if data is not None:
            parsed.append((data, sample.provenance))
    formatted = [
        result for data, provenance in parsed if (result := stage_format(data, provenance))
    ]
    unique = stage_dedup(formatted)
    accepted: list[DatasetSample] = []
    validator_errors = 0
    for sample in unique:
        try:
            passed, reason = validator.judge(sample)
        except ScenesmithError:
            validator_errors += 1
            sample.provenance["validator_error"] = True
            continue
        if passed:
            sample.provenance["stage_flags"] = ["json", "format", "unique", "meaning"]
            accepted.append(sample)
        else:
            sample.provenance["semantic_fail"] = reason
    report = MetricsReport(
        n_raw=len(raw),
        n_json=len(parsed),
        n_format=len(formatted),
        n_unique=len(unique),
        n_matched=len(accepted),
        n_validator_errors=validator_errors,
    )
    return accepted, report


# --------------------------------------------------------------------------
# Accuracy evaluation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalReport:
    n: int
    json_rate: float
    accuracy: float

    def to_jsonable(self) -> dict:
        return {"n": self.n, "json_rate": self.json_rate, "accuracy": self.accuracy}

    def as_text(self) -> str:
        return (
            f"samples: {self.n}\n"
            f"JSON:     {100.0 * self.json_rate:.2f}\n"
            f"Accuracy: {100.0 * self.accuracy:.2f}"
        )


def _as_actions(entry: str | Sequence[Action]) -> list[Action] | None:
    if isinstance(entry, str):
        try:
            return parse_action_list(entry)
        except SchemaError:
            return None
    return list(entry)


def eval_accuracy(
    pred: Sequence[str | Sequence[Action]], gold: Sequence[str | Sequence[Action]]
) -> EvalReport:
    """Strict field-by-field accuracy.

    A prediction counts as correct only when its canonical form equals the
    gold canonical form exactly (case-sensitive strings, canonical number
    formatting). ``json_rate`` is the fraction of predictions parsing as
    valid action lists; raw-string gold entries must all parse.
    """
    if len(pred) != len(gold):
        raise LengthMismatchError(f"pred has {len(pred)} entries, gold has {len(gold)}")
    n_json = 0
    n_match = 0
    for pred_entry, gold_entry in zip(pred, gold):
        gold_actions = _as_actions(gold_entry)
        if gold_actions is None:
            raise DatasetError("gold corpus contains an invalid action list")
        pred_actions = _as_actions(pred_entry)
        if pred_actions is None:
            continue
        n_json += 1
        if canonicalize(pred_actions) == canonicalize(gold_actions):
            n_match += 1
    total = len(gold)
    return EvalReport(
        n=total,
        json_rate=n_json / total if total else 0.0,
        accuracy=n_match / total if total else 0.0,
    )


# --------------------------------------------------------------------------
# JSONL IO
# --------------------------------------------------------------------------


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
