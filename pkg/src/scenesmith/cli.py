"""Command-line entry points.

Exit codes: 0 ok, 2 usage (click), 3 parse/validation, 4 io, 5 backend.
"""

from __future__ import annotations

import json
import sys
from importlib import resources as importlib_resources
from pathlib import Path

import click

from . import dataset as dataset_mod
from . import exporter, resolver, scene as scene_mod
from .actions import ActionType, SchemaError, ValidationError
from .clients import BackendUnavailableError, FixtureMissError, RecordReplayClient
from .config import load_config
from .errors import ScenesmithError
from .pipeline import ChatBackend, GrammarBackend, ParseFailure, parse_command

EXIT_PARSE = 3
EXIT_IO = 4
EXIT_BACKEND = 5


def _exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (BackendUnavailableError, FixtureMissError)):
        return EXIT_BACKEND
    if isinstance(
        exc,
        (
            OSError,
            exporter.IoFailureError,
            scene_mod.CorruptDocumentError,
            scene_mod.UnsupportedSchemaVersionError,
        ),
    ):
        return EXIT_IO
    if isinstance(exc, (ParseFailure, SchemaError, ValidationError, resolver.ResolveError)):
        return EXIT_PARSE
    return EXIT_PARSE


def _fail(exc: BaseException) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(_exit_code_for(exc))


def _make_backend(name: str, config_path: str | None):
    if name == "fallback":
        return GrammarBackend()
    config = load_config(config_path)
    client = RecordReplayClient(
        kind="chat",
        url=config.chat_url,
        mode=config.mode,
        fixtures_dir=config.fixtures_dir,
        timeout=config.timeout,
        model=config.chat_model,
    )
    return ChatBackend(client)


def _run_commands(commands, backend, keep_going: bool) -> tuple[scene_mod.Scene, bool]:
    world = scene_mod.Scene()
    any_failure = False
    for line_number, command in commands:
        try:
            snapshot = scene_mod.snapshot(world)
            actions = parse_command(backend, snapshot, command)
            resolved = resolver.resolve(snapshot, actions, None)
            results = scene_mod.apply_actions(world, resolved)
        except ScenesmithError as exc:
            any_failure = True
            click.echo(f"line {line_number}: FAIL {command!r}: {exc}", err=True)
            if not keep_going:
                sys.exit(_exit_code_for(exc))
            continue
        created = [name for result in results for name in result.created_names]
        failed = [result for result in results if not result.ok]
        status = "ok" if not failed else f"partial ({failed[0].message})"
        summary = f" created {', '.join(created)}" if created else ""
        click.echo(f"line {line_number}: {status}{summary}")
        if failed:
            any_failure = True
            if not keep_going:
                sys.exit(EXIT_PARSE)
    return world, any_failure


def _read_script(path: Path) -> list[tuple[int, str]]:
    commands = []
    for line_number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        commands.append((line_number, line))
    return commands


@click.group()
def main() -> None:
    """Chat-driven 3D scene authoring and export."""


@main.command()
@click.option("--port", type=int, default=None, help="Override the configured port.")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--mode", type=click.Choice(["live", "record", "replay"]), default=None)
def serve(port: int | None, config_path: str | None, mode: str | None) -> None:
    """Start the HTTP service."""
    from .service import run_server

    try:
        config = load_config(config_path)
        if port is not None:
            config.port = port
        if mode is not None:
            config.mode = mode
        run_server(config)
    except ScenesmithError as exc:
        _fail(exc)


@main.command(name="exec")
@click.option("--script", "script_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--backend", type=click.Choice(["fallback", "external"]), default="fallback")
@click.option("--keep-going", is_flag=True, help="Continue after failed commands.")
@click.option("--save", "save_path", type=click.Path(path_type=Path), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
def exec_script(script_path: Path, backend: str, keep_going: bool, save_path: Path | None, config_path):
    """Run newline-separated chat commands against an in-process scene."""
    try:
        parser_backend = _make_backend(backend, config_path)
        world, any_failure = _run_commands(_read_script(script_path), parser_backend, keep_going)
        if save_path is not None:
            save_path.parent.mkdir(parents=True, exist_ok=True)
            save_path.write_text(scene_mod.save_scene_text(world), encoding="utf-8")
            click.echo(f"scene saved to {save_path}")
    except ScenesmithError as exc:
        _fail(exc)
        return
    if any_failure and keep_going:
        sys.exit(EXIT_PARSE)


@main.command()
@click.option("--scene", "scene_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
def export(scene_path: Path, out_dir: Path) -> None:
    """Export a persisted scene to PLY meshes plus a scene XML."""
    try:
        world = scene_mod.load_scene_text(scene_path.read_text(encoding="utf-8"))
        bundle = exporter.export_scene(world, out_dir)
    except (ScenesmithError, OSError) as exc:
        _fail(exc)
        return
    click.echo(f"wrote {out_dir}/scene.xml and {len(bundle.mesh_files)} mesh files")


@main.group()
def dataset() -> None:
    """Synthetic dataset generation, validation and metrics."""


@dataset.command(name="gen")
@click.option("--n", "n_samples", type=int, required=True)
@click.option("--scene-complexity", type=click.Choice(dataset_mod.SCENE_COMPLEXITIES), default="some")
@click.option(
    "--command-complexity", type=click.Choice(dataset_mod.COMMAND_COMPLEXITIES), default="medium"
)
@click.option("--seed", type=int, default=0)
@click.option(
    "--required-action",
    type=click.Choice([t.value for t in ActionType]),
    default=None,
)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
def dataset_gen(n_samples, scene_complexity, command_complexity, seed, required_action, out_path, config_path):
    """Generate raw samples through the configured generator backend."""
    try:
        config = load_config(config_path)
        generator = RecordReplayClient(
            kind="chat",
            url=config.chat_url,
            mode=config.mode,
            fixtures_dir=config.fixtures_dir,
            timeout=config.timeout,
            model=config.chat_model,
        )
        spec = dataset_mod.GenerationSpec(
            n_samples=n_samples,
            scene_complexity=scene_complexity,
            command_complexity=command_complexity,
            required_action=ActionType(required_action) if required_action else None,
            seed=seed,
        )
        raw = dataset_mod.generate(spec, generator)
        dataset_mod.write_jsonl(out_path, (sample.to_jsonable() for sample in raw))
    except (ScenesmithError, OSError) as exc:
        _fail(exc)
        return
    click.echo(f"wrote {len(raw)} raw samples to {out_path}")


@dataset.command(name="validate")
@click.option("--raw", "raw_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--report", "report_path", type=click.Path(path_type=Path), default=None)
def dataset_validate(raw_path: Path, out_path: Path, report_path: Path | None):
    """Run the multi-stage validator over raw samples (offline executor check)."""
    try:
        raw = [dataset_mod.RawSample.from_jsonable(r) for r in dataset_mod.read_jsonl(raw_path)]
        accepted, report = dataset_mod.run_validation(raw)
        dataset_mod.write_jsonl(out_path, (sample.to_jsonable() for sample in accepted))
        if report_path is not None:
            report_path.write_text(
                json.dumps(report.to_jsonable(), indent=2, sort_keys=True), encoding="utf-8"
            )
    except (ScenesmithError, OSError) as exc:
        _fail(exc)
        return
    click.echo(report.as_table())
    click.echo(f"accepted {len(accepted)} of {report.n_raw} samples -> {out_path}")


@dataset.command(name="metrics")
@click.option("--report", "report_path", type=click.Path(exists=True, path_type=Path), required=True)
def dataset_metrics(report_path: Path) -> None:
    """Print the metrics table from a saved validation report."""
    try:
        data = json.loads(report_path.read_text(encoding="utf-8"))
        counts = data["counts"]
        report = dataset_mod.MetricsReport(
            n_raw=counts["raw"],
            n_json=counts["json_valid"],
            n_format=counts["format_valid"],
            n_unique=counts["unique"],
            n_matched=counts["meaning_matched"],
            n_validator_errors=counts.get("validator_errors", 0),
        )
    except (OSError, ValueError, KeyError) as exc:
        _fail(exc if isinstance(exc, OSError) else ScenesmithError(str(exc)))
        return
    click.echo(report.as_table())


@main.command(name="eval")
@click.option("--pred", "pred_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--gold", "gold_path", type=click.Path(exists=True, path_type=Path), required=True)
def eval_command(pred_path: Path, gold_path: Path) -> None:
    """Strict field-by-field accuracy of predictions against gold action lists."""

    def load(path: Path) -> list[str]:
        entries = []
        for record in dataset_mod.read_jsonl(path):
            actions = record["actions"] if isinstance(record, dict) and "actions" in record else record
            entries.append(json.dumps(actions))
        return entries

    try:
        report = dataset_mod.eval_accuracy(load(pred_path), load(gold_path))
    except (ScenesmithError, OSError, ValueError, KeyError) as exc:
        _fail(exc if isinstance(exc, (ScenesmithError, OSError)) else ScenesmithError(str(exc)))
        return
    click.echo(report.as_text())


_DEMO_SCRIPTS = {
    "nist-lobby": "demo_nist_lobby.txt",
    "wireless-lab": "demo_wireless_lab.txt",
}


@main.command()
@click.argument("name", type=click.Choice(sorted(_DEMO_SCRIPTS)))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--save", "save_path", type=click.Path(path_type=Path), default=None)
def demo(name: str, out_dir: Path, save_path: Path | None) -> None:
    """Build a bundled demo scene with the offline parser and export it."""
    script = (
        importlib_resources.files("scenesmith.resources")
        .joinpath(_DEMO_SCRIPTS[name])
        .read_text(encoding="utf-8")
    )
    commands = [
        (i, line.strip())
        for i, line in enumerate(script.splitlines(), start=1)
        if line.strip() and not line.strip().startswith("#")
    ]
    try:
        world, any_failure = _run_commands(commands, GrammarBackend(), keep_going=False)
        if save_path is not None:
            save_path.parent.mkdir(parents=True, exist_ok=True)
            save_path.write_text(scene_mod.save_scene_text(world), encoding="utf-8")
        bundle = exporter.export_scene(world, out_dir)
    except (ScenesmithError, OSError) as exc:
        _fail(exc)
        return
    if any_failure:
        sys.exit(EXIT_PARSE)
    click.echo(
        f"demo '{name}': {len(world.objects)} objects, "
        f"{len(bundle.mesh_files)} meshes exported to {out_dir}"
    )


if __name__ == "__main__":  # pragma: no cover
    main()
