"""Command-line entry point.

Subcommands: extract (trace -> gaze history), scanpath (history +
transcript -> prompt block), agent-run (prompt block -> turn transcript),
eval (record grid -> report), serve (HTTP service), demo (bundled
end-to-end interaction).  Exit codes: 0 success, 1 domain error, 2 usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .agent import (
    AgentSession,
    Backend,
    HeuristicBackend,
    RemoteChatBackend,
    ReplayBackend,
    build_tool_registry,
)
from .errors import InputError, ParseError
from .evaluation import (
    compare_conditions,
    distributions_csv,
    render_comparison_text,
    render_result_text,
    run_evaluation,
)
from .fixtures import demo_fixture
from .scanpath import SemanticScanpath, Utterance, compose, parse_prompt_text, render_prompt_text
from .scenarios import EvalCondition, builtin_scenario, builtin_scenarios
from .segmentation import GazeHistory, SegmentationParams, build_gaze_history
from .service import ServiceError
from . import session_io


@dataclass
class CliConfig:
    params: SegmentationParams
    condition: EvalCondition
    backend_factory: Callable[[], Backend]
    actions_enabled: bool = False
    parallelism: int = 1


PARAM_FLAGS = (
    ("angular_threshold_deg", "--angular-threshold-deg", 8.0, "fixation angular threshold (degrees)"),
    ("min_fixation_ms", "--min-fixation-ms", 100.0, "minimum fixation duration (ms)"),
    ("sample_spacing_mm", "--sample-spacing-mm", 5.0, "distance between AABB surface sample points (mm)"),
    ("merge_window_ms", "--merge-window-ms", 160.0, "temporal merging window (ms)"),
    (
        "saccade_speed_threshold_deg_per_s",
        "--saccade-speed-threshold",
        120.0,
        "head speed above which frames are suppressed (deg/s)",
    ),
)


def add_param_flags(parser: argparse.ArgumentParser) -> None:
    for dest, flag, default, help_text in PARAM_FLAGS:
        parser.add_argument(flag, dest=dest, type=float, default=default, help=help_text)
    parser.add_argument(
        "--params", type=Path, default=None, help="JSON file overriding the parameter flags"
    )


def params_from_args(args: argparse.Namespace) -> SegmentationParams:
    kwargs = {dest: getattr(args, dest) for dest, _, _, _ in PARAM_FLAGS}
    if getattr(args, "params", None):
        with open(args.params, encoding="utf-8") as fh:
            overrides = json.load(fh)
        unknown = set(overrides) - set(kwargs)
        if unknown:
            raise InputError(f"unknown parameter(s) in {args.params}: {sorted(unknown)}")
        kwargs.update(overrides)
    return SegmentationParams(**kwargs)


def add_scene_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--scene", type=Path, help="scene JSON file")
    group.add_argument(
        "--scenario", choices=sorted(builtin_scenarios()), help="builtin scenario"
    )


def scene_from_args(args: argparse.Namespace):
    if args.scenario:
        scenario = builtin_scenario(args.scenario)
        return scenario.scene, scenario.contents
    bundle = session_io.load_scene_file(args.scene)
    return bundle.scene, bundle.contents


def add_backend_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend",
        default="heuristic",
        help="heuristic (default), replay:SCRIPT.json, or remote",
    )


def backend_factory_from_args(args: argparse.Namespace) -> Callable[[], Backend]:
    spec = args.backend
    if spec == "heuristic":
        return lambda: HeuristicBackend()
    if spec.startswith("replay:"):
        path = spec.split(":", 1)[1]
        with open(path, encoding="utf-8") as fh:
            script = json.load(fh)
        return lambda: ReplayBackend.from_json(script)
    if spec == "remote":
        backend = RemoteChatBackend.from_env()
        return lambda: backend
    raise InputError(f"unknown backend {spec!r} (use heuristic, replay:FILE, or remote)")


def parse_window(text: str) -> tuple[float, float]:
    try:
        start, end = text.split(":")
        return float(start), float(end)
    except ValueError as exc:
        raise InputError(f"bad window {text!r}, expected START_MS:END_MS") from exc


def render_timeline_text(history: GazeHistory, width: int = 48) -> str:
    """Per-segment dwell bars over the turn window."""
    span = history.window_end_ms - history.window_start_ms
    lines = [
        f"gaze history  [{history.window_start_ms:.0f} ms .. {history.window_end_ms:.0f} ms]"
        f"  ({len(history.segments)} segment(s))"
    ]
    if not history.segments:
        lines.append("  (none)")
        return "\n".join(lines)
    label_width = max(len(", ".join(s.object_ids)) for s in history.segments)
    for seg in history.segments:
        if span > 0:
            lo = int(width * (seg.start_ms - history.window_start_ms) / span)
            hi = max(lo + 1, int(width * (seg.end_ms - history.window_start_ms) / span))
            hi = min(hi, width)
        else:
            lo, hi = 0, width
        bar = "." * lo + "#" * (hi - lo) + "." * (width - hi)
        label = ", ".join(seg.object_ids)
        lines.append(
            f"  {label:<{label_width}} |{bar}| {seg.duration_ms / 1000.0:.2f}s @ {seg.start_ms:.0f} ms"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_extract(args: argparse.Namespace) -> int:
    params = params_from_args(args)
    scene, _ = scene_from_args(args)
    trace = session_io.load_trace(args.trace)
    for warning in trace.warnings:
        print(f"warning: {json.dumps(warning)}", file=sys.stderr)
    if args.window:
        window = parse_window(args.window)
    elif trace.samples:
        window = (trace.samples[0].timestamp_ms, trace.samples[-1].timestamp_ms)
    else:
        window = (0.0, 0.0)
    history = build_gaze_history(trace.samples, scene, window, params)
    print(render_timeline_text(history))
    if args.out:
        session_io.save_history(args.out, history)
    return 0


def _load_transcript(path: Path, default_window: tuple[float, float]) -> Utterance:
    if str(path).endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: bad transcript JSON: {exc}") from exc
        words = doc.get("words")
        window = tuple(doc["turn_window"]) if "turn_window" in doc else default_window
        return Utterance(
            text=doc["text"],
            turn_window=window,
            words=tuple((w[0], float(w[1]), float(w[2])) for w in words) if words else None,
        )
    text = path.read_text(encoding="utf-8").strip()
    return Utterance(text=text, turn_window=default_window)


def cmd_scanpath(args: argparse.Namespace) -> int:
    history = session_io.load_history(args.history)
    utterance = _load_transcript(
        args.transcript, (history.window_start_ms, history.window_end_ms)
    )
    block = render_prompt_text(compose(utterance, history))
    print(block)
    if args.out:
        Path(args.out).write_text(block + "\n", encoding="utf-8")
    return 0


def _run_one_turn(
    sp: SemanticScanpath, scene, contents, config: CliConfig
) -> AgentSession:
    registry = build_tool_registry(config.condition, actions_enabled=config.actions_enabled)
    session = AgentSession(
        scene, registry, config.backend_factory(), initial_contents=contents
    )
    session.run_turn(sp)
    return session


def cmd_agent_run(args: argparse.Namespace) -> int:
    scene, contents = scene_from_args(args)
    sp = parse_prompt_text(Path(args.scanpath).read_text(encoding="utf-8"))
    config = CliConfig(
        params=SegmentationParams(),
        condition=EvalCondition(scene_query_enabled=not args.no_scene_query),
        backend_factory=backend_factory_from_args(args),
        actions_enabled=args.actions,
    )
    session = _run_one_turn(sp, scene, contents, config)
    transcript = session.turns[-1].to_dict()
    output = json.dumps(transcript, indent=2, sort_keys=True)
    print(output)
    if args.out:
        Path(args.out).write_text(output + "\n", encoding="utf-8")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    grid = session_io.load_turn_records(args.records)
    backend_factory = backend_factory_from_args(args)
    conditions = (
        [EvalCondition(True), EvalCondition(False)]
        if args.compare
        else [EvalCondition(scene_query_enabled=args.condition != "no-scene-query")]
    )
    results = []
    for condition in conditions:
        result = run_evaluation(
            grid,
            condition,
            backend_factory,
            parallelism=args.parallelism,
            discard_missed_target=args.discard_missed_target,
        )
        results.append(result)
        print(render_result_text(result))
        print()
    report: dict = {"results": [r.to_dict(include_turns=args.include_turns) for r in results]}
    if len(results) == 2:
        comparisons = compare_conditions(results[0], results[1])
        print(render_comparison_text(comparisons))
        report["comparisons"] = [c.to_dict() for c in comparisons]
    if args.out:
        Path(args.out).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    if args.csv:
        Path(args.csv).write_text(distributions_csv(results[0]), encoding="utf-8")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import socket

    import uvicorn

    from .server import create_app

    try:
        probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, args.port))
        probe.close()
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_demo(args: argparse.Namespace) -> int:
    params = params_from_args(args)
    fixture = demo_fixture(args.scenario, args.task, params=params)
    sp = fixture.scanpath(params)
    config = CliConfig(
        params=params,
        condition=EvalCondition(scene_query_enabled=not args.no_scene_query),
        backend_factory=backend_factory_from_args(args),
        actions_enabled=not args.no_actions,
    )
    print(f"demo: {args.scenario}/{args.task}")
    print(render_prompt_text(sp))
    print("--- agent turn ---")
    session = _run_one_turn(sp, fixture.scenario.scene, fixture.scenario.contents, config)
    turn = session.turns[-1]
    for call, result in turn.steps:
        rendered_args = ", ".join(f"{k}={v!r}" for k, v in sorted(call.arguments.items()))
        print(f"{call.call_id} {call.name}({rendered_args}) -> {result.text}")
    print(f"status: {turn.status}")
    required = ", ".join(turn.required_objects or ()) if turn.required_objects is not None else "(none)"
    print(f"required_objects: {required}")
    print("simulated scene: " + json.dumps(session.state.snapshot(), sort_keys=True))
    if args.out:
        Path(args.out).write_text(
            json.dumps(turn.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semscan",
        description="Semantic scanpath toolkit: gaze histories, prompts, agent, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="compute a gaze history from a head-pose trace")
    p.add_argument("--trace", type=Path, required=True)
    add_scene_flags(p)
    p.add_argument("--window", help="turn window START_MS:END_MS (default: full trace)")
    p.add_argument("--out", type=Path, help="write gaze history JSON here")
    add_param_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("scanpath", help="render the canonical prompt block")
    p.add_argument("--history", type=Path, required=True)
    p.add_argument("--transcript", type=Path, required=True, help="utterance .txt or .json")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_scanpath)

    p = sub.add_parser("agent-run", help="run one agent turn over a prompt block")
    p.add_argument("--scanpath", type=Path, required=True)
    add_scene_flags(p)
    p.add_argument("--no-scene-query", action="store_true", help="ablated condition")
    p.add_argument("--actions", action="store_true", help="enable action tools")
    add_backend_flag(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_agent_run)

    p = sub.add_parser("eval", help="run the combinatorial offline evaluation")
    p.add_argument("--records", type=Path, required=True, help="directory of turn-record files")
    p.add_argument(
        "--condition", choices=["full", "no-scene-query"], default="full"
    )
    p.add_argument("--compare", action="store_true", help="run both conditions and compare")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--discard-missed-target", action="store_true")
    p.add_argument("--include-turns", action="store_true", help="per-turn verdicts in the JSON report")
    add_backend_flag(p)
    p.add_argument("--out", type=Path, help="write the JSON report here")
    p.add_argument("--csv", type=Path, help="write gaze-distribution CSV here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("demo", help="replay a bundled synthetic interaction")
    p.add_argument("--scenario", choices=sorted(builtin_scenarios()), default="breakfast")
    p.add_argument("--task", choices=["T1", "T2", "T3"], default="T1")
    p.add_argument("--no-scene-query", action="store_true")
    p.add_argument("--no-actions", action="store_true")
    p.add_argument("--out", type=Path, help="also write the turn transcript JSON here")
    add_backend_flag(p)
    add_param_flags(p)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParseError, ServiceError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
