"""Tool specs, dispatch registry, and the simulated scene the action tools
mutate in place of a physical robot.

Four tool classes: query (scene inspection), diagnostic (reasoning and
required_objects), expression (speak), action (move / hand over / pour).
Domain-level failures (unknown object, already held) come back as error
result text fed to the backend; they are not runtime faults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..errors import InputError
from ..geometry import Scene

ON_TABLE = "on_table"

TOOL_CLASSES = ("query", "diagnostic", "expression", "action")


@dataclass(frozen=True)
class ToolParam:
    name: str
    type: str
    description: str


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    parameters: tuple[ToolParam, ...]
    tool_class: str

    def __post_init__(self):
        if self.tool_class not in TOOL_CLASSES:
            raise InputError(f"unknown tool class {self.tool_class!r}")


@dataclass(frozen=True)
class ToolCall:
    call_id: str
    name: str
    arguments: dict[str, str]
    seq: int  # logical step index within the turn (not wall clock)


@dataclass(frozen=True)
class ToolResult:
    call_id: str
    text: str
    seq: int


class SimulatedSceneState:
    """Holder map and container contents for the action tools.

    Objects never appear or disappear; pouring moves content labels from
    one container to another and never changes the object set.
    """

    def __init__(self, scene: Scene, contents: dict[str, list[str]] | None = None):
        self.scene = scene
        self.holders: dict[str, tuple[str, str | None]] = {
            o.id: (ON_TABLE, None) for o in scene.objects if o.kind != "robot"
        }
        self.contents: dict[str, list[str]] = {
            o.id: list((contents or {}).get(o.id, [])) for o in scene.objects if o.kind != "robot"
        }

    def location(self, object_id: str) -> tuple[str, str | None]:
        return self.holders[object_id]

    def _check_known(self, object_id: str) -> str | None:
        if object_id not in self.holders:
            return f"Error: unknown object '{object_id}'."
        return None

    def move_to_person(self, object_id: str, person: str) -> str:
        err = self._check_known(object_id)
        if err:
            return err
        state, holder = self.holders[object_id]
        if state != ON_TABLE:
            return f"Error: '{object_id}' is not on the table (held by {holder})."
        self.holders[object_id] = ("held_by", person)
        return f"Moved '{object_id}' to {person}."

    def hand_over_to_person(self, object_id: str, person: str) -> str:
        err = self._check_known(object_id)
        if err:
            return err
        state, holder = self.holders[object_id]
        if state != ON_TABLE:
            return f"Error: '{object_id}' is not on the table (held by {holder})."
        self.holders[object_id] = ("held_by", person)
        return f"Handed '{object_id}' over to {person}."

    def pour_into(self, source_id: str, target_id: str) -> str:
        err = self._check_known(source_id) or self._check_known(target_id)
        if err:
            return err
        if source_id == target_id:
            return f"Error: source and target container are both '{source_id}'."
        moved = self.contents[source_id]
        self.contents[target_id].extend(moved)
        self.contents[source_id] = []
        self.holders[source_id] = (ON_TABLE, None)
        what = ", ".join(moved) if moved else "nothing"
        return f"Poured {what} from '{source_id}' into '{target_id}'; '{source_id}' is back on the table."

    def snapshot(self) -> dict:
        return {
            "holders": {
                oid: {"location": state, "person": holder}
                for oid, (state, holder) in sorted(self.holders.items())
            },
            "contents": {oid: list(c) for oid, c in sorted(self.contents.items())},
        }


class TurnAccumulator:
    """Mutable collector the diagnostic/expression tools write into."""

    def __init__(self):
        self.reasoning_parts: list[str] = []
        self.required_objects: tuple[str, ...] | None = None
        self.spoken: list[tuple[str, str]] = []
        self.action_calls: list[tuple[str, dict[str, str]]] = []


@dataclass
class ToolContext:
    state: SimulatedSceneState
    turn: TurnAccumulator
    on_speak: Callable[[str, str], None] | None = None


Handler = Callable[[ToolContext, dict[str, str]], str]


@dataclass
class ToolRegistry:
    _tools: dict[str, tuple[ToolSpec, Handler]] = field(default_factory=dict)

    def register(self, spec: ToolSpec, handler: Handler) -> None:
        if spec.name in self._tools:
            raise InputError(f"tool {spec.name!r} already registered")
        self._tools[spec.name] = (spec, handler)

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def names(self) -> list[str]:
        return list(self._tools)

    def specs(self) -> list[ToolSpec]:
        return [spec for spec, _ in self._tools.values()]

    def spec(self, name: str) -> ToolSpec:
        return self._tools[name][0]

    def dispatch(self, ctx: ToolContext, name: str, arguments: dict[str, str]) -> str:
        spec, handler = self._tools[name]
        return handler(ctx, arguments)

    def missing_arguments(self, name: str, arguments: dict[str, str]) -> list[str]:
        spec = self._tools[name][0]
        return [p.name for p in spec.parameters if p.name not in arguments]


def split_object_names(raw: str) -> list[str]:
    """Parse a comma-separated (optionally bracketed/quoted) id list."""
    cleaned = raw.strip()
    if cleaned.startswith("[") and cleaned.endswith("]"):
        cleaned = cleaned[1:-1]
    names = []
    for part in cleaned.split(","):
        name = part.strip().strip("'\"")
        if name:
            names.append(name)
    return names


def _scene_object_ids(state: SimulatedSceneState) -> list[str]:
    return [o.id for o in state.scene.objects if o.kind != "robot"]


def tool_query_objects(ctx: ToolContext, arguments: dict[str, str]) -> str:
    ids = _scene_object_ids(ctx.state)
    return ", ".join(ids) if ids else "(none)"


def tool_reasoning(ctx: ToolContext, arguments: dict[str, str]) -> str:
    ctx.turn.reasoning_parts.append(arguments["text"])
    return "Reasoning recorded."


def tool_required_objects(ctx: ToolContext, arguments: dict[str, str]) -> str:
    names = split_object_names(arguments["object_names"])
    ctx.turn.required_objects = tuple(names)
    known = set(_scene_object_ids(ctx.state))
    unknown = [n for n in names if n not in known]
    if unknown:
        return (
            f"Warning: unknown object id(s) {', '.join(unknown)}; "
            f"known objects are {', '.join(sorted(known))}."
        )
    return "Required objects recorded."


def tool_speak(ctx: ToolContext, arguments: dict[str, str]) -> str:
    person = arguments["person_name"]
    text = arguments["text"]
    ctx.turn.spoken.append((person, text))
    if ctx.on_speak is not None:
        ctx.on_speak(person, text)
    if not text.strip():
        return "Warning: nothing to say (empty text)."
    return f"Spoke to {person}."


def tool_move_object_to_person(ctx: ToolContext, arguments: dict[str, str]) -> str:
    ctx.turn.action_calls.append(("move_object_to_person", dict(arguments)))
    return ctx.state.move_to_person(arguments["object_name"], arguments["person_name"])


def tool_hand_object_over_to_person(ctx: ToolContext, arguments: dict[str, str]) -> str:
    ctx.turn.action_calls.append(("hand_object_over_to_person", dict(arguments)))
    return ctx.state.hand_over_to_person(arguments["object_name"], arguments["person_name"])


def tool_pour_into(ctx: ToolContext, arguments: dict[str, str]) -> str:
    ctx.turn.action_calls.append(("pour_into", dict(arguments)))
    return ctx.state.pour_into(
        arguments["source_container_name"], arguments["target_container_name"]
    )


QUERY_OBJECTS_SPEC = ToolSpec(
    name="query_objects",
    description="Query all objects that are available in the scene. You can see all these objects.",
    parameters=(),
    tool_class="query",
)

REASONING_SPEC = ToolSpec(
    name="reasoning",
    description="You provide a reason for the action you are about to take.",
    parameters=(ToolParam("text", "string", "The reasoning behind the next action."),),
    tool_class="diagnostic",
)

REQUIRED_OBJECTS_SPEC = ToolSpec(
    name="required_objects",
    description="You provide the name of the objects the user requires to fulfill a request.",
    parameters=(
        ToolParam(
            "object_names",
            "string",
            "Comma-separated names of the required objects.",
        ),
    ),
    tool_class="diagnostic",
)

SPEAK_SPEC = ToolSpec(
    name="speak",
    description="You speak out the given text.",
    parameters=(
        ToolParam("person_name", "string", "The name of the person to speak to."),
        ToolParam("text", "string", "The text to speak."),
    ),
    tool_class="expression",
)

MOVE_OBJECT_SPEC = ToolSpec(
    name="move_object_to_person",
    description="You get an object and move it to a person.",
    parameters=(
        ToolParam(
            "object_name",
            "string",
            "The name of the object to move. The object must be available in the scene.",
        ),
        ToolParam("person_name", "string", "The name of the person to move the object to."),
    ),
    tool_class="action",
)

HAND_OVER_SPEC = ToolSpec(
    name="hand_object_over_to_person",
    description="You get an object and hand it over to a person.",
    parameters=(
        ToolParam(
            "object_name",
            "string",
            "The name of the object to hand over. The object must be available in the scene.",
        ),
        ToolParam("person_name", "string", "The name of the person to hand over the object to."),
    ),
    tool_class="action",
)

POUR_INTO_SPEC = ToolSpec(
    name="pour_into",
    description="You get a source container, pour it into a target container, and put it back on the table.",
    parameters=(
        ToolParam("source_container_name", "string", "The name of the container to pour from."),
        ToolParam("target_container_name", "string", "The name of the container to pour into."),
    ),
    tool_class="action",
)


def build_tool_registry(condition, actions_enabled: bool = False) -> ToolRegistry:
    """Registry for one evaluation condition.

    `condition` is anything with a `scene_query_enabled` attribute (or a
    plain bool).  Diagnostic and expression tools are always present; the
    scene query and the action tools are gated.
    """
    scene_query = getattr(condition, "scene_query_enabled", None)
    if scene_query is None:
        scene_query = bool(condition)
    registry = ToolRegistry()
    if scene_query:
        registry.register(QUERY_OBJECTS_SPEC, tool_query_objects)
    registry.register(REASONING_SPEC, tool_reasoning)
    registry.register(REQUIRED_OBJECTS_SPEC, tool_required_objects)
    registry.register(SPEAK_SPEC, tool_speak)
    if actions_enabled:
        registry.register(MOVE_OBJECT_SPEC, tool_move_object_to_person)
        registry.register(HAND_OVER_SPEC, tool_hand_object_over_to_person)
        registry.register(POUR_INTO_SPEC, tool_pour_into)
    return registry
