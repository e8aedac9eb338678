"""The tool-call turn loop.

One session owns a simulated scene, a tool registry, a backend, and the
conversation history; turns run strictly sequentially so follow-ups like
"The cola please" can lean on earlier turns.  Tool-call sequence numbers
are logical per-turn indices rather than wall-clock times, which keeps
transcripts reproducible byte-for-byte with deterministic backends.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

from ..errors import InputError
from ..geometry import Scene
from ..scanpath import SemanticScanpath, render_prompt_text
from .backends import Backend, BackendError
from .prompt import SystemPromptConfig, default_system_prompt
from .tools import (
    SimulatedSceneState,
    ToolCall,
    ToolContext,
    ToolRegistry,
    ToolResult,
    TurnAccumulator,
)

DEFAULT_TEMPERATURE = 1e-8
DEFAULT_MAX_ITERATIONS = 16
DEFAULT_TRANSPORT_RETRIES = 2

STATUS_COMPLETED = "completed"
STATUS_CLARIFICATION = "clarification_requested"
STATUS_ERROR = "error"


@dataclass(frozen=True)
class AgentTurn:
    """Full trace of one agent turn over one semantic scanpath."""

    scanpath_text: str
    steps: tuple[tuple[ToolCall, ToolResult], ...]
    reasoning: str
    required_objects: tuple[str, ...] | None
    spoken: tuple[tuple[str, str], ...]
    final_message: str | None
    status: str
    error: str | None = None
    transport_retries: int = 0

    def tool_names(self) -> list[str]:
        return [call.name for call, _ in self.steps]

    def to_dict(self) -> dict:
        return {
            "scanpath_text": self.scanpath_text,
            "status": self.status,
            "error": self.error,
            "transport_retries": self.transport_retries,
            "reasoning": self.reasoning,
            "required_objects": (
                list(self.required_objects) if self.required_objects is not None else None
            ),
            "spoken": [[person, text] for person, text in self.spoken],
            "final_message": self.final_message,
            "steps": [
                {
                    "call": {
                        "id": call.call_id,
                        "name": call.name,
                        "arguments": dict(call.arguments),
                        "seq": call.seq,
                    },
                    "result": {"text": result.text, "seq": result.seq},
                }
                for call, result in self.steps
            ],
        }

    @staticmethod
    def from_dict(data: dict) -> "AgentTurn":
        steps = tuple(
            (
                ToolCall(
                    call_id=step["call"]["id"],
                    name=step["call"]["name"],
                    arguments=dict(step["call"]["arguments"]),
                    seq=step["call"]["seq"],
                ),
                ToolResult(
                    call_id=step["call"]["id"],
                    text=step["result"]["text"],
                    seq=step["result"]["seq"],
                ),
            )
            for step in data["steps"]
        )
        required = data["required_objects"]
        return AgentTurn(
            scanpath_text=data["scanpath_text"],
            steps=steps,
            reasoning=data["reasoning"],
            required_objects=tuple(required) if required is not None else None,
            spoken=tuple((p, t) for p, t in data["spoken"]),
            final_message=data["final_message"],
            status=data["status"],
            error=data["error"],
            transport_retries=data["transport_retries"],
        )


class AgentSession:
    """Single-owner conversation: one scene state, one message history."""

    def __init__(
        self,
        scene: Scene,
        registry: ToolRegistry,
        backend: Backend,
        *,
        prompt_config: SystemPromptConfig | None = None,
        temperature: float = DEFAULT_TEMPERATURE,
        max_iterations: int = DEFAULT_MAX_ITERATIONS,
        max_transport_retries: int = DEFAULT_TRANSPORT_RETRIES,
        initial_contents: dict[str, list[str]] | None = None,
        on_event: Callable[[str, dict], None] | None = None,
    ):
        self.scene = scene
        self.registry = registry
        self.backend = backend
        self.temperature = temperature
        self.max_iterations = max_iterations
        self.max_transport_retries = max_transport_retries
        self.state = SimulatedSceneState(scene, initial_contents)
        self.messages: list[dict] = [
            {"role": "system", "content": default_system_prompt(prompt_config)}
        ]
        self.turns: list[AgentTurn] = []
        self.on_event = on_event
        self._cancel = threading.Event()
        self._busy = False

    def cancel(self) -> None:
        """Request cancellation of the in-flight turn (checked between
        backend iterations)."""
        self._cancel.set()

    def _emit(self, kind: str, payload: dict) -> None:
        if self.on_event is not None:
            self.on_event(kind, payload)

    def run_turn(self, sp: SemanticScanpath) -> AgentTurn:
        if self._busy:
            raise InputError("a turn is already in flight for this session")
        self._busy = True
        self._cancel.clear()
        try:
            return self._run_turn(sp)
        finally:
            self._busy = False

    def _run_turn(self, sp: SemanticScanpath) -> AgentTurn:
        scanpath_text = render_prompt_text(sp)
        self.messages.append({"role": "user", "content": scanpath_text})

        acc = TurnAccumulator()
        ctx = ToolContext(
            state=self.state,
            turn=acc,
            on_speak=lambda person, text: self._emit(
                "speak", {"person_name": person, "text": text}
            ),
        )

        steps: list[tuple[ToolCall, ToolResult]] = []
        seq = 0
        faults = 0
        retries = 0
        error: str | None = None
        final_message: str | None = None

        for _ in range(self.max_iterations):
            if self._cancel.is_set():
                error = "turn cancelled"
                break
            try:
                reply = self.backend.complete(
                    self.messages, self.registry.specs(), self.temperature
                )
            except BackendError as exc:
                if retries < self.max_transport_retries:
                    retries += 1
                    continue
                error = f"backend failed after {retries} retries: {exc}"
                break

            if not reply.tool_calls:
                final_message = reply.content or ""
                self.messages.append({"role": "assistant", "content": final_message})
                break

            fatal = False
            batch_calls = []
            batch_results = []
            for request in reply.tool_calls:
                call = ToolCall(
                    call_id=f"call_{len(steps)}",
                    name=request.name,
                    arguments=dict(request.arguments),
                    seq=seq,
                )
                seq += 1
                if request.name not in self.registry:
                    text = (
                        f"Error: unknown tool '{request.name}'. "
                        f"Available tools: {', '.join(self.registry.names())}."
                    )
                    faults += 1
                else:
                    missing = self.registry.missing_arguments(request.name, call.arguments)
                    if missing:
                        text = (
                            f"Error: tool '{request.name}' is missing required "
                            f"argument(s): {', '.join(missing)}."
                        )
                        faults += 1
                    else:
                        text = self.registry.dispatch(ctx, request.name, call.arguments)
                result = ToolResult(call_id=call.call_id, text=text, seq=seq)
                seq += 1
                steps.append((call, result))
                batch_calls.append(
                    {"id": call.call_id, "name": call.name, "arguments": call.arguments}
                )
                batch_results.append(result)
                self._emit(
                    "tool_call",
                    {"id": call.call_id, "name": call.name, "arguments": call.arguments},
                )
                self._emit("tool_result", {"id": call.call_id, "text": result.text})
                if faults > 1:
                    # second faulty call: the one recovery chance is spent
                    error = f"unrecoverable tool fault: {text}"
                    fatal = True
                    break

            self.messages.append(
                {"role": "assistant", "content": "", "tool_calls": batch_calls}
            )
            for result in batch_results:
                self.messages.append(
                    {"role": "tool", "tool_call_id": result.call_id, "content": result.text}
                )
            if fatal:
                break
        else:
            error = f"no final message within max_iterations={self.max_iterations}"

        finalized = bool(acc.required_objects)
        asked_question = any("?" in text for _, text in acc.spoken)
        if error is not None:
            status = STATUS_ERROR
        elif asked_question and not finalized:
            status = STATUS_CLARIFICATION
        else:
            status = STATUS_COMPLETED

        turn = AgentTurn(
            scanpath_text=scanpath_text,
            steps=tuple(steps),
            reasoning="\n".join(acc.reasoning_parts),
            required_objects=acc.required_objects,
            spoken=tuple(acc.spoken),
            final_message=final_message,
            status=status,
            error=error,
            transport_retries=retries,
        )
        self.turns.append(turn)
        return turn


def run_turn(session: AgentSession, sp: SemanticScanpath) -> AgentTurn:
    return session.run_turn(sp)
