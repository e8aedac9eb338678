"""Chat backends: the deterministic test doubles and the remote client.

A backend maps (message history, tool specs, temperature) to either a
batch of tool-call requests or a final text message.  Deterministic
backends must return identical replies for identical inputs; the scripted
replay and gaze-dwell heuristic below are the offline stand-ins for a
remote LLM.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Protocol

from ..errors import InputError
from ..scanpath import parse_prompt_text
from .tools import ToolSpec, split_object_names


class BackendError(RuntimeError):
    """Transport-level or protocol-level backend failure."""


@dataclass(frozen=True)
class ToolCallRequest:
    name: str
    arguments: dict[str, str]


@dataclass(frozen=True)
class BackendReply:
    tool_calls: tuple[ToolCallRequest, ...] = ()
    content: str | None = None

    def __post_init__(self):
        if self.tool_calls and self.content is not None:
            raise InputError("a backend reply is either tool calls or a final message")


class Backend(Protocol):
    def complete(
        self, messages: list[dict], tools: list[ToolSpec], temperature: float
    ) -> BackendReply: ...


class ReplayBackend:
    """Replays an exact scripted reply sequence; exhaustion is an error."""

    def __init__(self, script: list[BackendReply]):
        self._script = list(script)
        self._cursor = 0

    def complete(self, messages, tools, temperature) -> BackendReply:
        if self._cursor >= len(self._script):
            raise BackendError(
                f"replay script exhausted after {len(self._script)} replies"
            )
        reply = self._script[self._cursor]
        self._cursor += 1
        return reply

    def reset(self) -> None:
        self._cursor = 0

    @staticmethod
    def from_json(data: list[dict]) -> "ReplayBackend":
        script = []
        for item in data:
            if "content" in item and item["content"] is not None:
                script.append(BackendReply(content=item["content"]))
            else:
                calls = tuple(
                    ToolCallRequest(
                        name=c["name"],
                        arguments={k: str(v) for k, v in c.get("arguments", {}).items()},
                    )
                    for c in item.get("tool_calls", [])
                )
                script.append(BackendReply(tool_calls=calls))
        return ReplayBackend(script)


def _last_user_content(messages: list[dict]) -> tuple[str, int]:
    for i in range(len(messages) - 1, -1, -1):
        if messages[i]["role"] == "user":
            return messages[i]["content"], i
    raise BackendError("no user message in history")


@dataclass
class HeuristicBackend:
    """Deterministic gaze-dwell resolver.

    Queries the scene when the tool is available, then scores objects by
    summed dwell over the parsed gaze-history block (robot AOI and
    segments under `min_segment_ms` excluded; multi-object segments credit
    each member with the full dwell) and requires every object whose score
    exceeds `dwell_fraction` of the strongest.  With action tools present
    it pours the top object into the runner-up (two picks) or moves a
    single pick to the user.
    """

    robot_name: str = "the_robot"
    min_segment_ms: float = 200.0
    dwell_fraction: float = 0.4
    person: str = "user"

    def complete(self, messages, tools, temperature) -> BackendReply:
        tool_names = {t.name for t in tools}
        content, user_index = _last_user_content(messages)
        after = messages[user_index + 1 :]
        n_assistant = sum(1 for m in after if m["role"] == "assistant")

        can_query = "query_objects" in tool_names
        if n_assistant == 0 and can_query:
            return BackendReply(tool_calls=(ToolCallRequest("query_objects", {}),))
        if n_assistant > (1 if can_query else 0):
            return BackendReply(content="Done.")

        scanpath = parse_prompt_text(content)
        scores: dict[str, float] = {}
        for seg in scanpath.gaze_history.segments:
            if seg.duration_ms < self.min_segment_ms:
                continue
            for oid in seg.object_ids:
                if oid == self.robot_name:
                    continue
                scores[oid] = scores.get(oid, 0.0) + seg.duration_ms

        scene_ids = self._queried_scene_ids(after)
        if scene_ids:
            scores = {oid: s for oid, s in scores.items() if oid in scene_ids}

        if not scores:
            return BackendReply(
                tool_calls=(
                    ToolCallRequest(
                        "reasoning",
                        {
                            "text": "The gaze history contains no usable object "
                            "fixations, so the request target is unclear."
                        },
                    ),
                    ToolCallRequest("required_objects", {"object_names": ""}),
                    ToolCallRequest(
                        "speak",
                        {
                            "person_name": self.person,
                            "text": "I am not sure which object you mean. "
                            "Could you look at it or name it?",
                        },
                    ),
                )
            )

        best = max(scores.values())
        selected = sorted(
            (oid for oid, s in scores.items() if s > self.dwell_fraction * best),
            key=lambda oid: (-scores[oid], oid),
        )
        dwell_text = "; ".join(
            f"{oid}={scores[oid] / 1000.0:.2f}s" for oid in sorted(scores)
        )
        calls = [
            ToolCallRequest(
                "reasoning",
                {
                    "text": f"Summed gaze dwell per object: {dwell_text}. "
                    f"Selecting objects above {self.dwell_fraction:.0%} of the "
                    f"strongest dwell: {', '.join(selected)}."
                },
            ),
            ToolCallRequest("required_objects", {"object_names": ", ".join(selected)}),
            ToolCallRequest(
                "speak",
                {
                    "person_name": self.person,
                    "text": f"Sure. You need: {', '.join(selected)}. I will take care of it.",
                },
            ),
        ]
        if len(selected) >= 2 and "pour_into" in tool_names:
            calls.append(
                ToolCallRequest(
                    "pour_into",
                    {
                        "source_container_name": selected[0],
                        "target_container_name": selected[1],
                    },
                )
            )
        elif len(selected) == 1 and "move_object_to_person" in tool_names:
            calls.append(
                ToolCallRequest(
                    "move_object_to_person",
                    {"object_name": selected[0], "person_name": self.person},
                )
            )
        return BackendReply(tool_calls=tuple(calls))

    @staticmethod
    def _queried_scene_ids(messages_after_user: list[dict]) -> set[str]:
        for i, msg in enumerate(messages_after_user):
            if msg["role"] != "assistant":
                continue
            for call in msg.get("tool_calls", ()):
                if call["name"] != "query_objects":
                    continue
                for later in messages_after_user[i + 1 :]:
                    if later["role"] == "tool" and later.get("tool_call_id") == call["id"]:
                        text = later["content"]
                        if text.strip() == "(none)":
                            return set()
                        return set(split_object_names(text))
        return set()


ENV_API_KEY = "SEMSCAN_API_KEY"
ENV_BASE_URL = "SEMSCAN_BASE_URL"
ENV_MODEL = "SEMSCAN_MODEL"


@dataclass
class RemoteChatBackend:
    """Generic chat-with-tools HTTP client (OpenAI-compatible shape).

    Request: POST {base_url}/chat/completions with
    {model, temperature, messages, tools}; the reply's first choice either
    carries tool_calls (JSON-encoded arguments) or final content.
    """

    base_url: str
    model: str
    api_key: str | None = None
    timeout_s: float = 60.0
    _client: object = field(default=None, repr=False)

    @staticmethod
    def from_env() -> "RemoteChatBackend":
        base_url = os.environ.get(ENV_BASE_URL)
        model = os.environ.get(ENV_MODEL)
        if not base_url or not model:
            raise InputError(
                f"remote backend needs {ENV_BASE_URL} and {ENV_MODEL} set "
                f"({ENV_API_KEY} if the endpoint requires a key)"
            )
        return RemoteChatBackend(
            base_url=base_url, model=model, api_key=os.environ.get(ENV_API_KEY)
        )

    def _http(self):
        if self._client is None:
            import httpx

            headers = {}
            if self.api_key:
                headers["Authorization"] = f"Bearer {self.api_key}"
            self._client = httpx.Client(
                base_url=self.base_url, headers=headers, timeout=self.timeout_s
            )
        return self._client

    def complete(self, messages, tools, temperature) -> BackendReply:
        payload = {
            "model": self.model,
            "temperature": temperature,
            "messages": [self._wire_message(m) for m in messages],
            "tools": [self._wire_tool(t) for t in tools],
        }
        try:
            response = self._http().post("/chat/completions", json=payload)
            response.raise_for_status()
            body = response.json()
        except Exception as exc:  # httpx transport/protocol errors
            raise BackendError(f"chat completion request failed: {exc}") from exc
        try:
            message = body["choices"][0]["message"]
        except (KeyError, IndexError) as exc:
            raise BackendError(f"malformed chat completion response: {body!r}") from exc
        calls = message.get("tool_calls")
        if calls:
            requests = []
            for call in calls:
                fn = call["function"]
                try:
                    raw_args = json.loads(fn.get("arguments") or "{}")
                except json.JSONDecodeError:
                    raw_args = {"_raw": fn.get("arguments", "")}
                args = {
                    k: v if isinstance(v, str) else json.dumps(v)
                    for k, v in raw_args.items()
                }
                requests.append(ToolCallRequest(name=fn["name"], arguments=args))
            return BackendReply(tool_calls=tuple(requests))
        return BackendReply(content=message.get("content") or "")

    @staticmethod
    def _wire_message(msg: dict) -> dict:
        wire = {"role": msg["role"], "content": msg.get("content", "")}
        if msg.get("tool_calls"):
            wire["tool_calls"] = [
                {
                    "id": c["id"],
                    "type": "function",
                    "function": {
                        "name": c["name"],
                        "arguments": json.dumps(c["arguments"]),
                    },
                }
                for c in msg["tool_calls"]
            ]
        if msg.get("tool_call_id"):
            wire["tool_call_id"] = msg["tool_call_id"]
        return wire

    @staticmethod
    def _wire_tool(spec: ToolSpec) -> dict:
        return {
            "type": "function",
            "function": {
                "name": spec.name,
                "description": spec.description,
                "parameters": {
                    "type": "object",
                    "properties": {
                        p.name: {"type": p.type, "description": p.description}
                        for p in spec.parameters
                    },
                    "required": [p.name for p in spec.parameters],
                },
            },
        }
