"""LLM tool-calling runtime: prompt, tools, backends, and the turn loop."""

from .backends import (
    Backend,
    BackendError,
    BackendReply,
    HeuristicBackend,
    RemoteChatBackend,
    ReplayBackend,
    ToolCallRequest,
)
from .prompt import SystemPromptConfig, default_system_prompt
from .runtime import (
    STATUS_CLARIFICATION,
    STATUS_COMPLETED,
    STATUS_ERROR,
    AgentSession,
    AgentTurn,
    run_turn,
)
from .tools import (
    SimulatedSceneState,
    ToolCall,
    ToolParam,
    ToolRegistry,
    ToolResult,
    ToolSpec,
    build_tool_registry,
)

__all__ = [
    "AgentSession",
    "AgentTurn",
    "Backend",
    "BackendError",
    "BackendReply",
    "HeuristicBackend",
    "RemoteChatBackend",
    "ReplayBackend",
    "STATUS_CLARIFICATION",
    "STATUS_COMPLETED",
    "STATUS_ERROR",
    "SimulatedSceneState",
    "SystemPromptConfig",
    "ToolCall",
    "ToolCallRequest",
    "ToolParam",
    "ToolRegistry",
    "ToolResult",
    "ToolSpec",
    "build_tool_registry",
    "default_system_prompt",
    "run_turn",
]
