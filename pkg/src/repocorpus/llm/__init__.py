from .clients import ChatClient, HttpChatClient, RecordingClient, ReplayClient, ScriptedClient, split_reasoning
from .gateway import Gateway, GatewayConfig, make_client, parse_judge
from .types import (
    Completion,
    GatewayError,
    GenRequest,
    JudgeVerdict,
    Mode,
    Role,
    Sampling,
    TraceResult,
    TransportError,
)

__all__ = [
    "ChatClient",
    "Completion",
    "Gateway",
    "GatewayConfig",
    "GatewayError",
    "GenRequest",
    "HttpChatClient",
    "JudgeVerdict",
    "Mode",
    "RecordingClient",
    "ReplayClient",
    "Role",
    "Sampling",
    "ScriptedClient",
    "TraceResult",
    "TransportError",
    "make_client",
    "parse_judge",
    "split_reasoning",
]
