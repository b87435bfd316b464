"""Conversational QA with an incrementally accumulated common ground."""

from .core import (
    CommonGround,
    Conversation,
    ConversationContext,
    DocumentContext,
    Passage,
    Proposition,
    Status,
    Turn,
    render_concatenation,
)

__version__ = "0.1.0"

__all__ = [
    "CommonGround",
    "Conversation",
    "ConversationContext",
    "DocumentContext",
    "Passage",
    "Proposition",
    "Status",
    "Turn",
    "render_concatenation",
    "__version__",
]
