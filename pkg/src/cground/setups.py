"""The seven query-formulation setups feeding the retriever and reader.

original    the current question alone
concat      doc, the single previous turn, and the question
rewrite     a self-contained rewrite of the question (service-provided)
summary     a summary of doc plus the full history, then the question
cg          the selected CG entries, then the question
cg_full     every accumulated CG entry, then the question
cg_full_cg  cg_full string for the retriever, cg string for the reader

CG renderings list propositions in CG order, comma-joined, before the
question. Formulated strings are truncated from the left to a whitespace
token budget (oldest material dropped first); the retrieval and reading
stages never truncate further.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol

from .adapter import AdapterCallError, AdapterRequest, call, new_request_id
from .core import (
    CommonGround,
    Conversation,
    ConversationContext,
    render_concatenation,
    render_propositions,
)

SETUP_NAMES = ("original", "concat", "rewrite", "summary", "cg", "cg_full", "cg_full_cg")

DEFAULT_MAX_QUERY_TOKENS = 384


class ConfigurationError(ValueError):
    """A requested setup is missing a required service or backend."""


@dataclass(frozen=True)
class QueryFormulation:
    setup: str
    retriever_query: str
    reader_query: str


class RewriteService(Protocol):
    def rewrite(self, ctx: ConversationContext) -> str: ...


class SummaryService(Protocol):
    def summarize(self, text: str) -> str: ...


class OracleRewriteService:
    """Returns the gold rewrite of the current turn (by history length)."""

    def __init__(self, conversation: Conversation) -> None:
        self.conversation = conversation

    def rewrite(self, ctx: ConversationContext) -> str:
        n = ctx.n
        if n >= len(self.conversation.turns):
            raise ValueError(f"no gold turn {n} in conversation {self.conversation.conversation_id!r}")
        return self.conversation.turns[n].rewrite_or_question()


class AdapterRewriteService:
    def __init__(self, endpoint, timeout: float = 30.0) -> None:
        self.endpoint = endpoint
        self.timeout = timeout

    def rewrite(self, ctx: ConversationContext) -> str:
        payload = {
            "doc": ctx.doc.render() if ctx.doc else None,
            "history": [list(pair) for pair in ctx.history],
            "question": ctx.current_question,
        }
        request = AdapterRequest(task="rewrite", request_id=new_request_id(), payload=payload)
        response = call(self.endpoint, request, timeout=self.timeout)
        if response.status != "ok":
            raise AdapterCallError(response.error_message or "rewrite call failed")
        rewrite = (response.payload or {}).get("rewrite")
        if not isinstance(rewrite, str):
            raise AdapterCallError("rewrite payload must carry a rewrite string")
        return rewrite


class FallbackSummaryService:
    """Offline stand-in: first sentence of the context plus the last answer.

    Exists so the summary setup is runnable without an external model; its
    output is not comparable to a trained summarizer and runs report it as
    such.
    """

    name = "fallback"

    def summarize(self, text: str) -> str:
        parts = [p for p in text.split(" ||| ") if p.strip()]
        if not parts:
            return ""
        head = parts[0].split(". ")[0].strip()
        tail = parts[-1].strip() if len(parts) > 1 else ""
        if tail and tail != head:
            return f"{head} {tail}".strip()
        return head


class AdapterSummaryService:
    def __init__(self, endpoint, timeout: float = 30.0) -> None:
        self.endpoint = endpoint
        self.timeout = timeout

    def summarize(self, text: str) -> str:
        request = AdapterRequest(
            task="summarize", request_id=new_request_id(), payload={"text": text}
        )
        response = call(self.endpoint, request, timeout=self.timeout)
        if response.status != "ok":
            raise AdapterCallError(response.error_message or "summarize call failed")
        summary = (response.payload or {}).get("summary")
        if not isinstance(summary, str):
            raise AdapterCallError("summarize payload must carry a summary string")
        return summary


@dataclass
class Services:
    rewrite: Optional[RewriteService] = None
    summary: Optional[SummaryService] = None


def truncate_tokens(text: str, budget: int) -> str:
    """Keep the trailing `budget` whitespace tokens (oldest material first out)."""
    if budget <= 0:
        return text
    tokens = text.split()
    if len(tokens) <= budget:
        return text
    return " ".join(tokens[-budget:])


def _history_parts(ctx: ConversationContext, window: Optional[int]) -> list[str]:
    pairs = ctx.history if window is None else ctx.history[-window:]
    parts: list[str] = []
    for question, answer in pairs:
        parts.append(question)
        parts.append(answer)
    return parts


def formulate(
    setup: str,
    ctx: ConversationContext,
    cg_state: CommonGround,
    services: Optional[Services] = None,
    max_tokens: int = DEFAULT_MAX_QUERY_TOKENS,
) -> QueryFormulation:
    """Build the retriever/reader input strings for one setup at one turn."""
    services = services or Services()
    question = ctx.current_question
    if setup == "original":
        retriever = reader = question
    elif setup == "concat":
        parts = [ctx.doc_part(), *_history_parts(ctx, window=1), question]
        retriever = reader = render_concatenation(parts)
    elif setup == "rewrite":
        if services.rewrite is None:
            raise ConfigurationError("rewrite setup requires a rewrite service")
        retriever = reader = services.rewrite.rewrite(ctx)
    elif setup == "summary":
        if services.summary is None:
            raise ConfigurationError("summary setup requires a summary service")
        context_text = render_concatenation([ctx.doc_part(), *_history_parts(ctx, window=None)])
        retriever = reader = render_concatenation([services.summary.summarize(context_text), question])
    elif setup == "cg":
        retriever = reader = render_concatenation(
            [render_propositions(cg_state.selected()), question]
        )
    elif setup == "cg_full":
        retriever = reader = render_concatenation([render_propositions(cg_state.full()), question])
    elif setup == "cg_full_cg":
        retriever = render_concatenation([render_propositions(cg_state.full()), question])
        reader = render_concatenation([render_propositions(cg_state.selected()), question])
    else:
        raise ConfigurationError(f"unknown setup {setup!r}")
    return QueryFormulation(
        setup=setup,
        retriever_query=truncate_tokens(retriever, max_tokens),
        reader_query=truncate_tokens(reader, max_tokens),
    )
