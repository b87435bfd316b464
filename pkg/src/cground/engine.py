"""Common-ground engine: per-turn proposition generation, relevance
selection, and the incremental session state machine composing the two.

Backends come in three flavors each. Oracle backends replay gold data,
rule backends are deterministic lexical stand-ins good enough for offline
runs, and external backends delegate to an adapter endpoint.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional, Protocol

from .adapter import AdapterCallError, AdapterRequest, call, new_request_id
from .annotate import (
    Annotator,
    CLOSED_CLASS_WORDS,
    ReferenceAnnotator,
    THIRD_PERSON_PRONOUNS,
    content_tokens,
    extract_propositions,
)
from .core import (
    CommonGround,
    Conversation,
    ConversationContext,
    DocumentContext,
    Proposition,
    render_propositions,
    tokenize_for_match,
)
from .goldcg import gold_selected_keys, occurs_in

logger = logging.getLogger(__name__)

CONTEXT_SOURCES = frozenset({"doc", "conv"})


@dataclass(frozen=True)
class GeneratorConfig:
    context_sources: frozenset[str] = frozenset({"doc", "conv"})
    include_current_question: bool = True

    def __post_init__(self) -> None:
        sources = frozenset(self.context_sources)
        if not sources or not sources <= CONTEXT_SOURCES:
            raise ValueError("context_sources must be a non-empty subset of {doc, conv}")
        object.__setattr__(self, "context_sources", sources)


class Generator(Protocol):
    def generate(self, ctx: ConversationContext, config: GeneratorConfig) -> list[Proposition]: ...


class Selector(Protocol):
    def select(
        self, cg: CommonGround, question: str, *, turn_no: Optional[int] = None
    ) -> CommonGround: ...


class OracleGenerator:
    """Replays the gold CG of the current turn (by history length)."""

    def __init__(self, conversation: Conversation) -> None:
        self.conversation = conversation

    def generate(self, ctx: ConversationContext, config: GeneratorConfig) -> list[Proposition]:
        n = ctx.n
        if n >= len(self.conversation.turns):
            raise ValueError(f"no gold turn {n} in conversation {self.conversation.conversation_id!r}")
        gold = self.conversation.turns[n].gold_cg
        if gold is None:
            raise ValueError(f"turn {n} has no gold CG; run build_gold_cg first")
        return list(gold)


class RuleGenerator:
    """Recency-weighted extraction standing in for a trained generator.

    With the current question available: propositions come from the question,
    the most recent history pair, and the document (turn 0 only). Without it,
    there is no relevance signal, so the whole history is dumped.
    """

    def __init__(self, annotator: Optional[Annotator] = None) -> None:
        self.annotator = annotator or ReferenceAnnotator()

    def _extract(self, text: str, origin_turn: int) -> list[Proposition]:
        if not text or not text.strip():
            return []
        return extract_propositions(self.annotator.annotate(text), origin_turn=origin_turn)

    def generate(self, ctx: ConversationContext, config: GeneratorConfig) -> list[Proposition]:
        n = ctx.n
        parts: list[str] = []
        if "doc" in config.context_sources and ctx.doc is not None and n == 0:
            parts.append(ctx.doc.render())
        if "conv" in config.context_sources and ctx.history:
            pairs = ctx.history[-1:] if config.include_current_question else ctx.history
            for question, answer in pairs:
                parts.append(question)
                parts.append(answer)
        if config.include_current_question:
            parts.append(ctx.current_question)
        seen: dict[str, Proposition] = {}
        for part in parts:
            for prop in self._extract(part, n):
                seen.setdefault(prop.normalized, prop)
        return list(seen.values())


class ExternalGenerator:
    """Adapter-backed generator (task "generate_cg")."""

    def __init__(self, endpoint, timeout: float = 30.0) -> None:
        self.endpoint = endpoint
        self.timeout = timeout

    def generate(self, ctx: ConversationContext, config: GeneratorConfig) -> list[Proposition]:
        payload = {
            "doc": ctx.doc.render() if (ctx.doc and "doc" in config.context_sources) else None,
            "history": [list(pair) for pair in ctx.history] if "conv" in config.context_sources else [],
            "question": ctx.current_question if config.include_current_question else None,
        }
        request = AdapterRequest(task="generate_cg", request_id=new_request_id(), payload=payload)
        response = call(self.endpoint, request, timeout=self.timeout)
        if response.status != "ok":
            raise AdapterCallError(response.error_message or "generate_cg call failed")
        surfaces = (response.payload or {}).get("propositions")
        if not isinstance(surfaces, list) or any(not isinstance(s, str) or not s.strip() for s in surfaces):
            raise AdapterCallError("generate_cg payload must carry a list of proposition strings")
        return [Proposition(s, origin_turn=ctx.n) for s in surfaces]


class OracleSelector:
    """Selects the propositions that occur in the turn's gold answer."""

    def __init__(self, conversation: Conversation) -> None:
        self.conversation = conversation

    def _answer_for(self, question: str, turn_no: Optional[int]) -> str:
        if turn_no is not None:
            if turn_no >= len(self.conversation.turns):
                raise ValueError(f"no gold turn {turn_no}")
            return self.conversation.turns[turn_no].answer or ""
        for turn in self.conversation.turns:
            if turn.question == question:
                return turn.answer or ""
        raise ValueError(f"question {question!r} not found in gold conversation")

    def select(
        self, cg: CommonGround, question: str, *, turn_no: Optional[int] = None
    ) -> CommonGround:
        answer = self._answer_for(question, turn_no)
        keys = {p.normalized for p in cg.full() if occurs_in(p.surface, answer)}
        cg.apply_selection(keys)
        return cg


class RuleSelector:
    """Content-token overlap with the question, selecting on any overlap.

    Anaphora fallback: when the question carries a third-person pronoun and
    every entity-bearing proposition in the CG names the same entity (the
    capitalized tokens agree), those propositions are selected too.
    """

    @staticmethod
    def _entity_signature(prop: Proposition) -> frozenset[str]:
        caps: list[str] = []
        for raw in prop.surface.split():
            if raw[:1].isupper():
                # a capitalized closed-class word (chunk-leading "The") is not entity material
                caps.extend(t for t in tokenize_for_match(raw) if t not in CLOSED_CLASS_WORDS)
        return frozenset(caps)

    def select(
        self, cg: CommonGround, question: str, *, turn_no: Optional[int] = None
    ) -> CommonGround:
        question_tokens = set(content_tokens(question))
        keys: set[str] = set()
        for prop in cg.full():
            prop_tokens = set(content_tokens(prop.surface))
            if prop_tokens and prop_tokens & question_tokens:
                keys.add(prop.normalized)
        if set(tokenize_for_match(question)) & THIRD_PERSON_PRONOUNS:
            entity_props = [
                (p, sig) for p in cg.full() if (sig := self._entity_signature(p))
            ]
            signatures = {sig for _, sig in entity_props}
            if len(signatures) == 1:
                keys.update(p.normalized for p, _ in entity_props)
        cg.apply_selection(keys)
        return cg


class ExternalSelector:
    """Adapter-backed binary classifier, one call per proposition."""

    def __init__(self, endpoint, timeout: float = 30.0) -> None:
        self.endpoint = endpoint
        self.timeout = timeout

    def select(
        self, cg: CommonGround, question: str, *, turn_no: Optional[int] = None
    ) -> CommonGround:
        digest = render_propositions(cg.full())
        keys: set[str] = set()
        for prop in cg.full():
            payload = {
                "proposition": prop.surface,
                "question": question,
                "context_digest": digest,
            }
            request = AdapterRequest(task="classify", request_id=new_request_id(), payload=payload)
            response = call(self.endpoint, request, timeout=self.timeout)
            if response.status != "ok":
                raise AdapterCallError(response.error_message or "classify call failed")
            label = (response.payload or {}).get("label")
            if label not in (0, 1):
                raise AdapterCallError("classify payload must carry label 0 or 1")
            if label == 1:
                keys.add(prop.normalized)
        cg.apply_selection(keys)
        return cg


AnswerCallback = Callable[[str, CommonGround], str]


@dataclass
class CgSession:
    """Live incremental CG over one conversation: single writer, one session
    per conversation."""

    context: ConversationContext
    cg: CommonGround
    generator: Generator
    selector: Selector
    config: GeneratorConfig = field(default_factory=GeneratorConfig)

    @classmethod
    def start(
        cls,
        generator: Generator,
        selector: Selector,
        doc: Optional[DocumentContext] = None,
        config: Optional[GeneratorConfig] = None,
    ) -> "CgSession":
        return cls(
            context=ConversationContext(doc=doc, history=(), current_question=""),
            cg=CommonGround(),
            generator=generator,
            selector=selector,
            config=config or GeneratorConfig(),
        )

    @property
    def turn_no(self) -> int:
        return self.context.n

    def step(
        self, question: str, answer_callback: Optional[AnswerCallback] = None
    ) -> tuple[CommonGround, CommonGround]:
        """Advance one turn: generate, accumulate, select, then answer.

        Returns (full view, selected view) snapshots; the downstream answer
        obtained through the callback is appended to the history.
        """
        ctx = replace(self.context, current_question=question)
        advance(self.cg, self.generator, self.selector, ctx, self.config)
        full_view = self.cg.snapshot()
        selected_view = self.cg.snapshot_selected()
        answer = answer_callback(question, self.cg) if answer_callback is not None else ""
        self.context = replace(ctx, history=(*ctx.history, (question, answer)), current_question="")
        return full_view, selected_view


def _accumulate(cg: CommonGround, generated: list[Proposition], turn_no: int) -> None:
    # re-emissions are absorbed by dedup; the earliest origin turn wins
    for prop in generated:
        cg.add(prop if prop.origin_turn == turn_no else replace(prop, origin_turn=turn_no))


def advance(
    cg: CommonGround,
    generator: Generator,
    selector: Selector,
    ctx: ConversationContext,
    config: GeneratorConfig,
) -> None:
    """One engine step over an existing CG: generate, accumulate, select."""
    generated = generator.generate(ctx, config)
    _accumulate(cg, generated, ctx.n)
    selector.select(cg, ctx.current_question, turn_no=ctx.n)


@dataclass(frozen=True)
class TurnState:
    turn_no: int
    context: ConversationContext
    cg: CommonGround


def replay(
    conversation: Conversation,
    generator: Generator,
    selector: Selector,
    config: Optional[GeneratorConfig] = None,
) -> Iterator[TurnState]:
    """Offline replay over a recorded conversation with gold history answers.

    Yields an immutable snapshot of the CG after generate+select at each turn.
    """
    config = config or GeneratorConfig()
    cg = CommonGround()
    history: tuple[tuple[str, str], ...] = ()
    for n, turn in enumerate(conversation.turns):
        ctx = ConversationContext(doc=conversation.doc, history=history, current_question=turn.question)
        advance(cg, generator, selector, ctx, config)
        yield TurnState(turn_no=n, context=ctx, cg=cg.snapshot())
        history = (*history, (turn.question, turn.answer or ""))


def make_generator(name: str, conversation: Optional[Conversation] = None, endpoint=None,
                   annotator: Optional[Annotator] = None) -> Generator:
    if name == "oracle":
        if conversation is None:
            raise ValueError("oracle generator requires a gold conversation")
        return OracleGenerator(conversation)
    if name == "rule":
        return RuleGenerator(annotator=annotator)
    if name == "external":
        if endpoint is None:
            raise ValueError("external generator requires an endpoint")
        return ExternalGenerator(endpoint)
    raise ValueError(f"unknown generator backend {name!r}")


def make_selector(name: str, conversation: Optional[Conversation] = None, endpoint=None) -> Selector:
    if name == "oracle":
        if conversation is None:
            raise ValueError("oracle selector requires a gold conversation")
        return OracleSelector(conversation)
    if name == "rule":
        return RuleSelector()
    if name == "external":
        if endpoint is None:
            raise ValueError("external selector requires an endpoint")
        return ExternalSelector(endpoint)
    raise ValueError(f"unknown selector backend {name!r}")


__all__ = [
    "AnswerCallback",
    "CgSession",
    "ExternalGenerator",
    "ExternalSelector",
    "Generator",
    "GeneratorConfig",
    "OracleGenerator",
    "OracleSelector",
    "RuleGenerator",
    "RuleSelector",
    "Selector",
    "TurnState",
    "advance",
    "gold_selected_keys",
    "make_generator",
    "make_selector",
    "replay",
]
