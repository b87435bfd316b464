"""Wiring between configuration and runtime components, plus the live ask
path shared by the REPL and the HTTP service."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .annotate import make_annotator
from .config import AppConfig, build_endpoint
from .core import CommonGround, Conversation, ConversationContext, DocumentContext
from .engine import CgSession, GeneratorConfig, make_generator, make_selector
from .evaluation import run_turn
from .reading import AnswerCandidate, ExternalReader, LexicalReader, Reader
from .retrieval import Bm25Index, Bm25Params, RankedPassage
from .setups import (
    AdapterRewriteService,
    AdapterSummaryService,
    ConfigurationError,
    Services,
    formulate,
)


def build_services(config: AppConfig) -> Services:
    rewriter = _endpoint(config, "rewriter")
    summarizer = _endpoint(config, "summarizer")
    return Services(
        rewrite=AdapterRewriteService(rewriter) if rewriter is not None else None,
        summary=AdapterSummaryService(summarizer) if summarizer is not None else None,
    )


def build_reader(config: AppConfig) -> Reader:
    annotator = make_annotator(
        config.annotator,
        endpoint=_endpoint(config, "annotator"),
        include_determiners=not config.strict_chunks,
    )
    if config.reader == "lexical":
        return LexicalReader(annotator=annotator)
    endpoint = _endpoint(config, "reader")
    if endpoint is None:
        raise ConfigurationError("external reader requires an adapter endpoint")
    return ExternalReader(endpoint)


def _endpoint(config: AppConfig, role: str):
    spec = config.adapters.get(role)
    return build_endpoint(spec) if spec is not None else None


def build_backends(config: AppConfig, conversation: Optional[Conversation] = None):
    annotator = make_annotator(
        config.annotator,
        endpoint=_endpoint(config, "annotator"),
        include_determiners=not config.strict_chunks,
    )
    try:
        generator = make_generator(
            config.generator,
            conversation=conversation,
            endpoint=_endpoint(config, "generator"),
            annotator=annotator,
        )
        selector = make_selector(
            config.selector, conversation=conversation, endpoint=_endpoint(config, "selector")
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    return generator, selector


@dataclass
class AskResult:
    answer: str
    passages: list[RankedPassage]
    candidates: list[AnswerCandidate]
    cg_full: CommonGround
    cg_selected: CommonGround
    mu: float


@dataclass
class LiveConversation:
    """One live conversation: a CG session plus the retrieve/read/fuse loop."""

    index: Bm25Index
    reader: Reader
    config: AppConfig
    session: CgSession
    services: Services = field(default_factory=Services)
    params: Bm25Params = field(default_factory=Bm25Params)

    @classmethod
    def start(
        cls,
        index: Bm25Index,
        config: AppConfig,
        doc: Optional[DocumentContext] = None,
        conversation: Optional[Conversation] = None,
        reader: Optional[Reader] = None,
    ) -> "LiveConversation":
        generator, selector = build_backends(config, conversation)
        if doc is None and conversation is not None:
            doc = conversation.doc
        session = CgSession.start(generator, selector, doc=doc, config=GeneratorConfig())
        services = build_services(config)
        if config.setup == "rewrite" and services.rewrite is None:
            raise ConfigurationError("setup rewrite requires a rewriter adapter")
        if config.setup == "summary" and services.summary is None:
            raise ConfigurationError("setup summary requires a summarizer adapter")
        return cls(
            index=index,
            reader=reader or build_reader(config),
            config=config,
            session=session,
            services=services,
        )

    def ask(self, question: str) -> AskResult:
        state: dict = {}

        def answer_with_pipeline(q: str, cg: CommonGround) -> str:
            ctx = ConversationContext(
                doc=self.session.context.doc,
                history=self.session.context.history,
                current_question=q,
            )
            formulation = formulate(
                self.config.setup,
                ctx,
                cg,
                services=self.services,
                max_tokens=self.config.max_query_tokens,
            )
            ranked, fused = run_turn(
                self.index,
                self.reader,
                formulation.retriever_query,
                formulation.reader_query,
                self.config.mu,
                self.params,
            )
            state["passages"] = ranked
            state["candidates"] = fused
            return fused[0].text if fused else ""

        full_view, selected_view = self.session.step(question, answer_with_pipeline)
        answer = self.session.context.history[-1][1]
        return AskResult(
            answer=answer,
            passages=state.get("passages", []),
            candidates=state.get("candidates", []),
            cg_full=full_view,
            cg_selected=selected_view,
            mu=self.config.mu,
        )
