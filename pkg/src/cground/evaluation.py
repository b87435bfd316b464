"""Evaluation harness: token F1, MRR, Recall@k, mu tuning, and the
per-setup benchmark runner emitting a results table.

Answer normalization follows the standard SQuAD-style convention: casefold,
strip punctuation, drop articles, collapse whitespace, then compare token
multisets.
"""

from __future__ import annotations

import json
import logging
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .core import Conversation, ConversationContext, Passage
from .engine import GeneratorConfig, advance, make_generator, make_selector
from .goldcg import occurs_in
from .reading import AnswerCandidate, Reader, fuse
from .retrieval import Bm25Index, Bm25Params, RankedPassage
from .setups import (
    ConfigurationError,
    FallbackSummaryService,
    OracleRewriteService,
    Services,
    formulate,
)
from .core import CommonGround

logger = logging.getLogger(__name__)

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b", re.UNICODE)

BENCH_SETUPS = (
    "original",
    "concat",
    "rewrite",
    "summary",
    "cg",
    "cg_full",
    "cg_full_cg",
    "rewrite_g",
    "cg_g",
)

DEFAULT_MU_GRID = [round(i * 0.05, 2) for i in range(21)]


def normalize_answer(s: str) -> str:
    """Lower text and remove punctuation, articles and extra whitespace."""
    s = s.lower()
    s = "".join(ch for ch in s if ch not in set(string.punctuation))
    s = _ARTICLE_RE.sub(" ", s)
    return " ".join(s.split())


def get_tokens(s: str) -> list[str]:
    if not s:
        return []
    return normalize_answer(s).split()


def token_f1(prediction: str, gold: str) -> float:
    """Token-multiset F1 between a predicted and a gold answer."""
    pred_tokens = get_tokens(prediction)
    gold_tokens = get_tokens(gold)
    if len(pred_tokens) == 0 or len(gold_tokens) == 0:
        # if either is no-answer, F1 is 1 when they agree, 0 otherwise
        return float(pred_tokens == gold_tokens)
    common = Counter(pred_tokens) & Counter(gold_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_tokens)
    recall = num_same / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalRecord:
    conversation_id: str
    turn_no: int
    setup: str
    predicted_answer: str
    gold_answer: str
    ranked_passage_ids: tuple[str, ...]
    gold_passage_ids: frozenset[str]
    mu: float


@dataclass(frozen=True)
class MetricsReport:
    f1: float
    mrr: float
    recall_at: Mapping[int, float]
    n_turns: int


def mrr(records: Sequence[EvalRecord]) -> float:
    """Mean reciprocal rank of the first gold passage (0 when absent)."""
    if not records:
        return 0.0
    total = 0.0
    for record in records:
        for i, pid in enumerate(record.ranked_passage_ids, start=1):
            if pid in record.gold_passage_ids:
                total += 1.0 / i
                break
    return total / len(records)


def recall_at_k(records: Sequence[EvalRecord], k: int) -> float:
    """Fraction of records with a gold passage in the top k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not records:
        return 0.0
    hits = 0
    for record in records:
        if not record.gold_passage_ids:
            logger.warning(
                "record %s/%s has no gold passages; counted as a miss",
                record.conversation_id,
                record.turn_no,
            )
            continue
        if set(record.ranked_passage_ids[:k]) & record.gold_passage_ids:
            hits += 1
    return hits / len(records)


def mean_f1(records: Sequence[EvalRecord]) -> float:
    if not records:
        return 0.0
    return sum(token_f1(r.predicted_answer, r.gold_answer) for r in records) / len(records)


def tune_mu(
    validation_records_fn: Callable[[float], Sequence[EvalRecord]],
    grid: Sequence[float] = tuple(DEFAULT_MU_GRID),
) -> float:
    """Grid value maximizing validation F1; ties resolve to the smaller mu."""
    if not grid:
        raise ValueError("grid must be non-empty")
    if any(not 0.0 <= mu_value <= 1.0 for mu_value in grid):
        raise ValueError("grid values must be in [0, 1]")
    best_mu: Optional[float] = None
    best_f1 = -1.0
    for mu_value in sorted(grid):
        score = mean_f1(validation_records_fn(mu_value))
        if score > best_f1:
            best_f1 = score
            best_mu = mu_value
    assert best_mu is not None
    return best_mu


def gold_passage_ids_for(
    turn_answer: Optional[str], answer_source: Optional[str], passages: Mapping[str, Passage]
) -> frozenset[str]:
    """Gold passages for a turn: source-url match first, else passages
    containing the gold answer verbatim under match normalization."""
    if answer_source:
        by_url = frozenset(
            pid for pid, p in passages.items() if p.source_url and p.source_url == answer_source
        )
        if by_url:
            return by_url
    if turn_answer:
        return frozenset(pid for pid, p in passages.items() if occurs_in(turn_answer, p.text))
    return frozenset()


def report_for(records: Sequence[EvalRecord], ks: Sequence[int] = (10, 20)) -> MetricsReport:
    return MetricsReport(
        f1=mean_f1(records),
        mrr=mrr(records),
        recall_at={k: recall_at_k(records, k) for k in ks},
        n_turns=len(records),
    )


@dataclass
class BenchConfig:
    """Everything run_benchmark needs besides the data."""

    params: Bm25Params = field(default_factory=Bm25Params)
    generator: str = "rule"
    selector: str = "rule"
    gen_config: GeneratorConfig = field(default_factory=GeneratorConfig)
    mu: float = 0.5
    mu_by_setup: dict[str, float] = field(default_factory=dict)
    max_query_tokens: int = 384
    history: str = "gold"  # or "system": feed back the pipeline's own answers
    fusion_raw: bool = False
    services: Optional[Services] = None
    generator_endpoint: Optional[object] = None
    selector_endpoint: Optional[object] = None

    def __post_init__(self) -> None:
        if self.history not in ("gold", "system"):
            raise ValueError("history must be gold or system")

    def mu_for(self, setup: str) -> float:
        return self.mu_by_setup.get(setup, self.mu)


@dataclass
class BenchmarkResult:
    reports: dict[str, MetricsReport] = field(default_factory=dict)
    records: dict[str, list[EvalRecord]] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)


def _needs_cg(setup: str) -> bool:
    return setup in ("cg", "cg_full", "cg_full_cg")


def _gold_cg_states(conversation: Conversation) -> list[CommonGround]:
    """Per-turn gold CG state: full view accumulates the gold sets, selected
    view is exactly the current turn's gold generation."""
    states: list[CommonGround] = []
    cg = CommonGround()
    for n, turn in enumerate(conversation.turns):
        if turn.gold_cg is None:
            raise ConfigurationError(
                f"cg_g needs gold CG on every turn (conversation {conversation.conversation_id!r})"
            )
        cg.add_all(list(turn.gold_cg))
        cg.apply_selection({p.normalized for p in turn.gold_cg})
        states.append(cg.snapshot())
    return states


def run_turn(
    index: Bm25Index,
    reader: Reader,
    retriever_query: str,
    reader_query: str,
    mu: float,
    params: Bm25Params,
    fusion_raw: bool = False,
) -> tuple[list[RankedPassage], list[AnswerCandidate]]:
    """Retrieve, read and fuse for one formulated turn."""
    ranked = index.search(retriever_query, params)
    pairs = [
        (rp, candidate) for rp in ranked for candidate in reader.read(rp.passage, reader_query)
    ]
    return ranked, fuse(pairs, mu, raw=fusion_raw)


def run_benchmark(
    dataset: Sequence[Conversation],
    index: Bm25Index,
    setups: Sequence[str],
    config: BenchConfig,
    reader: Optional[Reader] = None,
) -> BenchmarkResult:
    """Evaluate each requested setup over the dataset.

    A setup missing a required service fails alone; the others proceed.
    History answers are the gold ones (offline evaluation convention).
    """
    from .reading import LexicalReader

    reader = reader or LexicalReader()
    result = BenchmarkResult()
    for setup in setups:
        if setup not in BENCH_SETUPS:
            result.errors[setup] = f"unknown setup {setup!r}"
            continue
        try:
            records = _run_setup(dataset, index, setup, config, reader)
        except ConfigurationError as exc:
            result.errors[setup] = str(exc)
            continue
        result.records[setup] = records
        result.reports[setup] = report_for(records)
    return result


def _run_setup(
    dataset: Sequence[Conversation],
    index: Bm25Index,
    setup: str,
    config: BenchConfig,
    reader: Reader,
) -> list[EvalRecord]:
    mu = config.mu_for(setup)
    records: list[EvalRecord] = []
    for conversation in dataset:
        base_setup = setup
        services = config.services or Services()
        if setup == "rewrite_g":
            base_setup = "rewrite"
            services = Services(rewrite=OracleRewriteService(conversation), summary=services.summary)
        if setup == "summary" and services.summary is None:
            logger.info("summary setup: no summarizer adapter, using the offline "
                        "fallback (not comparable to a trained summarizer)")
            services = Services(rewrite=services.rewrite, summary=FallbackSummaryService())
        gold_states: Optional[list[CommonGround]] = None
        generator = selector = None
        cg = CommonGround()
        if setup == "cg_g":
            base_setup = "cg_full_cg"
            gold_states = _gold_cg_states(conversation)
        elif _needs_cg(setup):
            generator = make_generator(
                config.generator, conversation=conversation, endpoint=config.generator_endpoint
            )
            selector = make_selector(
                config.selector, conversation=conversation, endpoint=config.selector_endpoint
            )
        history: tuple[tuple[str, str], ...] = ()
        for n, turn in enumerate(conversation.turns):
            ctx = ConversationContext(
                doc=conversation.doc, history=history, current_question=turn.question
            )
            if gold_states is not None:
                cg_state: CommonGround = gold_states[n]
            elif generator is not None and selector is not None:
                advance(cg, generator, selector, ctx, config.gen_config)
                cg_state = cg
            else:
                cg_state = CommonGround()
            formulation = formulate(
                base_setup, ctx, cg_state, services, max_tokens=config.max_query_tokens
            )
            ranked, fused = run_turn(
                index,
                reader,
                formulation.retriever_query,
                formulation.reader_query,
                mu,
                config.params,
                fusion_raw=config.fusion_raw,
            )
            predicted = fused[0].text if fused else ""
            records.append(
                EvalRecord(
                    conversation_id=conversation.conversation_id,
                    turn_no=n,
                    setup=setup,
                    predicted_answer=predicted,
                    gold_answer=turn.answer or "",
                    ranked_passage_ids=tuple(rp.passage.passage_id for rp in ranked),
                    gold_passage_ids=gold_passage_ids_for(
                        turn.answer, turn.answer_source, index.passages
                    ),
                    mu=mu,
                )
            )
            history_answer = predicted if config.history == "system" else (turn.answer or "")
            history = (*history, (turn.question, history_answer))
    return records


def format_table(reports: Mapping[str, MetricsReport], ks: Sequence[int] = (10, 20)) -> str:
    """Aligned text table, scores scaled by 100 with two decimals."""
    header = ["approach", "F1", "MRR"] + [f"R@{k}" for k in ks]
    rows = [header]
    for setup in BENCH_SETUPS:
        if setup not in reports:
            continue
        report = reports[setup]
        rows.append(
            [
                setup,
                f"{report.f1 * 100:.2f}",
                f"{report.mrr * 100:.2f}",
                *(f"{report.recall_at.get(k, 0.0) * 100:.2f}" for k in ks),
            ]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def report_to_json(reports: Mapping[str, MetricsReport]) -> str:
    payload = {
        setup: {
            "f1": report.f1,
            "mrr": report.mrr,
            "n_turns": report.n_turns,
            "recall_at": {str(k): v for k, v in report.recall_at.items()},
        }
        for setup, report in reports.items()
    }
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def save_records(records: Iterable[EvalRecord], path) -> None:
    from pathlib import Path

    with Path(path).open("w", encoding="utf-8") as handle:
        for record in records:
            payload = {
                "conversation_id": record.conversation_id,
                "gold_answer": record.gold_answer,
                "gold_passage_ids": sorted(record.gold_passage_ids),
                "mu": record.mu,
                "predicted_answer": record.predicted_answer,
                "ranked_passage_ids": list(record.ranked_passage_ids),
                "setup": record.setup,
                "turn_no": record.turn_no,
            }
            handle.write(json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n")
