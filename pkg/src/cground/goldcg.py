"""Gold common-ground construction: per-turn proposition sets derived from
rewrites, document enrichment, selector training labels, and the
train/validation split.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .annotate import Annotator, ReferenceAnnotator, extract_propositions
from .core import (
    Conversation,
    DocumentContext,
    Proposition,
    Turn,
    render_propositions,
    tokenize_for_match,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectorExample:
    proposition: Proposition
    question: str
    context_digest: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")


def occurs_in(proposition_text: str, answer: str) -> bool:
    """True when the proposition occurs in the answer as a contiguous token run.

    Both sides are casefolded and punctuation-stripped, so "the UK" matches
    "the UK," but "position" does not match "positions".
    """
    needle = tokenize_for_match(proposition_text)
    haystack = tokenize_for_match(answer)
    if not needle or len(needle) > len(haystack):
        return False
    for i in range(len(haystack) - len(needle) + 1):
        if haystack[i : i + len(needle)] == needle:
            return True
    return False


def build_gold_cg(conversation: Conversation, annotator: Optional[Annotator] = None) -> Conversation:
    """Attach gold_cg to every turn: propositions of the rewrite (or question)."""
    annotator = annotator or ReferenceAnnotator()
    turns = []
    for turn in conversation.turns:
        source = turn.rewrite_or_question()
        props = extract_propositions(annotator.annotate(source), origin_turn=turn.turn_no)
        turns.append(replace(turn, gold_cg=tuple(props)))
    return replace(conversation, turns=tuple(turns))


def enrich_with_doc(
    conversation: Conversation, doc_source: Mapping[str, DocumentContext]
) -> Conversation:
    """Attach the document context where the mapping has an entry."""
    doc = doc_source.get(conversation.conversation_id)
    if doc is None:
        return conversation
    return replace(conversation, doc=doc)


def doc_coverage(conversations: Sequence[Conversation]) -> float:
    """Fraction of conversations carrying a document context."""
    if not conversations:
        return 0.0
    return sum(1 for c in conversations if c.doc is not None) / len(conversations)


def cg_full_at(conversation: Conversation, turn_no: int, include_current: bool = True) -> list[Proposition]:
    """Union of gold propositions over turns 0..turn_no (set semantics,
    first occurrence wins)."""
    last = turn_no if include_current else turn_no - 1
    seen: dict[str, Proposition] = {}
    for turn in conversation.turns[: last + 1]:
        for prop in turn.gold_cg or ():
            seen.setdefault(prop.normalized, prop)
    return list(seen.values())


def gold_selected_keys(conversation: Conversation, turn_no: int) -> set[str]:
    """Normalized forms of the label-1 propositions at a turn."""
    turn = conversation.turns[turn_no]
    answer = turn.answer or ""
    return {
        p.normalized for p in cg_full_at(conversation, turn_no) if occurs_in(p.surface, answer)
    }


def build_selector_examples(conversation: Conversation) -> list[SelectorExample]:
    """One labeled example per (turn, proposition in CG-full at that turn).

    Label 1 when the proposition occurs in the turn's gold answer. Turns
    without an answer are skipped with a warning; an empty answer labels
    everything 0.
    """
    examples: list[SelectorExample] = []
    for turn in conversation.turns:
        if turn.gold_cg is None:
            raise ValueError(
                f"turn {turn.turn_no} of conversation {conversation.conversation_id!r} "
                "has no gold CG; run build_gold_cg first"
            )
        if turn.answer is None:
            logger.warning(
                "skipping turn %s of conversation %s: no gold answer",
                turn.turn_no,
                conversation.conversation_id,
            )
            continue
        full = cg_full_at(conversation, turn.turn_no)
        digest = render_propositions(full)
        for prop in full:
            label = 1 if occurs_in(prop.surface, turn.answer) else 0
            examples.append(
                SelectorExample(
                    proposition=prop,
                    question=turn.question,
                    context_digest=digest,
                    label=label,
                )
            )
    return examples


def save_selector_examples(examples: Iterable[SelectorExample], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for ex in examples:
            record = {
                "context_digest": ex.context_digest,
                "label": ex.label,
                "proposition": ex.proposition.surface,
                "question": ex.question,
            }
            handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def split_train_validation(
    conversations: Sequence[Conversation], fraction: float, seed: int
) -> tuple[list[Conversation], list[Conversation]]:
    """Deterministic split at conversation granularity.

    |validation| = round(fraction * N); a conversation is never split
    across the two sets.
    """
    if not 0 < fraction < 1:
        raise ValueError("fraction must be strictly between 0 and 1")
    if len(conversations) < 2:
        raise ValueError("need at least 2 conversations to split")
    ids = sorted(c.conversation_id for c in conversations)
    rng = random.Random(seed)
    rng.shuffle(ids)
    n_validation = int(round(fraction * len(ids)))
    validation_ids = set(ids[:n_validation])
    train = [c for c in conversations if c.conversation_id not in validation_ids]
    validation = [c for c in conversations if c.conversation_id in validation_ids]
    return train, validation
