"""Core domain types shared by every stage of the pipeline.

All types are immutable values after construction except CommonGround,
which is single-writer: one conversation session mutates it and hands out
read-only snapshots.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Sequence

SEPARATOR = " ||| "

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_surface(surface: str) -> str:
    """Casefold, trim and collapse whitespace. Identity key for propositions."""
    return " ".join(surface.split()).casefold()


def tokenize_for_match(text: str) -> list[str]:
    """Casefolded, punctuation-stripped whitespace tokens.

    This is the shared analyzer used for occurrence checks and retrieval;
    answer-metric normalization lives in `evaluation` and differs (it also
    drops articles).
    """
    return [t for t in (tok.translate(_PUNCT_TABLE) for tok in text.casefold().split()) if t]


def render_concatenation(parts: Sequence[str]) -> str:
    """Join input slots with the canonical separator.

    Empty parts still occupy a slot, so the result is invertible given the
    part count (as long as no part contains the separator itself).
    """
    if not parts:
        raise ValueError("render_concatenation requires at least one part")
    return SEPARATOR.join(parts)


def render_propositions(propositions: Sequence["Proposition"]) -> str:
    """Comma-joined proposition surfaces, in CG order."""
    return ", ".join(p.surface for p in propositions)


class Status(str, Enum):
    SELECTED = "selected"
    RETAINED = "retained"


@dataclass(frozen=True, eq=False)
class Proposition:
    """One unit of common-ground information.

    Equality and hashing go through the normalized form: two propositions
    with the same normalized text are the same CG entry regardless of the
    turn they came from.
    """

    surface: str
    origin_turn: int = 0
    normalized: str = field(init=False, repr=False)

    def __post_init__(self) -> None:
        norm = normalize_surface(self.surface)
        if not norm:
            raise ValueError("proposition surface must be non-empty")
        object.__setattr__(self, "normalized", norm)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Proposition):
            return NotImplemented
        return self.normalized == other.normalized

    def __hash__(self) -> int:
        return hash(self.normalized)


@dataclass
class _Entry:
    proposition: Proposition
    status: Status


class CommonGround:
    """Ordered, deduplicated accumulation of propositions with per-turn status.

    Membership is set-like over normalized forms: inserting a duplicate is a
    no-op and the original origin_turn wins. Selection never deletes; it only
    flips statuses between `selected` and `retained`.
    """

    def __init__(self, propositions: Sequence[Proposition] = ()) -> None:
        self._entries: dict[str, _Entry] = {}
        for p in propositions:
            self.add(p)

    def add(self, proposition: Proposition) -> bool:
        """Insert a proposition; returns True if it was new."""
        key = proposition.normalized
        if key in self._entries:
            return False
        self._entries[key] = _Entry(proposition, Status.SELECTED)
        return True

    def add_all(self, propositions: Sequence[Proposition]) -> int:
        return sum(1 for p in propositions if self.add(p))

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, Proposition):
            return item.normalized in self._entries
        if isinstance(item, str):
            return normalize_surface(item) in self._entries
        return False

    def __iter__(self) -> Iterator[tuple[Proposition, Status]]:
        return iter(self.entries())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CommonGround):
            return NotImplemented
        return [(p.surface, p.origin_turn, s) for p, s in self.entries()] == [
            (p.surface, p.origin_turn, s) for p, s in other.entries()
        ]

    def __repr__(self) -> str:
        marked = ", ".join(
            f"{'*' if s is Status.SELECTED else ' '}{p.surface!r}" for p, s in self.entries()
        )
        return f"CommonGround([{marked}])"

    def entries(self) -> list[tuple[Proposition, Status]]:
        """All entries ordered by origin turn, then insertion order."""
        items = [(e.proposition, e.status) for e in self._entries.values()]
        items.sort(key=lambda item: item[0].origin_turn)  # stable: keeps insertion order
        return items

    def full(self) -> list[Proposition]:
        return [p for p, _ in self.entries()]

    def selected(self) -> list[Proposition]:
        return [p for p, s in self.entries() if s is Status.SELECTED]

    def status_of(self, item: Proposition | str) -> Optional[Status]:
        key = item.normalized if isinstance(item, Proposition) else normalize_surface(item)
        entry = self._entries.get(key)
        return entry.status if entry else None

    def apply_selection(self, selected_keys: set[str]) -> None:
        """Re-mark every entry: selected if its normalized form is in the set."""
        for key, entry in self._entries.items():
            entry.status = Status.SELECTED if key in selected_keys else Status.RETAINED

    def snapshot(self) -> "CommonGround":
        """Immutable-by-convention copy of the full view."""
        copy = CommonGround()
        for p, s in self.entries():
            copy._entries[p.normalized] = _Entry(p, s)
        return copy

    def snapshot_selected(self) -> "CommonGround":
        """Copy holding only the selected entries."""
        copy = CommonGround()
        for p, s in self.entries():
            if s is Status.SELECTED:
                copy._entries[p.normalized] = _Entry(p, s)
        return copy


@dataclass(frozen=True)
class DocumentContext:
    """Per-conversation document context: article title plus first sentence."""

    title: str
    first_sentence: str

    def render(self) -> str:
        return f"{self.title}: {self.first_sentence}"


@dataclass(frozen=True)
class Turn:
    conversation_id: str
    turn_no: int
    question: str
    rewrite: Optional[str] = None
    answer: Optional[str] = None
    answer_source: Optional[str] = None
    gold_cg: Optional[tuple[Proposition, ...]] = None

    def rewrite_or_question(self) -> str:
        # a self-contained question is its own rewrite
        return self.rewrite if self.rewrite is not None else self.question


@dataclass(frozen=True)
class Conversation:
    conversation_id: str
    turns: tuple[Turn, ...]
    doc: Optional[DocumentContext] = None

    def __len__(self) -> int:
        return len(self.turns)


@dataclass(frozen=True)
class ConversationContext:
    """Input to every query formulation: doc, prior turns, current question."""

    doc: Optional[DocumentContext]
    history: tuple[tuple[str, str], ...]
    current_question: str

    @property
    def n(self) -> int:
        """Current turn index (= number of completed turns)."""
        return len(self.history)

    def doc_part(self) -> str:
        return self.doc.render() if self.doc is not None else ""


@dataclass(frozen=True)
class Passage:
    passage_id: str
    text: str
    source_url: Optional[str] = None
