"""Canonical JSON-lines dataset format: one turn record per line.

Fields: conversation_id, turn_no, question, rewrite, answer, answer_source,
doc_title, doc_first_sentence, gold_cg (list of surface strings). Absent
optional fields are omitted; serialization is key-sorted UTF-8, so a
load/save round trip of a canonical file is byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Optional

from .core import Conversation, DocumentContext, Proposition, Turn


class DatasetError(ValueError):
    """Malformed or inconsistent dataset input; message names the line."""


def _fail(lineno: Optional[int], message: str) -> None:
    prefix = f"line {lineno}: " if lineno is not None else ""
    raise DatasetError(prefix + message)


def _parse_record(record: dict, lineno: int) -> Turn:
    for name in ("conversation_id", "turn_no", "question"):
        if name not in record:
            _fail(lineno, f"missing required field {name!r}")
    cid = record["conversation_id"]
    turn_no = record["turn_no"]
    question = record["question"]
    if not isinstance(cid, str) or not cid:
        _fail(lineno, "conversation_id must be a non-empty string")
    if not isinstance(turn_no, int) or isinstance(turn_no, bool):
        _fail(lineno, "turn_no must be an integer")
    if not isinstance(question, str):
        _fail(lineno, "question must be a string")
    for name in ("rewrite", "answer", "answer_source", "doc_title", "doc_first_sentence"):
        value = record.get(name)
        if value is not None and not isinstance(value, str):
            _fail(lineno, f"{name} must be a string when present")
    gold_cg = record.get("gold_cg")
    propositions: Optional[tuple[Proposition, ...]] = None
    if gold_cg is not None:
        if not isinstance(gold_cg, list) or any(not isinstance(s, str) for s in gold_cg):
            _fail(lineno, "gold_cg must be a list of strings")
        seen: dict[str, Proposition] = {}
        for surface in gold_cg:
            try:
                prop = Proposition(surface, origin_turn=turn_no)
            except ValueError as exc:
                _fail(lineno, f"gold_cg entry invalid: {exc}")
            seen.setdefault(prop.normalized, prop)
        propositions = tuple(seen.values())
    return Turn(
        conversation_id=cid,
        turn_no=turn_no,
        question=question,
        rewrite=record.get("rewrite"),
        answer=record.get("answer"),
        answer_source=record.get("answer_source"),
        gold_cg=propositions,
    )


def load_dataset(path: str | Path) -> list[Conversation]:
    """Read a JSON-lines dataset, grouping turns into ordered conversations.

    1-based turn numbering is mapped to the internal 0-based convention.
    Raises DatasetError for malformed lines, duplicate turns, inconsistent
    doc fields and non-consecutive turn numbers.
    """
    path = Path(path)
    by_conv: dict[str, list[Turn]] = {}
    docs: dict[str, DocumentContext] = {}
    seen_turns: set[tuple[str, int]] = set()
    with path.open("r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                _fail(lineno, "blank line in dataset")
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                _fail(lineno, f"invalid JSON: {exc.msg}")
            if not isinstance(record, dict):
                _fail(lineno, "record must be a JSON object")
            turn = _parse_record(record, lineno)
            key = (turn.conversation_id, turn.turn_no)
            if key in seen_turns:
                _fail(lineno, f"duplicate turn {turn.turn_no} in conversation {turn.conversation_id!r}")
            seen_turns.add(key)
            title = record.get("doc_title")
            first = record.get("doc_first_sentence")
            if (title is None) != (first is None):
                _fail(lineno, "doc_title and doc_first_sentence must appear together")
            if title is not None:
                doc = DocumentContext(title=title, first_sentence=first)
                existing = docs.get(turn.conversation_id)
                if existing is not None and existing != doc:
                    _fail(lineno, f"conflicting doc for conversation {turn.conversation_id!r}")
                docs[turn.conversation_id] = doc
            by_conv.setdefault(turn.conversation_id, []).append(turn)

    conversations: list[Conversation] = []
    for cid, turns in by_conv.items():
        turns.sort(key=lambda t: t.turn_no)
        offset = 1 if turns[0].turn_no == 1 else 0
        if offset:
            turns = [
                Turn(
                    conversation_id=t.conversation_id,
                    turn_no=t.turn_no - 1,
                    question=t.question,
                    rewrite=t.rewrite,
                    answer=t.answer,
                    answer_source=t.answer_source,
                    gold_cg=tuple(
                        Proposition(p.surface, origin_turn=t.turn_no - 1) for p in t.gold_cg
                    )
                    if t.gold_cg is not None
                    else None,
                )
                for t in turns
            ]
        for expected, turn in enumerate(turns):
            if turn.turn_no != expected:
                _fail(
                    None,
                    f"non-consecutive turn numbers in conversation {cid!r}: "
                    f"expected {expected}, found {turn.turn_no}",
                )
        conversations.append(Conversation(conversation_id=cid, turns=tuple(turns), doc=docs.get(cid)))
    return conversations


def turn_to_record(turn: Turn, doc: Optional[DocumentContext]) -> dict:
    record: dict = {
        "conversation_id": turn.conversation_id,
        "turn_no": turn.turn_no,
        "question": turn.question,
    }
    if turn.rewrite is not None:
        record["rewrite"] = turn.rewrite
    if turn.answer is not None:
        record["answer"] = turn.answer
    if turn.answer_source is not None:
        record["answer_source"] = turn.answer_source
    if doc is not None:
        record["doc_title"] = doc.title
        record["doc_first_sentence"] = doc.first_sentence
    if turn.gold_cg is not None:
        record["gold_cg"] = [p.surface for p in turn.gold_cg]
    return record


def save_dataset(conversations: Iterable[Conversation], path: str | Path) -> None:
    """Write conversations in the canonical key-sorted JSON-lines form."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for conv in conversations:
            for turn in conv.turns:
                record = turn_to_record(turn, conv.doc)
                handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def load_doc_source(path: str | Path) -> dict[str, DocumentContext]:
    """Read a conversation_id -> document context mapping (JSON-lines)."""
    path = Path(path)
    mapping: dict[str, DocumentContext] = {}
    with path.open("r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                _fail(lineno, f"invalid JSON: {exc.msg}")
            for name in ("conversation_id", "title", "first_sentence"):
                if not isinstance(record.get(name), str):
                    _fail(lineno, f"missing or non-string field {name!r}")
            mapping[record["conversation_id"]] = DocumentContext(
                title=record["title"], first_sentence=record["first_sentence"]
            )
    return mapping


def save_doc_source(mapping: dict[str, DocumentContext], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for cid in sorted(mapping):
            doc = mapping[cid]
            record = {"conversation_id": cid, "first_sentence": doc.first_sentence, "title": doc.title}
            handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
