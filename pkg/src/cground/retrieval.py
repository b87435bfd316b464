"""BM25 passage retrieval over an in-memory inverted index.

Scoring is Okapi BM25 with the Lucene-style non-negative IDF:

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
    w(t,d) = idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len/avgdl))

The query contributes one accumulation per token occurrence, so repeated
query terms count repeatedly. Raw scores are min-max normalized within the
result list so they are commensurable with reader scores at fusion time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .annotate import CLOSED_CLASS_WORDS
from .core import Passage, tokenize_for_match
from .stem import porter_stem


class CollectionError(ValueError):
    """Bad passage collection input (duplicates, empty collection)."""


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.82
    b: float = 0.68
    top_n: int = 20

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0 <= self.b <= 1:
            raise ValueError("b must be in [0, 1]")
        if self.top_n < 1:
            raise ValueError("top_n must be at least 1")


@dataclass(frozen=True)
class AnalyzerConfig:
    use_stemming: bool = False
    remove_stopwords: bool = False


def analyze(text: str, config: AnalyzerConfig = AnalyzerConfig()) -> list[str]:
    """Casefold, strip punctuation, split on whitespace; optional extras."""
    tokens = tokenize_for_match(text)
    if config.remove_stopwords:
        tokens = [t for t in tokens if t not in CLOSED_CLASS_WORDS]
    if config.use_stemming:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


@dataclass(frozen=True)
class RankedPassage:
    passage: Passage
    s_ret: float
    s_ret_norm: float
    rank: int


class Bm25Index:
    """Immutable after build; safe for unlimited concurrent readers."""

    def __init__(self, passages: Sequence[Passage], analyzer: AnalyzerConfig = AnalyzerConfig()) -> None:
        passages = list(passages)
        if not passages:
            raise CollectionError("empty collection")
        self.analyzer = analyzer
        self.passages: dict[str, Passage] = {}
        self.doc_len: dict[str, int] = {}
        self.postings: dict[str, dict[str, int]] = {}
        for passage in passages:
            if passage.passage_id in self.passages:
                raise CollectionError(f"duplicate passage_id {passage.passage_id!r}")
            self.passages[passage.passage_id] = passage
            tokens = analyze(passage.text, analyzer)
            self.doc_len[passage.passage_id] = len(tokens)
            for token in tokens:
                self.postings.setdefault(token, {})
                self.postings[token][passage.passage_id] = (
                    self.postings[token].get(passage.passage_id, 0) + 1
                )
        self.n_passages = len(self.passages)
        total = sum(self.doc_len.values())
        self.avgdl = total / self.n_passages if total else 1.0

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        df = self.df(term)
        return math.log(1.0 + (self.n_passages - df + 0.5) / (df + 0.5))

    def search(self, query: str, params: Bm25Params = Bm25Params()) -> list[RankedPassage]:
        """Top-n passages for a query; empty list for an empty analyzed query."""
        tokens = analyze(query, self.analyzer)
        if not tokens:
            return []
        k1, b = params.k1, params.b
        scores: dict[str, float] = {}
        for token in tokens:
            postings = self.postings.get(token)
            if not postings:
                continue
            idf = self.idf(token)
            for pid, tf in postings.items():
                denom = tf + k1 * (1.0 - b + b * self.doc_len[pid] / self.avgdl)
                scores[pid] = scores.get(pid, 0.0) + idf * tf * (k1 + 1.0) / denom
        if not scores:
            return []
        ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[: params.top_n]
        lo = ranked[-1][1]
        hi = ranked[0][1]
        out = []
        for rank, (pid, score) in enumerate(ranked, start=1):
            norm = 1.0 if hi == lo else (score - lo) / (hi - lo)
            out.append(
                RankedPassage(passage=self.passages[pid], s_ret=score, s_ret_norm=norm, rank=rank)
            )
        return out

    def fingerprint(self) -> str:
        """Digest of the index statistics; equal inputs build equal indexes."""
        import hashlib

        stats = {
            "avgdl": self.avgdl,
            "doc_len": self.doc_len,
            "n": self.n_passages,
            "postings": {t: dict(sorted(p.items())) for t, p in sorted(self.postings.items())},
        }
        return hashlib.sha256(
            json.dumps(stats, sort_keys=True, ensure_ascii=False).encode("utf-8")
        ).hexdigest()

    def save(self, path: str | Path) -> None:
        """Persist the collection and analyzer config; loading rebuilds the
        statistics deterministically, so save/load/save round-trips bit-exactly."""
        path = Path(path)
        payload = {
            "v": 1,
            "analyzer": {
                "remove_stopwords": self.analyzer.remove_stopwords,
                "use_stemming": self.analyzer.use_stemming,
            },
            "passages": [
                {"passage_id": p.passage_id, "source_url": p.source_url, "text": p.text}
                for p in self.passages.values()
            ],
        }
        with path.open("w", encoding="utf-8") as handle:
            json.dump(payload, handle, sort_keys=True, ensure_ascii=False)
            handle.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "Bm25Index":
        path = Path(path)
        with path.open("r", encoding="utf-8") as handle:
            payload = json.load(handle)
        if payload.get("v") != 1:
            raise CollectionError(f"unsupported index version {payload.get('v')!r}")
        analyzer = AnalyzerConfig(
            use_stemming=payload["analyzer"]["use_stemming"],
            remove_stopwords=payload["analyzer"]["remove_stopwords"],
        )
        passages = [
            Passage(passage_id=p["passage_id"], text=p["text"], source_url=p.get("source_url"))
            for p in payload["passages"]
        ]
        return cls(passages, analyzer)


def build_index(passages: Sequence[Passage], analyzer: AnalyzerConfig = AnalyzerConfig()) -> Bm25Index:
    return Bm25Index(passages, analyzer)


def search(index: Bm25Index, query: str, params: Bm25Params = Bm25Params()) -> list[RankedPassage]:
    return index.search(query, params)


def load_passages(path: str | Path) -> list[Passage]:
    """Read a passage collection (JSON-lines: passage_id, text, source_url)."""
    path = Path(path)
    passages: list[Passage] = []
    with path.open("r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CollectionError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(record.get("passage_id"), str) or not isinstance(
                record.get("text"), str
            ):
                raise CollectionError(f"line {lineno}: passage_id and text are required strings")
            passages.append(
                Passage(
                    passage_id=record["passage_id"],
                    text=record["text"],
                    source_url=record.get("source_url"),
                )
            )
    return passages


def save_passages(passages: Iterable[Passage], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for passage in passages:
            record: dict = {"passage_id": passage.passage_id, "text": passage.text}
            if passage.source_url is not None:
                record["source_url"] = passage.source_url
            handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
