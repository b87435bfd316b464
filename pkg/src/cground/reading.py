"""Answer-span extraction and retriever/reader score fusion.

The lexical reference reader keeps the whole pipeline runnable with zero
neural dependencies: it scores sentences by content-token overlap with the
reader query, then extracts a noun chunk of the best sentence, preferring
chunks that add material beyond the query (an answer should not merely echo
the question) and breaking ties by proximity to the query terms. Parity with
a trained extractive reader is explicitly not claimed.

The final answer score is (1 - mu) * s_ret + mu * s_rea on the min-max
normalized components.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Optional, Protocol, Sequence

from .adapter import AdapterCallError, AdapterRequest, call, new_request_id
from .annotate import Annotator, ReferenceAnnotator, content_tokens
from .core import Passage, tokenize_for_match
from .retrieval import RankedPassage

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class AnswerCandidate:
    text: str
    passage_id: str
    s_rea: float
    s_rea_norm: float = 0.0
    fused: float = 0.0


class Reader(Protocol):
    def read(self, passage: Passage, reader_query: str) -> list[AnswerCandidate]: ...


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_BOUNDARY.split(text) if s.strip()]


class LexicalReader:
    """Deterministic overlap-based span extractor; at most one span per passage."""

    def __init__(self, annotator: Optional[Annotator] = None) -> None:
        self.annotator = annotator or ReferenceAnnotator()

    def read(self, passage: Passage, reader_query: str) -> list[AnswerCandidate]:
        query_tokens = set(content_tokens(reader_query))
        if not query_tokens:
            return []
        sentences = split_sentences(passage.text)
        if not sentences:
            return []
        best_sentence = None
        best_overlap = 0
        for sentence in sentences:
            overlap = len(set(content_tokens(sentence)) & query_tokens)
            if overlap > best_overlap:
                best_overlap = overlap
                best_sentence = sentence
        if best_sentence is None or best_overlap == 0:
            return []
        span = self._extract_span(best_sentence, query_tokens)
        if span is None:
            return []
        s_rea = best_overlap / len(query_tokens)
        return [AnswerCandidate(text=span, passage_id=passage.passage_id, s_rea=s_rea)]

    def _extract_span(self, sentence: str, query_tokens: set[str]) -> Optional[str]:
        annotated = self.annotator.annotate(sentence)
        if not annotated.chunks:
            return None
        # positions of query terms inside the sentence, for proximity ranking
        query_positions = [
            tok.index
            for tok in annotated.tokens
            if (match := tokenize_for_match(tok.text)) and match[0] in query_tokens
        ]
        candidates = []
        for chunk in annotated.chunks:
            surface = annotated.chunk_surface(chunk)
            novel = set(content_tokens(surface)) - query_tokens
            candidates.append((chunk, surface, bool(novel)))
        informative = [c for c in candidates if c[2]] or candidates

        def distance(chunk: tuple[int, int]) -> int:
            if not query_positions:
                return 0
            start, end = chunk
            return min(abs(i - pos) for i in range(start, end) for pos in query_positions)

        best = min(informative, key=lambda c: (distance(c[0]), c[0][0]))
        return best[1]


class ExternalReader:
    """Adapter-backed reader (task "read"); may return several spans."""

    def __init__(self, endpoint, timeout: float = 30.0) -> None:
        self.endpoint = endpoint
        self.timeout = timeout

    def read(self, passage: Passage, reader_query: str) -> list[AnswerCandidate]:
        payload = {"passage": passage.text, "passage_id": passage.passage_id, "query": reader_query}
        request = AdapterRequest(task="read", request_id=new_request_id(), payload=payload)
        response = call(self.endpoint, request, timeout=self.timeout)
        if response.status != "ok":
            raise AdapterCallError(response.error_message or "read call failed")
        spans = (response.payload or {}).get("spans")
        if not isinstance(spans, list):
            raise AdapterCallError("read payload must carry a list of spans")
        candidates = []
        for span in spans:
            try:
                candidates.append(
                    AnswerCandidate(
                        text=str(span["text"]),
                        passage_id=passage.passage_id,
                        s_rea=float(span["score"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise AdapterCallError(f"malformed span: {exc}") from exc
        return candidates


def fuse(
    candidates: Sequence[tuple[RankedPassage, AnswerCandidate]], mu: float, raw: bool = False
) -> list[AnswerCandidate]:
    """Blend normalized retriever and reader scores and rank the candidates.

    mu=0 reproduces the retriever ordering restricted to the candidates;
    mu=1 reproduces the reader-score ordering. Ties break by passage rank,
    then span text. raw=True blends the unnormalized scores instead, for
    sensitivity checks against the normalization choice.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must be in [0, 1]")
    if not candidates:
        return []
    scores = [cand.s_rea for _, cand in candidates]
    lo, hi = min(scores), max(scores)
    fused: list[tuple[RankedPassage, AnswerCandidate]] = []
    for ranked, cand in candidates:
        s_rea_norm = 1.0 if hi == lo else (cand.s_rea - lo) / (hi - lo)
        if raw:
            final = (1.0 - mu) * ranked.s_ret + mu * cand.s_rea
        else:
            final = (1.0 - mu) * ranked.s_ret_norm + mu * s_rea_norm
        fused.append((ranked, replace(cand, s_rea_norm=s_rea_norm, fused=final)))
    fused.sort(key=lambda pair: (-pair[1].fused, pair[0].rank, pair[1].text))
    return [cand for _, cand in fused]
