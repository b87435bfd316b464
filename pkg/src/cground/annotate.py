"""Token-level linguistic annotation behind a backend-agnostic interface.

The reference backend is a deterministic lexicon + suffix tagger with
capitalization-based entity detection. It is meant for fixtures and offline
runs; a real tagger plugs in through the adapter protocol (task "annotate").

Noun chunks are maximal DET? ADJ* (NOUN|PROPN|entity)+ spans, with one
extension: a nominal run immediately preceded by a copula absorbs a trailing
adjective run ("is 36 years old" yields the chunk "36 years old"). Chunk
surfaces are always contiguous substrings of the input.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Protocol

from .core import Proposition, tokenize_for_match

_PUNCT_CHARS = set(string.punctuation) | set("’‘“”–—…¿¡")


class Pos(str, Enum):
    NOUN = "NOUN"
    PROPN = "PROPN"
    ADJ = "ADJ"
    DET = "DET"
    VERB = "VERB"
    OTHER = "OTHER"


ARTICLES = frozenset({"a", "an", "the"})

WH_WORDS = frozenset(
    {
        "what", "which", "who", "whom", "whose", "where", "when", "why", "how", "whether",
        "what's", "who's", "where's", "when's", "how's", "why's", "which's",
    }
)

PRONOUNS = frozenset(
    {
        "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them",
        "my", "your", "his", "her", "hers", "its", "our", "their", "mine", "yours",
        "ours", "theirs", "myself", "yourself", "himself", "herself", "itself",
        "ourselves", "themselves", "this", "that", "these", "those", "there",
        "someone", "anyone", "everyone", "somebody", "anybody", "everybody",
        "nobody", "something", "anything", "everything", "nothing", "one", "ones",
        "it's", "he's", "she's", "that's", "there's", "i'm", "you're", "we're",
        "they're", "i've", "you've", "we've", "they've", "i'll", "you'll", "he'll",
        "she'll", "we'll", "they'll", "i'd", "you'd", "he'd", "she'd", "we'd", "they'd",
    }
)

FUNCTION_WORDS = frozenset(
    {
        "of", "in", "on", "at", "by", "for", "with", "about", "against", "between",
        "among", "into", "through", "during", "before", "after", "above", "below",
        "to", "from", "up", "down", "out", "off", "over", "under", "again", "further",
        "then", "once", "here", "now", "and", "or", "but", "if", "because", "as",
        "until", "while", "than", "so", "nor", "not", "no", "yes", "also", "very",
        "too", "just", "only", "both", "either", "neither", "each", "few", "more",
        "most", "other", "another", "some", "any", "all", "every", "such", "same", "per",
        "via", "ever", "never", "always", "often", "sometimes", "rather", "quite",
        "much", "many", "several", "else", "etc", "e.g", "i.e", "inside",
        "outside", "near", "behind", "beneath", "beside", "around", "along",
        "across", "within", "without", "toward", "towards", "upon", "onto",
    }
)

BE_WORDS = frozenset({"is", "are", "was", "were", "am", "be", "been", "being"})

AUX_VERBS = frozenset(
    {
        "do", "does", "did", "done", "doing", "have", "has", "had", "having",
        "can", "could", "will", "would", "shall", "should", "may", "might", "must",
        "won't", "don't", "doesn't", "didn't", "can't", "cannot", "couldn't",
        "wouldn't", "shouldn't", "isn't", "aren't", "wasn't", "weren't",
        "hasn't", "haven't", "hadn't", "mustn't", "let's",
    }
)

COMMON_VERBS = frozenset(
    {
        "play", "plays", "played", "playing", "go", "goes", "went", "gone", "going",
        "come", "comes", "came", "coming", "get", "gets", "got", "gotten", "getting",
        "make", "makes", "made", "making", "take", "takes", "took", "taken", "taking",
        "say", "says", "said", "saying", "know", "knows", "knew", "known",
        "think", "thinks", "thought", "see", "sees", "saw", "seen", "look", "looks",
        "looked", "want", "wants", "wanted", "use", "uses", "used", "using",
        "find", "finds", "found", "give", "gives", "gave", "given", "tell", "tells",
        "told", "work", "works", "worked", "call", "calls", "called", "try", "tries",
        "tried", "ask", "asks", "asked", "need", "needs", "needed", "feel", "feels",
        "felt", "become", "becomes", "became", "leave", "leaves", "left", "put",
        "puts", "mean", "means", "meant", "keep", "keeps", "kept", "begin", "begins",
        "began", "begun", "seem", "seems", "seemed", "help", "helps", "helped",
        "talk", "talks", "talked", "turn", "turns", "turned", "start", "starts",
        "started", "show", "shows", "showed", "shown", "hear", "hears", "heard",
        "run", "runs", "ran", "running", "move", "moves", "moved", "live", "lives",
        "lived", "believe", "believes", "believed", "happen", "happens", "happened",
        "write", "writes", "wrote", "written", "read", "reads", "speak", "speaks",
        "spoke", "spoken", "win", "wins", "won", "winning", "lose", "loses", "lost",
        "beat", "beats", "join", "joins", "joined", "lead", "leads", "led", "born",
        "die", "dies", "died", "grow", "grows", "grew", "grown", "build", "builds",
        "built", "send", "sends", "sent", "stay", "stays", "stayed", "fall", "falls",
        "fell", "fallen", "reach", "reaches", "reached", "sit", "sits", "sat",
        "stand", "stands", "stood", "lie", "lies", "lay", "hold", "holds", "held",
        "bring", "brings", "brought", "carry", "carries", "carried", "buy", "buys",
        "bought", "pay", "pays", "paid", "meet", "meets", "met", "wear", "wears",
        "wore", "worn", "invent", "invents", "invented", "discover", "discovers",
        "discovered", "publish", "publishes", "published", "appear", "appears",
        "appeared", "measure", "measures", "measured", "patent", "patents",
        "patented", "adopt", "adopts", "adopted", "border", "borders", "bordered",
        "orbit", "orbits", "orbited", "flow", "flowed", "capture", "captures",
        "captured", "record", "records", "recorded", "feature", "features",
        "featured", "require", "requires", "required", "demand", "demands",
        "demanded", "reward", "rewards", "rewarded", "extend", "extends",
        "extended", "review", "reviews", "reviewed", "spoil", "spoils", "spoiled",
        "tarnish", "tarnishes", "tarnished", "lift", "lifts", "lifted", "drink",
        "drinks", "drank", "eat", "eats", "ate", "eaten", "paint", "paints",
        "painted", "compose", "composes", "composed", "design", "designs",
        "designed", "erupt", "erupts", "erupted", "climb", "climbs", "climbed",
        "cross", "crosses", "crossed", "open", "opens", "opened", "close", "closes",
        "closed", "teach", "teaches", "taught", "study", "studies", "studied",
        "train", "trains", "trained", "serve", "serves", "served", "cover",
        "covers", "covered", "span", "spans", "spanned", "housed",
        "host", "hosts", "hosted", "launch", "launches", "launched",
        "land", "lands", "landed", "name", "names", "named", "captain", "captains",
        "captained", "store", "stores", "stored", "visit", "visits", "visited",
        "receive", "receives", "received", "order", "orders", "ordered", "plan",
        "plans", "planned", "hang", "hangs", "hung", "link", "links", "linked",
        "suit", "suits", "suited", "honor", "honors", "honored", "repeat",
        "repeats", "repeated", "mention", "mentions", "mentioned", "quote",
        "quotes", "quoted", "remember", "remembers", "remembered", "rise",
        "rises", "rose", "risen", "stretch", "stretches", "stretched", "guard",
        "guards", "guarded", "prefer", "prefers", "preferred", "vary", "varies",
        "varied", "shock", "shocks", "shocked", "hug", "hugs", "hugged", "mint",
        "mints", "minted", "treasure", "treasures", "treasured", "travel",
        "travels", "traveled", "feed", "feeds", "fed", "sink", "sinks", "sank",
        "raise", "raises", "raised", "wait", "waits", "waited", "choose",
        "chooses", "chose", "chosen", "return", "returns", "returned",
        "achieve", "achieves", "achieved",
    }
)

ADJ_LEXICON = frozenset(
    {
        "old", "new", "good", "bad", "big", "small", "great", "little", "high",
        "low", "long", "short", "true", "false", "right", "wrong", "young",
        "important", "average", "different", "large", "larger", "largest", "early",
        "late", "hot", "cold", "warm", "cool", "real", "best", "better", "worst",
        "worse", "free", "full", "empty", "easy", "hard", "strong", "weak", "rich",
        "poor", "nice", "fast", "slow", "deep", "flat", "wide", "narrow", "heavy",
        "light", "common", "rare", "main", "major", "minor", "general", "popular",
        "famous", "dense", "quiet", "loud", "dry", "wet", "tall", "vast", "ancient",
        "modern", "local", "annual", "whole", "red", "blue", "green", "white",
        "black", "golden", "next", "last", "first", "second", "third",
    }
)

ADJ_SUFFIXES = ("ful", "less", "ish", "ous", "ive", "able", "ible")

CLOSED_CLASS_WORDS = frozenset(
    ARTICLES | WH_WORDS | PRONOUNS | FUNCTION_WORDS | BE_WORDS | AUX_VERBS | COMMON_VERBS
)

THIRD_PERSON_PRONOUNS = frozenset(
    {"he", "she", "it", "they", "him", "her", "them", "his", "hers", "its", "their", "theirs"}
)


def content_tokens(text: str) -> list[str]:
    """Match tokens minus closed-class words; the lexical-overlap vocabulary."""
    return [t for t in tokenize_for_match(text) if t not in CLOSED_CLASS_WORDS]


@dataclass(frozen=True)
class AnnotatedToken:
    text: str
    index: int
    pos: Pos
    is_entity: bool = False
    entity_id: Optional[int] = None
    start: int = 0
    end: int = 0


@dataclass(frozen=True)
class AnnotatedSentence:
    text: str
    tokens: tuple[AnnotatedToken, ...]
    chunks: tuple[tuple[int, int], ...]

    def chunk_surface(self, chunk: tuple[int, int]) -> str:
        start, end = chunk
        return self.text[self.tokens[start].start : self.tokens[end - 1].end]

    def chunk_surfaces(self) -> list[str]:
        return [self.chunk_surface(c) for c in self.chunks]


class Annotator(Protocol):
    def annotate(self, text: str) -> AnnotatedSentence: ...


def _raw_tokens(text: str) -> list[tuple[str, int, int]]:
    """Whitespace pieces with leading/trailing punctuation split off."""
    out: list[tuple[str, int, int]] = []
    pos = 0
    for piece in text.split():
        start = text.index(piece, pos)
        pos = start + len(piece)
        lo, hi = 0, len(piece)
        while lo < hi and piece[lo] in _PUNCT_CHARS:
            lo += 1
        while hi > lo and piece[hi - 1] in _PUNCT_CHARS:
            hi -= 1
        if lo > 0:
            out.append((piece[:lo], start, start + lo))
        if hi > lo:
            out.append((piece[lo:hi], start + lo, start + hi))
        if hi < len(piece):
            out.append((piece[hi:], start + hi, start + len(piece)))
    return out


class ReferenceAnnotator:
    """Deterministic tagger: closed-class lexicons, capitalization, suffixes.

    include_determiners=False switches to the strict chunk rule that drops
    leading articles from chunks.
    """

    def __init__(self, include_determiners: bool = True) -> None:
        self.include_determiners = include_determiners

    def annotate(self, text: str) -> AnnotatedSentence:
        if not text or not text.strip():
            raise ValueError("annotate requires non-empty text")
        raw = _raw_tokens(text)
        first_alpha = next((i for i, (t, _, _) in enumerate(raw) if any(c.isalpha() for c in t)), -1)
        tokens: list[AnnotatedToken] = []
        entity_counter = -1
        prev_entity = False
        for i, (tok, start, end) in enumerate(raw):
            pos, is_entity = self._tag(tok, sentence_initial=(i == first_alpha))
            entity_id: Optional[int] = None
            if is_entity:
                if not prev_entity:
                    entity_counter += 1
                entity_id = entity_counter
            prev_entity = is_entity
            tokens.append(
                AnnotatedToken(
                    text=tok, index=i, pos=pos, is_entity=is_entity,
                    entity_id=entity_id, start=start, end=end,
                )
            )
        chunks = self._chunks(tokens)
        return AnnotatedSentence(text=text, tokens=tuple(tokens), chunks=tuple(chunks))

    def _tag(self, token: str, sentence_initial: bool) -> tuple[Pos, bool]:
        lowered = token.casefold()
        if not any(c.isalnum() for c in token):
            return Pos.OTHER, False
        if lowered in ARTICLES:
            return Pos.DET, False
        # all-caps acronyms outrank the closed-class lists ("US" vs "us")
        if not sentence_initial and len(token) >= 2 and token.isupper() and token.isalpha():
            return Pos.PROPN, True
        if lowered in WH_WORDS or lowered in PRONOUNS or lowered in FUNCTION_WORDS:
            return Pos.OTHER, False
        if lowered in BE_WORDS or lowered in AUX_VERBS or lowered in COMMON_VERBS:
            return Pos.VERB, False
        if lowered in ADJ_LEXICON:
            return Pos.ADJ, False
        if not sentence_initial and token[:1].isupper():
            return Pos.PROPN, True
        if lowered.endswith("ly") and len(lowered) > 3:
            return Pos.OTHER, False
        if lowered.endswith("ing") and len(lowered) > 4:
            return Pos.ADJ, False
        if any(lowered.endswith(suf) and len(lowered) > len(suf) + 1 for suf in ADJ_SUFFIXES):
            return Pos.ADJ, False
        return Pos.NOUN, False

    @staticmethod
    def _is_nominal(token: AnnotatedToken) -> bool:
        return token.pos in (Pos.NOUN, Pos.PROPN) or token.is_entity

    def _chunks(self, tokens: list[AnnotatedToken]) -> list[tuple[int, int]]:
        spans: list[tuple[int, int]] = []
        n = len(tokens)
        i = 0
        while i < n:
            j = i
            if self.include_determiners and tokens[j].pos is Pos.DET:
                j += 1
            while j < n and tokens[j].pos is Pos.ADJ:
                j += 1
            k = j
            while k < n and self._is_nominal(tokens[k]):
                k += 1
            if k > j:
                start = i if self.include_determiners else (j if tokens[i].pos is Pos.DET else i)
                end = k
                pre = tokens[start - 1] if start > 0 else None
                if pre is not None and pre.pos is Pos.VERB and pre.text.casefold() in BE_WORDS:
                    while end < n and tokens[end].pos is Pos.ADJ:
                        end += 1
                spans.append((start, end))
                i = end
            else:
                i += 1
        return spans


def extract_propositions(sentence: AnnotatedSentence, origin_turn: int = 0) -> list[Proposition]:
    """One proposition per chunk, deduplicated by normalized form."""
    out: list[Proposition] = []
    seen: set[str] = set()
    for chunk in sentence.chunks:
        surface = sentence.chunk_surface(chunk)
        prop = Proposition(surface, origin_turn=origin_turn)
        if prop.normalized not in seen:
            seen.add(prop.normalized)
            out.append(prop)
    return out


class AdapterAnnotator:
    """Annotation backend speaking the adapter protocol (task "annotate")."""

    def __init__(self, endpoint, timeout: float = 30.0) -> None:
        self.endpoint = endpoint
        self.timeout = timeout

    def annotate(self, text: str) -> AnnotatedSentence:
        from .adapter import AdapterCallError, AdapterRequest, call, new_request_id

        if not text or not text.strip():
            raise ValueError("annotate requires non-empty text")
        request = AdapterRequest(task="annotate", request_id=new_request_id(), payload={"text": text})
        response = call(self.endpoint, request, timeout=self.timeout)
        if response.status != "ok":
            raise AdapterCallError(response.error_message or "annotate call failed")
        payload = response.payload or {}
        try:
            tokens = tuple(
                AnnotatedToken(
                    text=t["text"],
                    index=i,
                    pos=Pos(t["pos"]),
                    is_entity=bool(t.get("is_entity", False)),
                    entity_id=t.get("entity_id"),
                    start=int(t["start"]),
                    end=int(t["end"]),
                )
                for i, t in enumerate(payload["tokens"])
            )
            chunks = tuple((int(s), int(e)) for s, e in payload["chunks"])
        except (KeyError, TypeError, ValueError) as exc:
            raise AdapterCallError(f"malformed annotate payload: {exc}") from exc
        return AnnotatedSentence(text=text, tokens=tokens, chunks=chunks)


def make_annotator(name: str = "reference", endpoint=None, include_determiners: bool = True) -> Annotator:
    if name == "reference":
        return ReferenceAnnotator(include_determiners=include_determiners)
    if name == "external":
        if endpoint is None:
            raise ValueError("external annotator requires an endpoint")
        return AdapterAnnotator(endpoint)
    raise ValueError(f"unknown annotator backend {name!r}")
