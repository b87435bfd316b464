import pytest

from cground.core import Conversation, DocumentContext, Passage, Turn
from cground.goldcg import build_gold_cg
from cground.retrieval import Bm25Index


@pytest.fixture(scope="session")
def salary_conversation() -> Conversation:
    """The two-turn salary conversation (UK first, then the US follow-up)."""
    turns = (
        Turn(
            conversation_id="salary",
            turn_no=0,
            question="What's the average starting salary for a physician assistant in the UK?",
            rewrite=None,
            answer="In the UK, the average starting salary for a physician assistant is £30,000.",
            answer_source="fixture://salary/0",
        ),
        Turn(
            conversation_id="salary",
            turn_no=1,
            question="What about in the US?",
            rewrite="What's the average starting salary for a physician assistant in the US?",
            answer="In the US, the average starting salary for a physician assistant is $95,000.",
            answer_source="fixture://salary/1",
        ),
    )
    return build_gold_cg(Conversation(conversation_id="salary", turns=turns))


@pytest.fixture(scope="session")
def messi_conversation() -> Conversation:
    turns = (
        Turn(
            conversation_id="messi",
            turn_no=0,
            question="how old is Messi?",
            rewrite=None,
            answer="36 years old",
        ),
        Turn(
            conversation_id="messi",
            turn_no=1,
            question="which position does he play?",
            rewrite="which position does Messi play?",
            answer="Messi plays as a forward.",
        ),
    )
    return build_gold_cg(Conversation(conversation_id="messi", turns=turns))


@pytest.fixture(scope="session")
def tiny_passages() -> list[Passage]:
    return [
        Passage("p1", "Lionel Messi plays as a forward for his club.", "fixture://p/1"),
        Passage("p2", "The goalkeeper position is a lonely job on cold nights.", "fixture://p/2"),
        Passage("p3", "A quiet town holds a narrow market each week.", "fixture://p/3"),
    ]


@pytest.fixture(scope="session")
def tiny_index(tiny_passages) -> Bm25Index:
    return Bm25Index(tiny_passages)


@pytest.fixture(scope="session")
def doc_context() -> DocumentContext:
    return DocumentContext(title="Albert Camus", first_sentence="Albert Camus was a writer.")
