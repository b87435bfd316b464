from cground.dataset import load_dataset
from cground.fixtures import desk_fixture, oracle_fixture, salary_fixture, write_fixture_files
from cground.goldcg import doc_coverage
from cground.retrieval import load_passages


class TestDeskFixture:
    def test_shape(self):
        conversations, passages, doc_source = desk_fixture()
        assert len(conversations) == 15
        assert len(passages) == 200
        assert len({p.passage_id for p in passages}) == 200
        assert 0.6 < doc_coverage(conversations) < 0.8

    def test_every_turn_has_gold(self):
        conversations, _, _ = desk_fixture()
        for conv in conversations:
            for turn in conv.turns:
                assert turn.gold_cg
                assert turn.answer and turn.answer_source

    def test_gold_passage_exists_per_turn(self):
        conversations, passages, _ = desk_fixture()
        by_url = {p.source_url for p in passages}
        for conv in conversations:
            for turn in conv.turns:
                assert turn.answer_source in by_url

    def test_answers_are_contained_in_their_gold_passage(self):
        from cground.goldcg import occurs_in

        conversations, passages, _ = desk_fixture()
        by_url = {p.source_url: p for p in passages}
        for conv in conversations:
            for turn in conv.turns:
                assert occurs_in(turn.answer, by_url[turn.answer_source].text), (
                    conv.conversation_id,
                    turn.turn_no,
                )

    def test_determinism(self):
        first = desk_fixture()
        second = desk_fixture()
        assert [p.text for p in first[1]] == [p.text for p in second[1]]


class TestOracleFixture:
    def test_shape(self):
        conversations, passages = oracle_fixture()
        assert len(conversations) == 10
        assert all(len(c.turns) == 2 for c in conversations)
        assert len({p.passage_id for p in passages}) == len(passages)

    def test_gold_answers_are_reader_spans(self):
        # the defining property of this fixture: on the gold passage, the
        # lexical reader extracts exactly the gold answer for the gold-CG query
        from cground.core import render_concatenation, render_propositions
        from cground.evaluation import token_f1
        from cground.reading import LexicalReader

        conversations, passages = oracle_fixture()
        by_url = {p.source_url: p for p in passages}
        reader = LexicalReader()
        for conv in conversations:
            for turn in conv.turns:
                query = render_concatenation(
                    [render_propositions(list(turn.gold_cg)), turn.question]
                )
                spans = reader.read(by_url[turn.answer_source], query)
                assert spans, (conv.conversation_id, turn.turn_no)
                assert token_f1(spans[0].text, turn.answer) == 1.0, (
                    conv.conversation_id,
                    turn.turn_no,
                    spans[0].text,
                )


class TestSalaryFixture:
    def test_gold_cg_matches_worked_examples(self):
        (conv,), _ = salary_fixture()
        assert {p.surface for p in conv.turns[0].gold_cg} == {
            "the average starting salary", "a physician assistant", "the UK",
        }
        assert {p.surface for p in conv.turns[1].gold_cg} == {
            "the average starting salary", "a physician assistant", "the US",
        }


def test_write_fixture_files_round_trips(tmp_path):
    files = write_fixture_files(tmp_path)
    assert sorted(files) == [
        "desk_collection", "desk_dataset", "desk_doc_source",
        "oracle_collection", "oracle_dataset",
        "salary_collection", "salary_dataset",
    ]
    desk = load_dataset(files["desk_dataset"])
    assert len(desk) == 15
    assert all(t.gold_cg is not None for c in desk for t in c.turns)
    assert len(load_passages(files["desk_collection"])) == 200
    oracle = load_dataset(files["oracle_dataset"])
    assert len(oracle) == 10
    assert len(load_passages(files["salary_collection"])) >= 2
