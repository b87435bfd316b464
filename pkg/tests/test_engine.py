import pytest

from cground.adapter import AdapterCallError, EchoBackend
from cground.core import (
    CommonGround,
    Conversation,
    ConversationContext,
    DocumentContext,
    Proposition,
    Status,
    Turn,
)
from cground.engine import (
    CgSession,
    ExternalGenerator,
    ExternalSelector,
    GeneratorConfig,
    OracleGenerator,
    OracleSelector,
    RuleGenerator,
    RuleSelector,
    make_generator,
    make_selector,
    replay,
)
from cground.goldcg import build_gold_cg, gold_selected_keys


def test_generator_config_validates_sources():
    with pytest.raises(ValueError):
        GeneratorConfig(context_sources=frozenset())
    with pytest.raises(ValueError):
        GeneratorConfig(context_sources=frozenset({"doc", "bogus"}))


class TestOracleGenerator:
    def test_returns_gold_of_current_turn(self, salary_conversation):
        gen = OracleGenerator(salary_conversation)
        ctx = ConversationContext(doc=None, history=(), current_question="ignored")
        assert {p.surface for p in gen.generate(ctx, GeneratorConfig())} == {
            "the average starting salary",
            "a physician assistant",
            "the UK",
        }

    def test_out_of_range_turn(self, salary_conversation):
        gen = OracleGenerator(salary_conversation)
        ctx = ConversationContext(doc=None, history=(("q", "a"),) * 5, current_question="q")
        with pytest.raises(ValueError):
            gen.generate(ctx, GeneratorConfig())


class TestRuleGenerator:
    def test_uses_question_and_most_recent_pair(self):
        gen = RuleGenerator()
        ctx = ConversationContext(
            doc=None,
            history=(
                ("Which league had the best shooters?", "The ABA kept percentage records."),
                ("What did Rick Barry achieve in the 1968-69 season?", "He led the league in scoring."),
            ),
            current_question="where did he come from?",
        )
        normals = {p.normalized for p in gen.generate(ctx, GeneratorConfig())}
        assert "rick barry" in normals
        assert "the aba" not in normals  # older turn, outside the recency window

    def test_without_question_dumps_full_history(self):
        gen = RuleGenerator()
        ctx = ConversationContext(
            doc=None,
            history=(
                ("Which league had the best shooters?", "The ABA kept percentage records."),
                ("What did Rick Barry achieve in the 1968-69 season?", "He led the league in scoring."),
            ),
            current_question="where did he come from?",
        )
        with_q = {p.normalized for p in gen.generate(ctx, GeneratorConfig())}
        without_q = {
            p.normalized
            for p in gen.generate(ctx, GeneratorConfig(include_current_question=False))
        }
        assert with_q < without_q  # strict superset without the question signal
        assert "the aba" in without_q

    def test_doc_only_at_first_turn(self):
        gen = RuleGenerator()
        doc = DocumentContext(title="Albert Camus", first_sentence="Albert Camus was a writer.")
        first = ConversationContext(doc=doc, history=(), current_question="When was he born?")
        later = ConversationContext(doc=doc, history=(("q", "a"),), current_question="What did he write?")
        assert "Albert Camus" in {p.surface for p in gen.generate(first, GeneratorConfig())}
        assert "Albert Camus" not in {p.surface for p in gen.generate(later, GeneratorConfig())}

    def test_context_source_ablations(self):
        gen = RuleGenerator()
        doc = DocumentContext(title="Albert Camus", first_sentence="Albert Camus was a writer.")
        ctx = ConversationContext(doc=doc, history=(("any news?", "The verdict came in."),),
                                  current_question="is it final?")
        doc_only = {p.normalized for p in gen.generate(ctx, GeneratorConfig(context_sources=frozenset({"doc"})))}
        conv_only = {p.normalized for p in gen.generate(ctx, GeneratorConfig(context_sources=frozenset({"conv"})))}
        assert "the verdict" in conv_only and "albert camus" not in conv_only
        assert "the verdict" not in doc_only  # doc applies at turn 0 only, so nothing here


class TestExternalBackends:
    def test_external_generator_with_echo_fixture(self):
        # the ablation values come from a canned fixture keyed by the payload
        history = [
            ["Which team did Rick Barry join?", "He joined a new league."],
            ["What was his free-throw percentage in the 1968-69 season?", "He led the league."],
        ]
        with_q_payload = {"doc": None, "history": history, "question": "where did he come from?"}
        without_q_payload = {"doc": None, "history": history, "question": None}
        backend = EchoBackend()
        backend.add("generate_cg", with_q_payload, {"propositions": ["Rick Barry"]})
        backend.add(
            "generate_cg",
            without_q_payload,
            {"propositions": ["the ABA", "free-throw percentage", "the 1968–69 season", "Rick Barry"]},
        )
        gen = ExternalGenerator(backend)
        ctx = ConversationContext(
            doc=None,
            history=tuple((q, a) for q, a in history),
            current_question="where did he come from?",
        )
        with_q = gen.generate(ctx, GeneratorConfig())
        without_q = gen.generate(ctx, GeneratorConfig(include_current_question=False))
        assert [p.surface for p in with_q] == ["Rick Barry"]
        assert {p.surface for p in without_q} == {
            "the ABA", "free-throw percentage", "the 1968–69 season", "Rick Barry",
        }
        assert {p.normalized for p in with_q} < {p.normalized for p in without_q}

    def test_external_generator_error_propagates(self):
        gen = ExternalGenerator(EchoBackend())  # empty fixtures: every key missing
        ctx = ConversationContext(doc=None, history=(), current_question="q")
        with pytest.raises(AdapterCallError, match="missing fixture"):
            gen.generate(ctx, GeneratorConfig())

    def test_external_selector_keeps_label_one(self):
        cg = CommonGround([Proposition("Messi"), Proposition("position")])
        backend = EchoBackend()
        digest = "Messi, position"
        backend.add(
            "classify",
            {"proposition": "Messi", "question": "q?", "context_digest": digest},
            {"label": 1, "score": 0.9},
        )
        backend.add(
            "classify",
            {"proposition": "position", "question": "q?", "context_digest": digest},
            {"label": 0, "score": 0.2},
        )
        selector = ExternalSelector(backend)
        selector.select(cg, "q?")
        assert [p.surface for p in cg.selected()] == ["Messi"]


class TestOracleSelector:
    def test_table_two_row_two(self, salary_conversation):
        cg = CommonGround(
            [
                Proposition("the average starting salary", 0),
                Proposition("a physician assistant", 0),
                Proposition("the UK", 0),
                Proposition("the US", 1),
            ]
        )
        selector = OracleSelector(salary_conversation)
        selector.select(cg, "What about in the US?", turn_no=1)
        assert {p.surface for p in cg.selected()} == {
            "the average starting salary", "a physician assistant", "the US",
        }
        assert cg.status_of("the UK") is Status.RETAINED

    def test_lookup_by_question_when_turn_unknown(self, salary_conversation):
        cg = CommonGround([Proposition("the US")])
        OracleSelector(salary_conversation).select(cg, "What about in the US?")
        assert cg.status_of("the US") is Status.SELECTED


class TestRuleSelector:
    def test_overlap_selects(self):
        cg = CommonGround([Proposition("position"), Proposition("the UK")])
        RuleSelector().select(cg, "which position does Messi play?")
        assert cg.status_of("position") is Status.SELECTED
        assert cg.status_of("the UK") is Status.RETAINED

    def test_question_identical_to_surface_is_selected(self):
        cg = CommonGround([Proposition("the average starting salary")])
        RuleSelector().select(cg, "the average starting salary")
        assert cg.status_of("the average starting salary") is Status.SELECTED

    def test_anaphora_fallback_on_unique_entity(self):
        cg = CommonGround([Proposition("Messi"), Proposition("36 years")])
        RuleSelector().select(cg, "which position does he play?")
        assert cg.status_of("Messi") is Status.SELECTED

    def test_fallback_groups_surface_variants_of_one_entity(self):
        cg = CommonGround([Proposition("Eiffel Tower"), Proposition("The Eiffel Tower")])
        RuleSelector().select(cg, "who designed it?")
        assert len(cg.selected()) == 2

    def test_fallback_blocked_by_two_entities(self):
        cg = CommonGround([Proposition("Messi"), Proposition("Rick Barry")])
        RuleSelector().select(cg, "where did he come from?")
        assert cg.selected() == []

    def test_empty_cg(self):
        cg = CommonGround()
        RuleSelector().select(cg, "anything?")
        assert cg.selected() == [] and cg.full() == []

    def test_statelessness(self):
        cg = CommonGround([Proposition("position"), Proposition("Messi")])
        selector = RuleSelector()
        selector.select(cg, "which position does he play?")
        first = [(p.surface, s) for p, s in cg.entries()]
        selector.select(cg, "which position does he play?")
        assert [(p.surface, s) for p, s in cg.entries()] == first


class TestSession:
    def test_two_turn_salary_flow(self, salary_conversation):
        session = CgSession.start(
            OracleGenerator(salary_conversation), OracleSelector(salary_conversation)
        )
        full1, selected1 = session.step(
            salary_conversation.turns[0].question,
            lambda q, cg: salary_conversation.turns[0].answer,
        )
        assert len(full1) == 3 and len(selected1) == 3
        full2, selected2 = session.step(
            salary_conversation.turns[1].question,
            lambda q, cg: salary_conversation.turns[1].answer,
        )
        assert len(full2) == 4
        assert len(selected2) == 3
        assert full2.status_of("the UK") is Status.RETAINED
        # history carries the callback answers
        assert session.context.history[0][1] == salary_conversation.turns[0].answer

    def test_first_turn_selected_equals_generated_when_self_contained(self):
        conv = build_gold_cg(
            Conversation(
                conversation_id="c",
                turns=(
                    Turn(conversation_id="c", turn_no=0,
                         question="What is the capital of France?",
                         answer="the capital of France is Paris"),
                ),
            )
        )
        session = CgSession.start(OracleGenerator(conv), OracleSelector(conv))
        full, selected = session.step(conv.turns[0].question, lambda q, cg: conv.turns[0].answer)
        assert {p.normalized for p in full.full()} == {p.normalized for p in selected.full()}

    def test_accumulation_and_dedup_of_reemissions(self, salary_conversation):
        session = CgSession.start(
            OracleGenerator(salary_conversation), OracleSelector(salary_conversation)
        )
        full1, _ = session.step(salary_conversation.turns[0].question)
        full2, _ = session.step(salary_conversation.turns[1].question)
        keys1 = {p.normalized for p in full1.full()}
        keys2 = {p.normalized for p in full2.full()}
        assert keys1 <= keys2
        # re-emitted propositions keep their first origin turn
        salary = next(p for p in full2.full() if p.normalized == "the average starting salary")
        assert salary.origin_turn == 0


class TestReplayClosure:
    def test_oracle_closure_on_every_turn(self, salary_conversation):
        states = list(
            replay(salary_conversation, OracleGenerator(salary_conversation), OracleSelector(salary_conversation))
        )
        for state in states:
            expected = gold_selected_keys(salary_conversation, state.turn_no)
            assert {p.normalized for p in state.cg.selected()} == expected


def test_factories_validate_requirements(salary_conversation):
    assert make_generator("oracle", conversation=salary_conversation)
    assert make_selector("rule")
    with pytest.raises(ValueError):
        make_generator("oracle")
    with pytest.raises(ValueError):
        make_generator("external")
    with pytest.raises(ValueError):
        make_selector("nonsense")
