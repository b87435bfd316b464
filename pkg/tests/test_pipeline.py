import pytest

from cground.config import AppConfig
from cground.fixtures import desk_fixture, salary_fixture
from cground.pipeline import LiveConversation, build_backends, build_reader
from cground.retrieval import Bm25Index
from cground.setups import ConfigurationError


@pytest.fixture(scope="module")
def desk_index():
    _, passages, _ = desk_fixture()
    return Bm25Index(passages)


class TestLiveConversation:
    def test_rule_backend_messi_flow(self, desk_index):
        live = LiveConversation.start(desk_index, AppConfig())
        first = live.ask("How old is Lionel Messi?")
        assert first.answer == "36 years old"
        assert first.passages[0].passage.passage_id == "messi-p0"
        second = live.ask("Which position does he play?")
        assert second.answer == "a forward"
        selected = {p.surface for p in second.cg_selected.full()}
        assert "Lionel Messi" in selected and "position" in selected
        # accumulation across asks
        assert {p.normalized for p in first.cg_full.full()} <= {
            p.normalized for p in second.cg_full.full()
        }

    def test_oracle_mode_uses_dataset(self, desk_index):
        (conv,), passages = salary_fixture()
        config = AppConfig(generator="oracle", selector="oracle")
        live = LiveConversation.start(Bm25Index(passages), config, conversation=conv)
        live.ask(conv.turns[0].question)
        result = live.ask(conv.turns[1].question)
        statuses = {p.surface: s for p, s in result.cg_full.entries()}
        assert statuses["the UK"].value == "retained"

    def test_rewrite_setup_without_adapter_is_config_error(self, desk_index):
        config = AppConfig(setup="rewrite")
        with pytest.raises(ConfigurationError):
            LiveConversation.start(desk_index, config)

    def test_oracle_without_conversation_is_config_error(self, desk_index):
        config = AppConfig(generator="oracle")
        with pytest.raises(ConfigurationError):
            LiveConversation.start(desk_index, config)


def test_build_reader_validates_external(desk_index):
    config = AppConfig(reader="external")
    with pytest.raises(ConfigurationError):
        build_reader(config)


def test_build_backends_rule_defaults():
    generator, selector = build_backends(AppConfig())
    assert generator.__class__.__name__ == "RuleGenerator"
    assert selector.__class__.__name__ == "RuleSelector"
