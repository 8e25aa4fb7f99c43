import pytest

from umlinst.errors import ProviderError
from umlinst.generation import (
    COT, IL, Category, ChatSession, Exchange, GenerationAborted, GenerationConfig, ReplayProvider, Status,
    check_and_repair, extract_soil, read_transcript, run_generation, split_counts,
)

import transcripts as T
from goldens import NEXT_INSTANCE, bot, user


def replay(name_or_exchanges, content_match=False):
    if isinstance(name_or_exchanges, str):
        return ReplayProvider.from_file(T.FIXTURES / name_or_exchanges, content_match=content_match)
    return ReplayProvider([Exchange(e["request_messages"], e["response"]) for e in name_or_exchanges],
                          content_match=content_match)


def generate(bank_model, provider, jobs=1, log=None, **config):
    return run_generation(bank_model, T.BANK_SOIL, GenerationConfig(**config), provider,
                          model_text=T.BANK_USE, log=log, jobs=jobs)


@pytest.mark.parametrize("name", sorted(T.BUILDERS))
def test_committed_transcripts_match_builders(name):
    assert (T.FIXTURES / name).read_text(encoding="utf-8") == T.to_jsonl(T.BUILDERS[name]())


@pytest.mark.parametrize("response, soil", [
    ("!new A('a')\n", "!new A('a')\n"),
    ("Sure:\n```soil\n!new A('a')\n```\nand ```x\nmore```", "!new A('a')\n"),
    ("```\n!new A('a')\n```", "!new A('a')\n"),
])
def test_extract_soil(response, soil):
    assert extract_soil(response) == soil


@pytest.mark.parametrize("total, parts, expected", [
    (30, 5, [6, 6, 6, 6, 6]), (7, 2, [4, 3]), (3, 5, [1, 1, 1, 0, 0]), (1, 1, [1]),
])
def test_split_counts(total, parts, expected):
    assert split_counts(total, parts) == expected


def test_il_clean_run(bank_model):
    provider = replay("il_clean.jsonl")
    log = []
    items = generate(bank_model, provider, log=log, num_instances=3, strategy=IL)
    assert [i.status for i in items] == [Status.ACCEPTED] * 3
    assert provider.remaining == 0 and provider.calls == 3
    assert [o.object_id for o in items[1].instance.objects] == ["acc2", "p2"]
    assert items[1].soil_text == T.GOOD[1].split("```soil\n")[1].split("```")[0]
    assert [i.transcript_slice for i in items] == [(1, 3), (3, 5), (5, 7)]
    assert log[0].messages[3] == user(NEXT_INSTANCE)
    assert items[0].instance.provenance.strategy == "IL" and items[0].instance.provenance.category is None


def test_il_repair_rounds_and_bounds(bank_model):
    provider = replay("il_repair.jsonl")
    first, second = generate(bank_model, provider, num_instances=2, max_checks=2, strategy=IL)
    assert (first.status, first.repair_rounds_syntax, first.repair_rounds_conformance) == (Status.ACCEPTED, 1, 1)
    assert first.provider_calls == 3
    assert (second.status, second.repair_rounds_syntax, second.repair_rounds_conformance) == \
        (Status.FAILED_CONFORMANCE, 2, 2)
    assert second.provider_calls == 1 + 2 * 2
    assert provider.remaining == 0 and provider.calls == 8
    assert second.instance.provenance.repair_rounds_conformance == 2


def test_syntax_bound_stops_before_conformance(bank_model):
    session = ChatSession("S")
    session.add_user("go")
    session.add_assistant(T.SYNTAX_BAD)
    fixes = []
    for _ in range(3):
        fixes.append(Exchange(session.snapshot() + [user(T.correct_prompt(T.SYNTAX_ERROR))], T.SYNTAX_BAD))
        session.messages += [user(T.correct_prompt(T.SYNTAX_ERROR)), bot(T.SYNTAX_BAD)]
    provider = ReplayProvider(fixes)
    fresh = ChatSession("S")
    fresh.add_user("go")
    fresh.add_assistant(T.SYNTAX_BAD)
    item = check_and_repair(T.SYNTAX_BAD, bank_model, 3, fresh, provider)
    assert item.status is Status.FAILED_SYNTAX and item.repair_rounds_syntax == 3
    assert item.repair_rounds_conformance == 0 and provider.remaining == 0


def test_zero_max_checks_means_no_repair(bank_model):
    provider = ReplayProvider([])
    item = check_and_repair(T.UNDERAGE, bank_model, 0, ChatSession(None), provider)
    assert item.status is Status.FAILED_CONFORMANCE and provider.calls == 0


def test_cot_five_categories(bank_model):
    provider = replay("cot_five.jsonl")
    log = []
    categories = [c for c, _ in T.COT_PLAN]
    items = generate(bank_model, provider, log=log, num_instances=5, strategy=COT, categories=categories)
    assert provider.remaining == 0 and provider.calls == 11
    assert [i.category.value for i in items] == categories
    assert [i.status for i in items] == [Status.ACCEPTED] * 4 + [Status.EXPECTED_NONCONFORMING]
    over = items[-1]
    assert over.provider_calls == 1 and over.instance.provenance.category == "OverConstraint"
    assert [i.scenario for i in items] == [s for _, [(s, _)] in T.COT_PLAN]
    assert len(log) == 1 + 5 + 5 and [i.session_index for i in items] == [6, 7, 8, 9, 10]
    assert all(len(s.messages) == 3 for s in log[6:])


def test_cot_reuse_hint_and_uneven_split(bank_model):
    provider = replay("cot_reuse.jsonl")
    items = generate(bank_model, provider, num_instances=5, strategy=COT, categories=["Base", "OverConstraint"])
    assert provider.remaining == 0
    assert [i.category for i in items] == [Category.BASE] * 3 + [Category.OVERCONSTRAINT] * 2
    assert [i.status for i in items][-2:] == [Status.EXPECTED_NONCONFORMING] * 2


def test_cot_parallel_matches_sequential(bank_model):
    categories = [c for c, _ in T.COT_PLAN]
    sequential = generate(bank_model, replay("cot_five.jsonl"), num_instances=5, strategy=COT,
                          categories=categories)
    provider = replay("cot_five.jsonl", content_match=True)
    parallel = generate(bank_model, provider, jobs=4, num_instances=5, strategy=COT, categories=categories)
    assert provider.remaining == 0
    assert [(i.soil_text, i.status, i.category, i.session_index) for i in parallel] == \
        [(i.soil_text, i.status, i.category, i.session_index) for i in sequential]


def test_zero_count_categories_get_no_session(bank_model):
    exchanges = T.cot([("Base", [("Only one.", T.GOOD[0])])])
    log = []
    items = generate(bank_model, replay(exchanges), log=log, num_instances=1, strategy=COT,
                     categories=["Base", "Edge"])
    assert len(items) == 1 and len(log) == 3


def test_exhausted_transcript_aborts_with_partial_results(bank_model):
    exchanges = read_transcript(T.FIXTURES / "il_clean.jsonl")[:2]
    with pytest.raises(GenerationAborted) as info:
        generate(bank_model, ReplayProvider(exchanges), num_instances=3, strategy=IL)
    assert info.value.kind == "transcript-exhausted" and len(info.value.instances) == 2
    assert isinstance(info.value, ProviderError)


def test_changed_model_text_is_a_transcript_mismatch(bank_model):
    with pytest.raises(GenerationAborted) as info:
        run_generation(bank_model, T.BANK_SOIL, GenerationConfig(num_instances=3), replay("il_clean.jsonl"),
                       model_text=T.BANK_USE + "\n")
    assert info.value.kind == "transcript-mismatch" and "message index 1" in str(info.value)


@pytest.mark.parametrize("kwargs", [
    {"num_instances": 0}, {"max_checks": -1}, {"strategy": "ToT"}, {"strategy": COT},
    {"strategy": COT, "categories": ["Base", "base"]}, {"categories": ["Stress"]},
])
def test_generation_config_validation(kwargs):
    with pytest.raises(ValueError):
        GenerationConfig(**kwargs)
