import json

import pytest

from litcurate.config import EngineConfig
from litcurate.errors import EmptySchema, GenerationFailed, OutputUnparseable
from litcurate.generator import (
    DualRecordSets,
    build_prompt,
    extract_json_records,
    generate_records,
    parse_llm_output,
)
from litcurate.ingest.documents import ParserKind
from litcurate.llm import MockLlmProvider
from litcurate.pool import CorrectionPool, PoolEntry
from litcurate.records import ICLExample, RecordOrigin, Schema

from conftest import doc_from_text


def example(records, excerpt="excerpt text"):
    return ICLExample(source_doc_excerpt=excerpt, records=tuple(records), source_doc_id="p")


def test_zero_shot_prompt_lists_each_attribute_once_in_mapping(schema_ab):
    prompt = build_prompt(schema_ab, "the article")
    mapping = prompt.split("[Dictionary Key Mapping in your response]")[1].split("[Given Article Start]")[0]
    assert mapping.count("A:") == 1
    assert mapping.count("B:") == 1
    assert "Please, extract A, B from the given article." in prompt
    assert prompt.count("[Given Article Start]") == 1
    assert prompt.count("[Given Article End]") == 1
    assert "the article" in prompt


def test_one_shot_fills_example_slots_from_first_record(schema_ab):
    prompt = build_prompt(schema_ab, "text", (example([{"A": "x", "B": "y"}]),))
    assert "A: (example: x)" in prompt
    assert "B: (example: y)" in prompt
    assert "[Demonstration Example Start]" in prompt
    assert prompt.index("[Demonstration Example End]") < prompt.index("[Given Article Start]")


def test_zero_shot_uses_schema_hints_when_present():
    schema = Schema.parse('[{"name": "A", "example_hint": "hinted"}, {"name": "B"}]')
    prompt = build_prompt(schema, "text")
    assert "A: (example: hinted)" in prompt
    assert "B: (example: )" in prompt


def test_empty_schema_is_rejected():
    with pytest.raises(EmptySchema):
        Schema.from_names([])


def test_prompt_is_deterministic(schema_ab):
    args = (schema_ab, "same text", (example([{"A": "1"}]),))
    assert build_prompt(*args) == build_prompt(*args)


def test_multi_shot_stacks_demonstration_blocks(schema_ab):
    prompt = build_prompt(
        schema_ab, "text", (example([{"A": "1"}]), example([{"A": "2"}], excerpt="other"))
    )
    assert prompt.count("[Demonstration Example Start]") == 2


def test_parse_direct_array(schema_ab):
    records = parse_llm_output('[{"A":"1","B":"2"}]', schema_ab)
    assert len(records) == 1
    assert records[0].values() == {"A": "1", "B": "2"}


def test_parse_fenced_block_identical(schema_ab):
    raw = 'Sure! Here you go:\n```json\n[{"A":"1","B":"2"}]\n```\nHope that helps.'
    records = parse_llm_output(raw, schema_ab)
    assert records[0].values() == {"A": "1", "B": "2"}


def test_parse_no_json_raises_with_raw_preserved(schema_ab):
    with pytest.raises(OutputUnparseable) as excinfo:
        parse_llm_output("no json here", schema_ab)
    assert excinfo.value.raw == "no json here"


def test_parse_skips_non_object_arrays(schema_ab):
    raw = 'counts [1, 2, 3] then the data [{"A": "v"}]'
    records = parse_llm_output(raw, schema_ab)
    assert records[0].value("A") == "v"


def test_parse_drops_unknown_keys_and_fills_missing(schema_ab):
    records = parse_llm_output('[{"A": "1", "C": "zzz"}]', schema_ab)
    assert records[0].values() == {"A": "1", "B": ""}


def test_parse_stringifies_scalars_canonically(schema_ab):
    records = parse_llm_output('[{"A": 72.5, "B": 3}, {"A": true, "B": null}]', schema_ab)
    assert records[0].values() == {"A": "72.5", "B": "3"}
    assert records[1].values() == {"A": "true", "B": ""}


def test_parse_shortest_round_trip_floats(schema_ab):
    records = parse_llm_output('[{"A": 0.1, "B": 1e-3}]', schema_ab)
    assert records[0].value("A") == "0.1"
    assert records[0].value("B") == "0.001"


def test_echo_round_trip_recovers_example_records(schema_ab):
    demo = example([{"A": "x", "B": "y"}, {"A": "p", "B": ""}])
    prompt = build_prompt(schema_ab, "article", (demo,))
    # a mock that echoes the whole prompt: the first JSON array of objects
    # in it is the demonstration block
    records = parse_llm_output(prompt, schema_ab)
    assert [r.values() for r in records] == [{"A": "x", "B": "y"}, {"A": "p", "B": ""}]


class ScriptedLlm:
    name = "scripted"

    def __init__(self, responses, context_chars=100000):
        self.responses = list(responses)
        self.context_chars = context_chars
        self.calls = []

    def complete(self, prompt):
        self.calls.append(prompt)
        return self.responses.pop(0)


def test_single_variant_doc_yields_single_set(schema_ab):
    doc = doc_from_text("d", "only generic text")
    llm = MockLlmProvider({"default": '[{"A": "1"}]'})
    result = generate_records(doc, schema_ab, CorrectionPool(), llm)
    assert set(result.sets) == {RecordOrigin.GENERIC_TEXT}
    assert result.get(RecordOrigin.GENERIC_TEXT)[0].origin == RecordOrigin.GENERIC_TEXT


def test_two_variants_tagged_with_their_origin(schema_ab):
    doc = doc_from_text("d", "generic body")
    doc.variants[ParserKind.STRUCTURED_TEI] = "structured body"
    llm = MockLlmProvider({"default": '[{"A": "1"}]'})
    result = generate_records(doc, schema_ab, CorrectionPool(), llm)
    assert set(result.sets) == {RecordOrigin.STRUCTURED_TEI, RecordOrigin.GENERIC_TEXT}
    for origin, records in result.sets.items():
        assert all(r.origin == origin for r in records)


def test_three_chunk_doc_dedups_to_one_record(schema_ab):
    text = "z" * 250
    llm = MockLlmProvider({"default": '[{"A": "same", "B": "rec"}]'})
    cfg = EngineConfig(window=100, overlap=0.1)
    doc = doc_from_text("d", text)
    result = generate_records(doc, schema_ab, CorrectionPool(), llm, cfg)
    records = result.get(RecordOrigin.GENERIC_TEXT)
    # 100-char window over 250 chars -> 3 chunks, identical outputs dedup to 1
    assert len(llm.calls) == 3
    assert len(records) == 1
    assert records[0].values() == {"A": "same", "B": "rec"}


def test_context_budget_derives_window_from_provider(schema_ab):
    llm = MockLlmProvider({"default": '[{"A": "r"}]'}, context_chars=4000)
    doc = doc_from_text("d", "w" * 7000)
    result = generate_records(doc, schema_ab, CorrectionPool(), llm)
    # window = floor(0.8 * 4000) = 3200 -> chunks at 0 and 2880
    assert len(llm.calls) == 3
    for call in llm.calls:
        assert len(call) <= 4000


def test_chunk_output_order_preserved_before_dedup(schema_ab):
    text = ("first part " * 12).strip() + "||" + ("second part " * 12).strip()
    llm = ScriptedLlm(['[{"A": "one"}]', '[{"A": "two"}]', '[{"A": "one"}]'])
    cfg = EngineConfig(window=100, overlap=0.0)
    doc = doc_from_text("d", text)
    result = generate_records(doc, schema_ab, CorrectionPool(), llm, cfg)
    values = [r.value("A") for r in result.get(RecordOrigin.GENERIC_TEXT)]
    assert values == ["one", "two"]


def test_retry_once_on_unparseable_with_reminder(schema_ab):
    llm = ScriptedLlm(["not json at all", '[{"A": "ok"}]'])
    doc = doc_from_text("d", "short text")
    result = generate_records(doc, schema_ab, CorrectionPool(), llm)
    assert result.get(RecordOrigin.GENERIC_TEXT)[0].value("A") == "ok"
    assert len(llm.calls) == 2
    assert llm.calls[1].endswith("Respond with JSON only.")


def test_variant_failure_recorded_other_continues(schema_ab):
    doc = doc_from_text("d", "generic body")
    doc.variants[ParserKind.STRUCTURED_TEI] = "structured body"
    # structured variant is prompted first: garbage twice, then generic succeeds
    llm = ScriptedLlm(["junk", "junk again", '[{"A": "v"}]'])
    result = generate_records(doc, schema_ab, CorrectionPool(), llm)
    assert RecordOrigin.STRUCTURED_TEI in result.failures
    assert result.get(RecordOrigin.GENERIC_TEXT)[0].value("A") == "v"


def test_all_variants_failing_is_generation_failed(schema_ab):
    doc = doc_from_text("d", "text")
    llm = ScriptedLlm(["junk", "junk"])
    with pytest.raises(GenerationFailed):
        generate_records(doc, schema_ab, CorrectionPool(), llm)


def test_icl_examples_flow_into_prompts(schema_ab):
    pool = CorrectionPool(
        entries=(PoolEntry("p1", "matching text body", ({"A": "pooled"},)),), version=1
    )
    llm = MockLlmProvider({"default": '[{"A": "1"}]'})
    doc = doc_from_text("d", "matching text body")
    result = generate_records(doc, schema_ab, pool, llm)
    assert result.examples[0].source_doc_id == "p1"
    assert "[Demonstration Example Start]" in llm.calls[0]
    assert "pooled" in llm.calls[0]


def test_records_never_contain_keys_outside_schema(schema_ab):
    llm = MockLlmProvider({"default": '[{"A": "1", "Unknown": "x", "B": "2"}]'})
    doc = doc_from_text("d", "text")
    result = generate_records(doc, schema_ab, CorrectionPool(), llm)
    for record in result.get(RecordOrigin.GENERIC_TEXT):
        assert set(record.cells) == {"A", "B"}
