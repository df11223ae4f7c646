import xml.etree.ElementTree as ET

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from easelan.eaf import emit_ecv, parse_ecv, parse_eaf, parse_template, serialize_eaf
from easelan.errors import (
    DanglingReferenceError,
    DuplicateEntryValueError,
    MalformedXMLError,
    ParseError,
    SchemaViolationError,
    TemplateContainsAnnotationsError,
)
from easelan.model import (
    Constraint,
    ControlledVocabulary,
    LinguisticType,
    VocabularyEntry,
    new_document,
    validate_structure,
)
from eafgen import EafBuilder
from fixtures_eaf import fixture_texts

FIXTURES = fixture_texts()


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_round_trip(name):
    first = parse_eaf(FIXTURES[name])
    out = serialize_eaf(first)
    again = parse_eaf(out)
    assert again == first
    assert serialize_eaf(again) == out
    assert validate_structure(first) == []


def test_minimal_document_with_one_empty_tier():
    doc = parse_eaf(FIXTURES["minimal"])
    assert doc.tier_ids() == ["default"]
    assert doc.tier("default").annotations == []


def test_whisper_words_times():
    doc = parse_eaf(FIXTURES["whisper_words"])
    tier = doc.tier("Whisper Transcripts")
    assert [(doc.interval(a), a.value) for a in tier.annotations] == [
        ((0, 420), "set"), ((420, 550), "the"), ((550, 1100), "table")]


def test_truncated_file_reports_position():
    text = FIXTURES["whisper_words"]
    with pytest.raises(MalformedXMLError) as exc:
        parse_eaf(text[: len(text) // 2])
    assert exc.value.line is not None and exc.value.column is not None
    assert "line" in str(exc.value)


def test_missing_required_attribute_has_position():
    text = FIXTURES["minimal"].replace(' LINGUISTIC_TYPE_REF="default-lt"', "")
    with pytest.raises(SchemaViolationError) as exc:
        parse_eaf(text)
    assert "LINGUISTIC_TYPE_REF" in exc.value.reason
    tier_line = next(i for i, line in enumerate(text.splitlines(), 1) if "<TIER " in line)
    assert exc.value.line == tier_line


def test_dangling_reference_strict_and_lenient():
    text = FIXTURES["whisper_words"].replace('TIME_SLOT_REF2="ts2"', 'TIME_SLOT_REF2="ts99"')
    with pytest.raises(DanglingReferenceError) as exc:
        parse_eaf(text)
    assert exc.value.line is not None
    doc = parse_eaf(text, strict=False)
    assert [f.rule_id for f in validate_structure(doc)] == ["E006"]


def test_every_parse_error_has_a_position():
    broken = [
        "<ANNOTATION_DOCUMENT>",
        "<NOT_EAF/>",
        FIXTURES["minimal"].replace('TIER_ID="default"', 'TIER_ID=""'),
        FIXTURES["vocabulary"].replace('LINGUISTIC_TYPE_REF="hand"', 'LINGUISTIC_TYPE_REF="nope"'),
        FIXTURES["whisper_words"].replace('TIME_VALUE="420"', 'TIME_VALUE="4.2e2"'),
    ]
    for text in broken:
        with pytest.raises(ParseError) as exc:
            parse_eaf(text)
        assert exc.value.line is not None, text


def test_empty_document_serializes_to_skeleton():
    out = serialize_eaf(new_document("", "2024-01-01T00:00:00Z"))
    root = ET.fromstring(out)
    assert root.tag == "ANNOTATION_DOCUMENT"
    assert [c.tag for c in root][:2] == ["HEADER", "TIME_ORDER"]
    assert root.get("FORMAT") == "3.0"
    assert out.startswith(b'<?xml version="1.0" encoding="UTF-8"?>\n')
    assert out.endswith(b"\n") and b"\r" not in out


def test_output_uses_four_space_indentation():
    out = serialize_eaf(parse_eaf(FIXTURES["whisper_words"])).decode()
    assert "\n    <HEADER" in out and "\n        <TIME_SLOT" in out


def test_fidelity_bag_survives():
    out = serialize_eaf(parse_eaf(FIXTURES["fidelity_bag"])).decode()
    for needle in ('X_TOOL="easelan-test"', 'DEFAULT_LOCALE="de"', "<LEXICON_REF ", "<EXTERNAL_REF ",
                   '<FUTURE_ELEMENT flavour="unknown">', "<INNER>text</INNER>", 'COUNTRY_CODE="DE"'):
        assert needle in out


def test_escaping_round_trips():
    doc = parse_eaf(FIXTURES["escaping"])
    values = [a.value for a in doc.tier("notes & remarks").annotations]
    assert values == ["<b>x</b> & 'y'", "Straße — \U0001F37D", "", "tab\there"]
    assert doc.author == 'Zoë "Z" <z@example.org>'
    assert b"<b>" not in serialize_eaf(doc)


def test_added_vocabulary_declares_language():
    doc = new_document("x", "2024-01-01T00:00:00Z")
    doc.add_vocabulary(ControlledVocabulary("cv", entries=[VocabularyEntry("e1", "pick")]))
    doc.add_linguistic_type(LinguisticType("lt", vocabulary_ref="cv"))
    out = serialize_eaf(doc)
    assert b'<LANGUAGE LANG_ID="und"' in out and b"<CV_ENTRY_ML" in out
    assert parse_eaf(out) == doc


# templates

def template_text(tiers, types=None):
    b = EafBuilder()
    for t in types or {tid: "lt" for tid in tiers}.values():
        b.type(t)
    for tid in tiers:
        b.tier(tid, (types or {}).get(tid, "lt"))
    return b.template_text()


def test_template_with_three_tiers():
    tpl = parse_template(template_text(["phase", "action", "motion"]))
    assert tpl.tier_ids() == ["phase", "action", "motion"]
    assert tpl.constraint_of("action") is Constraint.TOP_LEVEL


def test_empty_template():
    tpl = parse_template(EafBuilder().template_text())
    assert tpl.tiers == [] and tpl.types == []


def test_template_with_undefined_type():
    text = template_text(["phase"]).replace('LINGUISTIC_TYPE_REF="lt"', 'LINGUISTIC_TYPE_REF="ghost"')
    with pytest.raises(DanglingReferenceError):
        parse_template(text)


def test_template_with_annotations_is_rejected():
    with pytest.raises(TemplateContainsAnnotationsError) as exc:
        parse_template(FIXTURES["whisper_words"])
    assert exc.value.line is not None


# controlled vocabulary files

def test_ecv_round_trip():
    cv = ControlledVocabulary("actions", "table setting", [
        VocabularyEntry("e1", "pick"), VocabularyEntry("e2", "place", "put down"), VocabularyEntry("e3", "pour")])
    data = emit_ecv([cv])
    assert parse_ecv(data) == [cv]
    assert emit_ecv(parse_ecv(data)) == data
    assert data.count(b"<CV_ENTRY_ML") == 3


def test_empty_ecv():
    data = emit_ecv([])
    assert ET.fromstring(data).tag == "CV_RESOURCE"
    assert parse_ecv(data) == []


def test_ecv_duplicate_value():
    cv = ControlledVocabulary("a", entries=[VocabularyEntry("e1", "pick"), VocabularyEntry("e2", "pick")])
    with pytest.raises(DuplicateEntryValueError):
        emit_ecv([cv])


def test_ecv_wrong_root():
    with pytest.raises(SchemaViolationError):
        parse_ecv(FIXTURES["minimal"])


def test_legacy_cv_entries_are_read():
    text = FIXTURES["minimal"].replace(
        "</ANNOTATION_DOCUMENT>",
        '<CONTROLLED_VOCABULARY CV_ID="old" DESCRIPTION="2.x style">'
        '<CV_ENTRY CVE_ID="x1" DESCRIPTION="d">pick</CV_ENTRY><CV_ENTRY>place</CV_ENTRY>'
        "</CONTROLLED_VOCABULARY></ANNOTATION_DOCUMENT>")
    cv = parse_eaf(text).vocabulary("old")
    assert cv.description == "2.x style"
    assert cv.values() == ["pick", "place"]


# generated documents

values = st.text(st.characters(blacklist_categories=("Cs", "Cc")), max_size=12)


@st.composite
def documents(draw):
    doc = new_document(draw(values), "2024-01-01T00:00:00Z")
    doc.add_linguistic_type(LinguisticType("lt"))
    doc.add_linguistic_type(LinguisticType("sym", Constraint.SYMBOLIC_ASSOCIATION, time_alignable=False))
    n_tiers = draw(st.integers(0, 3))
    for i in range(n_tiers):
        doc.add_tier(f"tier {i}", "lt", participant=draw(st.none() | values))
        for b in sorted(draw(st.sets(st.integers(0, 50), max_size=6))):
            doc.add_aligned_annotation(f"tier {i}", b * 100, b * 100 + draw(st.integers(1, 100)), draw(values))
        if draw(st.booleans()):
            doc.add_tier(f"gloss {i}", "sym", parent_ref=f"tier {i}")
            for a in doc.tier(f"tier {i}").annotations:
                doc.add_ref_annotation(f"gloss {i}", a.id, draw(values))
    if draw(st.booleans()):
        doc.properties["note"] = draw(values)
    return doc


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(documents())
def test_generated_documents_round_trip(doc):
    out = serialize_eaf(doc)
    back = parse_eaf(out)
    assert back == doc
    assert serialize_eaf(back) == out
