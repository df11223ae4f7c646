import csv
import io
import json
import logging
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from easelan.eaf import parse_eaf, serialize_eaf
from easelan.errors import (
    ColumnMismatchError,
    DuplicateTierError,
    MissingFileError,
    NonMonotonicTimeError,
    TranscriptionSchemaError,
    UnknownColumnError,
)
from easelan.ingest import (
    Segment,
    SignalTable,
    TranscriptionResult,
    Word,
    attach_biosignal,
    import_transcription,
    link_media,
    load_transcription,
    normalize_biosignal,
    seconds_to_ms,
    transcription_spans,
)
from easelan.model import new_document, validate_structure
from easelan.sidecars import parse_tsconf


def half_away_ms(seconds: float) -> int:
    """Oracle: exact rational arithmetic on the decimal text of ``seconds``."""
    x = Fraction(repr(seconds)) * 1000
    n = abs(x)
    r = int(n) + (1 if n - int(n) >= Fraction(1, 2) else 0)
    return r if x >= 0 else -r


def spans_of(doc, tier="Whisper Transcripts"):
    return [(*doc.interval(a), a.value) for a in doc.tier(tier).annotations]


def three_words():
    return TranscriptionResult("set the table", "en", [Segment(0.0, 1.1, " set the table", [
        Word(" set", 0.00, 0.42), Word(" the", 0.42, 0.55), Word(" table", 0.55, 1.10)])])


@pytest.mark.parametrize("s,ms", [(0.42, 420), (1.10, 1100), (0.0005, 1), (1.0005, 1001), (2.4995, 2500),
                                  (0.0004, 0), (-0.0005, -1), (12.3456, 12346)])
def test_seconds_to_ms(s, ms):
    assert seconds_to_ms(s) == ms == half_away_ms(s)


@settings(max_examples=300)
@given(st.floats(-1e5, 1e5, allow_nan=False))
def test_seconds_to_ms_matches_oracle(s):
    assert seconds_to_ms(s) == half_away_ms(s)


def test_three_words():
    doc = import_transcription(new_document(), three_words())
    assert spans_of(doc) == [(0, 420, "set"), (420, 550, "the"), (550, 1100, "table")]
    assert validate_structure(doc) == []
    assert parse_eaf(serialize_eaf(doc)) == doc


def test_segment_granularity():
    doc = import_transcription(new_document(), three_words(), granularity="segment")
    assert spans_of(doc) == [(0, 1100, "set the table")]


def test_zero_segments_creates_empty_tier(caplog):
    with caplog.at_level(logging.WARNING, "easelan.ingest"):
        doc = import_transcription(new_document(), TranscriptionResult())
    assert doc.tier("Whisper Transcripts").annotations == []
    assert "no segments" in caplog.text


def test_zero_length_word_is_expanded():
    result = TranscriptionResult(segments=[Segment(2.0, 2.0, "uh", [Word("uh", 2.000, 2.000)])])
    assert transcription_spans(result) == [(2000, 2001, "uh")]


def test_overlapping_words_are_clamped():
    result = TranscriptionResult(segments=[Segment(0, 2, "a b c", [
        Word("a", 0.0, 1.0), Word("b", 0.8, 1.5), Word("c", 1.2, 1.4)])])
    # b starts at a's end; c is swallowed by b and expands to 1 ms after it
    assert transcription_spans(result) == [(0, 1000, "a"), (1000, 1500, "b"), (1500, 1501, "c")]


def test_duplicate_tier():
    doc = import_transcription(new_document(), three_words())
    with pytest.raises(DuplicateTierError):
        import_transcription(doc, three_words())


def test_schema_mismatch():
    with pytest.raises(TranscriptionSchemaError) as exc:
        load_transcription(json.dumps({"segments": [{"start": "0", "end": 1, "text": "x"}]}))
    assert "segments/0/start" in str(exc.value)
    with pytest.raises(TranscriptionSchemaError):
        load_transcription("not json")


def test_word_order_invariant():
    result = TranscriptionResult(segments=[Segment(0, 2, "a b", [Word("a", 1.0, 1.2), Word("b", 0.5, 0.7)])])
    with pytest.raises(TranscriptionSchemaError):
        import_transcription(new_document(), result)


def test_json_probability_maps_to_confidence():
    r = load_transcription(json.dumps({"text": "hi", "language": "en", "segments": [
        {"start": 0, "end": 1, "text": "hi", "words": [{"word": "hi", "start": 0, "end": 1, "probability": 0.9}]}]}))
    assert r.language == "en" and r.segments[0].words[0].confidence == 0.9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10_000), st.integers(1, 2_000)), min_size=1, max_size=30))
def test_imported_boundaries_are_exact(raw):
    # non-overlapping words: every boundary must be the rounded source time
    t, words = 0, []
    for gap, dur in raw:
        start = (t + gap) / 1000 + 0.0004
        end = start + dur / 1000
        words.append(Word(f"w{len(words)}", start, end))
        t += gap + dur + 1
    result = TranscriptionResult(segments=[Segment(words[0].start, words[-1].end, "x", words)])
    doc = import_transcription(new_document(), result)
    got = spans_of(doc)
    assert len(got) == len(words)
    for (b, e, v), w in zip(got, words):
        assert (b, e) == (half_away_ms(w.start), half_away_ms(w.end))


# biosignals

def emg_table():
    return SignalTable(["t", "ch1", "ch2"], [(0.0, 1.0, 5.0), (0.1, -2.0, 6.0), (0.2, 3.5, 7.0), (0.3, 0.25, 8.0)])


def read_csv(data: bytes):
    return list(csv.reader(io.StringIO(data.decode())))


def test_normalize_one_channel():
    data, cfg = normalize_biosignal(emg_table(), ["ch1"])
    rows = read_csv(data)
    assert rows[0] == ["time", "ch1"]
    assert len(rows) == 5 and all(len(r) == 2 for r in rows)
    assert [r[0] for r in rows[1:]] == ["0.000", "0.100", "0.200", "0.300"]
    assert [float(r[1]) for r in rows[1:]] == [1.0, -2.0, 3.5, 0.25]
    assert len(cfg.tracks) == 1
    tr = cfg.tracks[0]
    assert tr.data_column == 1
    assert tr.range_min < -2.0 and tr.range_max > 3.5
    assert tr.range_min == pytest.approx(-2.0 - 0.05 * 5.5)


def test_normalize_no_channels():
    data, cfg = normalize_biosignal(emg_table(), [])
    rows = read_csv(data)
    assert rows[0] == ["time"] and len(rows) == 5
    assert cfg.tracks == []


def test_non_monotonic_time_names_row():
    table = SignalTable(["t", "a"], [(0.1, 1.0), (0.3, 1.0), (0.2, 1.0)])
    with pytest.raises(NonMonotonicTimeError) as exc:
        normalize_biosignal(table, ["a"])
    assert exc.value.row == 2


def test_unknown_column():
    with pytest.raises(UnknownColumnError):
        normalize_biosignal(emg_table(), ["ch9"])


def test_millisecond_time_unit():
    table = SignalTable(["ms", "a"], [(0.0, 1.0), (1500.0, 2.0)], time_unit="milliseconds")
    rows = read_csv(normalize_biosignal(table, ["a"])[0])
    assert [r[0] for r in rows[1:]] == ["0.000", "1.500"]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=1, max_size=40))
def test_normalized_values_survive(values):
    table = SignalTable(["t", "v"], [(i / 100, v) for i, v in enumerate(values)])
    rows = read_csv(normalize_biosignal(table, ["v"])[0])
    assert len(rows) - 1 == len(values)
    for r, v in zip(rows[1:], values):
        assert float(r[1]) == pytest.approx(v, rel=1e-6, abs=1e-12)


def test_attach_biosignal(tmp_path):
    eaf = tmp_path / "run1.eaf"
    data, cfg = normalize_biosignal(emg_table(), ["ch1"])
    (tmp_path / "signals").mkdir()
    csv_path = tmp_path / "signals" / "emg.csv"
    csv_path.write_bytes(data)
    doc = new_document()
    attach_biosignal(doc, eaf, csv_path, cfg)
    attach_biosignal(doc, eaf, csv_path, cfg)
    assert len(doc.linked_files) == 1
    lf = doc.linked_files[0]
    assert lf.mime_type == "text/csv" and lf.relative_url == "./signals/emg.csv"
    configs = parse_tsconf((tmp_path / "run1_tsconf.xml").read_bytes())
    assert len(configs) == 1 and configs[0].source_url == "signals/emg.csv"


def test_attach_missing_file(tmp_path):
    _, cfg = normalize_biosignal(emg_table(), ["ch1"])
    with pytest.raises(MissingFileError):
        attach_biosignal(new_document(), tmp_path / "a.eaf", tmp_path / "gone.csv", cfg)


def test_attach_column_mismatch(tmp_path):
    _, cfg = normalize_biosignal(emg_table(), ["ch1"])
    p = tmp_path / "other.csv"
    p.write_text("time,eda\n0.000,1.0\n")
    with pytest.raises(ColumnMismatchError):
        attach_biosignal(new_document(), tmp_path / "a.eaf", p, cfg)


def test_link_media(tmp_path, caplog):
    eaf = tmp_path / "run1.eaf"
    doc = link_media(new_document(), [tmp_path / "run1.mp4", tmp_path / "run1.wav"], eaf)
    assert [m.mime_type for m in doc.media] == ["video/mp4", "audio/x-wav"]
    assert doc.media[0].relative_url == "./run1.mp4"
    assert doc.media[0].media_url.startswith("file://")
    assert link_media(doc, [], eaf).media == doc.media
    with caplog.at_level(logging.WARNING, "easelan.ingest"):
        link_media(doc, [tmp_path / "x.xyz"], eaf)
    assert doc.media[-1].mime_type == "application/octet-stream"
    assert "x.xyz" in caplog.text


def test_link_media_is_idempotent(tmp_path):
    doc = new_document()
    link_media(doc, [tmp_path / "a.mp4"], tmp_path / "a.eaf")
    link_media(doc, [tmp_path / "a.mp4"], tmp_path / "a.eaf")
    assert len(doc.media) == 1
