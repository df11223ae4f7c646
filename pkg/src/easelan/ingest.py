"""Pre-processing: recognizer output, biosignal tables and media files into a document."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Sequence

import jsonschema

from .errors import (
    ColumnMismatchError,
    DuplicateTierError,
    IngestError,
    MissingFileError,
    NonMonotonicTimeError,
    TranscriptionSchemaError,
    UnknownColumnError,
)
from .model import AnnotationDocument, LinguisticType, LinkedFileDescriptor, MediaDescriptor
from .sidecars import TIMESTAMPED, Track, TrackConfiguration, emit_tsconf, parse_tsconf, sidecar_paths

log = logging.getLogger(__name__)

DEFAULT_TRANSCRIPT_TIER = "Whisper Transcripts"
TRANSCRIPT_TYPE = "transcript"
WORD = "word"
SEGMENT = "segment"

MIME_TYPES = {".mp4": "video/mp4", ".wav": "audio/x-wav", ".mpg": "video/mpeg"}
FALLBACK_MIME = "application/octet-stream"

TRANSCRIPTION_SCHEMA = {
    "type": "object",
    "required": ["segments"],
    "properties": {
        "text": {"type": "string"},
        "language": {"type": "string"},
        "segments": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["start", "end", "text"],
                "properties": {
                    "start": {"type": "number"},
                    "end": {"type": "number"},
                    "text": {"type": "string"},
                    "words": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["word", "start", "end"],
                            "properties": {
                                "word": {"type": "string"},
                                "start": {"type": "number"},
                                "end": {"type": "number"},
                                "probability": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                            },
                        },
                    },
                },
            },
        },
    },
}


def seconds_to_ms(seconds: float) -> int:
    """Seconds to integer milliseconds, rounding half away from zero.

    Goes through the shortest decimal repr so 1.0005 s becomes 1001 ms, as
    written, rather than whatever the binary float happens to hold.
    """
    return int((Decimal(str(seconds)) * 1000).to_integral_value(rounding=ROUND_HALF_UP))


@dataclass
class Word:
    word: str
    start: float
    end: float
    confidence: float | None = None


@dataclass
class Segment:
    start: float
    end: float
    text: str
    words: list[Word] = field(default_factory=list)


@dataclass
class TranscriptionResult:
    text: str = ""
    language: str = ""
    segments: list[Segment] = field(default_factory=list)

    @classmethod
    def from_json(cls, obj: dict) -> "TranscriptionResult":
        try:
            jsonschema.validate(obj, TRANSCRIPTION_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise TranscriptionSchemaError(f"transcription JSON at {path}: {exc.message}") from None
        segments = [
            Segment(s["start"], s["end"], s["text"],
                    [Word(w["word"], w["start"], w["end"], w.get("probability")) for w in s.get("words", [])])
            for s in obj["segments"]
        ]
        return cls(obj.get("text", ""), obj.get("language", ""), segments)

    def check(self) -> None:
        prev = None
        for i, s in enumerate(self.segments):
            if prev is not None and s.start < prev:
                raise TranscriptionSchemaError(f"segment {i} starts before segment {i - 1}")
            prev = s.start
            wprev = None
            for j, w in enumerate(s.words):
                if w.start > w.end:
                    raise TranscriptionSchemaError(f"segment {i} word {j} ends before it starts")
                if wprev is not None and w.start < wprev:
                    raise TranscriptionSchemaError(f"segment {i} word {j} starts before the previous word")
                wprev = w.start


def load_transcription(data: bytes | str) -> TranscriptionResult:
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise TranscriptionSchemaError(f"not JSON: {exc}") from None
    return TranscriptionResult.from_json(obj)


def transcription_spans(result: TranscriptionResult, granularity: str = WORD) -> list[tuple[int, int, str]]:
    """(begin_ms, end_ms, text) per word or segment after clamping and 1 ms expansion."""
    if granularity == WORD:
        items = [(w.start, w.end, w.word) for s in result.segments for w in s.words]
    elif granularity == SEGMENT:
        items = [(s.start, s.end, s.text) for s in result.segments]
    else:
        raise ValueError(f"granularity must be {WORD!r} or {SEGMENT!r}, not {granularity!r}")
    spans = []
    prev_end = None
    for start, end, text in items:
        b, e = seconds_to_ms(start), seconds_to_ms(end)
        if prev_end is not None and b < prev_end:
            b = prev_end
        if e <= b:
            e = b + 1
        spans.append((b, e, text.strip()))
        prev_end = e
    return spans


def _ensure_transcript_type(doc: AnnotationDocument) -> str:
    lt = doc.linguistic_type(TRANSCRIPT_TYPE)
    if lt is None:
        doc.add_linguistic_type(LinguisticType(TRANSCRIPT_TYPE))
    elif not lt.time_alignable or lt.constraint.value != "top-level":
        raise IngestError(f"linguistic type {TRANSCRIPT_TYPE!r} exists but is not a top-level alignable type")
    return TRANSCRIPT_TYPE


def import_transcription(
    doc: AnnotationDocument,
    result: TranscriptionResult,
    tier_name: str = DEFAULT_TRANSCRIPT_TIER,
    granularity: str = WORD,
) -> AnnotationDocument:
    """Add one tier holding the recognizer output, one annotation per word or segment."""
    if doc.get_tier(tier_name) is not None:
        raise DuplicateTierError(f"tier {tier_name!r} already exists")
    result.check()
    spans = transcription_spans(result, granularity)
    doc.add_tier(tier_name, _ensure_transcript_type(doc))
    if not result.segments:
        log.warning("transcription has no segments; created empty tier %r", tier_name)
    doc.add_aligned_annotations(tier_name, spans)
    return doc


# biosignals

@dataclass
class SignalTable:
    column_names: list[str]
    rows: list[tuple[float, ...]]
    time_column: int = 0
    time_unit: str = "seconds"  # or "milliseconds"


def read_signal_csv(data: bytes | str, time_column: int = 0, time_unit: str = "seconds") -> SignalTable:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty CSV") from None
    rows = []
    for n, row in enumerate(reader, start=1):
        if not row:
            continue
        try:
            rows.append(tuple(float(v) for v in row))
        except ValueError as exc:
            raise IngestError(f"CSV data row {n}: {exc}") from None
    return SignalTable([h.strip() for h in header], rows, time_column, time_unit)


_PALETTE = [(0, 0, 255), (255, 0, 0), (0, 160, 0), (255, 140, 0), (128, 0, 128), (0, 160, 160)]


def _padded_range(values: list[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 1.0
    lo, hi = min(values), max(values)
    pad = 0.05 * (hi - lo)
    if pad == 0:
        pad = 0.05 * abs(hi) or 1.0
    return lo - pad, hi + pad


def normalize_biosignal(
    table: SignalTable,
    channels: Sequence[str],
    units: dict[str, str] | None = None,
    source_url: str = "signals.csv",
) -> tuple[bytes, TrackConfiguration]:
    """Project ``channels`` into a time-first CSV (seconds, 3 decimals) plus track config."""
    width = len(table.column_names)
    for i, row in enumerate(table.rows):
        if len(row) != width:
            raise IngestError(f"row {i} has {len(row)} values, header has {width}")
    cols = []
    for name in channels:
        if name not in table.column_names:
            raise UnknownColumnError(f"no column {name!r} (have {', '.join(table.column_names)})")
        cols.append(table.column_names.index(name))
    times = [row[table.time_column] for row in table.rows]
    for i in range(1, len(times)):
        if times[i] <= times[i - 1]:
            raise NonMonotonicTimeError(i)
    scale = 1000.0 if table.time_unit == "milliseconds" else 1.0

    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["time"] + list(channels))
    for t, row in zip(times, table.rows):
        w.writerow([f"{t / scale:.3f}"] + [repr(float(row[c])) for c in cols])

    units = units or {}
    tracks = []
    for k, (name, c) in enumerate(zip(channels, cols)):
        lo, hi = _padded_range([row[c] for row in table.rows])
        tracks.append(Track(name, k + 1, lo, hi, _PALETTE[k % len(_PALETTE)], units.get(name)))
    return out.getvalue().encode("utf-8"), TrackConfiguration(source_url, TIMESTAMPED, 0, tracks)


def _relative(path: Path, base: Path) -> str:
    return Path(os.path.relpath(path, base)).as_posix()


def _relative_url(path: Path, base: Path) -> str:
    rel = _relative(path, base)
    return rel if rel.startswith("../") else "./" + rel


def attach_biosignal(
    doc: AnnotationDocument, eaf_path: str | Path, csv_path: str | Path, config: TrackConfiguration
) -> AnnotationDocument:
    """Link a biosignal CSV to the document and record its tracks in the tsconf sidecar."""
    eaf_path, csv_path = Path(eaf_path).absolute(), Path(csv_path).absolute()
    if not csv_path.is_file():
        raise MissingFileError(f"{csv_path} does not exist")
    with open(csv_path, newline="", encoding="utf-8") as f:
        header = [h.strip() for h in next(csv.reader(f), [])]
    if config.time_column is not None and config.time_column >= len(header):
        raise ColumnMismatchError(f"time column {config.time_column} is missing from {csv_path.name}")
    for t in config.tracks:
        if t.data_column >= len(header) or header[t.data_column] != t.name:
            raise ColumnMismatchError(f"{csv_path.name} has no column {t.name!r} at index {t.data_column}")

    rel = _relative(csv_path, eaf_path.parent)
    config = TrackConfiguration(rel, config.sample_type, config.time_column, list(config.tracks))
    config.check()
    url = csv_path.as_uri()
    if not any(lf.url == url for lf in doc.linked_files):
        doc.linked_files.append(LinkedFileDescriptor(url, "text/csv", _relative_url(csv_path, eaf_path.parent)))

    tsconf, _ = sidecar_paths(eaf_path)
    configs = parse_tsconf(tsconf.read_bytes()) if tsconf.exists() else []
    configs = [c for c in configs if c.source_url != rel] + [config]
    tsconf.write_bytes(emit_tsconf(configs))
    return doc


def link_media(doc: AnnotationDocument, paths: Sequence[str | Path], eaf_path: str | Path | None = None) -> AnnotationDocument:
    """One media descriptor per path; missing files and unknown types only log."""
    base = Path(eaf_path).absolute().parent if eaf_path is not None else Path.cwd()
    for p in paths:
        p = Path(p).absolute()
        mime = MIME_TYPES.get(p.suffix.lower())
        if mime is None:
            log.warning("no MIME type known for %s; using %s", p.name, FALLBACK_MIME)
            mime = FALLBACK_MIME
        if not p.exists():
            log.warning("media file %s does not exist (yet)", p)
        url = p.as_uri()
        if any(m.media_url == url for m in doc.media):
            continue
        doc.media.append(MediaDescriptor(url, mime, _relative_url(p, base)))
    return doc
