"""In-memory model of an EAF annotation document.

Times are integer milliseconds throughout. Construction and mutation methods
enforce the structural invariants; ``validate_structure`` re-checks them for
documents that arrived from disk or were edited by hand.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterator, Union

from .errors import (
    DuplicateIdError,
    InvertedIntervalError,
    ModelError,
    NotTimeAlignableError,
    OverlapError,
    UnknownTierError,
)
from .findings import Finding, finding

EAF_VERSION = "3.0"
EAF_SCHEMA_URL = "http://www.mpi.nl/tools/elan/EAFv3.0.xsd"

# ISO 639-3 "undetermined"; EAF 3.0 vocabularies need a declared language.
UND_LANGUAGE = {
    "LANG_ID": "und",
    "LANG_DEF": "http://cdb.iso.org/lg/CDB-00130975-001",
    "LANG_LABEL": "undetermined (und)",
}
XSI_LOCATION = "{http://www.w3.org/2001/XMLSchema-instance}noNamespaceSchemaLocation"


class Constraint(str, Enum):
    TOP_LEVEL = "top-level"
    TIME_SUBDIVISION = "time-subdivision"
    SYMBOLIC_SUBDIVISION = "symbolic-subdivision"
    SYMBOLIC_ASSOCIATION = "symbolic-association"
    INCLUDED_IN = "included-in"

    @property
    def stereotype(self) -> str | None:
        """The CONSTRAINTS attribute value ELAN writes, None for top-level."""
        return _STEREOTYPES[self]

    @property
    def symbolic(self) -> bool:
        return self in (Constraint.SYMBOLIC_SUBDIVISION, Constraint.SYMBOLIC_ASSOCIATION)

    @classmethod
    def from_stereotype(cls, value: str | None) -> "Constraint":
        if value is None:
            return cls.TOP_LEVEL
        for member, stereo in _STEREOTYPES.items():
            if stereo == value:
                return member
        raise ValueError(f"unknown constraint stereotype {value!r}")


_STEREOTYPES = {
    Constraint.TOP_LEVEL: None,
    Constraint.TIME_SUBDIVISION: "Time_Subdivision",
    Constraint.SYMBOLIC_SUBDIVISION: "Symbolic_Subdivision",
    Constraint.SYMBOLIC_ASSOCIATION: "Symbolic_Association",
    Constraint.INCLUDED_IN: "Included_In",
}

CONSTRAINT_DESCRIPTIONS = {
    "Time_Subdivision": "Time subdivision of parent annotation's time interval, no time gaps allowed within this interval",
    "Symbolic_Subdivision": "Symbolic subdivision of a parent annotation. Annotations refering to the same parent are ordered",
    "Symbolic_Association": "1-1 association with a parent annotation",
    "Included_In": "Time alignable annotations within the parent annotation's time interval, gaps are allowed",
}


@dataclass
class Extras:
    """Fidelity bag: content the model does not interpret.

    ``attrs`` holds unknown attributes, ``children`` the canonical XML text of
    unknown child elements in document order.
    """

    attrs: dict[str, str] = field(default_factory=dict)
    children: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.attrs or self.children)


@dataclass
class TimeSlot:
    id: str
    time: int | None = None
    extras: Extras | None = None


@dataclass
class LinguisticType:
    id: str
    constraint: Constraint = Constraint.TOP_LEVEL
    time_alignable: bool = True
    vocabulary_ref: str | None = None
    extras: Extras | None = None

    def __post_init__(self) -> None:
        self.constraint = Constraint(self.constraint)
        if self.constraint.symbolic and self.time_alignable:
            raise ModelError(f"linguistic type {self.id!r}: {self.constraint.value} cannot be time-alignable")


@dataclass
class VocabularyEntry:
    id: str
    value: str
    description: str | None = None
    lang_ref: str | None = None  # None: same language as the vocabulary
    extras: Extras | None = None


@dataclass
class ControlledVocabulary:
    id: str
    description: str | None = None
    entries: list[VocabularyEntry] = field(default_factory=list)
    lang_ref: str = "und"
    extras: Extras | None = None

    def values(self) -> list[str]:
        return [e.value for e in self.entries]

    def entry(self, entry_id: str) -> VocabularyEntry | None:
        for e in self.entries:
            if e.id == entry_id:
                return e
        return None

    def duplicate_values(self) -> list[str]:
        seen: set[str] = set()
        dups = []
        for e in self.entries:
            if e.value in seen:
                dups.append(e.value)
            seen.add(e.value)
        return dups


@dataclass
class MediaDescriptor:
    media_url: str
    mime_type: str
    relative_url: str | None = None
    time_origin: int | None = None
    extras: Extras | None = None

    def __post_init__(self) -> None:
        if not self.media_url:
            raise ModelError("media descriptor needs a non-empty media url")


@dataclass
class LinkedFileDescriptor:
    url: str
    mime_type: str
    relative_url: str | None = None
    associated_with: str | None = None
    time_origin: int | None = None
    extras: Extras | None = None

    def __post_init__(self) -> None:
        if not self.url:
            raise ModelError("linked file descriptor needs a non-empty url")


@dataclass
class AlignedAnnotation:
    id: str
    begin: str  # time slot id
    end: str
    value: str = ""
    cve_ref: str | None = None
    extras: Extras | None = None


@dataclass
class RefAnnotation:
    id: str
    parent: str  # annotation id on the parent tier
    value: str = ""
    previous: str | None = None
    cve_ref: str | None = None
    extras: Extras | None = None


Annotation = Union[AlignedAnnotation, RefAnnotation]


@dataclass
class Tier:
    id: str
    type_ref: str
    parent_ref: str | None = None
    participant: str | None = None
    annotator: str | None = None
    annotations: list[Annotation] = field(default_factory=list)
    extras: Extras | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ModelError("tier id must be non-empty")

    def is_labeled(self) -> bool:
        return any(a.value.strip() for a in self.annotations)


_ANN_ID = re.compile(r"a(\d+)$")
_SLOT_ID = re.compile(r"ts(\d+)$")


@dataclass
class AnnotationDocument:
    author: str = ""
    date: str = ""
    format_version: str = EAF_VERSION
    version: str = EAF_VERSION
    time_units: str = "milliseconds"
    media: list[MediaDescriptor] = field(default_factory=list)
    linked_files: list[LinkedFileDescriptor] = field(default_factory=list)
    properties: dict[str, str] = field(default_factory=dict)
    time_order: list[TimeSlot] = field(default_factory=list)
    tiers: list[Tier] = field(default_factory=list)
    types: list[LinguisticType] = field(default_factory=list)
    vocabularies: list[ControlledVocabulary] = field(default_factory=list)
    # unknown root attributes and root-level elements the model does not own
    # (LICENSE, LOCALE, LANGUAGE, CONSTRAINT, LEXICON_REF, EXTERNAL_REF, ...)
    extras: Extras | None = None
    header_extras: Extras | None = None

    # lookups

    def get_tier(self, tier_id: str) -> Tier | None:
        for t in self.tiers:
            if t.id == tier_id:
                return t
        return None

    def tier(self, tier_id: str) -> Tier:
        t = self.get_tier(tier_id)
        if t is None:
            raise UnknownTierError(f"no tier {tier_id!r}")
        return t

    def tier_ids(self) -> list[str]:
        return [t.id for t in self.tiers]

    def linguistic_type(self, type_id: str) -> LinguisticType | None:
        for lt in self.types:
            if lt.id == type_id:
                return lt
        return None

    def vocabulary(self, cv_id: str) -> ControlledVocabulary | None:
        for cv in self.vocabularies:
            if cv.id == cv_id:
                return cv
        return None

    def vocabulary_for_tier(self, tier: Tier) -> ControlledVocabulary | None:
        lt = self.linguistic_type(tier.type_ref)
        if lt is None or lt.vocabulary_ref is None:
            return None
        return self.vocabulary(lt.vocabulary_ref)

    def slot_times(self) -> dict[str, int | None]:
        return {s.id: s.time for s in self.time_order}

    def iter_annotations(self) -> Iterator[tuple[Tier, Annotation]]:
        for t in self.tiers:
            for a in t.annotations:
                yield t, a

    def interval(self, ann: Annotation, slots: dict[str, int | None] | None = None) -> tuple[int | None, int | None] | None:
        """(begin, end) in ms for an aligned annotation, None for reference ones."""
        if not isinstance(ann, AlignedAnnotation):
            return None
        if slots is None:
            slots = self.slot_times()
        return slots.get(ann.begin), slots.get(ann.end)

    # construction

    def add_linguistic_type(self, lt: LinguisticType) -> LinguisticType:
        if self.linguistic_type(lt.id) is not None:
            raise DuplicateIdError(f"linguistic type {lt.id!r} already exists")
        if lt.vocabulary_ref is not None and self.vocabulary(lt.vocabulary_ref) is None:
            raise ModelError(f"linguistic type {lt.id!r} references unknown vocabulary {lt.vocabulary_ref!r}")
        self.types.append(lt)
        return lt

    def add_vocabulary(self, cv: ControlledVocabulary) -> ControlledVocabulary:
        if self.vocabulary(cv.id) is not None:
            raise DuplicateIdError(f"controlled vocabulary {cv.id!r} already exists")
        dups = cv.duplicate_values()
        if dups:
            raise ModelError(f"controlled vocabulary {cv.id!r} repeats value {dups[0]!r}")
        self.vocabularies.append(cv)
        if cv.lang_ref == UND_LANGUAGE["LANG_ID"]:
            self._declare_und_language()
        return cv

    def _declare_und_language(self) -> None:
        from .eaf import canonical_element_text, root_rank  # local: eaf imports model

        if self.extras is None:
            self.extras = Extras()
        if any(c.startswith("<LANGUAGE ") and 'LANG_ID="und"' in c for c in self.extras.children):
            return
        self.extras.children.append(canonical_element_text("LANGUAGE", UND_LANGUAGE))
        self.extras.children.sort(key=root_rank)

    def add_tier(
        self,
        tier_id: str,
        type_ref: str,
        parent_ref: str | None = None,
        participant: str | None = None,
        annotator: str | None = None,
    ) -> Tier:
        if self.get_tier(tier_id) is not None:
            raise DuplicateIdError(f"tier {tier_id!r} already exists")
        lt = self.linguistic_type(type_ref)
        if lt is None:
            raise ModelError(f"tier {tier_id!r} references unknown linguistic type {type_ref!r}")
        if lt.constraint is Constraint.TOP_LEVEL and parent_ref is not None:
            raise ModelError(f"tier {tier_id!r}: top-level type cannot have a parent tier")
        if lt.constraint is not Constraint.TOP_LEVEL:
            if parent_ref is None:
                raise ModelError(f"tier {tier_id!r}: {lt.constraint.value} type needs a parent tier")
            if self.get_tier(parent_ref) is None:
                raise UnknownTierError(f"parent tier {parent_ref!r} does not exist")
        tier = Tier(tier_id, type_ref, parent_ref, participant, annotator)
        self.tiers.append(tier)
        return tier

    def next_annotation_id(self) -> str:
        n = 0
        for _, a in self.iter_annotations():
            m = _ANN_ID.match(a.id)
            if m:
                n = max(n, int(m.group(1)))
        last = self.properties.get("lastUsedAnnotationId", "")
        if last.isdigit():
            n = max(n, int(last))
        return f"a{n + 1}"

    def _note_annotation_id(self, ann_id: str) -> None:
        # ELAN seeds its own id counter from this property
        if "lastUsedAnnotationId" in self.properties:
            self.properties["lastUsedAnnotationId"] = ann_id[1:]

    def _next_slot_number(self) -> int:
        n = 0
        for s in self.time_order:
            m = _SLOT_ID.match(s.id)
            if m:
                n = max(n, int(m.group(1)))
        return n + 1

    def _insert_slot(self, time: int, number: int) -> str:
        slot = TimeSlot(f"ts{number}", time)
        i = len(self.time_order)
        while i > 0:
            prev = self.time_order[i - 1].time
            if prev is not None and prev <= time:
                break
            i -= 1
        self.time_order.insert(i, slot)
        return slot.id

    def add_aligned_annotation(
        self, tier_id: str, begin: int, end: int, value: str = "", cve_ref: str | None = None
    ) -> str:
        """Add a time-aligned annotation covering [begin, end) ms; returns its id."""
        tier = self.tier(tier_id)
        lt = self.linguistic_type(tier.type_ref)
        if lt is None or not lt.time_alignable:
            raise NotTimeAlignableError(f"tier {tier_id!r} is not time-alignable")
        begin, end = int(begin), int(end)
        if begin < 0:
            raise InvertedIntervalError(f"negative begin time {begin}")
        if begin >= end:
            raise InvertedIntervalError(f"begin {begin} ms is not before end {end} ms")
        slots = self.slot_times()
        insert_at = len(tier.annotations)
        for i, other in enumerate(tier.annotations):
            span = self.interval(other, slots)
            if span is None or span[0] is None or span[1] is None:
                continue
            b, e = span
            if begin < e and b < end:
                raise OverlapError(f"[{begin}, {end}) overlaps {other.id} [{b}, {e}) on tier {tier_id!r}")
            if b >= end and i < insert_at:
                insert_at = i
        number = self._next_slot_number()
        ts1 = self._insert_slot(begin, number)
        ts2 = self._insert_slot(end, number + 1)
        ann_id = self.next_annotation_id()
        tier.annotations.insert(insert_at, AlignedAnnotation(ann_id, ts1, ts2, value, cve_ref))
        self._note_annotation_id(ann_id)
        return ann_id

    def add_aligned_annotations(self, tier_id: str, spans: list[tuple[int, int, str]]) -> list[str]:
        """Bulk form of ``add_aligned_annotation`` for (begin, end, value) spans.

        Same checks, but linear in the number of slots instead of quadratic.
        """
        tier = self.tier(tier_id)
        lt = self.linguistic_type(tier.type_ref)
        if lt is None or not lt.time_alignable:
            raise NotTimeAlignableError(f"tier {tier_id!r} is not time-alignable")
        slots = self.slot_times()
        existing = [(b, e, a.id) for b, e, a in aligned_spans(self, tier, slots)]
        new = sorted(((int(b), int(e), v) for b, e, v in spans), key=lambda s: (s[0], s[1]))
        for b, e, _ in new:
            if b < 0 or b >= e:
                raise InvertedIntervalError(f"bad interval [{b}, {e}) ms")
        clash = overlapping_pairs(existing + [(b, e, None) for b, e, _ in new])
        if clash:
            raise OverlapError(f"new annotations on tier {tier_id!r} overlap ({len(clash)} pairs)")

        number = self._next_slot_number()
        m = _ANN_ID.match(self.next_annotation_id())
        next_ann = int(m.group(1))  # type: ignore[union-attr]
        new_slots = []
        created = []
        for b, e, v in new:
            ts1, ts2 = TimeSlot(f"ts{number}", b), TimeSlot(f"ts{number + 1}", e)
            number += 2
            new_slots += (ts1, ts2)
            created.append(AlignedAnnotation(f"a{next_ann}", ts1.id, ts2.id, v))
            next_ann += 1
        new_slots.sort(key=lambda s: s.time)  # type: ignore[arg-type,return-value]
        new_times = {s.id: s.time for s in new_slots}

        merged, i = [], 0
        for s in self.time_order:
            while i < len(new_slots) and s.time is not None and new_slots[i].time < s.time:  # type: ignore[operator]
                merged.append(new_slots[i])
                i += 1
            merged.append(s)
        merged.extend(new_slots[i:])
        self.time_order = merged

        pending = sorted(created, key=lambda a: new_times[a.begin])
        merged_anns, j = [], 0
        for a in tier.annotations:
            b = slots.get(a.begin) if isinstance(a, AlignedAnnotation) else None
            while b is not None and j < len(pending) and new_times[pending[j].begin] < b:
                merged_anns.append(pending[j])
                j += 1
            merged_anns.append(a)
        merged_anns.extend(pending[j:])
        tier.annotations = merged_anns
        if created:
            self._note_annotation_id(created[-1].id)
        return [a.id for a in created]

    def add_ref_annotation(
        self, tier_id: str, parent_id: str, value: str = "", previous: str | None = None, cve_ref: str | None = None
    ) -> str:
        """Add a symbolic annotation that depends on ``parent_id`` on the parent tier."""
        tier = self.tier(tier_id)
        lt = self.linguistic_type(tier.type_ref)
        if lt is None or not lt.constraint.symbolic:
            raise ModelError(f"tier {tier_id!r} is not a symbolic tier")
        parent_tier = self.tier(tier.parent_ref)  # type: ignore[arg-type]
        if not any(a.id == parent_id for a in parent_tier.annotations):
            raise ModelError(f"annotation {parent_id!r} is not on parent tier {parent_tier.id!r}")
        siblings = [a for a in tier.annotations if isinstance(a, RefAnnotation) and a.parent == parent_id]
        if lt.constraint is Constraint.SYMBOLIC_ASSOCIATION and siblings:
            raise ModelError(f"annotation {parent_id!r} already has an associated annotation on {tier_id!r}")
        if previous is not None and not any(a.id == previous for a in siblings):
            raise ModelError(f"previous annotation {previous!r} is not a sibling under {parent_id!r}")
        if previous is None and lt.constraint is Constraint.SYMBOLIC_SUBDIVISION and siblings:
            previous = siblings[-1].id
        ann_id = self.next_annotation_id()
        tier.annotations.append(RefAnnotation(ann_id, parent_id, value, previous, cve_ref))
        self._note_annotation_id(ann_id)
        return ann_id

    def remove_annotation(self, tier_id: str, annotation_id: str) -> Annotation:
        tier = self.tier(tier_id)
        for i, a in enumerate(tier.annotations):
            if a.id == annotation_id:
                return tier.annotations.pop(i)
        raise ModelError(f"no annotation {annotation_id!r} on tier {tier_id!r}")

    def clean_time_slots(self) -> int:
        """Drop time slots no annotation references; returns how many went."""
        used = set()
        for _, a in self.iter_annotations():
            if isinstance(a, AlignedAnnotation):
                used.update((a.begin, a.end))
        before = len(self.time_order)
        self.time_order = [s for s in self.time_order if s.id in used]
        return before - len(self.time_order)


def new_document(author: str = "", date: datetime | str | None = None) -> AnnotationDocument:
    """An empty, structurally valid EAF 3.0 document."""
    from .eaf import canonical_element_text

    if date is None:
        date = datetime.now(timezone.utc).replace(microsecond=0)
    if isinstance(date, datetime):
        date = date.isoformat()
    doc = AnnotationDocument(author=author, date=date)
    doc.header_extras = Extras(attrs={"MEDIA_FILE": ""})
    doc.extras = Extras(
        attrs={XSI_LOCATION: EAF_SCHEMA_URL},
        children=[
            canonical_element_text("CONSTRAINT", {"STEREOTYPE": stereo, "DESCRIPTION": desc})
            for stereo, desc in CONSTRAINT_DESCRIPTIONS.items()
        ]
    )
    return doc


def overlapping_pairs(spans: list[tuple[int, int, object]]) -> list[tuple[object, object]]:
    """Pairs of (begin, end, key) spans that overlap as half-open intervals.

    Empty or inverted spans never overlap anything.
    """
    live = sorted((s for s in spans if s[0] < s[1]), key=lambda s: (s[0], s[1]))
    pairs = []
    for i, (b1, e1, k1) in enumerate(live):
        for b2, e2, k2 in live[i + 1:]:
            if b2 >= e1:
                break
            pairs.append((k1, k2))
    return pairs


def aligned_spans(doc: AnnotationDocument, tier: Tier, slots: dict[str, int | None]) -> list[tuple[int, int, AlignedAnnotation]]:
    out = []
    for a in tier.annotations:
        if isinstance(a, AlignedAnnotation):
            b, e = slots.get(a.begin), slots.get(a.end)
            if b is not None and e is not None:
                out.append((b, e, a))
    return out


def time_findings(doc: AnnotationDocument, slots: dict[str, int | None] | None = None) -> list[Finding]:
    """E004 per overlapping pair; E005 per inverted interval, negative or out-of-order slot."""
    if slots is None:
        slots = doc.slot_times()
    out = []
    last = None
    for s in doc.time_order:
        if s.time is None:
            continue
        if s.time < 0:
            out.append(finding("E005", f"time slot {s.id!r} has negative time {s.time}", context=s.id))
        if last is not None and s.time < last:
            out.append(finding("E005", f"time slot {s.id!r} ({s.time} ms) is out of order", context=s.id))
        last = s.time
    for tier in doc.tiers:
        spans = aligned_spans(doc, tier, slots)
        for b, e, a in spans:
            if b >= e:
                out.append(finding("E005", f"interval [{b}, {e}) ms is empty or inverted",
                                   tier=tier.id, annotation=a.id))
        for a1, a2 in overlapping_pairs(spans):
            out.append(finding("E004", f"overlaps annotation {a1.id}",  # type: ignore[union-attr]
                               tier=tier.id, annotation=a2.id, context=a1.id))  # type: ignore[union-attr]
    return out


def validate_structure(doc: AnnotationDocument) -> list[Finding]:
    """Every broken reference or invariant as a finding; [] iff structurally valid."""
    out: list[Finding] = []

    def e006(msg: str, tier: str | None = None, ann: str | None = None) -> None:
        out.append(finding("E006", msg, tier=tier, annotation=ann))

    slots: dict[str, int | None] = {}
    for s in doc.time_order:
        if s.id in slots:
            e006(f"duplicate time slot id {s.id!r}")
        slots[s.id] = s.time

    cv_ids = set()
    for cv in doc.vocabularies:
        if cv.id in cv_ids:
            e006(f"duplicate controlled vocabulary id {cv.id!r}")
        cv_ids.add(cv.id)
        for value in cv.duplicate_values():
            out.append(finding("E003", f"controlled vocabulary {cv.id!r} repeats value {value!r}", context=value))

    types: dict[str, LinguisticType] = {}
    for lt in doc.types:
        if lt.id in types:
            e006(f"duplicate linguistic type id {lt.id!r}")
        types[lt.id] = lt
        if lt.vocabulary_ref is not None and lt.vocabulary_ref not in cv_ids:
            e006(f"linguistic type {lt.id!r} references unknown vocabulary {lt.vocabulary_ref!r}")

    tiers: dict[str, Tier] = {}
    for t in doc.tiers:
        if t.id in tiers:
            e006(f"duplicate tier id {t.id!r}", tier=t.id)
        tiers[t.id] = t

    for t in doc.tiers:
        lt = types.get(t.type_ref)
        if lt is None:
            e006(f"tier {t.id!r} references unknown linguistic type {t.type_ref!r}", tier=t.id)
        elif lt.constraint is Constraint.TOP_LEVEL and t.parent_ref is not None:
            e006(f"tier {t.id!r} has a parent but its type is top-level", tier=t.id)
        elif lt.constraint is not Constraint.TOP_LEVEL and t.parent_ref is None:
            e006(f"tier {t.id!r} has no parent but its type is {lt.constraint.value}", tier=t.id)
        if t.parent_ref is not None:
            if t.parent_ref not in tiers:
                e006(f"tier {t.id!r} references unknown parent tier {t.parent_ref!r}", tier=t.id)
            else:
                seen = {t.id}
                cur = tiers.get(t.parent_ref)
                while cur is not None:
                    if cur.id == t.id:
                        e006(f"tier {t.id!r} is its own ancestor (parent cycle)", tier=t.id)
                        break
                    if cur.id in seen or cur.parent_ref is None:
                        break
                    seen.add(cur.id)
                    cur = tiers.get(cur.parent_ref)

    ann_tier: dict[str, str] = {}
    for t, a in doc.iter_annotations():
        if a.id in ann_tier:
            e006(f"duplicate annotation id {a.id!r}", tier=t.id, ann=a.id)
        else:
            ann_tier[a.id] = t.id

    for t in doc.tiers:
        lt = types.get(t.type_ref)
        for a in t.annotations:
            if isinstance(a, AlignedAnnotation):
                if lt is not None and not lt.time_alignable:
                    e006(f"time-aligned annotation on symbolic tier {t.id!r}", tier=t.id, ann=a.id)
                for ref in (a.begin, a.end):
                    if ref not in slots:
                        e006(f"annotation {a.id!r} references missing time slot {ref!r}", tier=t.id, ann=a.id)
            else:
                if lt is not None and lt.time_alignable:
                    e006(f"reference annotation on time-alignable tier {t.id!r}", tier=t.id, ann=a.id)
                where = ann_tier.get(a.parent)
                if where is None:
                    e006(f"annotation {a.id!r} references missing parent {a.parent!r}", tier=t.id, ann=a.id)
                elif where != t.parent_ref:
                    e006(f"parent annotation {a.parent!r} is not on parent tier {t.parent_ref!r}", tier=t.id, ann=a.id)
                if a.previous is not None and ann_tier.get(a.previous) != t.id:
                    e006(f"annotation {a.id!r} references missing previous annotation {a.previous!r}",
                         tier=t.id, ann=a.id)

    out.extend(time_findings(doc, slots))
    return out
