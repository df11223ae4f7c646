"""Ontology-facing exports: concept lists to controlled vocabularies, and
aligned annotations to N-Triples.

Every exported event gets five statements: its class, begin and end in
milliseconds, the tier it came from, and either its label or the concept it
references. The predicates live under ``urn:easelan:terms#``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Union
from urllib.parse import quote

from .errors import (
    ConceptSchemeError,
    DuplicateLabelError,
    InvalidIRIError,
    MappingError,
    UnmappedConceptError,
)
from .model import AlignedAnnotation, AnnotationDocument, ControlledVocabulary, VocabularyEntry

log = logging.getLogger(__name__)

DEFAULT_NAMESPACE = "http://www.ease-crc.org/ont/SOMA.owl#"
TERMS = "urn:easelan:terms#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
XSD = "http://www.w3.org/2001/XMLSchema#"

# absolute IRI: a scheme, then no whitespace, controls or the characters N-Triples forbids
_IRI_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:[^\x00-\x20<>\"{}|^`\\]*")
_BNODE_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*(?<!\.)")


@dataclass(frozen=True, order=True)
class IRI:
    value: str

    def __post_init__(self) -> None:
        if not _IRI_RE.fullmatch(self.value):
            raise InvalidIRIError(f"not an absolute IRI: {self.value!r}")

    def n3(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, order=True)
class BNode:
    id: str

    def __post_init__(self) -> None:
        if not _BNODE_RE.fullmatch(self.id):
            raise InvalidIRIError(f"bad blank node id {self.id!r}")

    def n3(self) -> str:
        return f"_:{self.id}"


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t", "\b": "\\b", "\f": "\\f"}


def escape_literal(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


@dataclass(frozen=True, order=True)
class Literal:
    value: str
    datatype: IRI = IRI(XSD + "string")

    def n3(self) -> str:
        return f'"{escape_literal(self.value)}"^^{self.datatype.n3()}'


Term = Union[IRI, BNode, Literal]


@dataclass(frozen=True)
class Statement:
    subject: IRI | BNode
    predicate: IRI
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.subject, (IRI, BNode)):
            raise TypeError("subject must be an IRI or blank node")
        if not isinstance(self.predicate, IRI):
            raise TypeError("predicate must be an IRI")
        if not isinstance(self.object, (IRI, BNode, Literal)):
            raise TypeError("object must be an IRI, blank node or literal")

    def ntriples(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


def serialize_ntriples(statements: Iterable[Statement]) -> bytes:
    """One line per statement, sorted; empty input gives an empty file."""
    lines = sorted(s.ntriples() for s in statements)
    return "".join(line + "\n" for line in lines).encode("utf-8")


# concepts

@dataclass(frozen=True)
class Concept:
    name: str
    label: str
    parent: str | None = None


@dataclass
class ConceptScheme:
    namespace: str = DEFAULT_NAMESPACE
    concepts: list[Concept] = field(default_factory=list)

    def __post_init__(self) -> None:
        IRI(self.namespace)
        if not self.namespace.endswith(("/", "#")):
            raise ConceptSchemeError(f"namespace {self.namespace!r} must end in '/' or '#'")
        names: dict[str, Concept] = {}
        for c in self.concepts:
            if not c.name:
                raise ConceptSchemeError("concept with empty name")
            if c.name in names:
                raise ConceptSchemeError(f"duplicate concept name {c.name!r}")
            names[c.name] = c
            try:
                IRI(self.namespace + c.name)
            except InvalidIRIError:
                raise ConceptSchemeError(f"concept name {c.name!r} does not form an IRI") from None
        for c in self.concepts:
            if c.parent is not None and c.parent not in names:
                raise ConceptSchemeError(f"concept {c.name!r}: parent {c.parent!r} is not defined")
        for c in self.concepts:
            seen = {c.name}
            p = c.parent
            while p is not None:
                if p in seen:
                    raise ConceptSchemeError(f"concept {c.name!r}: parent chain loops")
                seen.add(p)
                p = names[p].parent
        self._by_name = names

    def iri(self, name: str) -> IRI:
        return IRI(self.namespace + name)

    def get(self, name: str) -> Concept | None:
        return self._by_name.get(name)

    def by_label(self) -> dict[str, Concept]:
        out: dict[str, Concept] = {}
        for c in self.concepts:
            if c.label in out:
                raise DuplicateLabelError(f"concepts {out[c.label].name!r} and {c.name!r} share label {c.label!r}")
            out[c.label] = c
        return out


def _concept(obj: Mapping) -> Concept:
    name = (obj.get("name") or "").strip()
    label = obj.get("label")
    label = name if label in (None, "") else str(label)
    parent = obj.get("parent") or None
    return Concept(name, label, parent.strip() if parent else None)


def load_concepts(data: bytes | str, fmt: str = "json", namespace: str | None = None) -> ConceptScheme:
    """Parse a concept list: JSON (array, or object with ``namespace``/``concepts``) or CSV."""
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(data))
        if not reader.fieldnames or "name" not in reader.fieldnames:
            raise ConceptSchemeError("concept CSV needs a 'name' column")
        return ConceptScheme(namespace or DEFAULT_NAMESPACE, [_concept(row) for row in reader])
    if fmt != "json":
        raise ValueError(f"unknown concept list format {fmt!r}")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConceptSchemeError(f"concept list is not JSON: {exc}") from None
    if isinstance(obj, dict):
        namespace = namespace or obj.get("namespace")
        obj = obj.get("concepts", [])
    if not isinstance(obj, list) or not all(isinstance(o, dict) for o in obj):
        raise ConceptSchemeError("concept list must be an array of objects")
    return ConceptScheme(namespace or DEFAULT_NAMESPACE, [_concept(o) for o in obj])


def load_concepts_file(path: str | Path, namespace: str | None = None) -> ConceptScheme:
    p = Path(path)
    fmt = "csv" if p.suffix.lower() == ".csv" else "json"
    return load_concepts(p.read_bytes(), fmt, namespace)


def concept_order(scheme: ConceptScheme) -> list[Concept]:
    """Depth-first over the parent hierarchy, siblings by local name."""
    children: dict[str | None, list[Concept]] = {}
    for c in scheme.concepts:
        children.setdefault(c.parent, []).append(c)
    for group in children.values():
        group.sort(key=lambda c: c.name)
    out: list[Concept] = []
    stack = list(reversed(children.get(None, [])))
    while stack:
        c = stack.pop()
        out.append(c)
        stack.extend(reversed(children.get(c.name, [])))
    return out


def generate_ecv_from_concepts(scheme: ConceptScheme, vocabulary_id: str) -> ControlledVocabulary:
    scheme.by_label()  # raises on duplicate labels
    entries = [
        VocabularyEntry(f"cveid_{c.name}", c.label, scheme.iri(c.name).value)
        for c in concept_order(scheme)
    ]
    return ControlledVocabulary(vocabulary_id, f"Concepts from {scheme.namespace}", entries)


# annotation export

class ValueBinding(str, Enum):
    AS_LABEL = "as-label"
    AS_CONCEPT_REF = "as-concept-ref"


@dataclass(frozen=True)
class TierBinding:
    class_iri: IRI
    value_binding: ValueBinding = ValueBinding.AS_LABEL


TierMapping = dict  # tier id -> TierBinding


def load_mapping(data: bytes | str) -> TierMapping:
    """``{"<tier>": {"class": "<iri>", "binding": "as-label" | "as-concept-ref"}}``."""
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MappingError(f"mapping is not JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MappingError("mapping must be a JSON object keyed by tier id")
    out: TierMapping = {}
    for tier, spec in obj.items():
        if not tier:
            raise MappingError("mapping has an empty tier id")
        if not isinstance(spec, dict) or "class" not in spec:
            raise MappingError(f"tier {tier!r}: expected an object with a 'class' IRI")
        try:
            binding = ValueBinding(spec.get("binding", ValueBinding.AS_LABEL.value))
        except ValueError:
            raise MappingError(f"tier {tier!r}: unknown binding {spec.get('binding')!r}") from None
        out[tier] = TierBinding(IRI(spec["class"]), binding)
    return out


def _predicate(name: str) -> IRI:
    return IRI(TERMS + name)


HAS_BEGIN = _predicate("hasBegin")
HAS_END = _predicate("hasEnd")
HAS_TIER = _predicate("hasTier")
HAS_LABEL = _predicate("hasLabel")
REFERENCES_CONCEPT = _predicate("referencesConcept")
TYPE = IRI(RDF_TYPE)
XSD_INTEGER = IRI(XSD + "integer")
XSD_STRING = IRI(XSD + "string")


def event_iri(base_iri: str, eaf_stem: str, annotation_id: str) -> IRI:
    return IRI(base_iri + quote(eaf_stem, safe="-._~") + "#" + quote(annotation_id, safe="-._~"))


def _concept_resolver(doc: AnnotationDocument, tier_id: str, scheme: ConceptScheme | None):
    if scheme is None:
        raise MappingError(f"tier {tier_id!r} binds concepts but no concept scheme was given")
    cv = doc.vocabulary_for_tier(doc.tier(tier_id))
    known = {scheme.iri(c.name).value for c in scheme.concepts}
    if cv is None or not cv.entries or any(e.description not in known for e in cv.entries):
        raise MappingError(f"tier {tier_id!r}: as-concept-ref needs a vocabulary generated from the concept scheme")
    labels = scheme.by_label()

    def resolve(ann: AlignedAnnotation) -> IRI:
        if ann.cve_ref is not None:
            entry = cv.entry(ann.cve_ref)
            if entry is not None and entry.description in known:
                return IRI(entry.description)
        concept = labels.get(ann.value)
        if concept is None:
            raise UnmappedConceptError(ann.id, ann.value)
        return scheme.iri(concept.name)

    return resolve


def export_triples(
    doc: AnnotationDocument,
    mapping: Mapping[str, TierBinding],
    base_iri: str,
    eaf_stem: str,
    scheme: ConceptScheme | None = None,
) -> list[Statement]:
    IRI(base_iri or "")
    for tier_id in mapping:
        if doc.get_tier(tier_id) is None:
            raise MappingError(f"mapped tier {tier_id!r} is not in the document")
    slots = doc.slot_times()
    out: list[Statement] = []
    for tier in doc.tiers:
        binding = mapping.get(tier.id)
        if binding is None:
            continue
        resolve = _concept_resolver(doc, tier.id, scheme) if binding.value_binding is ValueBinding.AS_CONCEPT_REF else None
        for ann in tier.annotations:
            if not isinstance(ann, AlignedAnnotation):
                log.warning("tier %r: skipping reference annotation %s (no time interval)", tier.id, ann.id)
                continue
            begin, end = slots.get(ann.begin), slots.get(ann.end)
            if begin is None or end is None:
                log.warning("tier %r: skipping annotation %s with an unaligned time slot", tier.id, ann.id)
                continue
            ev = event_iri(base_iri, eaf_stem, ann.id)
            out += [
                Statement(ev, TYPE, binding.class_iri),
                Statement(ev, HAS_BEGIN, Literal(str(begin), XSD_INTEGER)),
                Statement(ev, HAS_END, Literal(str(end), XSD_INTEGER)),
                Statement(ev, HAS_TIER, Literal(tier.id, XSD_STRING)),
                Statement(ev, REFERENCES_CONCEPT, resolve(ann)) if resolve
                else Statement(ev, HAS_LABEL, Literal(ann.value, XSD_STRING)),
            ]
    return out
