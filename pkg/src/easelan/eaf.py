"""Reading and writing EAF documents, ELAN templates and ECV vocabulary files.

Output is deterministic: UTF-8, LF line endings, four-space indentation and
attributes in EAF 3.0 schema declaration order. Anything the model does not
interpret survives a read/write cycle through the ``Extras`` bags.
"""

from __future__ import annotations

import copy
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pyexpat import ExpatError, ParserCreate
from typing import Iterable

from .errors import (
    DanglingReferenceError,
    DuplicateEntryValueError,
    MalformedXMLError,
    ModelError,
    SchemaViolationError,
    TemplateContainsAnnotationsError,
)
from .model import (
    UND_LANGUAGE,
    AlignedAnnotation,
    AnnotationDocument,
    Constraint,
    ControlledVocabulary,
    Extras,
    LinguisticType,
    LinkedFileDescriptor,
    MediaDescriptor,
    RefAnnotation,
    Tier,
    TimeSlot,
    VocabularyEntry,
    validate_structure,
)

XML_DECLARATION = '<?xml version="1.0" encoding="UTF-8"?>\n'
XSI = "http://www.w3.org/2001/XMLSchema-instance"
ECV_SCHEMA_URL = "http://www.mpi.nl/tools/elan/EAFv2.8.xsd"

# schema declaration order per element; unknown attributes follow, sorted
ATTR_ORDER = {
    "ANNOTATION_DOCUMENT": ("DATE", "AUTHOR", "VERSION", "FORMAT"),
    "HEADER": ("MEDIA_FILE", "TIME_UNITS"),
    "MEDIA_DESCRIPTOR": ("MEDIA_URL", "RELATIVE_MEDIA_URL", "MIME_TYPE", "TIME_ORIGIN", "EXTRACTED_FROM"),
    "LINKED_FILE_DESCRIPTOR": ("LINK_URL", "RELATIVE_LINK_URL", "MIME_TYPE", "TIME_ORIGIN", "ASSOCIATED_WITH"),
    "PROPERTY": ("NAME",),
    "TIME_SLOT": ("TIME_SLOT_ID", "TIME_VALUE"),
    "TIER": ("TIER_ID", "PARTICIPANT", "ANNOTATOR", "LINGUISTIC_TYPE_REF", "DEFAULT_LOCALE", "PARENT_REF",
             "EXT_REF", "LANG_REF"),
    "ALIGNABLE_ANNOTATION": ("ANNOTATION_ID", "EXT_REF", "LANG_REF", "CVE_REF", "TIME_SLOT_REF1",
                             "TIME_SLOT_REF2", "SVG_REF"),
    "REF_ANNOTATION": ("ANNOTATION_ID", "EXT_REF", "LANG_REF", "CVE_REF", "ANNOTATION_REF", "PREVIOUS_ANNOTATION"),
    "LINGUISTIC_TYPE": ("LINGUISTIC_TYPE_ID", "TIME_ALIGNABLE", "CONSTRAINTS", "GRAPHIC_REFERENCES",
                        "CONTROLLED_VOCABULARY_REF", "EXT_REF", "LEXICON_REF"),
    "CONTROLLED_VOCABULARY": ("CV_ID", "EXT_REF"),
    "DESCRIPTION": ("LANG_REF",),
    "CV_ENTRY_ML": ("CVE_ID", "EXT_REF"),
    "CVE_VALUE": ("LANG_REF", "DESCRIPTION"),
    "CV_RESOURCE": ("AUTHOR", "DATE", "VERSION"),
    "LANGUAGE": ("LANG_ID", "LANG_DEF", "LANG_LABEL"),
}

# position of root-level element kinds in the EAF 3.0 content model
_ROOT_RANK = {
    "LICENSE": 0, "HEADER": 1, "TIME_ORDER": 2, "TIER": 3, "LINGUISTIC_TYPE": 4, "LOCALE": 5,
    "LANGUAGE": 6, "CONSTRAINT": 7, "CONTROLLED_VOCABULARY": 8, "LEXICON_REF": 9,
    "REF_LINK_SET": 10, "EXTERNAL_REF": 11,
}
_UNKNOWN_RANK = 12
_TAG = re.compile(r"<([^\s/>]+)")


# low-level XML

Position = tuple[int, int]


def _clark(name: str) -> str:
    # expat reports namespaced names as "uri}local"
    return "{" + name if "}" in name else name


def read_xml(data: bytes | str) -> tuple[ET.Element, dict[ET.Element, Position]]:
    """Parse XML into an ElementTree, remembering each element's (line, column)."""
    builder = ET.TreeBuilder()
    positions: dict[ET.Element, Position] = {}
    parser = ParserCreate(namespace_separator="}")
    parser.buffer_text = True
    parser.ordered_attributes = True

    def start(name, attrs):
        attrib = {_clark(attrs[i]): attrs[i + 1] for i in range(0, len(attrs), 2)}
        elem = builder.start(_clark(name), attrib)
        positions[elem] = (parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)

    parser.StartElementHandler = start
    parser.EndElementHandler = lambda name: builder.end(_clark(name))
    parser.CharacterDataHandler = builder.data
    try:
        if isinstance(data, str):
            data = data.encode("utf-8")
        parser.Parse(data, True)
    except ExpatError as exc:
        raise MalformedXMLError(str(exc).split(":")[0], exc.lineno, exc.offset + 1) from None
    return builder.close(), positions


def canonical_text(elem: ET.Element) -> str:
    """Stable string form of an element kept in a fidelity bag."""
    elem = copy.deepcopy(elem)
    for e in elem.iter():
        if len(e) and e.text is not None and not e.text.strip():
            e.text = None
        for child in e:
            if child.tail is not None and not child.tail.strip():
                child.tail = None
    elem.tail = None
    return ET.tostring(elem, encoding="unicode")


def canonical_element_text(tag: str, attrs: dict[str, str], text: str | None = None) -> str:
    elem = ET.Element(tag, attrs)
    elem.text = text
    return canonical_text(elem)


def _tag_of(text: str) -> str:
    m = _TAG.match(text)
    return m.group(1) if m else ""


def root_rank(text: str) -> int:
    return _ROOT_RANK.get(_tag_of(text), _UNKNOWN_RANK)


def _ordered_attrs(tag: str, known: dict[str, str | None], extras: Extras | None) -> dict[str, str]:
    merged = dict(extras.attrs) if extras else {}
    for k, v in known.items():
        if v is not None:
            merged[k] = v
    out = {}
    for k in ATTR_ORDER.get(tag, ()):
        if k in merged:
            out[k] = merged.pop(k)
    for k in sorted(merged):
        out[k] = merged[k]
    return out


def _sub(parent: ET.Element, tag: str, known: dict[str, str | None], extras: Extras | None = None,
         text: str | None = None) -> ET.Element:
    elem = ET.SubElement(parent, tag, _ordered_attrs(tag, known, extras))
    if text is not None:
        elem.text = text
    return elem


def _append_extras(parent: ET.Element, extras: Extras | None) -> None:
    if extras:
        for text in extras.children:
            parent.append(ET.fromstring(text))


def _to_bytes(root: ET.Element) -> bytes:
    ET.indent(root, space="    ")
    return (XML_DECLARATION + ET.tostring(root, encoding="unicode") + "\n").encode("utf-8")


def _opt_int(v: int | None) -> str | None:
    return None if v is None else str(v)


# reading helpers

class _Reader:
    """Element-to-model conversion with positions for error messages."""

    def __init__(self, positions: dict[ET.Element, Position]):
        self.positions = positions

    def pos(self, elem: ET.Element) -> Position:
        return self.positions.get(elem, (None, None))  # type: ignore[return-value]

    def violation(self, elem: ET.Element, reason: str) -> SchemaViolationError:
        return SchemaViolationError(reason, *self.pos(elem))

    def req(self, elem: ET.Element, name: str) -> str:
        v = elem.get(name)
        if v is None:
            raise self.violation(elem, f"<{elem.tag}> is missing required attribute {name}")
        return v

    def int_attr(self, elem: ET.Element, name: str) -> int | None:
        v = elem.get(name)
        if v is None:
            return None
        try:
            return int(v)
        except ValueError:
            raise self.violation(elem, f"<{elem.tag}> attribute {name}={v!r} is not an integer") from None

    @staticmethod
    def extras(elem: ET.Element, known: Iterable[str], known_children: Iterable[str] = ()) -> Extras | None:
        known = set(known)
        kc = set(known_children)
        attrs = {k: v for k, v in elem.attrib.items() if k not in known}
        children = [canonical_text(c) for c in elem if c.tag not in kc]
        if not attrs and not children:
            return None
        return Extras(attrs, children)

    # EAF elements

    def media(self, e: ET.Element) -> MediaDescriptor:
        return MediaDescriptor(
            self.req(e, "MEDIA_URL"), self.req(e, "MIME_TYPE"), e.get("RELATIVE_MEDIA_URL"),
            self.int_attr(e, "TIME_ORIGIN"),
            self.extras(e, ("MEDIA_URL", "MIME_TYPE", "RELATIVE_MEDIA_URL", "TIME_ORIGIN")))

    def linked(self, e: ET.Element) -> LinkedFileDescriptor:
        return LinkedFileDescriptor(
            self.req(e, "LINK_URL"), self.req(e, "MIME_TYPE"), e.get("RELATIVE_LINK_URL"),
            e.get("ASSOCIATED_WITH"), self.int_attr(e, "TIME_ORIGIN"),
            self.extras(e, ("LINK_URL", "MIME_TYPE", "RELATIVE_LINK_URL", "ASSOCIATED_WITH", "TIME_ORIGIN")))

    def linguistic_type(self, e: ET.Element) -> LinguisticType:
        type_id = self.req(e, "LINGUISTIC_TYPE_ID")
        try:
            constraint = Constraint.from_stereotype(e.get("CONSTRAINTS"))
        except ValueError as exc:
            raise self.violation(e, str(exc)) from None
        aligned = e.get("TIME_ALIGNABLE")
        if aligned is None:
            time_alignable = not constraint.symbolic
        elif aligned in ("true", "false"):
            time_alignable = aligned == "true"
        else:
            raise self.violation(e, f"TIME_ALIGNABLE must be true or false, got {aligned!r}")
        try:
            return LinguisticType(
                type_id, constraint, time_alignable, e.get("CONTROLLED_VOCABULARY_REF"),
                self.extras(e, ("LINGUISTIC_TYPE_ID", "CONSTRAINTS", "TIME_ALIGNABLE", "CONTROLLED_VOCABULARY_REF")))
        except ModelError as exc:
            raise self.violation(e, str(exc)) from None

    def vocabulary(self, e: ET.Element) -> ControlledVocabulary:
        cv = ControlledVocabulary(self.req(e, "CV_ID"))
        legacy = e.get("DESCRIPTION")  # EAF 2.x keeps the description in an attribute
        known_attrs = ["CV_ID"]
        if legacy is not None:
            cv.description = legacy
            known_attrs.append("DESCRIPTION")
        desc = e.find("DESCRIPTION")
        if desc is not None:
            cv.description = desc.text or ""
            cv.lang_ref = desc.get("LANG_REF", cv.lang_ref)
        for i, child in enumerate(e):
            if child.tag == "CV_ENTRY_ML":
                values = child.findall("CVE_VALUE")
                if not values:
                    raise self.violation(child, "<CV_ENTRY_ML> has no <CVE_VALUE>")
                first = values[0]
                if desc is None and not cv.entries:
                    cv.lang_ref = first.get("LANG_REF", cv.lang_ref)
                lang = first.get("LANG_REF")
                # only the first value is modelled; other languages are kept verbatim
                extra_children = [canonical_text(c) for c in child if c is not first]
                extra_attrs = {k: v for k, v in child.attrib.items() if k != "CVE_ID"}
                cv.entries.append(VocabularyEntry(
                    self.req(child, "CVE_ID"), first.text or "", first.get("DESCRIPTION"),
                    None if lang == cv.lang_ref else lang,
                    Extras(extra_attrs, extra_children) if extra_attrs or extra_children else None))
            elif child.tag == "CV_ENTRY":
                cv.entries.append(VocabularyEntry(
                    child.get("CVE_ID", f"cveid{i}"), child.text or "", child.get("DESCRIPTION")))
        attrs = {k: v for k, v in e.attrib.items() if k not in known_attrs}
        children = [canonical_text(c) for c in e if c is not desc and c.tag not in ("CV_ENTRY_ML", "CV_ENTRY")]
        cv.extras = Extras(attrs, children) if attrs or children else None
        return cv

    def tier(self, e: ET.Element) -> Tier:
        tier_id = self.req(e, "TIER_ID")
        if not tier_id:
            raise self.violation(e, "TIER_ID must be non-empty")
        tier = Tier(tier_id, self.req(e, "LINGUISTIC_TYPE_REF"), e.get("PARENT_REF"), e.get("PARTICIPANT"),
                    e.get("ANNOTATOR"),
                    extras=self.extras(e, ("TIER_ID", "LINGUISTIC_TYPE_REF", "PARENT_REF", "PARTICIPANT",
                                           "ANNOTATOR"), ("ANNOTATION",)))
        for wrapper in e.iterfind("ANNOTATION"):
            inner = [c for c in wrapper if c.tag in ("ALIGNABLE_ANNOTATION", "REF_ANNOTATION")]
            if len(inner) != 1:
                raise self.violation(wrapper, "<ANNOTATION> must hold exactly one alignable or reference annotation")
            a = inner[0]
            value_elem = a.find("ANNOTATION_VALUE")
            value = "" if value_elem is None or value_elem.text is None else value_elem.text
            if a.tag == "ALIGNABLE_ANNOTATION":
                known = ("ANNOTATION_ID", "TIME_SLOT_REF1", "TIME_SLOT_REF2", "CVE_REF")
                tier.annotations.append(AlignedAnnotation(
                    self.req(a, "ANNOTATION_ID"), self.req(a, "TIME_SLOT_REF1"), self.req(a, "TIME_SLOT_REF2"),
                    value, a.get("CVE_REF"), self.extras(a, known, ("ANNOTATION_VALUE",))))
            else:
                known = ("ANNOTATION_ID", "ANNOTATION_REF", "PREVIOUS_ANNOTATION", "CVE_REF")
                tier.annotations.append(RefAnnotation(
                    self.req(a, "ANNOTATION_ID"), self.req(a, "ANNOTATION_REF"), value,
                    a.get("PREVIOUS_ANNOTATION"), a.get("CVE_REF"), self.extras(a, known, ("ANNOTATION_VALUE",))))
        return tier

    def document(self, root: ET.Element) -> AnnotationDocument:
        if root.tag != "ANNOTATION_DOCUMENT":
            raise self.violation(root, f"root element is <{root.tag}>, expected <ANNOTATION_DOCUMENT>")
        doc = AnnotationDocument(
            author=root.get("AUTHOR", ""), date=root.get("DATE", ""),
            format_version=root.get("FORMAT", root.get("VERSION", "3.0")), version=root.get("VERSION", "3.0"))
        root_known = ("HEADER", "TIME_ORDER", "TIER", "LINGUISTIC_TYPE", "CONTROLLED_VOCABULARY")
        for child in root:
            tag = child.tag
            if tag == "HEADER":
                doc.time_units = child.get("TIME_UNITS", "milliseconds")
                for h in child:
                    if h.tag == "MEDIA_DESCRIPTOR":
                        doc.media.append(self.media(h))
                    elif h.tag == "LINKED_FILE_DESCRIPTOR":
                        doc.linked_files.append(self.linked(h))
                    elif h.tag == "PROPERTY":
                        doc.properties[self.req(h, "NAME")] = h.text or ""
                doc.header_extras = self.extras(
                    child, ("TIME_UNITS",), ("MEDIA_DESCRIPTOR", "LINKED_FILE_DESCRIPTOR", "PROPERTY"))
            elif tag == "TIME_ORDER":
                for s in child.iterfind("TIME_SLOT"):
                    doc.time_order.append(TimeSlot(
                        self.req(s, "TIME_SLOT_ID"), self.int_attr(s, "TIME_VALUE"),
                        self.extras(s, ("TIME_SLOT_ID", "TIME_VALUE"))))
            elif tag == "TIER":
                doc.tiers.append(self.tier(child))
            elif tag == "LINGUISTIC_TYPE":
                doc.types.append(self.linguistic_type(child))
            elif tag == "CONTROLLED_VOCABULARY":
                doc.vocabularies.append(self.vocabulary(child))
        doc.extras = self.extras(root, ("AUTHOR", "DATE", "FORMAT", "VERSION"), root_known)
        if doc.extras:
            doc.extras.children.sort(key=root_rank)
        return doc


def _raise_structural(doc: AnnotationDocument, root: ET.Element, reader: _Reader) -> None:
    broken = [f for f in validate_structure(doc) if f.rule_id == "E006"]
    if not broken:
        return
    first = broken[0]
    where = reader.pos(root)
    wanted = [("ANNOTATION_ID", first.annotation), ("TIER_ID", first.tier)]
    for attr, value in wanted:
        if value is None:
            continue
        hit = next((e for e in root.iter() if e.get(attr) == value), None)
        if hit is not None:
            where = reader.pos(hit)
            break
    raise DanglingReferenceError(first.message, *where)


def parse_eaf(data: bytes | str, *, strict: bool = True) -> AnnotationDocument:
    """Parse EAF bytes into a document.

    With ``strict`` (the default) broken cross references raise
    ``DanglingReferenceError``; otherwise they are left for the validator to
    report. Overlapping or inverted intervals never fail parsing.
    """
    root, positions = read_xml(data)
    reader = _Reader(positions)
    doc = reader.document(root)
    if strict:
        _raise_structural(doc, root, reader)
    return doc


# writing

def _write_vocabulary(parent: ET.Element, cv: ControlledVocabulary) -> None:
    e = _sub(parent, "CONTROLLED_VOCABULARY", {"CV_ID": cv.id}, Extras(cv.extras.attrs) if cv.extras else None)
    leftovers = cv.extras.children if cv.extras else []
    if cv.description is not None:
        _sub(e, "DESCRIPTION", {"LANG_REF": cv.lang_ref}, text=cv.description or None)
    for text in leftovers:
        if _tag_of(text) == "DESCRIPTION":
            e.append(ET.fromstring(text))
    for entry in cv.entries:
        extra_children = entry.extras.children if entry.extras else []
        extra_attrs = Extras(entry.extras.attrs) if entry.extras else None
        ml = _sub(e, "CV_ENTRY_ML", {"CVE_ID": entry.id}, extra_attrs)
        _sub(ml, "CVE_VALUE", {"LANG_REF": entry.lang_ref or cv.lang_ref, "DESCRIPTION": entry.description},
             text=entry.value)
        for text in extra_children:
            ml.append(ET.fromstring(text))
    for text in leftovers:
        if _tag_of(text) != "DESCRIPTION":
            e.append(ET.fromstring(text))


def document_element(doc: AnnotationDocument) -> ET.Element:
    root_extras = doc.extras or Extras()
    root = ET.Element("ANNOTATION_DOCUMENT", _ordered_attrs(
        "ANNOTATION_DOCUMENT",
        {"DATE": doc.date, "AUTHOR": doc.author, "VERSION": doc.version, "FORMAT": doc.format_version},
        Extras(root_extras.attrs)))
    pending = sorted(root_extras.children, key=root_rank)

    def flush(rank: int) -> None:
        while pending and root_rank(pending[0]) <= rank:
            root.append(ET.fromstring(pending.pop(0)))

    flush(_ROOT_RANK["LICENSE"])
    header = _sub(root, "HEADER", {"TIME_UNITS": doc.time_units},
                  Extras(doc.header_extras.attrs) if doc.header_extras else None)
    for m in doc.media:
        _sub(header, "MEDIA_DESCRIPTOR", {
            "MEDIA_URL": m.media_url, "RELATIVE_MEDIA_URL": m.relative_url, "MIME_TYPE": m.mime_type,
            "TIME_ORIGIN": _opt_int(m.time_origin)}, m.extras)
    for lf in doc.linked_files:
        _sub(header, "LINKED_FILE_DESCRIPTOR", {
            "LINK_URL": lf.url, "RELATIVE_LINK_URL": lf.relative_url, "MIME_TYPE": lf.mime_type,
            "TIME_ORIGIN": _opt_int(lf.time_origin), "ASSOCIATED_WITH": lf.associated_with}, lf.extras)
    for name, value in doc.properties.items():
        _sub(header, "PROPERTY", {"NAME": name}, text=value or None)
    if doc.header_extras:
        _append_extras(header, Extras(children=doc.header_extras.children))

    order = ET.SubElement(root, "TIME_ORDER")
    for s in doc.time_order:
        _sub(order, "TIME_SLOT", {"TIME_SLOT_ID": s.id, "TIME_VALUE": _opt_int(s.time)}, s.extras)

    for t in doc.tiers:
        te = _sub(root, "TIER", {
            "TIER_ID": t.id, "PARTICIPANT": t.participant, "ANNOTATOR": t.annotator,
            "LINGUISTIC_TYPE_REF": t.type_ref, "PARENT_REF": t.parent_ref},
            Extras(t.extras.attrs) if t.extras else None)
        for a in t.annotations:
            wrapper = ET.SubElement(te, "ANNOTATION")
            attrs_only = Extras(a.extras.attrs) if a.extras else None
            if isinstance(a, AlignedAnnotation):
                ae = _sub(wrapper, "ALIGNABLE_ANNOTATION", {
                    "ANNOTATION_ID": a.id, "CVE_REF": a.cve_ref, "TIME_SLOT_REF1": a.begin,
                    "TIME_SLOT_REF2": a.end}, attrs_only)
            else:
                ae = _sub(wrapper, "REF_ANNOTATION", {
                    "ANNOTATION_ID": a.id, "CVE_REF": a.cve_ref, "ANNOTATION_REF": a.parent,
                    "PREVIOUS_ANNOTATION": a.previous}, attrs_only)
            ET.SubElement(ae, "ANNOTATION_VALUE").text = a.value or None
            if a.extras:
                _append_extras(ae, Extras(children=a.extras.children))
        if t.extras:
            _append_extras(te, Extras(children=t.extras.children))

    flush(_ROOT_RANK["TIER"])
    for lt in doc.types:
        _sub(root, "LINGUISTIC_TYPE", {
            "LINGUISTIC_TYPE_ID": lt.id, "TIME_ALIGNABLE": "true" if lt.time_alignable else "false",
            "CONSTRAINTS": lt.constraint.stereotype, "CONTROLLED_VOCABULARY_REF": lt.vocabulary_ref}, lt.extras)
    flush(_ROOT_RANK["CONSTRAINT"])
    for cv in doc.vocabularies:
        _write_vocabulary(root, cv)
    flush(_UNKNOWN_RANK)
    return root


def serialize_eaf(doc: AnnotationDocument) -> bytes:
    return _to_bytes(document_element(doc))


# templates

@dataclass
class TemplateTier:
    id: str
    type_ref: str
    parent_ref: str | None = None


@dataclass
class Template:
    types: list[LinguisticType] = field(default_factory=list)
    tiers: list[TemplateTier] = field(default_factory=list)
    vocabularies: list[ControlledVocabulary] = field(default_factory=list)

    def tier_ids(self) -> list[str]:
        return [t.id for t in self.tiers]

    def get_tier(self, tier_id: str) -> TemplateTier | None:
        return next((t for t in self.tiers if t.id == tier_id), None)

    def linguistic_type(self, type_id: str) -> LinguisticType | None:
        return next((lt for lt in self.types if lt.id == type_id), None)

    def constraint_of(self, tier_id: str) -> Constraint | None:
        t = self.get_tier(tier_id)
        lt = self.linguistic_type(t.type_ref) if t else None
        return lt.constraint if lt else None


def parse_template(data: bytes | str) -> Template:
    """Parse an ELAN template (.etf): an EAF skeleton without annotations."""
    root, positions = read_xml(data)
    reader = _Reader(positions)
    for ann in root.iter("ANNOTATION"):
        raise TemplateContainsAnnotationsError("template holds annotation content", *reader.pos(ann))
    doc = reader.document(root)
    _raise_structural(doc, root, reader)
    return Template(
        types=doc.types,
        tiers=[TemplateTier(t.id, t.type_ref, t.parent_ref) for t in doc.tiers],
        vocabularies=doc.vocabularies,
    )


# controlled vocabulary files

def parse_ecv(data: bytes | str) -> list[ControlledVocabulary]:
    root, positions = read_xml(data)
    reader = _Reader(positions)
    if root.tag != "CV_RESOURCE":
        raise reader.violation(root, f"root element is <{root.tag}>, expected <CV_RESOURCE>")
    return [reader.vocabulary(e) for e in root.iterfind("CONTROLLED_VOCABULARY")]


def emit_ecv(vocabularies: Iterable[ControlledVocabulary], author: str | None = None,
             date: str | None = None) -> bytes:
    vocabularies = list(vocabularies)
    for cv in vocabularies:
        dups = cv.duplicate_values()
        if dups:
            raise DuplicateEntryValueError(f"controlled vocabulary {cv.id!r} repeats value {dups[0]!r}")
    root = ET.Element("CV_RESOURCE", _ordered_attrs(
        "CV_RESOURCE", {"AUTHOR": author, "DATE": date, "VERSION": "0.2"},
        Extras({f"{{{XSI}}}noNamespaceSchemaLocation": ECV_SCHEMA_URL})))
    langs = sorted({cv.lang_ref for cv in vocabularies} | {e.lang_ref for cv in vocabularies
                                                           for e in cv.entries if e.lang_ref})
    for lang in langs:
        attrs = UND_LANGUAGE if lang == UND_LANGUAGE["LANG_ID"] else {"LANG_ID": lang}
        _sub(root, "LANGUAGE", dict(attrs))
    for cv in vocabularies:
        _write_vocabulary(root, cv)
    return _to_bytes(root)
