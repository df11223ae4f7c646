"""Test-side EAF writer.

Builds EAF text with plain string formatting so fixtures and seeded corpora
do not depend on the serializer under test. It happily writes overlapping or
inverted spans, which the model API refuses to create.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

STEREOTYPES = {
    "top-level": None,
    "time-subdivision": "Time_Subdivision",
    "included-in": "Included_In",
    "symbolic-subdivision": "Symbolic_Subdivision",
    "symbolic-association": "Symbolic_Association",
}


@dataclass
class Ann:
    id: str
    value: str
    begin: int | None = None
    end: int | None = None
    parent: str | None = None  # reference annotations
    previous: str | None = None
    cve_ref: str | None = None


@dataclass
class TierSpec:
    id: str
    type: str
    parent: str | None = None
    participant: str | None = None
    annotator: str | None = None
    anns: list[Ann] = field(default_factory=list)


class EafBuilder:
    def __init__(self, author: str = "gen", date: str = "2024-03-01T12:00:00+01:00"):
        self.author = author
        self.date = date
        self.types: dict[str, tuple[str, bool, str | None]] = {}
        self.tiers: list[TierSpec] = []
        self.vocabs: dict[str, list[tuple[str, str, str | None]]] = {}
        self.media: list[tuple[str, str, str | None]] = []
        self.linked: list[tuple[str, str, str | None]] = []
        self.properties: list[tuple[str, str]] = []
        self.extra_root = ""
        self._n = 0

    def type(self, type_id: str, constraint: str = "top-level", vocab: str | None = None) -> "EafBuilder":
        aligned = constraint not in ("symbolic-subdivision", "symbolic-association")
        self.types[type_id] = (constraint, aligned, vocab)
        return self

    def vocab(self, cv_id: str, values: list[str], descriptions: dict[str, str] | None = None) -> "EafBuilder":
        d = descriptions or {}
        self.vocabs[cv_id] = [(f"{cv_id}_{i}", v, d.get(v)) for i, v in enumerate(values)]
        return self

    def tier(self, tier_id: str, type_id: str, parent: str | None = None, **kw) -> TierSpec:
        t = TierSpec(tier_id, type_id, parent, **kw)
        self.tiers.append(t)
        return t

    def next_id(self) -> str:
        self._n += 1
        return f"a{self._n}"

    def aligned(self, tier: TierSpec, begin: int | None, end: int | None, value: str, cve_ref: str | None = None) -> Ann:
        a = Ann(self.next_id(), value, begin, end, cve_ref=cve_ref)
        tier.anns.append(a)
        return a

    def ref(self, tier: TierSpec, parent: Ann, value: str, previous: Ann | None = None) -> Ann:
        a = Ann(self.next_id(), value, parent=parent.id, previous=previous.id if previous else None)
        tier.anns.append(a)
        return a

    def text(self, shuffle_slots: random.Random | None = None) -> str:
        """EAF 3.0 text. Each aligned annotation gets its own two slots."""
        slots: list[tuple[str, int | None]] = []
        refs: dict[str, tuple[str, str]] = {}
        for t in self.tiers:
            for a in t.anns:
                if a.parent is None:
                    b = f"ts{len(slots) + 1}"
                    slots.append((b, a.begin))
                    e = f"ts{len(slots) + 1}"
                    slots.append((e, a.end))
                    refs[a.id] = (b, e)
        # ELAN keeps TIME_ORDER sorted; an undefined slot sorts with the slot written before it
        keyed, key = [], 0
        for n, (sid, time) in enumerate(slots):
            key = time if time is not None else key
            keyed.append((key, n, sid, time))
        order = [(sid, time) for _, _, sid, time in sorted(keyed)]
        if shuffle_slots is not None:
            shuffle_slots.shuffle(order)

        out = ['<?xml version="1.0" encoding="UTF-8"?>',
               '<ANNOTATION_DOCUMENT AUTHOR=%s DATE=%s FORMAT="3.0" VERSION="3.0" '
               'xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" '
               'xsi:noNamespaceSchemaLocation="http://www.mpi.nl/tools/elan/EAFv3.0.xsd">'
               % (quoteattr(self.author), quoteattr(self.date))]
        out.append('  <HEADER MEDIA_FILE="" TIME_UNITS="milliseconds">')
        for url, mime, rel in self.media:
            r = f" RELATIVE_MEDIA_URL={quoteattr(rel)}" if rel else ""
            out.append(f"    <MEDIA_DESCRIPTOR MEDIA_URL={quoteattr(url)} MIME_TYPE={quoteattr(mime)}{r}/>")
        for url, mime, rel in self.linked:
            r = f" RELATIVE_LINK_URL={quoteattr(rel)}" if rel else ""
            out.append(f"    <LINKED_FILE_DESCRIPTOR LINK_URL={quoteattr(url)} MIME_TYPE={quoteattr(mime)}{r}/>")
        for name, value in self.properties:
            out.append(f"    <PROPERTY NAME={quoteattr(name)}>{escape(value)}</PROPERTY>")
        out.append("  </HEADER>")
        out.append("  <TIME_ORDER>")
        for sid, time in order:
            tv = "" if time is None else f' TIME_VALUE="{time}"'
            out.append(f'    <TIME_SLOT TIME_SLOT_ID="{sid}"{tv}/>')
        out.append("  </TIME_ORDER>")
        for t in self.tiers:
            attrs = f"TIER_ID={quoteattr(t.id)} LINGUISTIC_TYPE_REF={quoteattr(t.type)}"
            if t.parent:
                attrs += f" PARENT_REF={quoteattr(t.parent)}"
            if t.participant:
                attrs += f" PARTICIPANT={quoteattr(t.participant)}"
            if t.annotator:
                attrs += f" ANNOTATOR={quoteattr(t.annotator)}"
            if not t.anns:
                out.append(f"  <TIER {attrs}/>")
                continue
            out.append(f"  <TIER {attrs}>")
            for a in t.anns:
                cve = f" CVE_REF={quoteattr(a.cve_ref)}" if a.cve_ref else ""
                out.append("    <ANNOTATION>")
                if a.parent is None:
                    b, e = refs[a.id]
                    out.append(f'      <ALIGNABLE_ANNOTATION ANNOTATION_ID="{a.id}" '
                               f'TIME_SLOT_REF1="{b}" TIME_SLOT_REF2="{e}"{cve}>')
                    out.append(f"        <ANNOTATION_VALUE>{escape(a.value)}</ANNOTATION_VALUE>")
                    out.append("      </ALIGNABLE_ANNOTATION>")
                else:
                    prev = f' PREVIOUS_ANNOTATION="{a.previous}"' if a.previous else ""
                    out.append(f'      <REF_ANNOTATION ANNOTATION_ID="{a.id}" ANNOTATION_REF="{a.parent}"{prev}{cve}>')
                    out.append(f"        <ANNOTATION_VALUE>{escape(a.value)}</ANNOTATION_VALUE>")
                    out.append("      </REF_ANNOTATION>")
                out.append("    </ANNOTATION>")
            out.append("  </TIER>")
        for type_id, (constraint, aligned, vocab) in self.types.items():
            attrs = f"LINGUISTIC_TYPE_ID={quoteattr(type_id)} TIME_ALIGNABLE=\"{'true' if aligned else 'false'}\""
            if STEREOTYPES[constraint]:
                attrs += f' CONSTRAINTS="{STEREOTYPES[constraint]}"'
            if vocab:
                attrs += f" CONTROLLED_VOCABULARY_REF={quoteattr(vocab)}"
            out.append(f"  <LINGUISTIC_TYPE {attrs}/>")
        if self.vocabs:
            out.append('  <LANGUAGE LANG_DEF="http://cdb.iso.org/lg/CDB-00130975-001" LANG_ID="und" LANG_LABEL="undetermined (und)"/>')
        used = {c for c, _, _ in self.types.values()} - {"top-level"}
        for c in sorted(used):
            out.append(f'  <CONSTRAINT DESCRIPTION="{c} constraint" STEREOTYPE="{STEREOTYPES[c]}"/>')
        for cv_id, entries in self.vocabs.items():
            out.append(f"  <CONTROLLED_VOCABULARY CV_ID={quoteattr(cv_id)}>")
            out.append('    <DESCRIPTION LANG_REF="und"/>')
            for eid, value, desc in entries:
                d = f" DESCRIPTION={quoteattr(desc)}" if desc else ""
                out.append(f'    <CV_ENTRY_ML CVE_ID="{eid}"><CVE_VALUE LANG_REF="und"{d}>{escape(value)}</CVE_VALUE></CV_ENTRY_ML>')
            out.append("  </CONTROLLED_VOCABULARY>")
        if self.extra_root:
            out.append(self.extra_root)
        out.append("</ANNOTATION_DOCUMENT>")
        return "\n".join(out) + "\n"

    def template_text(self) -> str:
        """Same document with every annotation stripped: an ELAN template."""
        saved = [t.anns for t in self.tiers]
        for t in self.tiers:
            t.anns = []
        try:
            return self.text()
        finally:
            for t, anns in zip(self.tiers, saved):
                t.anns = anns
