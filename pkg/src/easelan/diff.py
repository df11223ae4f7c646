"""Annotation-level differences between two revisions of a document.

Annotations match on (tier id, annotation id). Renamed tiers are not
inferred: they show up as one tier removed and one added.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .model import AlignedAnnotation, AnnotationDocument


class AnnotationRecord(NamedTuple):
    tier: str
    begin: int | None
    end: int | None
    value: str
    id: str = ""


class Modification(NamedTuple):
    tier: str
    id: str
    old_value: str
    new_value: str
    old_interval: tuple[int | None, int | None] | None
    new_interval: tuple[int | None, int | None] | None


@dataclass
class AnnotationDiff:
    added: list[AnnotationRecord] = field(default_factory=list)
    removed: list[AnnotationRecord] = field(default_factory=list)
    modified: list[Modification] = field(default_factory=list)
    tiers_added: list[str] = field(default_factory=list)
    tiers_removed: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.added or self.removed or self.modified or self.tiers_added or self.tiers_removed)


def _records(doc: AnnotationDocument) -> dict[tuple[str, str], tuple[str, tuple | None]]:
    slots = doc.slot_times()
    out = {}
    for tier, ann in doc.iter_annotations():
        interval = doc.interval(ann, slots) if isinstance(ann, AlignedAnnotation) else None
        out[(tier.id, ann.id)] = (ann.value, interval)
    return out


def diff_annotations(old: AnnotationDocument, new: AnnotationDocument) -> AnnotationDiff:
    a, b = _records(old), _records(new)
    out = AnnotationDiff()

    def record(k, v) -> AnnotationRecord:
        begin, end = v[1] if v[1] is not None else (None, None)
        return AnnotationRecord(k[0], begin, end, v[0], k[1])

    for k in a.keys() - b.keys():
        out.removed.append(record(k, a[k]))
    for k in b.keys() - a.keys():
        out.added.append(record(k, b[k]))
    for k in a.keys() & b.keys():
        if a[k] != b[k]:
            out.modified.append(Modification(k[0], k[1], a[k][0], b[k][0], a[k][1], b[k][1]))
    out.added.sort(key=_order)
    out.removed.sort(key=_order)
    out.modified.sort(key=lambda m: (m.tier, m.id))
    old_tiers, new_tiers = set(old.tier_ids()), set(new.tier_ids())
    out.tiers_added = sorted(new_tiers - old_tiers)
    out.tiers_removed = sorted(old_tiers - new_tiers)
    return out


def _order(r: AnnotationRecord):
    # None times sort last within a tier
    return (r.tier, r.begin is None, r.begin or 0, r.end is None, r.end or 0, r.value, r.id)


def _span(begin, end) -> str:
    fmt = lambda t: "?" if t is None else str(t)
    return f"[{fmt(begin)}, {fmt(end)})"


def render_diff(diff: AnnotationDiff) -> str:
    """Unified-diff-like text; empty string when nothing changed."""
    lines = []
    for t in diff.tiers_removed:
        lines.append(f"- tier {t}")
    for t in diff.tiers_added:
        lines.append(f"+ tier {t}")
    for r in diff.removed:
        lines.append(f"- {r.tier} {r.id} {_span(r.begin, r.end)} {r.value!r}")
    for r in diff.added:
        lines.append(f"+ {r.tier} {r.id} {_span(r.begin, r.end)} {r.value!r}")
    for m in diff.modified:
        old = _span(*m.old_interval) if m.old_interval else "(ref)"
        new = _span(*m.new_interval) if m.new_interval else "(ref)"
        lines.append(f"~ {m.tier} {m.id} {old} {m.old_value!r} -> {new} {m.new_value!r}")
    return "".join(line + "\n" for line in lines)
