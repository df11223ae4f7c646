"""Rule-based checks run by the CI stage, producing ``Finding`` records.

Each ``check_*`` function is independent and returns findings without a file
name; ``validate_document`` runs the enabled subset, stamps the file and
orders the result deterministically.
"""

from __future__ import annotations

import dataclasses
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple
from urllib.parse import unquote, urlparse
from urllib.request import url2pathname

from .eaf import Template
from .findings import ERROR, RULES, WARNING, Finding, finding
from .model import AnnotationDocument, MediaDescriptor, time_findings, validate_structure

TRANSCRIPT_MARKER = "Transcript"


class TierPresence(str, Enum):
    PRESENT_LABELED = "present-labeled"
    PRESENT_EMPTY = "present-empty"
    ABSENT = "absent"


class Counts(NamedTuple):
    errors: int
    warnings: int


@dataclass
class Dictionary:
    words: frozenset[str]
    case_sensitive: bool = False

    def __post_init__(self) -> None:
        if not self.case_sensitive:
            self.words = frozenset(w.casefold() for w in self.words)
        else:
            self.words = frozenset(self.words)

    def __contains__(self, token: str) -> bool:
        return (token if self.case_sensitive else token.casefold()) in self.words

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_text(cls, text: str, case_sensitive: bool = False) -> "Dictionary":
        """One word per line; blank lines and lines starting with '#' are skipped."""
        words = []
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.append(line)
        return cls(frozenset(words), case_sensitive)

    @classmethod
    def load(cls, path: str | Path, case_sensitive: bool = False) -> "Dictionary":
        return cls.from_text(Path(path).read_text(encoding="utf-8"), case_sensitive)


@dataclass
class RuleConfig:
    enabled: frozenset[str] = frozenset(RULES)
    # None: every tier whose id contains "Transcript"
    spell_tiers: frozenset[str] | None = None
    vocabulary_case_sensitive: bool = True

    def __post_init__(self) -> None:
        self.enabled = frozenset(self.enabled)
        unknown = self.enabled - set(RULES)
        if unknown:
            raise ValueError(f"unknown rule ids: {', '.join(sorted(unknown))}")
        if self.spell_tiers is not None:
            self.spell_tiers = frozenset(self.spell_tiers)

    def spell_scope(self, doc: AnnotationDocument) -> set[str]:
        if self.spell_tiers is not None:
            return set(self.spell_tiers)
        return {t.id for t in doc.tiers if TRANSCRIPT_MARKER in t.id}


@dataclass
class ValidationReport:
    file: str
    findings: list[Finding] = field(default_factory=list)
    tier_presence: dict[str, TierPresence] = field(default_factory=dict)
    template_tiers: list[str] = field(default_factory=list)

    @property
    def counts(self) -> Counts:
        errors = sum(1 for f in self.findings if f.severity == ERROR)
        return Counts(errors, len(self.findings) - errors)


def check_template_conformance(doc: AnnotationDocument, template: Template) -> list[Finding]:
    out = []
    present = {t.id: t for t in doc.tiers}
    for tt in template.tiers:
        tier = present.get(tt.id)
        if tier is None:
            out.append(finding("E001", f"template tier {tt.id!r} is missing", tier=tt.id))
            continue
        want = template.constraint_of(tt.id)
        lt = doc.linguistic_type(tier.type_ref)
        if want is not None and lt is not None and lt.constraint is not want:
            out.append(finding("E001", f"tier {tt.id!r} is {lt.constraint.value}, template expects {want.value}",
                               tier=tt.id, context=lt.constraint.value))
    expected = set(template.tier_ids())
    for t in doc.tiers:
        if t.id not in expected:
            out.append(finding("W002", f"tier {t.id!r} is not defined by the template", tier=t.id))
    return out


def check_empty_tiers(doc: AnnotationDocument) -> list[Finding]:
    out = []
    for t in doc.tiers:
        if not t.annotations:
            out.append(finding("E002", f"tier {t.id!r} has no annotations", tier=t.id))
        elif not t.is_labeled():
            out.append(finding("E002", f"tier {t.id!r} has only blank annotations", tier=t.id))
    return out


def check_controlled_vocabulary(doc: AnnotationDocument, case_sensitive: bool = True) -> list[Finding]:
    out = []
    for t in doc.tiers:
        cv = doc.vocabulary_for_tier(t)
        if cv is None:
            continue
        if case_sensitive:
            allowed = set(cv.values())
        else:
            allowed = {v.casefold() for v in cv.values()}
        entry_ids = {e.id for e in cv.entries}
        for a in t.annotations:
            if a.cve_ref is not None and a.cve_ref in entry_ids:
                continue
            value = a.value if case_sensitive else a.value.casefold()
            if value not in allowed:
                out.append(finding("E003", f"value {a.value!r} is not in controlled vocabulary {cv.id!r}",
                                   tier=t.id, annotation=a.id, context=a.value))
    return out


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(value: str) -> list[str]:
    """Whitespace tokens with edge punctuation stripped; digit-bearing tokens dropped."""
    tokens = []
    for raw in value.split():
        start, end = 0, len(raw)
        while start < end and _is_punct(raw[start]):
            start += 1
        while end > start and _is_punct(raw[end - 1]):
            end -= 1
        tok = raw[start:end]
        if tok and not any(ch.isdigit() for ch in tok):
            tokens.append(tok)
    return tokens


def spell_check(doc: AnnotationDocument, dictionary: Dictionary, tier_filter: Iterable[str]) -> list[Finding]:
    if not len(dictionary):
        raise ValueError("spell checking needs a non-empty dictionary")
    scope = set(tier_filter)
    out = []
    for t in doc.tiers:
        if t.id not in scope:
            continue
        for a in t.annotations:
            for tok in tokenize(a.value):
                if tok not in dictionary:
                    out.append(finding("W001", f"unknown word {tok!r}", tier=t.id, annotation=a.id, context=tok))
    return out


def media_candidates(media: MediaDescriptor, media_root: Path) -> list[Path]:
    """Where a media file may live; relative URLs resolve against ``media_root``."""
    out = []
    for url in (media.relative_url, media.media_url):
        if not url:
            continue
        parsed = urlparse(url)
        if parsed.scheme == "file":
            out.append(Path(url2pathname(parsed.path)))
        elif parsed.scheme and len(parsed.scheme) > 1:
            continue  # http and friends are not checked
        else:
            out.append(media_root / unquote(url))
    return out


def check_time_consistency(doc: AnnotationDocument, media_root: str | Path | None = None) -> list[Finding]:
    out = time_findings(doc)
    if media_root is not None:
        root = Path(media_root)
        for m in doc.media:
            candidates = media_candidates(m, root)
            if candidates and not any(p.exists() for p in candidates):
                out.append(finding("W003", f"media file {m.relative_url or m.media_url} not found",
                                   context=m.relative_url or m.media_url))
    return out


def tier_presence(doc: AnnotationDocument, template: Template | None) -> dict[str, TierPresence]:
    out: dict[str, TierPresence] = {}
    tiers = {t.id: t for t in doc.tiers}
    order = (template.tier_ids() if template else []) + [t.id for t in doc.tiers]
    for tid in order:
        if tid in out:
            continue
        tier = tiers.get(tid)
        if tier is None:
            out[tid] = TierPresence.ABSENT
        elif tier.is_labeled():
            out[tid] = TierPresence.PRESENT_LABELED
        else:
            out[tid] = TierPresence.PRESENT_EMPTY
    return out


def order_findings(doc: AnnotationDocument, findings: Iterable[Finding]) -> list[Finding]:
    """Sort by rule id, tier id, then the annotation's position on its tier."""
    position = {}
    for t in doc.tiers:
        for i, a in enumerate(t.annotations):
            position[(t.id, a.id)] = i

    def key(f: Finding):
        return (f.rule_id, f.tier or "", position.get((f.tier, f.annotation), -1),
                f.annotation or "", f.context or "", f.message)

    return sorted(findings, key=key)


def validate_document(
    doc: AnnotationDocument,
    template: Template | None = None,
    dictionary: Dictionary | None = None,
    config: RuleConfig | None = None,
    file: str = "",
    media_root: str | Path | None = None,
) -> ValidationReport:
    config = config or RuleConfig()
    on = config.enabled
    found: list[Finding] = [f for f in validate_structure(doc) if f.rule_id not in ("E004", "E005")]
    if template is not None and on & {"E001", "W002"}:
        found += check_template_conformance(doc, template)
    if "E002" in on:
        found += check_empty_tiers(doc)
    if "E003" in on:
        found += check_controlled_vocabulary(doc, config.vocabulary_case_sensitive)
    if "W001" in on and dictionary is not None:
        found += spell_check(doc, dictionary, config.spell_scope(doc))
    if on & {"E004", "E005", "W003"}:
        found += check_time_consistency(doc, media_root if "W003" in on else None)
    found = [dataclasses.replace(f, file=file) for f in found if f.rule_id in on]
    return ValidationReport(
        file=file,
        findings=order_findings(doc, found),
        tier_presence=tier_presence(doc, template),
        template_tiers=template.tier_ids() if template else [],
    )


__all__ = [
    "Counts", "Dictionary", "RuleConfig", "TierPresence", "ValidationReport", "ERROR", "WARNING",
    "check_controlled_vocabulary", "check_empty_tiers", "check_template_conformance",
    "check_time_consistency", "order_findings", "spell_check", "tier_presence", "tokenize",
    "validate_document",
]
