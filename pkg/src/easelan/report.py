"""Report surfaces: Markdown, a standalone HTML page and a findings CSV,
plus the corpus-level tier-presence overview they all share."""

from __future__ import annotations

import csv
import html
import io
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path, PurePath
from typing import Sequence

from . import __version__
from .errors import EmptyInputError
from .findings import Finding
from .validate import Counts, TierPresence, ValidationReport

CHECK = "✓"
CROSS = "✗"
CSV_FIELDS = ["file", "rule_id", "severity", "tier", "annotation", "context", "message"]


class Cell(str, Enum):
    OK = "ok"
    MISSING = "missing-or-empty"


@dataclass
class CorpusOverview:
    files: list[str]
    tiers: list[str]
    cells: dict[tuple[str, str], Cell] = field(default_factory=dict)
    totals: dict[str, Counts] = field(default_factory=dict)

    def count(self, cell: Cell) -> int:
        return sum(1 for c in self.cells.values() if c is cell)


def build_overview(reports: Sequence[ValidationReport]) -> CorpusOverview:
    if not reports:
        raise EmptyInputError("no validation reports to summarize")
    by_file = {}
    for r in reports:
        if r.file in by_file:
            raise ValueError(f"two reports for {r.file!r}")
        by_file[r.file] = r
    files = sorted(by_file)

    tiers: list[str] = []
    seen: set[str] = set()
    for f in files:
        for t in by_file[f].template_tiers:
            if t not in seen:
                seen.add(t)
                tiers.append(t)
    extras = sorted({t for r in reports for t in r.tier_presence} - seen)
    tiers += extras

    cells = {}
    for f in files:
        presence = by_file[f].tier_presence
        for t in tiers:
            ok = presence.get(t) is TierPresence.PRESENT_LABELED
            cells[(f, t)] = Cell.OK if ok else Cell.MISSING
    totals = {f: by_file[f].counts for f in files}
    return CorpusOverview(files, tiers, cells, totals)


def _ordered(overview: CorpusOverview, reports: Sequence[ValidationReport]) -> list[ValidationReport]:
    by_file = {r.file: r for r in reports}
    return [by_file[f] for f in overview.files if f in by_file]


# markdown

def md_cell(text: str) -> str:
    """Make ``text`` safe inside a pipe-table cell."""
    text = re.sub(r"\s*[\r\n]+\s*", " ", text)
    return text.replace("\\", "\\\\").replace("|", "\\|")


def md_inline(text: str) -> str:
    return re.sub(r"\s*[\r\n]+\s*", " ", text)


def _finding_line(f: Finding) -> str:
    where = []
    if f.tier is not None:
        where.append(f"tier `{md_inline(f.tier)}`")
    if f.annotation is not None:
        where.append(f"annotation `{md_inline(f.annotation)}`")
    loc = f" ({', '.join(where)})" if where else ""
    return f"- **{f.rule_id}** {f.rule_name} [{f.severity}]{loc}: {md_inline(f.message)}"


def _findings_md(report: ValidationReport) -> list[str]:
    if not report.findings:
        return ["No findings."]
    return [_finding_line(f) for f in report.findings]


def render_markdown(overview: CorpusOverview, reports: Sequence[ValidationReport]) -> str:
    lines = ["# Corpus overview", ""]
    header = ["File"] + [md_cell(t) for t in overview.tiers] + ["Errors", "Warnings"]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    for f in overview.files:
        marks = [CHECK if overview.cells[(f, t)] is Cell.OK else CROSS for t in overview.tiers]
        c = overview.totals[f]
        lines.append("| " + " | ".join([md_cell(f)] + marks + [str(c.errors), str(c.warnings)]) + " |")
    lines += ["", "## Findings"]
    for r in _ordered(overview, reports):
        lines += ["", f"### {md_inline(r.file)}", ""]
        lines += _findings_md(r)
    return "\n".join(lines) + "\n"


def render_file_markdown(report: ValidationReport) -> str:
    c = report.counts
    lines = [f"# {md_inline(report.file)}", "", f"{c.errors} error(s), {c.warnings} warning(s)", "",
             "| Tier | Status |", "|---|---|"]
    for tier, state in report.tier_presence.items():
        lines.append(f"| {md_cell(tier)} | {state.value} |")
    lines += ["", "## Findings", ""]
    lines += _findings_md(report)
    return "\n".join(lines) + "\n"


# html

_CSS = """\
body { font-family: sans-serif; margin: 2em; color: #222; }
table { border-collapse: collapse; margin-bottom: 1.5em; }
th, td { border: 1px solid #ccc; padding: 0.3em 0.6em; }
th { background: #f3f3f3; }
td.ok { color: #1a7f37; text-align: center; font-weight: bold; }
td.missing { color: #cf222e; text-align: center; font-weight: bold; }
tr.error td.sev { color: #cf222e; }
tr.warning td.sev { color: #9a6700; }
footer { color: #666; font-size: 0.85em; }"""


def _esc(text: str | None) -> str:
    return html.escape(text or "", quote=True)


def render_html(
    overview: CorpusOverview,
    reports: Sequence[ValidationReport],
    timestamp: str | None = None,
    version: str = __version__,
) -> str:
    """Standalone page; pass ``timestamp`` for reproducible output."""
    assert overview.files, "overview must not be empty"
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    out = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        "<title>Annotation corpus overview</title>",
        f"<style>\n{_CSS}\n</style>",
        "</head>",
        "<body>",
        "<h1>Annotation corpus overview</h1>",
        "<table>",
        "<tr><th>File</th>" + "".join(f"<th>{_esc(t)}</th>" for t in overview.tiers)
        + "<th>Errors</th><th>Warnings</th></tr>",
    ]
    for f in overview.files:
        row = [f"<td>{_esc(f)}</td>"]
        for t in overview.tiers:
            if overview.cells[(f, t)] is Cell.OK:
                row.append(f'<td class="ok">{CHECK}</td>')
            else:
                row.append(f'<td class="missing">{CROSS}</td>')
        c = overview.totals[f]
        row.append(f"<td>{c.errors}</td><td>{c.warnings}</td>")
        out.append("<tr>" + "".join(row) + "</tr>")
    out += ["</table>", "<h2>Findings</h2>"]
    for r in _ordered(overview, reports):
        out.append(f"<h3>{_esc(r.file)}</h3>")
        if not r.findings:
            out.append("<p>No findings.</p>")
            continue
        out.append("<table>")
        out.append("<tr><th>Rule</th><th>Severity</th><th>Tier</th><th>Annotation</th>"
                   "<th>Context</th><th>Message</th></tr>")
        for fd in r.findings:
            out.append(
                f'<tr class="{fd.severity}"><td>{fd.rule_id} {fd.rule_name}</td><td class="sev">{fd.severity}</td>'
                f"<td>{_esc(fd.tier)}</td><td>{_esc(fd.annotation)}</td><td>{_esc(fd.context)}</td>"
                f"<td>{_esc(fd.message)}</td></tr>"
            )
        out.append("</table>")
    out += [
        f"<footer>Generated {_esc(timestamp)} by easelan {_esc(version)}</footer>",
        "</body>",
        "</html>",
    ]
    return "\n".join(out) + "\n"


# csv

def render_csv(reports: Sequence[ValidationReport]) -> str:
    """RFC 4180 CSV (CRLF line ends), one row per finding in report order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        for f in r.findings:
            w.writerow([f.file, f.rule_id, f.severity, f.tier or "", f.annotation or "", f.context or "", f.message])
    return buf.getvalue()


def parse_findings_csv(text: str) -> list[Finding]:
    rows = csv.DictReader(io.StringIO(text, newline=""))
    if rows.fieldnames != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {rows.fieldnames}")
    return [
        Finding(row["rule_id"], row["severity"], row["message"], row["file"],
                row["tier"] or None, row["annotation"] or None, row["context"] or None)
        for row in rows
    ]


# output layout

def report_stems(files: Sequence[str]) -> dict[str, str]:
    """File -> page stem under ``files/``; colliding stems fall back to the flattened path."""
    stems: dict[str, list[str]] = {}
    for f in files:
        stems.setdefault(PurePath(f).stem, []).append(f)
    out = {}
    for stem, group in stems.items():
        for f in group:
            if len(group) == 1:
                out[f] = stem
            else:
                out[f] = re.sub(r"[^\w.-]+", "__", str(PurePath(f).with_suffix("")).strip("/\\"))
    return out


def write_reports(
    report_dir: str | Path,
    reports: Sequence[ValidationReport],
    timestamp: str | None = None,
) -> CorpusOverview:
    """Write overview.md, overview.html, findings.csv and files/<stem>.md."""
    overview = build_overview(reports)
    ordered = _ordered(overview, reports)
    root = Path(report_dir)
    (root / "files").mkdir(parents=True, exist_ok=True)
    _write(root / "overview.md", render_markdown(overview, ordered))
    _write(root / "overview.html", render_html(overview, ordered, timestamp))
    _write(root / "findings.csv", render_csv(ordered))
    stems = report_stems(overview.files)
    for r in ordered:
        _write(root / "files" / f"{stems[r.file]}.md", render_file_markdown(r))
    return overview


def _write(path: Path, text: str) -> None:
    # newline="" keeps the CSV's CRLF intact and LF elsewhere on every platform
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
