"""Command-line entry point.

Exit codes are the CI contract: 0 when the gate passes, 1 when findings
(or a duplicate tier, or a non-empty diff) fail it, 2 when the tool could
not do its job at all.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import PipelineConfig, discover, load_config
from .diff import diff_annotations, render_diff
from .eaf import Template, emit_ecv, parse_eaf, parse_template, serialize_eaf
from .errors import DuplicateTierError, EaselanError, ParseError
from .ingest import (
    DEFAULT_TRANSCRIPT_TIER,
    SEGMENT,
    WORD,
    attach_biosignal,
    import_transcription,
    link_media,
    load_transcription,
    normalize_biosignal,
    read_signal_csv,
)
from .model import AnnotationDocument, new_document
from .report import write_reports
from .semexport import (
    export_triples,
    generate_ecv_from_concepts,
    load_concepts_file,
    load_mapping,
    serialize_ntriples,
)
from .sidecars import emit_pfsx, parse_pfsx, sidecar_paths, timeseries_preferences
from .validate import Dictionary, RuleConfig, ValidationReport, validate_document

log = logging.getLogger("easelan")

OK, FINDINGS, FAILURE = 0, 1, 2


class _Failure(Exception):
    """Aborts a command with exit code 2 and a one-line diagnostic."""


def _fail(msg: str) -> None:
    print(f"easelan: error: {msg}", file=sys.stderr)


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _read_eaf(path: Path, create: bool = False) -> AnnotationDocument:
    if create and not path.exists():
        return new_document()
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise _Failure(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return parse_eaf(data)
    except ParseError as exc:
        raise _Failure(f"{path}: {exc}") from None


# validate

_worker_state: dict = {}


def _init_worker(template, dictionary, rules, media_root) -> None:
    _worker_state.update(template=template, dictionary=dictionary, rules=rules, media_root=media_root)


def _validate_one(job: tuple[str, str]) -> ValidationReport | str:
    path, label = job
    st = _worker_state
    try:
        doc = parse_eaf(Path(path).read_bytes(), strict=False)
    except ParseError as exc:
        return f"{label}: {exc}"
    except OSError as exc:
        return f"{label}: {exc.strerror or exc}"
    media_root = st["media_root"] if st["media_root"] is not None else Path(path).parent
    return validate_document(doc, st["template"], st["dictionary"], st["rules"], label, media_root)


def _label(path: Path, base: Path) -> str:
    try:
        return path.absolute().relative_to(base.absolute()).as_posix()
    except ValueError:
        return path.as_posix()


def _collect(paths: Sequence[str], cfg: PipelineConfig) -> list[tuple[Path, str]]:
    if not paths:
        return [(p, _label(p, cfg.base_dir)) for p in discover(cfg.corpus_globs, cfg.base_dir)]
    out: dict[Path, str] = {}
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            for f in discover(cfg.corpus_globs, p):
                out.setdefault(f, _label(f, Path.cwd()))
        elif p.is_file():
            out.setdefault(p, _label(p, Path.cwd()))
        else:
            raise _Failure(f"{raw}: no such file or directory")
    return sorted(out.items(), key=lambda kv: kv[1])


def run_validation(
    jobs: list[tuple[Path, str]],
    template: Template | None,
    dictionary: Dictionary | None,
    rules: RuleConfig,
    media_root: Path | None,
    workers: int,
) -> tuple[list[ValidationReport], list[str]]:
    """Validate every job; returns reports and parse failures, both in job order."""
    args = [(str(p), label) for p, label in jobs]
    state = (template, dictionary, rules, media_root)
    if workers <= 1 or len(args) < 2:
        _init_worker(*state)
        results = [_validate_one(a) for a in args]
    else:
        chunk = max(1, len(args) // (workers * 4))
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=state) as pool:
            results = list(pool.map(_validate_one, args, chunksize=chunk))
    reports = [r for r in results if isinstance(r, ValidationReport)]
    failures = [r for r in results if isinstance(r, str)]
    return reports, failures


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
    except EaselanError as exc:
        raise _Failure(str(exc)) from None
    if args.report_dir:
        cfg.report_dir = Path(args.report_dir)
    if args.strict:
        cfg.strict = True
    workers = args.workers or cfg.workers or os.cpu_count() or 1
    if workers < 1:
        raise _Failure("--workers must be at least 1")

    template = None
    if cfg.template_path is not None:
        try:
            template = parse_template(cfg.template_path.read_bytes())
        except OSError as exc:
            raise _Failure(f"template {cfg.template_path}: {exc.strerror or exc}") from None
        except ParseError as exc:
            raise _Failure(f"template {cfg.template_path}: {exc}") from None
    dictionary = None
    if cfg.dictionary_path is not None:
        try:
            dictionary = Dictionary.load(cfg.dictionary_path)
        except (OSError, UnicodeDecodeError) as exc:
            raise _Failure(f"dictionary {cfg.dictionary_path}: {exc}") from None
        if not len(dictionary) and "W001" in cfg.rules.enabled:
            raise _Failure(f"dictionary {cfg.dictionary_path} is empty")

    jobs = _collect(args.paths, cfg)
    if not jobs:
        raise _Failure("no .eaf files found")
    reports, failures = run_validation(jobs, template, dictionary, cfg.rules, cfg.media_root, workers)
    for msg in failures:
        _fail(msg)
    if reports:
        write_reports(cfg.report_dir, reports, cfg.timestamp)
    errors = sum(r.counts.errors for r in reports)
    warnings = sum(r.counts.warnings for r in reports)
    print(f"{len(reports)} file(s) validated: {errors} error(s), {warnings} warning(s); reports in {cfg.report_dir}")
    if failures:
        return FAILURE
    if errors or (cfg.strict and warnings):
        return FINDINGS
    return OK


# ingest

def cmd_transcribe(args: argparse.Namespace) -> int:
    eaf = Path(args.eaf)
    try:
        result = load_transcription(Path(args.json).read_bytes())
    except OSError as exc:
        raise _Failure(f"{args.json}: {exc.strerror or exc}") from None
    doc = _read_eaf(eaf, create=True)
    try:
        import_transcription(doc, result, args.tier, args.granularity)
    except DuplicateTierError as exc:
        _fail(str(exc))
        return FINDINGS
    _write_atomic(eaf, serialize_eaf(doc))
    print(f"{eaf}: tier {args.tier!r} with {len(doc.tier(args.tier).annotations)} annotation(s)")
    return OK


def _parse_units(spec: str | None) -> dict[str, str]:
    out = {}
    for part in filter(None, (spec or "").split(",")):
        name, sep, unit = part.partition("=")
        if not sep:
            raise _Failure(f"--units entry {part!r} is not channel=unit")
        out[name.strip()] = unit.strip()
    return out


def cmd_signal(args: argparse.Namespace) -> int:
    channels = [c.strip() for c in (args.channels or "").split(",") if c.strip()]
    if not channels:
        raise _Failure("no channels given; nothing to attach")
    eaf, src = Path(args.eaf), Path(args.csv)
    doc = _read_eaf(eaf)
    try:
        table = read_signal_csv(src.read_bytes(), args.time_column, args.time_unit)
    except OSError as exc:
        raise _Failure(f"{src}: {exc.strerror or exc}") from None
    out_csv = eaf.with_name(f"{eaf.stem}_{src.stem}.csv")
    data, config = normalize_biosignal(table, channels, _parse_units(args.units), out_csv.name)
    _write_atomic(out_csv, data)
    attach_biosignal(doc, eaf, out_csv, config)

    tsconf, pfsx = sidecar_paths(eaf)
    prefs = parse_pfsx(pfsx.read_bytes()) if pfsx.exists() else {}
    tracks = [t for t in prefs.get("TimeSeriesViewer.Panel-1", []) if isinstance(t, str) and t not in channels]
    prefs.update(timeseries_preferences(tsconf.name, tracks + channels))
    _write_atomic(pfsx, emit_pfsx(prefs))
    _write_atomic(eaf, serialize_eaf(doc))
    print(f"{eaf}: linked {out_csv.name} with {len(channels)} track(s); sidecars {tsconf.name}, {pfsx.name}")
    return OK


def cmd_media(args: argparse.Namespace) -> int:
    eaf = Path(args.eaf)
    doc = _read_eaf(eaf, create=True)
    before = len(doc.media)
    link_media(doc, args.files, eaf)
    _write_atomic(eaf, serialize_eaf(doc))
    print(f"{eaf}: {len(doc.media) - before} media descriptor(s) added")
    return OK


# semantic export

def cmd_triples(args: argparse.Namespace) -> int:
    eaf = Path(args.eaf)
    doc = _read_eaf(eaf)
    scheme = load_concepts_file(args.concepts) if args.concepts else None
    mapping = load_mapping(Path(args.mapping).read_bytes())
    statements = export_triples(doc, mapping, args.base, eaf.stem, scheme)
    out = Path(args.output) if args.output else eaf.with_suffix(".nt")
    _write_atomic(out, serialize_ntriples(statements))
    print(f"{out}: {len(statements)} statement(s)")
    return OK


def cmd_vocab(args: argparse.Namespace) -> int:
    scheme = load_concepts_file(args.concepts)
    vocab_id = args.id or Path(args.concepts).stem
    cv = generate_ecv_from_concepts(scheme, vocab_id)
    out = Path(args.output)
    _write_atomic(out, emit_ecv([cv]))
    print(f"{out}: vocabulary {vocab_id!r} with {len(cv.entries)} entr{'y' if len(cv.entries) == 1 else 'ies'}")
    return OK


def cmd_diff(args: argparse.Namespace) -> int:
    d = diff_annotations(_read_eaf(Path(args.old)), _read_eaf(Path(args.new)))
    sys.stdout.write(render_diff(d))
    return FINDINGS if d else OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="easelan", description="Build, validate and export ELAN annotation corpora.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="validate EAF files and write reports")
    v.add_argument("paths", nargs="*", help="files or directories (default: config corpus globs)")
    v.add_argument("--config", help="pipeline config (TOML)")
    v.add_argument("--report-dir", help="override the report directory")
    v.add_argument("--strict", action="store_true", help="warnings also fail the gate")
    v.add_argument("--workers", type=int, help="parallel workers (default: CPU count)")
    v.set_defaults(func=cmd_validate)

    ing = sub.add_parser("ingest", help="add pipeline inputs to an EAF").add_subparsers(dest="what", required=True)
    t = ing.add_parser("transcribe", help="import recognizer JSON as a tier")
    t.add_argument("json")
    t.add_argument("--eaf", required=True)
    t.add_argument("--tier", default=DEFAULT_TRANSCRIPT_TIER)
    t.add_argument("--granularity", choices=[WORD, SEGMENT], default=WORD)
    t.set_defaults(func=cmd_transcribe)
    s = ing.add_parser("signal", help="link a biosignal CSV with track sidecars")
    s.add_argument("csv")
    s.add_argument("--eaf", required=True)
    s.add_argument("--channels", default="", help="comma-separated column names")
    s.add_argument("--time-column", type=int, default=0)
    s.add_argument("--time-unit", choices=["seconds", "milliseconds"], default="seconds")
    s.add_argument("--units", help="channel=unit pairs, comma-separated")
    s.set_defaults(func=cmd_signal)

    media = sub.add_parser("media", help="media descriptors").add_subparsers(dest="what", required=True)
    m = media.add_parser("link", help="link media files to an EAF")
    m.add_argument("files", nargs="+")
    m.add_argument("--eaf", required=True)
    m.set_defaults(func=cmd_media)

    ex = sub.add_parser("export", help="semantic exports").add_subparsers(dest="what", required=True)
    x = ex.add_parser("triples", help="export aligned annotations as N-Triples")
    x.add_argument("--eaf", required=True)
    x.add_argument("--concepts", help="concept list (JSON or CSV)")
    x.add_argument("--mapping", required=True, help="tier mapping (JSON)")
    x.add_argument("--base", required=True, help="base IRI for event identifiers")
    x.add_argument("-o", "--output", help="output file (default: <eaf>.nt)")
    x.set_defaults(func=cmd_triples)

    vo = sub.add_parser("vocab", help="controlled vocabularies").add_subparsers(dest="what", required=True)
    g = vo.add_parser("generate", help="generate an .ecv from a concept list")
    g.add_argument("--concepts", required=True)
    g.add_argument("--id", help="vocabulary id (default: concept file stem)")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_vocab)

    d = sub.add_parser("diff", help="annotation-level diff of two EAF revisions")
    d.add_argument("old")
    d.add_argument("new")
    d.set_defaults(func=cmd_diff)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="easelan: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except _Failure as exc:
        _fail(str(exc))
    except EaselanError as exc:
        _fail(str(exc))
    except OSError as exc:
        _fail(f"{exc.filename or ''}: {exc.strerror or exc}".lstrip(": "))
    except ValueError as exc:  # bad values in otherwise readable inputs
        _fail(str(exc))
    return FAILURE


if __name__ == "__main__":
    sys.exit(main())
