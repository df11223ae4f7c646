"""Pipeline configuration: one TOML file, relative paths resolved against it,
with ``EASELAN_REPORT_DIR``, ``EASELAN_STRICT`` and ``EASELAN_TIMESTAMP``
overriding what the file says."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .findings import RULES
from .validate import RuleConfig

TEMPLATE_RULES = frozenset({"E001", "W002"})
DEFAULT_GLOBS = ("**/*.eaf",)
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


@dataclass
class Author:
    name: str = ""
    email: str = ""


@dataclass
class PipelineConfig:
    base_dir: Path = field(default_factory=Path.cwd)
    repository_url: str | None = None  # accepted for compatibility; Git is left to the CI host
    branch: str | None = None
    author: Author | None = None
    template_path: Path | None = None
    dictionary_path: Path | None = None
    report_dir: Path = Path("reports")
    rules: RuleConfig = field(default_factory=RuleConfig)
    corpus_globs: list[str] = field(default_factory=lambda: list(DEFAULT_GLOBS))
    strict: bool = False
    media_root: Path | None = None  # None: each file's own directory
    timestamp: str | None = None
    workers: int | None = None


def _bool(value: str, name: str) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ConfigError(f"{name}={value!r} is not a boolean")


def _expect(obj: Mapping, key: str, kind: type | tuple, where: str = ""):
    value = obj.get(key)
    if value is not None and not isinstance(value, kind):
        raise ConfigError(f"{where}{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _str_list(obj: Mapping, key: str, where: str = "") -> list[str] | None:
    value = _expect(obj, key, list, where)
    if value is not None and not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{where}{key}: expected a list of strings")
    return value


def config_from_mapping(data: Mapping, base_dir: Path, env: Mapping[str, str] | None = None) -> PipelineConfig:
    env = os.environ if env is None else env

    def path(key: str) -> Path | None:
        v = _expect(data, key, str)
        return None if v is None else (base_dir / v)

    known = {"repository_url", "branch", "author", "template", "dictionary", "report_dir", "rules",
             "corpus", "strict", "media_root", "timestamp", "workers"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    author = None
    if "author" in data:
        a = _expect(data, "author", dict)
        author = Author(str(a.get("name", "")), str(a.get("email", "")))

    template = path("template")
    rules_tbl = _expect(data, "rules", dict) or {}
    enabled = _str_list(rules_tbl, "enabled", "rules.")
    if enabled is None:
        enabled_set = frozenset(RULES) if template is not None else frozenset(RULES) - TEMPLATE_RULES
    else:
        bad = set(enabled) - set(RULES)
        if bad:
            raise ConfigError(f"rules.enabled: unknown rule ids {', '.join(sorted(bad))}")
        enabled_set = frozenset(enabled)
        if template is None and enabled_set & TEMPLATE_RULES:
            raise ConfigError("rules E001/W002 need a template")
    spell = _str_list(rules_tbl, "spell_tiers", "rules.")
    case = _expect(rules_tbl, "vocabulary_case_sensitive", bool, "rules.")
    rules = RuleConfig(enabled_set, None if spell is None else frozenset(spell), True if case is None else case)

    workers = _expect(data, "workers", int)
    if workers is not None and workers < 1:
        raise ConfigError("workers must be at least 1")

    cfg = PipelineConfig(
        base_dir=base_dir,
        repository_url=_expect(data, "repository_url", str),
        branch=_expect(data, "branch", str),
        author=author,
        template_path=template,
        dictionary_path=path("dictionary"),
        report_dir=path("report_dir") or base_dir / "reports",
        rules=rules,
        corpus_globs=_str_list(data, "corpus") or list(DEFAULT_GLOBS),
        strict=bool(_expect(data, "strict", bool)),
        media_root=path("media_root"),
        timestamp=_expect(data, "timestamp", str),
        workers=workers,
    )
    if env.get("EASELAN_REPORT_DIR"):
        cfg.report_dir = Path(env["EASELAN_REPORT_DIR"])
    if "EASELAN_STRICT" in env:
        cfg.strict = _bool(env["EASELAN_STRICT"], "EASELAN_STRICT")
    if env.get("EASELAN_TIMESTAMP"):
        cfg.timestamp = env["EASELAN_TIMESTAMP"]
    return cfg


def load_config(path: str | Path | None = None, env: Mapping[str, str] | None = None) -> PipelineConfig:
    """Read ``path``; with no path, defaults relative to the working directory."""
    if path is None:
        return config_from_mapping({}, Path.cwd(), env)
    p = Path(path)
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {p} does not exist") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return config_from_mapping(data, p.absolute().parent, env)


def discover(globs: list[str], base_dir: Path) -> list[Path]:
    """Every ``.eaf`` matched by ``globs`` under ``base_dir``, sorted, without duplicates."""
    found = set()
    for g in globs:
        for p in base_dir.glob(g):
            if p.is_file() and p.suffix.lower() == ".eaf":
                found.add(p)
    return sorted(found, key=lambda p: p.as_posix())
