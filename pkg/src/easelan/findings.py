"""Rule registry and the finding record shared by the model and the validators."""

from __future__ import annotations

from dataclasses import dataclass

RULES: dict[str, str] = {
    "E001": "missing-template-tier",
    "E002": "empty-tier",
    "E003": "vocabulary-violation",
    "E004": "tier-overlap",
    "E005": "inverted-interval",
    "E006": "dangling-reference",
    "W001": "misspelling",
    "W002": "extra-tier-not-in-template",
    "W003": "missing-media-file",
}

ERROR = "error"
WARNING = "warning"


def severity_of(rule_id: str) -> str:
    if rule_id not in RULES:
        raise ValueError(f"unregistered rule id {rule_id!r}")
    return ERROR if rule_id.startswith("E") else WARNING


@dataclass(frozen=True)
class Finding:
    rule_id: str
    severity: str
    message: str
    file: str = ""
    tier: str | None = None
    annotation: str | None = None
    context: str | None = None

    def __post_init__(self) -> None:
        if self.rule_id not in RULES:
            raise ValueError(f"unregistered rule id {self.rule_id!r}")
        if self.severity not in (ERROR, WARNING):
            raise ValueError(f"bad severity {self.severity!r}")
        if not self.message:
            raise ValueError("finding message must be non-empty")
        # empty optional fields collapse to None so CSV round-trips are exact
        for name in ("tier", "annotation", "context"):
            if getattr(self, name) == "":
                object.__setattr__(self, name, None)

    @property
    def rule_name(self) -> str:
        return RULES[self.rule_id]


def finding(rule_id: str, message: str, **kw) -> Finding:
    return Finding(rule_id, severity_of(rule_id), message, **kw)
