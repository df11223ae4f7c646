"""Secondary-data sidecars: ``<stem>_tsconf.xml`` track configurations and
``<stem>.pfsx`` viewer preferences.

Both are written in the shape ELAN itself produces (see docs/formats.md);
neither carries a timestamp, so output is a pure function of the input.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Union

from .eaf import XSI, _to_bytes, read_xml
from .errors import InvalidRangeError, SchemaViolationError

CONTINUOUS_RATE = "continuous-rate"
TIMESTAMPED = "timestamped"
_SAMPLE_TYPES = {CONTINUOUS_RATE: "Continuous Rate", TIMESTAMPED: "Timestamped"}
CSV_PROVIDER = "mpi.eudico.client.annotator.timeseries.csv.CSVServiceProvider"
PREFS_SCHEMA_URL = "http://www.mpi.nl/tools/elan/Prefs_v1.1.xsd"


@dataclass
class Track:
    name: str
    data_column: int
    range_min: float
    range_max: float
    color: tuple[int, int, int] = (0, 0, 255)
    units: str | None = None


@dataclass
class TrackConfiguration:
    source_url: str
    sample_type: str = TIMESTAMPED
    time_column: int | None = 0
    tracks: list[Track] = field(default_factory=list)

    def check(self) -> None:
        if self.sample_type not in _SAMPLE_TYPES:
            raise ValueError(f"unknown sample type {self.sample_type!r}")
        names = set()
        for t in self.tracks:
            if t.name in names:
                raise ValueError(f"duplicate track name {t.name!r}")
            names.add(t.name)
            if t.data_column < 0:
                raise ValueError(f"track {t.name!r}: negative data column")
            if not t.range_min < t.range_max:
                raise InvalidRangeError(f"track {t.name!r}: range min {t.range_min} is not below max {t.range_max}")


def sidecar_paths(eaf_path: str | Path) -> tuple[Path, Path]:
    """(tsconf, pfsx) paths that belong to an EAF file."""
    p = Path(eaf_path)
    return p.with_name(p.stem + "_tsconf.xml"), p.with_suffix(".pfsx")


def emit_tsconf(configs: TrackConfiguration | Iterable[TrackConfiguration]) -> bytes:
    if isinstance(configs, TrackConfiguration):
        configs = [configs]
    root = ET.Element("timeseries", {"version": "1.0"})
    for cfg in configs:
        cfg.check()
        attrs = {"sample-type": _SAMPLE_TYPES[cfg.sample_type], "source-url": cfg.source_url}
        if cfg.time_column is not None:
            attrs["time-column"] = str(cfg.time_column)
        src = ET.SubElement(root, "tracksource", attrs)
        ET.SubElement(src, "property", {"key": "provider", "value": CSV_PROVIDER})
        for t in cfg.tracks:
            te = ET.SubElement(src, "track", {"derivative": "0", "name": t.name})
            ET.SubElement(te, "description")
            if t.units is not None:
                ET.SubElement(te, "units").text = t.units
            pos = ET.SubElement(te, "sample-position")
            ET.SubElement(pos, "pos", {"col": str(t.data_column), "row": "0"})
            ET.SubElement(te, "range", {"max": repr(float(t.range_max)), "min": repr(float(t.range_min))})
            ET.SubElement(te, "color").text = ",".join(str(c) for c in t.color)
    return _to_bytes(root)


def parse_tsconf(data: bytes | str) -> list[TrackConfiguration]:
    root, positions = read_xml(data)

    def bad(elem: ET.Element, reason: str) -> SchemaViolationError:
        return SchemaViolationError(reason, *positions.get(elem, (None, None)))

    if root.tag != "timeseries":
        raise bad(root, f"root element is <{root.tag}>, expected <timeseries>")
    by_label = {v: k for k, v in _SAMPLE_TYPES.items()}
    out = []
    for src in root.iterfind("tracksource"):
        try:
            sample_type = by_label[src.get("sample-type", "Timestamped")]
            time_col = src.get("time-column")
            cfg = TrackConfiguration(src.get("source-url", ""), sample_type,
                                     None if time_col is None else int(time_col))
            for te in src.iterfind("track"):
                pos = te.find("sample-position/pos")
                rng = te.find("range")
                color = te.findtext("color", "0,0,255")
                cfg.tracks.append(Track(
                    te.get("name", ""),
                    int(pos.get("col", "1")) if pos is not None else 1,
                    float(rng.get("min")) if rng is not None else 0.0,
                    float(rng.get("max")) if rng is not None else 1.0,
                    tuple(int(c) for c in color.split(",")),  # type: ignore[arg-type]
                    te.findtext("units"),
                ))
        except (KeyError, ValueError, TypeError) as exc:
            raise bad(src, f"bad track source: {exc}") from None
        out.append(cfg)
    return out


# preferences

PrefValue = Union[bool, int, float, str, list, dict]
PreferenceSet = dict  # key -> PrefValue


def _pref_value(parent: ET.Element, value: PrefValue) -> None:
    if isinstance(value, bool):
        ET.SubElement(parent, "Boolean").text = "true" if value else "false"
    elif isinstance(value, int):
        ET.SubElement(parent, "Int").text = str(value)
    elif isinstance(value, float):
        ET.SubElement(parent, "Double").text = repr(value)
    elif isinstance(value, str):
        ET.SubElement(parent, "String").text = value
    else:
        raise TypeError(f"unsupported preference value {value!r}")


def _emit_prefs(parent: ET.Element, prefs: Mapping[str, PrefValue]) -> None:
    for key in sorted(prefs):
        value = prefs[key]
        if isinstance(value, dict):
            _emit_prefs(ET.SubElement(parent, "prefGroup", {"key": key}), value)
        elif isinstance(value, list):
            lst = ET.SubElement(parent, "prefList", {"key": key})
            for v in value:
                _pref_value(lst, v)
        else:
            _pref_value(ET.SubElement(parent, "pref", {"key": key}), value)


def emit_pfsx(prefs: Mapping[str, PrefValue]) -> bytes:
    root = ET.Element("preferences", {"version": "1.1", f"{{{XSI}}}noNamespaceSchemaLocation": PREFS_SCHEMA_URL})
    _emit_prefs(root, prefs)
    return _to_bytes(root)


_SCALARS = {
    "Boolean": lambda s: s == "true",
    "Int": int,
    "Long": int,
    "Float": float,
    "Double": float,
    "String": str,
}


def parse_pfsx(data: bytes | str) -> PreferenceSet:
    root, positions = read_xml(data)

    def scalar(e: ET.Element) -> PrefValue:
        conv = _SCALARS.get(e.tag)
        if conv is None:
            raise SchemaViolationError(f"unknown preference value type <{e.tag}>", *positions.get(e, (None, None)))
        return conv(e.text or "")

    def group(parent: ET.Element) -> PreferenceSet:
        out: PreferenceSet = {}
        for e in parent:
            key = e.get("key")
            if key is None:
                raise SchemaViolationError(f"<{e.tag}> without key", *positions.get(e, (None, None)))
            if e.tag == "pref":
                out[key] = scalar(e[0]) if len(e) else ""
            elif e.tag == "prefList":
                out[key] = [scalar(v) for v in e]
            elif e.tag == "prefGroup":
                out[key] = group(e)
            else:
                raise SchemaViolationError(f"unknown preference element <{e.tag}>", *positions.get(e, (None, None)))
        return out

    if root.tag != "preferences":
        raise SchemaViolationError(f"root element is <{root.tag}>, expected <preferences>", *positions[root])
    return group(root)


def timeseries_preferences(tsconf_name: str, track_names: list[str]) -> PreferenceSet:
    """Preferences that show every track in one time-series panel bound to ``tsconf_name``."""
    return {
        "TimeSeriesViewer.ConfigFile": tsconf_name,
        "TimeSeriesViewer.NumberOfPanels": 1 if track_names else 0,
        "TimeSeriesViewer.Panel-1": list(track_names),
    }
