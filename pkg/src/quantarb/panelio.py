"""Line-delimited panel files: one JSON record per series, schema-versioned.

Each record bundles the per-series inputs (context, actuals, per-model
quantile matrices) with grouping metadata (domain, horizon class, frequency)
used by report aggregation. Strict loading rejects unknown fields so schema
drift fails loudly instead of silently dropping data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import ForecastPanel, QuantileLevels, build_panel
from .errors import ParseError, SchemaVersionMismatch

SCHEMA_VERSION = 1

_REQUIRED_FIELDS = (
    "schema_version",
    "series_id",
    "seasonality",
    "levels",
    "context",
    "models",
)
_OPTIONAL_FIELDS = ("actuals", "domain", "horizon_class", "frequency")
_KNOWN_FIELDS = frozenset(_REQUIRED_FIELDS) | frozenset(_OPTIONAL_FIELDS)


@dataclass(frozen=True)
class PanelMetadata:
    """Grouping tags carried alongside a panel; free-form strings."""

    domain: str = "unknown"
    horizon_class: str = "unknown"
    frequency: str = "unknown"


@dataclass(frozen=True)
class TaggedPanel:
    """A validated panel plus its grouping metadata."""

    panel: ForecastPanel
    metadata: PanelMetadata = PanelMetadata()


def _panel_to_record(tagged: TaggedPanel) -> dict:
    panel = tagged.panel
    return {
        "schema_version": SCHEMA_VERSION,
        "series_id": panel.series_id,
        "domain": tagged.metadata.domain,
        "horizon_class": tagged.metadata.horizon_class,
        "frequency": tagged.metadata.frequency,
        "seasonality": panel.seasonality,
        "levels": list(panel.levels.levels),
        "context": list(panel.context),
        "actuals": None if panel.actuals is None else list(panel.actuals),
        "models": {name: [list(fc.values) for fc in fcs] for name, fcs in panel.models},
    }


def _record_to_panel(record: dict, where: str, line: int, strict: bool) -> TaggedPanel:
    if not isinstance(record, dict):
        raise ParseError("panel record is not an object", path=where, line=line)
    version = record.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"{where}:{line}: schema_version {version!r}, this reader handles {SCHEMA_VERSION}"
        )
    missing = [f for f in _REQUIRED_FIELDS if f not in record]
    if missing:
        raise ParseError(f"missing fields {missing}", path=where, line=line)
    if strict:
        unknown = sorted(set(record) - _KNOWN_FIELDS)
        if unknown:
            raise ParseError(f"unknown fields {unknown}", path=where, line=line)
    models = record["models"]
    if not isinstance(models, dict) or not models:
        raise ParseError("'models' must be a non-empty object", path=where, line=line)
    try:
        levels = QuantileLevels(tuple(record["levels"]))
        panel = build_panel(
            series_id=str(record["series_id"]),
            context=record["context"],
            actuals=record.get("actuals"),
            seasonality=int(record["seasonality"]),
            levels=levels,
            models=[(name, matrix) for name, matrix in models.items()],
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed panel record: {exc}", path=where, line=line) from None
    meta = PanelMetadata(
        domain=str(record.get("domain", "unknown")),
        horizon_class=str(record.get("horizon_class", "unknown")),
        frequency=str(record.get("frequency", "unknown")),
    )
    return TaggedPanel(panel=panel, metadata=meta)


def save_panels(path: str | Path, tagged_panels: Iterable[TaggedPanel]) -> int:
    """Write panels as one JSON record per line; returns the record count."""
    path = Path(path)
    count = 0
    with path.open("w", encoding="utf-8") as fh:
        for tagged in tagged_panels:
            fh.write(json.dumps(_panel_to_record(tagged)))
            fh.write("\n")
            count += 1
    return count


def _iter_panel_files(path: Path) -> Sequence[Path]:
    if path.is_dir():
        return sorted(path.glob("*.jsonl"))
    return [path]


def load_panels(path: str | Path, strict: bool = True) -> list[TaggedPanel]:
    """Load panels from a record file, or every ``*.jsonl`` in a directory.

    Malformed JSON or records surface as :class:`ParseError` carrying the file
    and line; panel-content violations propagate from panel validation.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError("panel path does not exist", path=str(path))
    out: list[TaggedPanel] = []
    for file in _iter_panel_files(path):
        with file.open("r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    record = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ParseError(
                        f"invalid JSON: {exc.msg}", path=str(file), line=lineno
                    ) from None
                out.append(_record_to_panel(record, str(file), lineno, strict))
    return out
