"""Canonical platform document format.

Every artifact the platform persists or serves (segments, gaps, graph,
reports, job statuses, API responses) is a self-describing JSON document
carrying a ``schema_version`` field. Serialization is byte-deterministic:
sorted keys, fixed separators, no trailing whitespace. The field-level
schemas are described in docs/document-format.md.
"""

import json
from datetime import datetime, timezone
from typing import Any

SCHEMA_VERSION = "1"


class SchemaError(ValueError):
    """Raised when a document is malformed or has an unknown schema."""


def dump_document(doc: dict[str, Any]) -> str:
    """Serialize a document deterministically (sorted keys, compact separators)."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def load_document(text: str) -> dict[str, Any]:
    """Parse a document, validating that it is a JSON object with a known schema_version."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed document: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version: {version!r}")
    return doc


def format_timestamp(ts: datetime) -> str:
    """UTC instant as ISO-8601 with Z suffix.

    Sub-second precision is emitted only when present, so sensor data
    (whole seconds) stays compact while reconstructed points round-trip
    exactly.
    """
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    if ts.microsecond:
        return ts.strftime("%Y-%m-%dT%H:%M:%S.%fZ")
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    """Parse "YYYY-MM-DD HH:MM:SS" or ISO-8601 into an aware UTC datetime.

    Naive inputs are taken as UTC.
    """
    raw = text.strip()
    if not raw:
        raise ValueError("empty timestamp")
    try:
        ts = datetime.strptime(raw, "%Y-%m-%d %H:%M:%S")
    except ValueError:
        normalized = raw.replace("Z", "+00:00")
        ts = datetime.fromisoformat(normalized)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)
