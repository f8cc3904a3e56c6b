"""Canonical JSON encoding of citations and the strict decoding rules.

Everything leaving the service (API bodies, export files, log records) goes
through canonical_json_bytes so identical records are byte-identical. Input
parsing is strict: unknown keys, missing keys, and wrong types are each
rejected with a stable code.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone, timedelta

from .core import (
    Citation,
    CitationType,
    FetchStatus,
    Interval,
    SourceMetadata,
    quantize_seconds,
)


class WireError(ValueError):
    """A request/record body that does not meet the schema."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


def canonical_json_bytes(obj) -> bytes:
    """Deterministic JSON: sorted keys, no whitespace, UTF-8, no NaN."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False
    ).encode("utf-8")


def canonicalize(document: bytes | str) -> bytes:
    """Re-serialize any JSON document into canonical bytes for comparisons."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    return canonical_json_bytes(json.loads(document))


_RFC3339_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt ](\d{2}):(\d{2}):(\d{2})(\.\d+)?"
    r"([Zz]|[+-]\d{2}:\d{2})$"
)


def format_rfc3339(dt: datetime) -> str:
    """UTC timestamp with exactly millisecond precision, e.g.
    2024-05-01T12:30:00.250Z. The fixed width keeps encodings canonical."""
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC3339 timestamp to a UTC datetime at millisecond precision."""
    m = _RFC3339_RE.match(text)
    if not m:
        raise ValueError(f"not an RFC3339 timestamp: {text!r}")
    year, month, day, hour, minute, second = (int(m.group(i)) for i in range(1, 7))
    frac = m.group(7)
    micro = int(round(float(frac) * 1_000_000)) if frac else 0
    offset = m.group(8)
    if offset.upper() == "Z":
        tz = timezone.utc
    else:
        sign = 1 if offset[0] == "+" else -1
        tz = timezone(sign * timedelta(hours=int(offset[1:3]), minutes=int(offset[4:6])))
    dt = datetime(year, month, day, hour, minute, second, micro, tz)
    dt = dt.astimezone(timezone.utc)
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def metadata_to_wire(md: SourceMetadata) -> dict:
    return {
        "title": md.title,
        "author": md.author,
        "source": md.source,
        "description": md.description,
        "cover_image_url": md.cover_image_url,
        "fetch_status": md.fetch_status.value,
    }


_METADATA_KEYS = frozenset(
    ["title", "author", "source", "description", "cover_image_url", "fetch_status"]
)


def metadata_from_wire(obj) -> SourceMetadata:
    if not isinstance(obj, dict):
        raise WireError("InvalidField", "metadata must be an object")
    unknown = set(obj) - _METADATA_KEYS
    if unknown:
        raise WireError("UnknownField", f"unknown metadata fields: {sorted(unknown)}")
    try:
        status = FetchStatus(obj.get("fetch_status", "failed"))
    except ValueError:
        raise WireError(
            "InvalidField", "fetch_status must be one of fetched/degraded/failed"
        ) from None
    fields = {}
    for key in ("title", "author", "source", "description", "cover_image_url"):
        value = obj.get(key)
        if value is not None and not isinstance(value, str):
            raise WireError("InvalidField", f"metadata.{key} must be a string or null")
        fields[key] = value
    return SourceMetadata(fetch_status=status, **fields)


def citation_to_wire(c: Citation) -> dict:
    return {
        "id": c.id,
        "video_id": c.video_id,
        "url": c.url,
        "type": c.ctype.value,
        "note": c.note,
        "start_s": c.interval.start_s,
        "end_s": c.interval.end_s,
        "metadata": metadata_to_wire(c.metadata),
        "author_id": c.author_id,
        "created_at": format_rfc3339(c.created_at),
    }


_CITATION_KEYS = frozenset(
    [
        "id",
        "video_id",
        "url",
        "type",
        "note",
        "start_s",
        "end_s",
        "metadata",
        "author_id",
        "created_at",
    ]
)


def _require_str(obj: dict, key: str) -> str:
    if key not in obj:
        raise WireError("MissingField", f"required field {key!r} is missing")
    value = obj[key]
    if not isinstance(value, str):
        raise WireError("InvalidField", f"{key} must be a string")
    return value


def _require_number(obj: dict, key: str) -> float:
    if key not in obj:
        raise WireError("MissingField", f"required field {key!r} is missing")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WireError("InvalidField", f"{key} must be a number")
    return float(value)


def _parse_ctype(value: str) -> CitationType:
    try:
        return CitationType(value)
    except ValueError:
        raise WireError(
            "InvalidField", "type must be one of support/refute/context"
        ) from None


def citation_from_wire(obj) -> Citation:
    """Decode a complete stored citation (import/replay path). Strict."""
    if not isinstance(obj, dict):
        raise WireError("InvalidField", "citation must be a JSON object")
    unknown = set(obj) - _CITATION_KEYS
    if unknown:
        raise WireError("UnknownField", f"unknown fields: {sorted(unknown)}")
    try:
        created = parse_rfc3339(_require_str(obj, "created_at"))
    except ValueError as exc:
        raise WireError("InvalidField", str(exc)) from None
    return Citation(
        id=_require_str(obj, "id"),
        video_id=_require_str(obj, "video_id"),
        url=_require_str(obj, "url"),
        ctype=_parse_ctype(_require_str(obj, "type")),
        note=_require_str(obj, "note"),
        interval=Interval(
            quantize_seconds(_require_number(obj, "start_s")),
            quantize_seconds(_require_number(obj, "end_s")),
        ),
        metadata=metadata_from_wire(obj.get("metadata")),
        author_id=_require_str(obj, "author_id"),
        created_at=created,
    )


@dataclass(frozen=True, slots=True)
class CitationDraft:
    """What a client submits: a citation before the server assigns id,
    created_at, and scraped metadata. end_s=None means apply the default."""

    video_id: str
    url: str
    ctype: CitationType
    note: str
    start_s: float
    end_s: float | None
    author_id: str


_DRAFT_KEYS = frozenset(
    ["video_id", "url", "type", "note", "start_s", "end_s", "author_id"]
)


def draft_from_wire(obj, video_id: str) -> CitationDraft:
    """Strictly decode a POST body into a draft. The body may repeat the
    video id from the URL path, but only with the same value."""
    if not isinstance(obj, dict):
        raise WireError("InvalidField", "request body must be a JSON object")
    unknown = set(obj) - _DRAFT_KEYS
    if unknown:
        raise WireError("UnknownField", f"unknown fields: {sorted(unknown)}")
    if "video_id" in obj:
        body_vid = _require_str(obj, "video_id")
        if body_vid != video_id:
            raise WireError(
                "InvalidField",
                f"body video_id {body_vid!r} conflicts with path {video_id!r}",
            )
    note = obj.get("note", "")
    if not isinstance(note, str):
        raise WireError("InvalidField", "note must be a string")
    end_s = None
    if obj.get("end_s") is not None:
        end_s = quantize_seconds(_require_number(obj, "end_s"))
    return CitationDraft(
        video_id=video_id,
        url=_require_str(obj, "url"),
        ctype=_parse_ctype(_require_str(obj, "type")),
        note=note,
        start_s=quantize_seconds(_require_number(obj, "start_s")),
        end_s=end_s,
        author_id=_require_str(obj, "author_id"),
    )


def export_sort_key(c: Citation):
    """Stable order for export files: grouped by video, then display order."""
    return (c.video_id, c.interval.start_s, c.created_at, c.id)


def citations_to_jsonl(citations) -> bytes:
    """One canonical WireCitation per line, export-sorted; byte-reproducible."""
    lines = [
        canonical_json_bytes(citation_to_wire(c))
        for c in sorted(citations, key=export_sort_key)
    ]
    return b"".join(line + b"\n" for line in lines)


def citations_from_jsonl(data: bytes) -> list[Citation]:
    citations = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise WireError("MalformedJson", f"line {lineno}: {exc}") from None
        citations.append(citation_from_wire(obj))
    return citations
