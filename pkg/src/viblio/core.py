"""Domain types and interval logic for time-anchored video citations.

A citation ties an external source URL to a half-open time interval
[start_s, end_s) of a video. Everything here is a pure function over
immutable values; persistence and transport live elsewhere.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from urllib.parse import urlsplit

DEFAULT_SPAN_S = 10.0
NOTE_MAX_CHARS = 2000


class CitationType(str, Enum):
    """The three citation stances, each with a fixed display color."""

    SUPPORT = "support"
    REFUTE = "refute"
    CONTEXT = "context"

    @property
    def color(self) -> str:
        return _TYPE_COLORS[self]


_TYPE_COLORS = {
    CitationType.SUPPORT: "green",
    CitationType.REFUTE: "red",
    CitationType.CONTEXT: "blue",
}


class FetchStatus(str, Enum):
    FETCHED = "fetched"
    DEGRADED = "degraded"
    FAILED = "failed"


@dataclass(frozen=True, slots=True)
class SourceMetadata:
    """Display metadata scraped from a cited URL; fields absent when not found.

    The scraper guarantees: fetched implies a title is present, and failed
    implies every content field is None.
    """

    title: str | None = None
    author: str | None = None
    source: str | None = None
    description: str | None = None
    cover_image_url: str | None = None
    fetch_status: FetchStatus = FetchStatus.FAILED


FAILED_METADATA = SourceMetadata()


@dataclass(frozen=True, slots=True)
class Interval:
    """Half-open playback interval [start_s, end_s), seconds at ms precision."""

    start_s: float
    end_s: float

    def contains(self, t: float) -> bool:
        return self.start_s <= t < self.end_s


@dataclass(frozen=True, slots=True)
class Citation:
    id: str
    video_id: str
    url: str
    ctype: CitationType
    note: str
    interval: Interval
    metadata: SourceMetadata
    author_id: str
    created_at: datetime


@dataclass(frozen=True, slots=True)
class VideoRecord:
    """A video known to the service. Ids are opaque; duration is optional
    because the service never talks to a video platform."""

    video_id: str
    duration_s: float | None = None
    title: str | None = None
    tags: tuple[str, ...] = ()
    primary_category: str | None = None


class RatingPhase(str, Enum):
    PRE = "pre"
    POST = "post"


@dataclass(frozen=True, slots=True)
class CredibilityRating:
    """A participant's 1-5 credibility score, before or after exploring
    citations. One row per (video, participant, phase); resubmission wins."""

    video_id: str
    participant_id: str
    phase: RatingPhase
    score: int


class InteractionKind(str, Enum):
    TIMELINE_VIEW = "timeline_view"
    LIST_VIEW = "list_view"
    CLICK_THROUGH = "click_through"


@dataclass(frozen=True, slots=True)
class InteractionEvent:
    video_id: str
    participant_id: str
    kind: InteractionKind
    occurred_at: datetime
    citation_id: str | None = None


class RejectionCode(str, Enum):
    """Stable machine-readable reasons a citation draft is refused."""

    MALFORMED_URL = "MalformedUrl"
    INVERTED_INTERVAL = "InvertedInterval"
    OUT_OF_BOUNDS = "OutOfBounds"
    NOTE_TOO_LONG = "NoteTooLong"
    UNKNOWN_VIDEO = "UnknownVideo"


class CitationRejected(ValueError):
    def __init__(self, code: RejectionCode, detail: str):
        super().__init__(f"{code.value}: {detail}")
        self.code = code
        self.detail = detail


def quantize_seconds(value: float) -> float:
    """Clamp a playback position to millisecond precision."""
    return round(float(value), 3)


def utc_now_ms() -> datetime:
    """Current UTC time truncated to millisecond precision (wire precision)."""
    now = datetime.now(timezone.utc)
    return now.replace(microsecond=(now.microsecond // 1000) * 1000)


def is_absolute_http_url(url: str) -> bool:
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return parts.scheme in ("http", "https") and bool(parts.netloc)


def default_end(start_s: float, duration_s: float | None = None) -> float:
    """End time applied when the author leaves it blank: ten seconds after
    the start, clamped to the end of the video when the duration is known."""
    if start_s < 0:
        raise ValueError(f"start_s must be non-negative, got {start_s}")
    if duration_s is not None:
        if start_s >= duration_s:
            raise ValueError(
                f"start_s {start_s} is at or past the video end {duration_s}"
            )
        return float(min(start_s + DEFAULT_SPAN_S, duration_s))
    return float(start_s + DEFAULT_SPAN_S)


def validate_citation(draft: Citation, video: VideoRecord | None) -> Citation:
    """Gate every citation before storage; returns the draft unchanged.

    Raises CitationRejected with a distinct code per failure class. Passing
    video=None means the video is not registered.
    """
    if video is None:
        raise CitationRejected(
            RejectionCode.UNKNOWN_VIDEO, f"video {draft.video_id!r} is not registered"
        )
    if draft.video_id != video.video_id:
        raise CitationRejected(
            RejectionCode.UNKNOWN_VIDEO,
            f"citation targets {draft.video_id!r}, not {video.video_id!r}",
        )
    if not is_absolute_http_url(draft.url):
        raise CitationRejected(
            RejectionCode.MALFORMED_URL, f"not an absolute http(s) URL: {draft.url!r}"
        )
    iv = draft.interval
    if iv.end_s <= iv.start_s:
        raise CitationRejected(
            RejectionCode.INVERTED_INTERVAL,
            f"interval end {iv.end_s} must be greater than start {iv.start_s}",
        )
    if iv.start_s < 0:
        raise CitationRejected(
            RejectionCode.OUT_OF_BOUNDS, f"interval start {iv.start_s} is negative"
        )
    if video.duration_s is not None and iv.end_s > video.duration_s:
        raise CitationRejected(
            RejectionCode.OUT_OF_BOUNDS,
            f"interval end {iv.end_s} exceeds video duration {video.duration_s}",
        )
    if len(draft.note) > NOTE_MAX_CHARS:
        raise CitationRejected(
            RejectionCode.NOTE_TOO_LONG,
            f"note is {len(draft.note)} characters, limit {NOTE_MAX_CHARS}",
        )
    return draft


def citation_order_key(citation: Citation):
    """Total order for display: start time, then creation time, then id."""
    return (citation.interval.start_s, citation.created_at, citation.id)


def sort_citations(citations) -> list[Citation]:
    return sorted(citations, key=citation_order_key)


def active_from_sorted(ordered: list[Citation], t: float) -> list[Citation]:
    """Active subset of an already citation_order_key-sorted list.

    The sort is primarily by start time, so every candidate with start <= t
    forms a prefix; binary-search the cut, then drop intervals already over.
    """
    if t < 0:
        raise ValueError(f"playback time must be non-negative, got {t}")
    starts = [c.interval.start_s for c in ordered]
    cut = bisect_right(starts, t)
    return [c for c in ordered[:cut] if c.interval.end_s > t]


def active_citations(citations, t: float) -> list[Citation]:
    """Citations whose half-open interval contains playback time t,
    in display order. A citation is active at its start and no longer
    active at its end."""
    return active_from_sorted(sort_citations(citations), t)


@dataclass(frozen=True, slots=True)
class TimelineMarker:
    fraction: float
    citation_id: str
    ctype: CitationType

    @property
    def color(self) -> str:
        return self.ctype.color


def timeline_markers(citations, duration_s: float) -> list[TimelineMarker]:
    """One marker per citation at start_s/duration_s along the playback track,
    sorted by position. All citations must lie within the video."""
    if duration_s <= 0:
        raise ValueError(f"duration_s must be positive, got {duration_s}")
    markers = []
    for c in sort_citations(citations):
        start = c.interval.start_s
        if start < 0 or start > duration_s:
            raise ValueError(
                f"citation {c.id} starts at {start}, outside [0, {duration_s}]"
            )
        markers.append(TimelineMarker(start / duration_s, c.id, c.ctype))
    markers.sort(key=lambda m: m.fraction)
    return markers


__all__ = [
    "DEFAULT_SPAN_S",
    "NOTE_MAX_CHARS",
    "CitationType",
    "FetchStatus",
    "SourceMetadata",
    "FAILED_METADATA",
    "Interval",
    "Citation",
    "VideoRecord",
    "RatingPhase",
    "CredibilityRating",
    "InteractionKind",
    "InteractionEvent",
    "RejectionCode",
    "CitationRejected",
    "quantize_seconds",
    "utc_now_ms",
    "is_absolute_http_url",
    "default_end",
    "validate_citation",
    "citation_order_key",
    "sort_citations",
    "active_from_sorted",
    "active_citations",
    "TimelineMarker",
    "timeline_markers",
]
