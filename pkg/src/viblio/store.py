"""Embedded single-node persistence: an append-only record log plus a
rebuildable index snapshot.

Layout under the data directory:
    records.log  - length-prefixed (big-endian u32) canonical JSON records,
                   fsynced before a write is acknowledged. Source of truth.
    index.json   - snapshot of derived state with a byte watermark into the
                   log; purely an open-time optimization. Deleting it is
                   always safe: opening rebuilds everything from the log.

A torn or corrupt record at the log tail is truncated away on open with a
logged warning; anything acknowledged before it survives.
"""
from __future__ import annotations

import json
import logging
import os
import struct
import threading
from bisect import insort
from dataclasses import replace
from pathlib import Path
from uuid import uuid4

from .core import (
    Citation,
    CredibilityRating,
    InteractionEvent,
    InteractionKind,
    RatingPhase,
    VideoRecord,
    active_from_sorted,
    citation_order_key,
    utc_now_ms,
    validate_citation,
)
from .wire import (
    canonical_json_bytes,
    citation_from_wire,
    citation_to_wire,
    format_rfc3339,
    parse_rfc3339,
)

log = logging.getLogger(__name__)

LOG_FILENAME = "records.log"
INDEX_FILENAME = "index.json"
_LEN_STRUCT = struct.Struct(">I")
_MAX_RECORD_BYTES = 64 * 1024 * 1024  # a longer length prefix means corruption


class StoreError(Exception):
    """Rejected store operation with a stable machine-readable code."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail

    UNKNOWN_VIDEO = "UnknownVideo"
    UNKNOWN_CITATION = "UnknownCitation"
    DUPLICATE_ID = "DuplicateId"
    SCORE_OUT_OF_RANGE = "ScoreOutOfRange"
    EMPTY_VIDEO_ID = "EmptyVideoId"
    INVALID_DURATION = "InvalidDuration"
    MISSING_CITATION_ID = "MissingCitationId"


def _video_to_wire(v: VideoRecord) -> dict:
    return {
        "video_id": v.video_id,
        "duration_s": v.duration_s,
        "title": v.title,
        "tags": list(v.tags),
        "primary_category": v.primary_category,
    }


def _video_from_wire(obj: dict) -> VideoRecord:
    return VideoRecord(
        video_id=obj["video_id"],
        duration_s=obj.get("duration_s"),
        title=obj.get("title"),
        tags=tuple(obj.get("tags") or ()),
        primary_category=obj.get("primary_category"),
    )


def _rating_to_wire(r: CredibilityRating) -> dict:
    return {
        "video_id": r.video_id,
        "participant_id": r.participant_id,
        "phase": r.phase.value,
        "score": r.score,
    }


def _rating_from_wire(obj: dict) -> CredibilityRating:
    return CredibilityRating(
        video_id=obj["video_id"],
        participant_id=obj["participant_id"],
        phase=RatingPhase(obj["phase"]),
        score=int(obj["score"]),
    )


def _event_to_wire(e: InteractionEvent) -> dict:
    return {
        "video_id": e.video_id,
        "participant_id": e.participant_id,
        "kind": e.kind.value,
        "citation_id": e.citation_id,
        "occurred_at": format_rfc3339(e.occurred_at),
    }


def _event_from_wire(obj: dict) -> InteractionEvent:
    return InteractionEvent(
        video_id=obj["video_id"],
        participant_id=obj["participant_id"],
        kind=InteractionKind(obj["kind"]),
        citation_id=obj.get("citation_id"),
        occurred_at=parse_rfc3339(obj["occurred_at"]),
    )


class Store:
    """Durable state for videos, citations, ratings, and interaction events.

    A single writer lock serializes mutations (strictly stronger than the
    required per-video ordering); reads copy under the lock. Safe to share
    across threads.
    """

    def __init__(self, data_dir: str | Path, validate_on_read: bool = __debug__):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.data_dir / LOG_FILENAME
        self.index_path = self.data_dir / INDEX_FILENAME
        self.validate_on_read = validate_on_read
        self._lock = threading.RLock()
        self._videos: dict[str, VideoRecord] = {}
        self._citations_by_video: dict[str, list[tuple]] = {}
        self._citation_ids: dict[str, str] = {}  # id -> video_id
        self._ratings: dict[tuple[str, str, RatingPhase], CredibilityRating] = {}
        self._events: list[InteractionEvent] = []
        self._open()

    # -- lifecycle ---------------------------------------------------------

    def _open(self) -> None:
        self.log_path.touch(exist_ok=True)
        good_size = self._scan_and_truncate()
        watermark = self._load_snapshot(good_size)
        with self.log_path.open("rb") as fh:
            fh.seek(watermark)
            while fh.tell() < good_size:
                header = fh.read(_LEN_STRUCT.size)
                (length,) = _LEN_STRUCT.unpack(header)
                self._apply(json.loads(fh.read(length)))
        self._log_file = self.log_path.open("ab")

    def _scan_and_truncate(self) -> int:
        """Walk the log, returning the byte size of the valid prefix and
        truncating any torn/corrupt tail."""
        size = self.log_path.stat().st_size
        good = 0
        with self.log_path.open("rb") as fh:
            while True:
                header = fh.read(_LEN_STRUCT.size)
                if len(header) < _LEN_STRUCT.size:
                    break
                (length,) = _LEN_STRUCT.unpack(header)
                if length > _MAX_RECORD_BYTES:
                    break
                payload = fh.read(length)
                if len(payload) < length:
                    break
                try:
                    record = json.loads(payload)
                except (ValueError, UnicodeDecodeError):
                    break
                if not isinstance(record, dict) or "kind" not in record:
                    break
                good = fh.tell()
        if good < size:
            log.warning(
                "truncating corrupt tail of %s: keeping %d of %d bytes",
                self.log_path, good, size,
            )
            with self.log_path.open("r+b") as fh:
                fh.truncate(good)
        return good

    def _load_snapshot(self, good_size: int) -> int:
        """Load index.json if it is consistent with the log; return the byte
        offset replay should start from (0 = full rebuild)."""
        if not self.index_path.exists():
            return 0
        try:
            snapshot = json.loads(self.index_path.read_text("utf-8"))
            watermark = snapshot["watermark"]
            if not isinstance(watermark, int) or not 0 <= watermark <= good_size:
                raise ValueError(f"stale watermark {watermark}")
            for obj in snapshot["videos"]:
                self._videos[obj["video_id"]] = _video_from_wire(obj)
            for obj in snapshot["citations"]:
                self._index_citation(citation_from_wire(obj))
            for obj in snapshot["ratings"]:
                rating = _rating_from_wire(obj)
                self._ratings[
                    (rating.video_id, rating.participant_id, rating.phase)
                ] = rating
            for obj in snapshot["events"]:
                self._events.append(_event_from_wire(obj))
            return watermark
        except Exception as exc:
            log.warning("ignoring unusable index snapshot %s: %s", self.index_path, exc)
            self._videos.clear()
            self._citations_by_video.clear()
            self._citation_ids.clear()
            self._ratings.clear()
            self._events.clear()
            return 0

    def checkpoint(self) -> None:
        """Write the index snapshot atomically at the current log size."""
        with self._lock:
            self._log_file.flush()
            snapshot = {
                "watermark": self.log_path.stat().st_size,
                "videos": [_video_to_wire(v) for v in self._videos.values()],
                "citations": [
                    citation_to_wire(c)
                    for entries in self._citations_by_video.values()
                    for _, c in entries
                ],
                "ratings": [_rating_to_wire(r) for r in self._ratings.values()],
                "events": [_event_to_wire(e) for e in self._events],
            }
            tmp = self.index_path.with_suffix(".json.tmp")
            tmp.write_bytes(canonical_json_bytes(snapshot))
            os.replace(tmp, self.index_path)

    def close(self) -> None:
        with self._lock:
            if self._log_file.closed:
                return
            self.checkpoint()
            self._log_file.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    # -- log plumbing --------------------------------------------------------

    def _append_record(self, record: dict) -> None:
        payload = canonical_json_bytes(record)
        self._log_file.write(_LEN_STRUCT.pack(len(payload)) + payload)
        self._log_file.flush()
        os.fsync(self._log_file.fileno())

    def _apply(self, record: dict) -> None:
        kind = record["kind"]
        if kind == "video":
            video = _video_from_wire(record["video"])
            self._videos[video.video_id] = video
        elif kind == "citation":
            self._index_citation(citation_from_wire(record["citation"]))
        elif kind == "rating":
            rating = _rating_from_wire(record["rating"])
            self._ratings[(rating.video_id, rating.participant_id, rating.phase)] = rating
        elif kind == "event":
            self._events.append(_event_from_wire(record["event"]))
        else:
            log.warning("skipping record of unknown kind %r", kind)

    def _index_citation(self, citation: Citation) -> None:
        entries = self._citations_by_video.setdefault(citation.video_id, [])
        insort(entries, (citation_order_key(citation), citation))
        self._citation_ids[citation.id] = citation.video_id

    # -- videos --------------------------------------------------------------

    def put_video(self, video: VideoRecord) -> VideoRecord:
        """Upsert by video id."""
        if not video.video_id:
            raise StoreError(StoreError.EMPTY_VIDEO_ID, "video_id must be non-empty")
        if video.duration_s is not None and video.duration_s <= 0:
            raise StoreError(
                StoreError.INVALID_DURATION, "duration_s must be positive when present"
            )
        with self._lock:
            if video.duration_s is not None:
                # A shrunk duration would strand stored citations out of bounds.
                for _, existing in self._citations_by_video.get(video.video_id, []):
                    if existing.interval.end_s > video.duration_s:
                        raise StoreError(
                            StoreError.INVALID_DURATION,
                            f"duration {video.duration_s} is shorter than stored "
                            f"citation {existing.id} ending at {existing.interval.end_s}",
                        )
            self._append_record({"kind": "video", "video": _video_to_wire(video)})
            self._videos[video.video_id] = video
        return video

    def get_video(self, video_id: str) -> VideoRecord | None:
        with self._lock:
            return self._videos.get(video_id)

    def list_videos(self) -> list[VideoRecord]:
        with self._lock:
            return sorted(self._videos.values(), key=lambda v: v.video_id)

    # -- citations -------------------------------------------------------------

    def append_citation(self, citation: Citation) -> Citation:
        """Persist a validated citation. Assigns id and created_at when the
        caller left them blank; append-only, so ids must be fresh."""
        with self._lock:
            video = self._videos.get(citation.video_id)
            if video is None:
                raise StoreError(
                    StoreError.UNKNOWN_VIDEO,
                    f"video {citation.video_id!r} is not registered",
                )
            if not citation.id:
                citation = replace(citation, id=uuid4().hex)
            if citation.id in self._citation_ids:
                raise StoreError(
                    StoreError.DUPLICATE_ID, f"citation id {citation.id!r} already stored"
                )
            validate_citation(citation, video)
            self._append_record(
                {"kind": "citation", "citation": citation_to_wire(citation)}
            )
            self._index_citation(citation)
        return citation

    def list_citations(self, video_id: str) -> list[Citation]:
        """All citations on a video in display order; empty when unknown."""
        with self._lock:
            citations = [c for _, c in self._citations_by_video.get(video_id, [])]
            video = self._videos.get(video_id)
        if self.validate_on_read and video is not None:
            for c in citations:
                validate_citation(c, video)
        return citations

    def get_citation(self, citation_id: str) -> Citation | None:
        with self._lock:
            video_id = self._citation_ids.get(citation_id)
            if video_id is None:
                return None
            for _, c in self._citations_by_video[video_id]:
                if c.id == citation_id:
                    return c
        return None

    def active_citations(self, video_id: str, t: float) -> list[Citation]:
        """Citations whose interval contains t, in display order."""
        return active_from_sorted(self.list_citations(video_id), t)

    def all_citations(self) -> list[Citation]:
        with self._lock:
            return [
                c
                for video_id in sorted(self._citations_by_video)
                for _, c in self._citations_by_video[video_id]
            ]

    # -- ratings and events ------------------------------------------------------

    def record_rating(self, rating: CredibilityRating) -> CredibilityRating:
        """Upsert on (video, participant, phase); scores are 1..5."""
        if not 1 <= rating.score <= 5:
            raise StoreError(
                StoreError.SCORE_OUT_OF_RANGE,
                f"score must be within 1..5, got {rating.score}",
            )
        with self._lock:
            if rating.video_id not in self._videos:
                raise StoreError(
                    StoreError.UNKNOWN_VIDEO,
                    f"video {rating.video_id!r} is not registered",
                )
            self._append_record({"kind": "rating", "rating": _rating_to_wire(rating)})
            self._ratings[(rating.video_id, rating.participant_id, rating.phase)] = rating
        return rating

    def record_event(self, event: InteractionEvent) -> InteractionEvent:
        """Append an interaction event; click-throughs must name a citation."""
        if event.kind is InteractionKind.CLICK_THROUGH and not event.citation_id:
            raise StoreError(
                StoreError.MISSING_CITATION_ID,
                "click_through events must carry a citation_id",
            )
        with self._lock:
            if event.video_id not in self._videos:
                raise StoreError(
                    StoreError.UNKNOWN_VIDEO,
                    f"video {event.video_id!r} is not registered",
                )
            if event.citation_id is not None and event.citation_id not in self._citation_ids:
                raise StoreError(
                    StoreError.UNKNOWN_CITATION,
                    f"citation {event.citation_id!r} is not stored",
                )
            self._append_record({"kind": "event", "event": _event_to_wire(event)})
            self._events.append(event)
        return event

    def ratings(self) -> list[CredibilityRating]:
        with self._lock:
            return list(self._ratings.values())

    def events(self) -> list[InteractionEvent]:
        with self._lock:
            return list(self._events)

    # -- convenience -----------------------------------------------------------

    def new_citation_id(self) -> str:
        return uuid4().hex

    def now(self):
        return utc_now_ms()
