"""Viblio: crowdsourced, time-anchored source citations for videos.

The package is a library plus an HTTP service: domain rules in core,
link-metadata scraping in scrape, durable persistence in store, report
aggregation in analytics, the JSON API in api, and the operator CLI in cli.
"""
from .core import (
    Citation,
    CitationRejected,
    CitationType,
    CredibilityRating,
    FetchStatus,
    InteractionEvent,
    InteractionKind,
    Interval,
    RatingPhase,
    RejectionCode,
    SourceMetadata,
    TimelineMarker,
    VideoRecord,
    active_citations,
    default_end,
    timeline_markers,
    validate_citation,
)
from .scrape import Scraper, extract_metadata, fetch_document, scrape
from .store import Store, StoreError

__version__ = "0.1.0"

__all__ = [
    "Citation",
    "CitationRejected",
    "CitationType",
    "CredibilityRating",
    "FetchStatus",
    "InteractionEvent",
    "InteractionKind",
    "Interval",
    "RatingPhase",
    "RejectionCode",
    "SourceMetadata",
    "TimelineMarker",
    "VideoRecord",
    "active_citations",
    "default_end",
    "timeline_markers",
    "validate_citation",
    "Scraper",
    "extract_metadata",
    "fetch_document",
    "scrape",
    "Store",
    "StoreError",
    "__version__",
]
