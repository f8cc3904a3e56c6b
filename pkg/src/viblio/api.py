"""HTTP boundary: JSON endpoints over the store, scraper, and analytics.

Bodies are parsed strictly by hand (wire module) instead of through a
framework model layer so the error envelope is uniform: every failure is
{"error": <stable code>, "detail": <text>} and every success body is
canonical JSON, byte-stable across requests.

Endpoints:
    POST /videos/{video_id}/citations          201 stored citation
    GET  /videos/{video_id}/citations          200 display-ordered list
    GET  /videos/{video_id}/citations/active?t 200 citations covering t
    POST /videos/{video_id}/ratings            204
    POST /videos/{video_id}/events             204
    GET  /reports/credibility                  200 report rows
    GET  /reports/interactions?group_by=...    200 report rows
"""
from __future__ import annotations

import json
import math
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import analytics
from .core import (
    Citation,
    CitationRejected,
    CredibilityRating,
    FAILED_METADATA,
    InteractionEvent,
    InteractionKind,
    Interval,
    RatingPhase,
    RejectionCode,
    default_end,
    utc_now_ms,
    validate_citation,
)
from .scrape import Scraper
from .store import Store, StoreError
from .wire import (
    WireError,
    canonical_json_bytes,
    citation_to_wire,
    draft_from_wire,
    parse_rfc3339,
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.status = status
        self.code = code
        self.detail = detail


def _error_response(status: int, code: str, detail: str) -> Response:
    return Response(
        content=canonical_json_bytes({"error": code, "detail": detail}),
        status_code=status,
        media_type="application/json",
    )


def _json_response(payload, status: int = 200) -> Response:
    return Response(
        content=canonical_json_bytes(payload),
        status_code=status,
        media_type="application/json",
    )


async def _read_object(request: Request) -> dict:
    """Parse the request body as a JSON object; anything else is 422."""
    raw = await request.body()
    try:
        obj = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ApiError(422, "MalformedJson", f"body is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ApiError(422, "MalformedJson", "body must be a JSON object")
    return obj


_STORE_ERROR_STATUS = {
    StoreError.UNKNOWN_VIDEO: 400,
    StoreError.UNKNOWN_CITATION: 400,
    StoreError.SCORE_OUT_OF_RANGE: 400,
    StoreError.MISSING_CITATION_ID: 400,
    StoreError.DUPLICATE_ID: 400,
    StoreError.EMPTY_VIDEO_ID: 400,
    StoreError.INVALID_DURATION: 400,
}


def create_app(store: Store, scraper: Scraper | None = None) -> FastAPI:
    scraper = scraper or Scraper()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        try:
            yield
        finally:
            store.close()  # graceful stop checkpoints the index snapshot

    app = FastAPI(
        title="viblio", docs_url=None, redoc_url=None, openapi_url=None, lifespan=lifespan
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _handle_api_error(request: Request, exc: ApiError) -> Response:
        return _error_response(exc.status, exc.code, exc.detail)

    @app.exception_handler(CitationRejected)
    async def _handle_rejection(request: Request, exc: CitationRejected) -> Response:
        status = 404 if exc.code is RejectionCode.UNKNOWN_VIDEO else 400
        return _error_response(status, exc.code.value, exc.detail)

    @app.exception_handler(WireError)
    async def _handle_wire_error(request: Request, exc: WireError) -> Response:
        return _error_response(400, exc.code, exc.detail)

    @app.exception_handler(StoreError)
    async def _handle_store_error(request: Request, exc: StoreError) -> Response:
        return _error_response(_STORE_ERROR_STATUS.get(exc.code, 400), exc.code, exc.detail)

    @app.exception_handler(StarletteHTTPException)
    async def _handle_http_error(request: Request, exc: StarletteHTTPException) -> Response:
        code = "NotFound" if exc.status_code == 404 else "HttpError"
        return _error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def _handle_validation(request: Request, exc: RequestValidationError) -> Response:
        return _error_response(400, "InvalidRequest", str(exc.errors()))

    @app.post("/videos/{video_id}/citations")
    async def post_citation(video_id: str, request: Request) -> Response:
        body = await _read_object(request)
        video = store.get_video(video_id)
        if video is None:
            raise ApiError(404, "UnknownVideo", f"video {video_id!r} is not registered")
        draft = draft_from_wire(body, video_id)
        if draft.end_s is None:
            try:
                end_s = default_end(draft.start_s, video.duration_s)
            except ValueError as exc:
                raise ApiError(400, RejectionCode.OUT_OF_BOUNDS.value, str(exc)) from None
        else:
            end_s = draft.end_s
        candidate = Citation(
            id="",
            video_id=video_id,
            url=draft.url,
            ctype=draft.ctype,
            note=draft.note,
            interval=Interval(draft.start_s, end_s),
            metadata=FAILED_METADATA,
            author_id=draft.author_id,
            created_at=utc_now_ms(),
        )
        validate_citation(candidate, video)  # refuse before spending a fetch
        metadata = scraper.scrape(draft.url)
        stored = store.append_citation(
            Citation(
                id=store.new_citation_id(),
                video_id=video_id,
                url=draft.url,
                ctype=draft.ctype,
                note=draft.note,
                interval=candidate.interval,
                metadata=metadata,
                author_id=draft.author_id,
                created_at=candidate.created_at,
            )
        )
        return _json_response(citation_to_wire(stored), status=201)

    @app.get("/videos/{video_id}/citations")
    async def get_citations(video_id: str) -> Response:
        citations = store.list_citations(video_id)
        return _json_response([citation_to_wire(c) for c in citations])

    @app.get("/videos/{video_id}/citations/active")
    async def get_active(video_id: str, request: Request) -> Response:
        raw = request.query_params.get("t")
        if raw is None:
            raise ApiError(400, "InvalidQuery", "missing query parameter t")
        try:
            t = float(raw)
        except ValueError:
            raise ApiError(400, "InvalidQuery", f"t is not a number: {raw!r}") from None
        if not math.isfinite(t) or t < 0:
            raise ApiError(400, "InvalidQuery", f"t must be finite and non-negative: {raw!r}")
        citations = store.active_citations(video_id, t)
        return _json_response([citation_to_wire(c) for c in citations])

    @app.post("/videos/{video_id}/ratings")
    async def post_rating(video_id: str, request: Request) -> Response:
        body = await _read_object(request)
        unknown = set(body) - {"participant_id", "phase", "score"}
        if unknown:
            raise WireError("UnknownField", f"unknown fields: {sorted(unknown)}")
        participant = body.get("participant_id")
        if not isinstance(participant, str) or not participant:
            raise WireError("InvalidField", "participant_id must be a non-empty string")
        try:
            phase = RatingPhase(body.get("phase"))
        except ValueError:
            raise WireError("InvalidField", "phase must be 'pre' or 'post'") from None
        score = body.get("score")
        if isinstance(score, bool) or not isinstance(score, int):
            raise WireError("InvalidField", "score must be an integer")
        store.record_rating(
            CredibilityRating(
                video_id=video_id, participant_id=participant, phase=phase, score=score
            )
        )
        return Response(status_code=204)

    @app.post("/videos/{video_id}/events")
    async def post_event(video_id: str, request: Request) -> Response:
        body = await _read_object(request)
        unknown = set(body) - {"participant_id", "kind", "citation_id", "occurred_at"}
        if unknown:
            raise WireError("UnknownField", f"unknown fields: {sorted(unknown)}")
        participant = body.get("participant_id")
        if not isinstance(participant, str) or not participant:
            raise WireError("InvalidField", "participant_id must be a non-empty string")
        try:
            kind = InteractionKind(body.get("kind"))
        except ValueError:
            raise WireError(
                "InvalidField",
                "kind must be one of timeline_view/list_view/click_through",
            ) from None
        citation_id = body.get("citation_id")
        if citation_id is not None and not isinstance(citation_id, str):
            raise WireError("InvalidField", "citation_id must be a string")
        occurred_at = utc_now_ms()
        if body.get("occurred_at") is not None:
            try:
                occurred_at = parse_rfc3339(body["occurred_at"])
            except ValueError as exc:
                raise WireError("InvalidField", str(exc)) from None
        store.record_event(
            InteractionEvent(
                video_id=video_id,
                participant_id=participant,
                kind=kind,
                citation_id=citation_id,
                occurred_at=occurred_at,
            )
        )
        return Response(status_code=204)

    @app.get("/reports/credibility")
    async def report_credibility() -> Response:
        report = analytics.credibility_report(store.ratings())
        return _json_response([row.to_json() for row in report.rows])

    @app.get("/reports/interactions")
    async def report_interactions(request: Request) -> Response:
        group_by = request.query_params.get("group_by", "video")
        if group_by not in analytics.GROUP_BY_CHOICES:
            raise ApiError(
                400,
                "UnknownGroupBy",
                f"group_by must be one of {'/'.join(analytics.GROUP_BY_CHOICES)}",
            )
        categories = {
            v.video_id: v.primary_category
            for v in store.list_videos()
            if v.primary_category
        }
        rows = analytics.interaction_report(store.events(), group_by, categories)
        return _json_response([row.to_json() for row in rows])

    return app
