import json
from datetime import datetime, timezone

import pytest

from viblio.core import (
    Citation,
    CitationType,
    FetchStatus,
    Interval,
    SourceMetadata,
)
from viblio.wire import (
    WireError,
    canonical_json_bytes,
    canonicalize,
    citation_from_wire,
    citation_to_wire,
    citations_from_jsonl,
    citations_to_jsonl,
    draft_from_wire,
    format_rfc3339,
    parse_rfc3339,
)


def sample_citation(cid="abc123", video="v1", start=12.5, end=22.5, created=None):
    return Citation(
        id=cid,
        video_id=video,
        url="https://example.com/article",
        ctype=CitationType.SUPPORT,
        note="covers the same storm",
        interval=Interval(start, end),
        metadata=SourceMetadata(
            title="Storm Coverage",
            source="Example News",
            fetch_status=FetchStatus.FETCHED,
        ),
        author_id="author-9",
        created_at=created or datetime(2024, 3, 5, 10, 30, 0, 250000, timezone.utc),
    )


class TestRfc3339:
    def test_format_fixed_width_ms(self):
        dt = datetime(2024, 3, 5, 10, 30, 0, 250000, timezone.utc)
        assert format_rfc3339(dt) == "2024-03-05T10:30:00.250Z"

    def test_round_trip(self):
        dt = datetime(2024, 3, 5, 10, 30, 0, 250000, timezone.utc)
        assert parse_rfc3339(format_rfc3339(dt)) == dt

    def test_parse_offset_normalizes_to_utc(self):
        parsed = parse_rfc3339("2024-03-05T12:30:00.250+02:00")
        assert parsed == datetime(2024, 3, 5, 10, 30, 0, 250000, timezone.utc)

    def test_parse_no_fraction(self):
        parsed = parse_rfc3339("2024-03-05T10:30:00Z")
        assert parsed == datetime(2024, 3, 5, 10, 30, 0, 0, timezone.utc)

    def test_sub_ms_fraction_truncated_to_ms(self):
        parsed = parse_rfc3339("2024-03-05T10:30:00.2504Z")
        assert parsed.microsecond == 250000

    def test_garbage_rejected(self):
        for bad in ["yesterday", "2024-03-05", "2024-03-05T10:30:00", ""]:
            with pytest.raises(ValueError):
                parse_rfc3339(bad)


class TestCanonicalJson:
    def test_sorted_compact_utf8(self):
        got = canonical_json_bytes({"b": 1, "a": [1.5, "é"]})
        assert got == '{"a":[1.5,"é"],"b":1}'.encode("utf-8")

    def test_canonicalize_is_idempotent(self):
        noisy = b'{\n  "b": 1,\n  "a": 2\n}'
        assert canonicalize(noisy) == b'{"a":2,"b":1}'
        assert canonicalize(canonicalize(noisy)) == canonicalize(noisy)


class TestCitationWire:
    def test_round_trip_lossless(self):
        c = sample_citation()
        assert citation_from_wire(citation_to_wire(c)) == c

    def test_wire_shape(self):
        wire = citation_to_wire(sample_citation())
        assert wire["type"] == "support"
        assert wire["metadata"]["fetch_status"] == "fetched"
        assert wire["created_at"] == "2024-03-05T10:30:00.250Z"
        assert set(wire) == {
            "id", "video_id", "url", "type", "note", "start_s", "end_s",
            "metadata", "author_id", "created_at",
        }

    def test_unknown_field_rejected(self):
        wire = citation_to_wire(sample_citation())
        wire["surprise"] = 1
        with pytest.raises(WireError) as err:
            citation_from_wire(wire)
        assert err.value.code == "UnknownField"

    def test_missing_field_rejected(self):
        wire = citation_to_wire(sample_citation())
        del wire["url"]
        with pytest.raises(WireError) as err:
            citation_from_wire(wire)
        assert err.value.code == "MissingField"

    def test_bad_type_value_rejected(self):
        wire = citation_to_wire(sample_citation())
        wire["type"] = "maybe"
        with pytest.raises(WireError) as err:
            citation_from_wire(wire)
        assert err.value.code == "InvalidField"

    def test_unknown_metadata_field_rejected(self):
        wire = citation_to_wire(sample_citation())
        wire["metadata"]["pixels"] = 4
        with pytest.raises(WireError) as err:
            citation_from_wire(wire)
        assert err.value.code == "UnknownField"

    def test_canonical_bytes_stable(self):
        c = sample_citation()
        assert canonical_json_bytes(citation_to_wire(c)) == canonical_json_bytes(
            citation_to_wire(c)
        )


class TestDraft:
    def test_minimal_draft(self):
        draft = draft_from_wire(
            {"url": "https://example.com/", "type": "refute", "start_s": 10, "author_id": "a"},
            "v1",
        )
        assert draft.end_s is None
        assert draft.note == ""
        assert draft.start_s == 10.0

    def test_video_id_match_ok_mismatch_rejected(self):
        body = {
            "video_id": "v1",
            "url": "https://example.com/",
            "type": "support",
            "start_s": 0,
            "author_id": "a",
        }
        assert draft_from_wire(body, "v1").video_id == "v1"
        with pytest.raises(WireError):
            draft_from_wire(body, "v2")

    def test_unknown_field_rejected(self):
        with pytest.raises(WireError) as err:
            draft_from_wire(
                {"url": "https://e.com/", "type": "support", "start_s": 0,
                 "author_id": "a", "color": "mauve"},
                "v1",
            )
        assert err.value.code == "UnknownField"

    def test_bool_is_not_a_number(self):
        with pytest.raises(WireError) as err:
            draft_from_wire(
                {"url": "https://e.com/", "type": "support", "start_s": True, "author_id": "a"},
                "v1",
            )
        assert err.value.code == "InvalidField"

    def test_seconds_quantized_to_ms(self):
        draft = draft_from_wire(
            {"url": "https://e.com/", "type": "support", "start_s": 1.23456789,
             "end_s": 2.98765432, "author_id": "a"},
            "v1",
        )
        assert draft.start_s == 1.235
        assert draft.end_s == 2.988


class TestJsonl:
    def test_export_sorted_and_byte_reproducible(self):
        citations = [
            sample_citation(cid="b", video="v2", start=5),
            sample_citation(cid="a", video="v1", start=50),
            sample_citation(cid="c", video="v1", start=5),
        ]
        blob = citations_to_jsonl(citations)
        assert blob == citations_to_jsonl(list(reversed(citations)))
        ids = [json.loads(line)["id"] for line in blob.splitlines()]
        assert ids == ["c", "a", "b"]  # v1 by start, then v2

    def test_round_trip(self):
        citations = [sample_citation(cid="a"), sample_citation(cid="b", start=99, end=100)]
        blob = citations_to_jsonl(citations)
        assert citations_from_jsonl(blob) == sorted(
            citations, key=lambda c: (c.video_id, c.interval.start_s, c.created_at, c.id)
        )

    def test_bad_line_reported(self):
        with pytest.raises(WireError) as err:
            citations_from_jsonl(b'{"id": "x"\n')
        assert err.value.code == "MalformedJson"
