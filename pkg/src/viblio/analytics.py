"""Aggregate ratings and interaction events into study-style report tables.

All means are computed on exact rationals and rounded half-away-from-zero
to two decimals only at presentation, so a difference column derived from
unrounded means can disagree with the difference of the rounded columns
(e.g. 1.875 - 2.500 renders as 1.88, 2.50, -0.63).
"""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import CredibilityRating, InteractionKind, RatingPhase

GROUP_BY_CHOICES = ("video", "participant", "category")


def round2(value: Fraction | int | float) -> float:
    """Round to two decimals with ties going away from zero, exactly."""
    q = Fraction(value) * 100
    whole, rem = divmod(abs(q.numerator), q.denominator)
    if 2 * rem >= q.denominator:
        whole += 1
    if q < 0:
        whole = -whole
    return whole / 100


@dataclass(frozen=True, slots=True)
class CredibilityRow:
    """Per-video credibility aggregate over participants with both phases."""

    key: str
    n_responses: int
    initial_avg: float
    final_avg: float
    difference: float

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "n_responses": self.n_responses,
            "initial_avg": self.initial_avg,
            "final_avg": self.final_avg,
            "difference": self.difference,
        }


@dataclass(frozen=True, slots=True)
class CredibilityReport:
    rows: list[CredibilityRow]
    unpaired_scores: int  # ratings dropped because the other phase is missing


def credibility_report(ratings) -> CredibilityReport:
    """Average pre and post scores per video over paired responses only.

    The difference column is round2(final - initial) computed from the
    unrounded means. Rows are sorted by key.
    """
    by_pair: dict[tuple[str, str], dict[RatingPhase, int]] = defaultdict(dict)
    for rating in ratings:
        by_pair[(rating.video_id, rating.participant_id)][rating.phase] = rating.score

    sums: dict[str, list[int]] = defaultdict(lambda: [0, 0, 0])  # n, pre, post
    unpaired = 0
    for (video_id, _participant), phases in by_pair.items():
        if RatingPhase.PRE in phases and RatingPhase.POST in phases:
            entry = sums[video_id]
            entry[0] += 1
            entry[1] += phases[RatingPhase.PRE]
            entry[2] += phases[RatingPhase.POST]
        else:
            unpaired += len(phases)

    rows = []
    for video_id in sorted(sums):
        n, pre_sum, post_sum = sums[video_id]
        initial = Fraction(pre_sum, n)
        final = Fraction(post_sum, n)
        rows.append(
            CredibilityRow(
                key=video_id,
                n_responses=n,
                initial_avg=round2(initial),
                final_avg=round2(final),
                difference=round2(final - initial),
            )
        )
    return CredibilityReport(rows=rows, unpaired_scores=unpaired)


@dataclass(frozen=True, slots=True)
class InteractionRow:
    """Interaction counts for one key; category rows also carry per-video
    averages over the category's videos."""

    key: str
    timeline_views: int
    list_views: int
    click_throughs: int
    total: int
    n_videos: int | None = None
    n_responses: int | None = None
    timeline_avg: float | None = None
    list_avg: float | None = None
    click_avg: float | None = None
    responses_avg: float | None = None

    def to_json(self) -> dict:
        data = {
            "key": self.key,
            "timeline_views": self.timeline_views,
            "list_views": self.list_views,
            "click_throughs": self.click_throughs,
            "total": self.total,
        }
        for name in (
            "n_videos",
            "n_responses",
            "timeline_avg",
            "list_avg",
            "click_avg",
            "responses_avg",
        ):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        return data


@dataclass(frozen=True, slots=True)
class InteractionCounts:
    """Raw per-key counts, either tallied from events or loaded from a
    transcribed fixture table."""

    key: str
    timeline_views: int
    list_views: int
    click_throughs: int
    category: str | None = None
    n_responses: int | None = None
    title: str | None = None

    @property
    def total(self) -> int:
        return self.timeline_views + self.list_views + self.click_throughs


_EVENT_FIELD = {
    InteractionKind.TIMELINE_VIEW: "timeline",
    InteractionKind.LIST_VIEW: "list",
    InteractionKind.CLICK_THROUGH: "click",
}


def counts_from_events(
    events, key_of, categories: dict[str, str] | None = None
) -> list[InteractionCounts]:
    """Tally events per key_of(event); categories annotate video keys."""
    tallies: dict[str, dict[str, int]] = defaultdict(lambda: {"timeline": 0, "list": 0, "click": 0})
    for event in events:
        tallies[key_of(event)][_EVENT_FIELD[event.kind]] += 1
    return [
        InteractionCounts(
            key=key,
            timeline_views=t["timeline"],
            list_views=t["list"],
            click_throughs=t["click"],
            category=(categories or {}).get(key),
        )
        for key, t in sorted(tallies.items())
    ]


def _plain_rows(counts: list[InteractionCounts]) -> list[InteractionRow]:
    return [
        InteractionRow(
            key=c.key,
            timeline_views=c.timeline_views,
            list_views=c.list_views,
            click_throughs=c.click_throughs,
            total=c.total,
            n_responses=c.n_responses,
        )
        for c in sorted(counts, key=lambda c: c.key)
    ]


def _category_rows(counts: list[InteractionCounts]) -> list[InteractionRow]:
    """Sum per category and divide by the number of videos in the category
    (not by responses) for the average columns."""
    grouped: dict[str, list[InteractionCounts]] = defaultdict(list)
    for c in counts:
        grouped[c.category or "untagged"].append(c)
    rows = []
    for category in sorted(grouped):
        members = grouped[category]
        n_videos = len(members)
        timeline = sum(c.timeline_views for c in members)
        listv = sum(c.list_views for c in members)
        click = sum(c.click_throughs for c in members)
        responses = [c.n_responses for c in members if c.n_responses is not None]
        rows.append(
            InteractionRow(
                key=category,
                timeline_views=timeline,
                list_views=listv,
                click_throughs=click,
                total=timeline + listv + click,
                n_videos=n_videos,
                n_responses=sum(responses) if responses else None,
                timeline_avg=round2(Fraction(timeline, n_videos)),
                list_avg=round2(Fraction(listv, n_videos)),
                click_avg=round2(Fraction(click, n_videos)),
                responses_avg=(
                    round2(Fraction(sum(responses), n_videos))
                    if len(responses) == n_videos
                    else None
                ),
            )
        )
    return rows


def interaction_report(
    events,
    group_by: str,
    categories: dict[str, str] | None = None,
) -> list[InteractionRow]:
    """Group interaction events by video, participant, or video category."""
    if group_by == "video":
        return _plain_rows(counts_from_events(events, lambda e: e.video_id))
    if group_by == "participant":
        return _plain_rows(counts_from_events(events, lambda e: e.participant_id))
    if group_by == "category":
        per_video = counts_from_events(events, lambda e: e.video_id, categories)
        return _category_rows(per_video)
    raise ValueError(f"unknown group_by {group_by!r}; expected one of {GROUP_BY_CHOICES}")


def interaction_report_from_counts(
    counts: list[InteractionCounts], group_by: str
) -> list[InteractionRow]:
    """Report over pre-tallied counts (the transcribed fixture path)."""
    if group_by in ("video", "participant"):
        return _plain_rows(counts)
    if group_by == "category":
        return _category_rows(counts)
    raise ValueError(f"unknown group_by {group_by!r}; expected one of {GROUP_BY_CHOICES}")


def grand_totals(rows: list[InteractionRow]) -> InteractionRow:
    timeline = sum(r.timeline_views for r in rows)
    listv = sum(r.list_views for r in rows)
    click = sum(r.click_throughs for r in rows)
    return InteractionRow(
        key="Total",
        timeline_views=timeline,
        list_views=listv,
        click_throughs=click,
        total=timeline + listv + click,
    )


def cross_check(
    video_counts: list[InteractionCounts],
    participant_counts: list[InteractionCounts],
) -> list[str]:
    """Verify both groupings of the same interaction data agree on per-kind
    grand totals. Returns human-readable mismatch descriptions; empty means
    the tables are consistent. One perturbed count shows up as exactly one
    mismatch (the overall total is the sum of the kinds, not a fourth check)."""
    mismatches = []
    pairs = [
        ("timeline views", "timeline_views"),
        ("list views", "list_views"),
        ("click-throughs", "click_throughs"),
    ]
    for label, attr in pairs:
        by_video = sum(getattr(c, attr) for c in video_counts)
        by_participant = sum(getattr(c, attr) for c in participant_counts)
        if by_video != by_participant:
            mismatches.append(
                f"{label}: by-video total {by_video} != by-participant total {by_participant}"
            )
    return mismatches


# -- fixture files -------------------------------------------------------------

FIXTURES_DIR = Path(__file__).parent / "fixtures"


def _read_csv(path: str | Path, required: set[str]) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return list(reader)


def load_video_interaction_fixture(path: str | Path) -> list[InteractionCounts]:
    """Per-video interaction counts with categories and response counts.
    Columns: video_id,title,category,responses,timeline_views,list_views,click_throughs
    """
    rows = _read_csv(
        path,
        {"video_id", "category", "responses", "timeline_views", "list_views", "click_throughs"},
    )
    return [
        InteractionCounts(
            key=row["video_id"],
            timeline_views=int(row["timeline_views"]),
            list_views=int(row["list_views"]),
            click_throughs=int(row["click_throughs"]),
            category=row["category"],
            n_responses=int(row["responses"]),
            title=row.get("title"),
        )
        for row in rows
    ]


def load_participant_interaction_fixture(path: str | Path) -> list[InteractionCounts]:
    """Per-participant interaction counts.
    Columns: participant_id,list_views,timeline_views,click_throughs
    """
    rows = _read_csv(
        path, {"participant_id", "list_views", "timeline_views", "click_throughs"}
    )
    return [
        InteractionCounts(
            key=row["participant_id"],
            timeline_views=int(row["timeline_views"]),
            list_views=int(row["list_views"]),
            click_throughs=int(row["click_throughs"]),
        )
        for row in rows
    ]


def load_ratings_fixture(path: str | Path) -> list[CredibilityRating]:
    """Raw ratings, one per row. Columns: video_id,participant_id,phase,score"""
    rows = _read_csv(path, {"video_id", "participant_id", "phase", "score"})
    return [
        CredibilityRating(
            video_id=row["video_id"],
            participant_id=row["participant_id"],
            phase=RatingPhase(row["phase"]),
            score=int(row["score"]),
        )
        for row in rows
    ]


def load_published_credibility_fixture(path: str | Path) -> list[CredibilityRow]:
    """Published per-video aggregates used as expected values.
    Columns: video_id,title,source,tags,responses,initial_avg,final_avg,difference
    """
    rows = _read_csv(
        path, {"video_id", "responses", "initial_avg", "final_avg", "difference"}
    )
    return [
        CredibilityRow(
            key=row["video_id"],
            n_responses=int(row["responses"]),
            initial_avg=float(row["initial_avg"]),
            final_avg=float(row["final_avg"]),
            difference=float(row["difference"]),
        )
        for row in rows
    ]


# -- rendering ---------------------------------------------------------------


def _format_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def render_table(headers: list[str], rows: list[list]) -> str:
    """Aligned plain-text columns: left-justified key, right-justified numbers."""
    cells = [[_format_cell(v) for v in row] for row in rows]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in cells)) if cells else len(headers[i])
        for i in range(len(headers))
    ]
    def fmt(row):
        first = row[0].ljust(widths[0])
        rest = [cell.rjust(widths[i + 1]) for i, cell in enumerate(row[1:])]
        return "  ".join([first] + rest).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in cells)
    return "\n".join(lines)


def render_credibility_text(report: CredibilityReport) -> str:
    headers = ["video", "responses", "initial_avg", "final_avg", "difference"]
    rows = [
        [r.key, r.n_responses, r.initial_avg, r.final_avg, r.difference]
        for r in report.rows
    ]
    table = render_table(headers, rows)
    if report.unpaired_scores:
        table += f"\n(excluded unpaired scores: {report.unpaired_scores})"
    return table


def render_interactions_text(rows: list[InteractionRow], group_by: str) -> str:
    if group_by == "category":
        headers = [
            "category", "videos", "responses", "timeline_views", "list_views",
            "click_throughs", "total", "responses_avg", "timeline_avg", "list_avg",
            "click_avg",
        ]
        body = [
            [
                r.key, r.n_videos, r.n_responses, r.timeline_views, r.list_views,
                r.click_throughs, r.total, r.responses_avg, r.timeline_avg,
                r.list_avg, r.click_avg,
            ]
            for r in rows
        ]
    else:
        headers = [group_by, "timeline_views", "list_views", "click_throughs", "total"]
        body = [
            [r.key, r.timeline_views, r.list_views, r.click_throughs, r.total]
            for r in rows
        ]
        total = grand_totals(rows)
        body.append(
            [total.key, total.timeline_views, total.list_views, total.click_throughs, total.total]
        )
    return render_table(headers, body)
