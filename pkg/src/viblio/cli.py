"""Operator command line: run the server, seed videos, move citations in and
out, scrape a URL ad hoc, and print reports.

Configuration precedence is flags, then VIBLIO_* environment variables, then
defaults. Exit codes: 0 success, 1 validation problem, 2 I/O problem.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import analytics
from .core import CitationRejected, VideoRecord
from .scrape import (
    DEFAULT_MAX_BYTES,
    DEFAULT_MAX_CONCURRENT,
    DEFAULT_TIMEOUT_S,
    Scraper,
    scrape as scrape_url,
)
from .store import Store, StoreError
from .wire import (
    WireError,
    canonical_json_bytes,
    citations_from_jsonl,
    citations_to_jsonl,
    metadata_to_wire,
)

DEFAULT_DATA_DIR = "./viblio-data"
DEFAULT_LISTEN = "127.0.0.1:8080"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


@dataclass
class CliConfig:
    data_dir: Path
    listen_host: str
    listen_port: int
    scrape_timeout_s: float
    scrape_max_bytes: int
    max_concurrent_scrapes: int


def _split_listen(listen: str) -> tuple[str, int]:
    host, sep, port = listen.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"--listen must be host:port, got {listen!r}")
    return host or "127.0.0.1", int(port)


def resolve_config(args: argparse.Namespace) -> CliConfig:
    data_dir = args.data_dir or os.environ.get("VIBLIO_DATA_DIR") or DEFAULT_DATA_DIR
    if hasattr(args, "listen"):  # only serve binds a socket
        listen = args.listen or os.environ.get("VIBLIO_LISTEN") or DEFAULT_LISTEN
    else:
        listen = DEFAULT_LISTEN
    host, port = _split_listen(listen)
    return CliConfig(
        data_dir=Path(data_dir),
        listen_host=host,
        listen_port=port,
        scrape_timeout_s=args.scrape_timeout,
        scrape_max_bytes=args.scrape_max_bytes,
        max_concurrent_scrapes=args.max_scrapes,
    )


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    try:
        config = resolve_config(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    store = Store(config.data_dir)
    scraper = Scraper(
        timeout_s=config.scrape_timeout_s,
        max_bytes=config.scrape_max_bytes,
        max_concurrent=config.max_concurrent_scrapes,
    )
    app = create_app(store, scraper)  # lifespan closes the store on shutdown
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")
    return EXIT_OK


def _parse_video_row(row: dict) -> VideoRecord:
    duration = row.get("duration_s")
    tags = tuple(t for t in (row.get("tags") or "").split(";") if t)
    return VideoRecord(
        video_id=(row.get("video_id") or "").strip(),
        duration_s=float(duration) if duration not in (None, "") else None,
        title=row.get("title") or None,
        tags=tags,
        primary_category=row.get("primary_category") or None,
    )


def cmd_seed(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    try:
        with open(args.videos_file, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or "video_id" not in reader.fieldnames:
                print(f"error: {args.videos_file}: need a video_id column", file=sys.stderr)
                return EXIT_VALIDATION
            rows = list(reader)
    except OSError as exc:
        print(f"error: cannot read {args.videos_file}: {exc}", file=sys.stderr)
        return EXIT_IO
    seen = set()
    try:
        with Store(config.data_dir) as store:
            for row in rows:
                video = _parse_video_row(row)
                store.put_video(video)  # duplicate ids upsert; last row wins
                seen.add(video.video_id)
    except (StoreError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"seeded {len(seen)} videos")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    with Store(config.data_dir) as store:
        payload = citations_to_jsonl(store.all_citations())
    try:
        Path(args.citations_file).write_bytes(payload)
    except OSError as exc:
        print(f"error: cannot write {args.citations_file}: {exc}", file=sys.stderr)
        return EXIT_IO
    count = payload.count(b"\n")
    print(f"exported {count} citations")
    return EXIT_OK


def cmd_import(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    try:
        data = Path(args.citations_file).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {args.citations_file}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        citations = citations_from_jsonl(data)
    except WireError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    imported = 0
    skipped = 0
    try:
        with Store(config.data_dir) as store:
            for citation in citations:
                if store.get_video(citation.video_id) is None:
                    # Imports must stand alone: register the video with an
                    # unknown duration rather than refusing the citation.
                    store.put_video(VideoRecord(video_id=citation.video_id))
                if store.get_citation(citation.id) is not None:
                    skipped += 1
                    continue
                store.append_citation(citation)
                imported += 1
    except (StoreError, CitationRejected) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    note = f" ({skipped} already present)" if skipped else ""
    print(f"imported {imported} citations{note}")
    return EXIT_OK


def cmd_scrape(args: argparse.Namespace) -> int:
    metadata = scrape_url(
        args.url, timeout_s=args.scrape_timeout, max_bytes=args.scrape_max_bytes
    )
    sys.stdout.write(canonical_json_bytes(metadata_to_wire(metadata)).decode("utf-8") + "\n")
    return EXIT_OK


def _interactions_from_fixture(path: str, group_by: str):
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    if "participant_id" in header:
        if group_by != "participant":
            raise ValueError(
                f"fixture {path} is per-participant; use --group-by participant"
            )
        return analytics.load_participant_interaction_fixture(path)
    if "video_id" in header:
        if group_by == "participant":
            raise ValueError(f"fixture {path} is per-video; it cannot group by participant")
        return analytics.load_video_interaction_fixture(path)
    raise ValueError(f"fixture {path} has neither video_id nor participant_id column")


def cmd_report(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    try:
        if args.kind == "credibility":
            if args.fixture:
                ratings = analytics.load_ratings_fixture(args.fixture)
            else:
                with Store(config.data_dir) as store:
                    ratings = store.ratings()
            report = analytics.credibility_report(ratings)
            if args.json:
                print(json.dumps([r.to_json() for r in report.rows], indent=2))
            else:
                print(analytics.render_credibility_text(report))
        else:
            group_by = args.group_by or "video"
            if group_by not in analytics.GROUP_BY_CHOICES:
                print(f"error: unknown group_by {group_by!r}", file=sys.stderr)
                return EXIT_VALIDATION
            if args.fixture:
                counts = _interactions_from_fixture(args.fixture, group_by)
                rows = analytics.interaction_report_from_counts(counts, group_by)
            else:
                with Store(config.data_dir) as store:
                    categories = {
                        v.video_id: v.primary_category
                        for v in store.list_videos()
                        if v.primary_category
                    }
                    rows = analytics.interaction_report(store.events(), group_by, categories)
            if args.json:
                print(json.dumps([r.to_json() for r in rows], indent=2))
            else:
                print(analytics.render_interactions_text(rows, group_by))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, listen: bool = False) -> None:
    parser.add_argument(
        "--data-dir",
        default=None,
        help=f"storage directory (env VIBLIO_DATA_DIR, default {DEFAULT_DATA_DIR})",
    )
    if listen:
        parser.add_argument(
            "--listen",
            default=None,
            help=f"host:port to bind (env VIBLIO_LISTEN, default {DEFAULT_LISTEN})",
        )
    parser.add_argument(
        "--scrape-timeout", type=float, default=DEFAULT_TIMEOUT_S,
        help="per-fetch timeout in seconds",
    )
    parser.add_argument(
        "--scrape-max-bytes", type=int, default=DEFAULT_MAX_BYTES,
        help="largest document the scraper will read",
    )
    parser.add_argument(
        "--max-scrapes", type=int, default=DEFAULT_MAX_CONCURRENT,
        help="bound on concurrent outbound fetches",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viblio",
        description="Crowdsourced time-anchored citations for videos",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP API until signaled")
    _add_common(p, listen=True)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("seed", help="upsert videos from a CSV file")
    p.add_argument("videos_file", help="CSV with video_id[,duration_s,title,tags,primary_category]")
    _add_common(p)
    p.set_defaults(func=cmd_seed)

    p = sub.add_parser("export", help="write all citations as sorted JSON lines")
    p.add_argument("citations_file")
    _add_common(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="load citations from a JSON-lines export")
    p.add_argument("citations_file")
    _add_common(p)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("scrape", help="fetch one URL and print its metadata as JSON")
    p.add_argument("url")
    _add_common(p)
    p.set_defaults(func=cmd_scrape)

    p = sub.add_parser("report", help="print a credibility or interactions report")
    p.add_argument("kind", choices=["credibility", "interactions"])
    p.add_argument("--group-by", choices=list(analytics.GROUP_BY_CHOICES), default=None)
    p.add_argument("--fixture", default=None, help="aggregate a CSV fixture instead of the store")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a text table")
    _add_common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
