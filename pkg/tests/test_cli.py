import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from viblio.analytics import FIXTURES_DIR
from viblio.core import VideoRecord
from viblio.store import Store

from test_core import make_citation


def run_cli(*args, env_extra=None, cwd=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "viblio.cli", *args],
        capture_output=True,
        text=True,
        env=env,
        cwd=cwd,
        timeout=60,
    )


def write_videos_csv(path: Path, rows: list[str]) -> Path:
    path.write_text(
        "video_id,duration_s,title,tags,primary_category\n" + "\n".join(rows) + "\n",
        encoding="utf-8",
    )
    return path


class TestSeed:
    def test_seed_counts_distinct_ids(self, tmp_path):
        csv_path = write_videos_csv(
            tmp_path / "videos.csv",
            [
                "v1,600,first,News,News",
                "v2,300,second,,",
                "v1,720,first again,News,News",  # duplicate id, last row wins
            ],
        )
        result = run_cli("seed", str(csv_path), "--data-dir", str(tmp_path / "data"))
        assert result.returncode == 0, result.stderr
        assert "seeded 2 videos" in result.stdout
        with Store(tmp_path / "data") as store:
            assert store.get_video("v1").duration_s == 720.0

    def test_seed_missing_file_is_io_error(self, tmp_path):
        result = run_cli("seed", str(tmp_path / "nope.csv"), "--data-dir", str(tmp_path / "d"))
        assert result.returncode == 2

    def test_seed_bad_header_is_validation_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("name\nv1\n", encoding="utf-8")
        result = run_cli("seed", str(bad), "--data-dir", str(tmp_path / "d"))
        assert result.returncode == 1

    def test_packaged_videos_fixture_seeds(self, tmp_path):
        result = run_cli(
            "seed", str(FIXTURES_DIR / "videos.csv"), "--data-dir", str(tmp_path / "d")
        )
        assert result.returncode == 0
        assert "seeded 25 videos" in result.stdout


class TestExportImport:
    def test_round_trip_byte_identical(self, tmp_path):
        source_dir = tmp_path / "source"
        with Store(source_dir) as store:
            store.put_video(VideoRecord(video_id="v1", duration_s=600.0))
            store.put_video(VideoRecord(video_id="v2"))
            store.append_citation(make_citation(30, 40, cid="c-two", video_id="v1"))
            store.append_citation(make_citation(10, 20, cid="c-one", video_id="v1"))
            store.append_citation(make_citation(5, 90, cid="c-three", video_id="v2"))

        first_export = tmp_path / "first.jsonl"
        result = run_cli("export", str(first_export), "--data-dir", str(source_dir))
        assert result.returncode == 0, result.stderr
        assert "exported 3 citations" in result.stdout

        fresh_dir = tmp_path / "fresh"
        result = run_cli("import", str(first_export), "--data-dir", str(fresh_dir))
        assert result.returncode == 0, result.stderr
        assert "imported 3 citations" in result.stdout

        second_export = tmp_path / "second.jsonl"
        result = run_cli("export", str(second_export), "--data-dir", str(fresh_dir))
        assert result.returncode == 0
        assert first_export.read_bytes() == second_export.read_bytes()

    def test_reimport_skips_existing(self, tmp_path):
        source_dir = tmp_path / "source"
        with Store(source_dir) as store:
            store.put_video(VideoRecord(video_id="v1", duration_s=600.0))
            store.append_citation(make_citation(10, 20, cid="c-one"))
        export_path = tmp_path / "out.jsonl"
        run_cli("export", str(export_path), "--data-dir", str(source_dir))
        result = run_cli("import", str(export_path), "--data-dir", str(source_dir))
        assert result.returncode == 0
        assert "imported 0 citations (1 already present)" in result.stdout

    def test_export_without_writes_is_stable(self, tmp_path):
        source_dir = tmp_path / "source"
        with Store(source_dir) as store:
            store.put_video(VideoRecord(video_id="v1", duration_s=600.0))
            store.append_citation(make_citation(10, 20, cid="c-one"))
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run_cli("export", str(a), "--data-dir", str(source_dir))
        run_cli("export", str(b), "--data-dir", str(source_dir))
        assert a.read_bytes() == b.read_bytes()

    def test_import_missing_file_is_io_error(self, tmp_path):
        result = run_cli("import", str(tmp_path / "absent.jsonl"), "--data-dir", str(tmp_path / "d"))
        assert result.returncode == 2


class TestScrapeCommand:
    def test_scrape_prints_metadata_json(self, fixture_server, tmp_path):
        result = run_cli("scrape", f"{fixture_server}/ok.html")
        assert result.returncode == 0, result.stderr
        metadata = json.loads(result.stdout)
        assert metadata["title"] == "Fixture Page"
        assert metadata["fetch_status"] == "fetched"

    def test_scrape_unreachable_prints_failed(self):
        result = run_cli("scrape", "http://127.0.0.1:1/x", "--scrape-timeout", "2")
        assert result.returncode == 0
        assert json.loads(result.stdout)["fetch_status"] == "failed"


class TestReportCommand:
    def test_participant_fixture_total_row(self):
        result = run_cli(
            "report", "interactions", "--group-by", "participant",
            "--fixture", str(FIXTURES_DIR / "interactions_by_participant.csv"),
        )
        assert result.returncode == 0, result.stderr
        last = result.stdout.strip().splitlines()[-1].split()
        assert last[0] == "Total"
        assert last[-1] == "811"

    def test_category_fixture_averages(self):
        result = run_cli(
            "report", "interactions", "--group-by", "category",
            "--fixture", str(FIXTURES_DIR / "interactions_by_video.csv"),
            "--json",
        )
        assert result.returncode == 0, result.stderr
        rows = {r["key"]: r for r in json.loads(result.stdout)}
        assert rows["Educational"]["timeline_avg"] == 25.43
        assert rows["News"]["list_avg"] == 6.75
        assert rows["Controversial"]["click_avg"] == 3.90

    def test_credibility_fixture_report(self):
        result = run_cli(
            "report", "credibility",
            "--fixture", str(FIXTURES_DIR / "credibility_ratings_synthetic.csv"),
            "--json",
        )
        assert result.returncode == 0, result.stderr
        rows = {r["key"]: r for r in json.loads(result.stdout)}
        assert rows["video-19"]["initial_avg"] == 3.50
        assert rows["video-19"]["final_avg"] == 4.50
        assert rows["video-19"]["difference"] == 1.00

    def test_wrong_fixture_shape_is_validation_error(self):
        result = run_cli(
            "report", "interactions", "--group-by", "participant",
            "--fixture", str(FIXTURES_DIR / "interactions_by_video.csv"),
        )
        assert result.returncode == 1

    def test_report_from_store(self, tmp_path):
        data_dir = tmp_path / "data"
        with Store(data_dir) as store:
            store.put_video(VideoRecord(video_id="v1", duration_s=600.0))
        result = run_cli("report", "interactions", "--data-dir", str(data_dir))
        assert result.returncode == 0


class TestConfigPrecedence:
    def test_env_var_used_when_flag_absent(self, tmp_path):
        csv_path = write_videos_csv(tmp_path / "videos.csv", ["v1,600,t,,"])
        data_dir = tmp_path / "from-env"
        result = run_cli(
            "seed", str(csv_path), env_extra={"VIBLIO_DATA_DIR": str(data_dir)}
        )
        assert result.returncode == 0, result.stderr
        assert (data_dir / "records.log").exists()

    def test_flag_beats_env_var(self, tmp_path):
        csv_path = write_videos_csv(tmp_path / "videos.csv", ["v1,600,t,,"])
        flag_dir = tmp_path / "from-flag"
        env_dir = tmp_path / "from-env"
        result = run_cli(
            "seed", str(csv_path), "--data-dir", str(flag_dir),
            env_extra={"VIBLIO_DATA_DIR": str(env_dir)},
        )
        assert result.returncode == 0
        assert (flag_dir / "records.log").exists()
        assert not env_dir.exists()
