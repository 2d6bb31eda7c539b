"""CLI: replay, report, and synth round trips."""

from __future__ import annotations

import json

import pytest

from ideascape.cli import main
from ideascape.layout import DEFAULT_PARAMS, params_hash
from ideascape.sessionlog import SessionHeader, SessionLogWriter


def _empty_log(tmp_path):
    path = tmp_path / "empty.log"
    header = SessionHeader(
        topic_config_id="study2-sustainability",
        transition_mode="walk",
        layout_params_hash=params_hash(DEFAULT_PARAMS),
        started_at="2026-01-01T00:00:00+00:00",
    )
    SessionLogWriter(path, header).close()
    return path


class TestReplayCommand:
    def test_replay_empty_log_exits_zero(self, tmp_path, capsys):
        path = _empty_log(tmp_path)
        assert main(["replay", "--log", str(path)]) == 0
        out = capsys.readouterr().out
        assert "islands=0" in out
        snapshot = json.loads((tmp_path / "empty.log.snapshot.json").read_text())
        assert snapshot["islands"] == []

    def test_replay_missing_file_fails_with_diagnostic(self, tmp_path, capsys):
        assert main(["replay", "--log", str(tmp_path / "nope.log")]) == 1
        assert "error" in capsys.readouterr().err

    def test_replay_synth_log(self, tmp_path, capsys):
        assert main(["synth", "--out", str(tmp_path / "s.log"),
                     "--ideas", "12", "--in-island", "4", "--matched", "2"]) == 0
        assert main(["replay", "--log", str(tmp_path / "s.log")]) == 0
        assert "trees=12" in capsys.readouterr().out


class TestReportCommand:
    def test_worked_example_switch_rate_line(self, tmp_path, capsys, session):
        # Two categories alternating A A B B B A over two minutes.
        pattern = ["patrol", "patrol", "recycle", "recycle", "recycle", "patrol"]
        for i, kw in enumerate(pattern):
            session.submit_utterance(f"idea {i} about {kw}", 10.0 + i * 18.0)
        session.end(120.0)
        assert main(["report", "--log", str(session.log_path),
                     "--duration", "120"]) == 0
        out = capsys.readouterr().out
        assert "switch_rate_per_min=1.000000" in out
        assert "fluency=6" in out

    def test_synth_ssc_value(self, tmp_path, capsys):
        log = tmp_path / "ssc.log"
        assert main(["synth", "--out", str(log), "--ideas", "122",
                     "--in-island", "109", "--matched", "53"]) == 0
        assert main(["report", "--log", str(log), "--duration", "600"]) == 0
        out = capsys.readouterr().out
        assert "ssc_rate=0.486239" in out
        assert "ssc_in_island=109" in out

    def test_report_bytes_identical_across_runs(self, tmp_path, capsys):
        log = tmp_path / "det.log"
        main(["synth", "--out", str(log), "--ideas", "30",
              "--in-island", "9", "--matched", "5"])
        capsys.readouterr()
        main(["report", "--log", str(log), "--duration", "600",
              "--out", str(tmp_path / "r1.json")])
        first = capsys.readouterr().out
        main(["report", "--log", str(log), "--duration", "600",
              "--out", str(tmp_path / "r2.json")])
        second = capsys.readouterr().out
        assert first == second
        assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()

    def test_originality_annotations(self, tmp_path, capsys, session):
        session.submit_utterance("patrol idea", 1.0)
        session.end(60.0)
        notes = tmp_path / "notes.json"
        notes.write_text(json.dumps({"utt-0001": 1.5}))
        main(["report", "--log", str(session.log_path), "--duration", "60",
              "--originality", str(notes)])
        assert "originality_total=1.500000" in capsys.readouterr().out


class TestSynthCommand:
    def test_bad_counts_fail_cleanly(self, tmp_path, capsys):
        code = main(["synth", "--out", str(tmp_path / "x.log"),
                     "--ideas", "5", "--in-island", "9"])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_overview_seconds_flow_through(self, tmp_path, capsys):
        log = tmp_path / "frac.log"
        main(["synth", "--out", str(log), "--ideas", "4", "--in-island", "2",
              "--matched", "1", "--duration", "600", "--overview-seconds", "440.4"])
        main(["report", "--log", str(log), "--duration", "600"])
        assert "overview_fraction=0.734000" in capsys.readouterr().out
