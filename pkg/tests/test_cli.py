"""Exit codes and output of the command line interface."""

import json
import os

import pytest

from rollupsim.cli import main, scenario_dir
from rollupsim.transcript import load_transcript, transcript_digest


def run_cli(capsys, args):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_scenario_dir_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("ROLLUPSIM_SCENARIO_DIR", str(tmp_path))
    assert scenario_dir() == tmp_path
    monkeypatch.delenv("ROLLUPSIM_SCENARIO_DIR")
    assert scenario_dir().name == "scenarios"


def test_run_bundled_scenario_by_name(capsys, tmp_path):
    out = tmp_path / "t.json"
    code, stdout, _ = run_cli(capsys, ["run", "wrong-root", "--out", str(out)])
    assert code == 0
    assert "DefenderLied" in stdout
    doc = load_transcript(str(out))
    assert doc["final"]["verdicts"] == {"fraud-0": "DefenderLied"}


def test_run_explicit_path_and_seed_override(capsys, tmp_path):
    scenario = tmp_path / "own.yaml"
    scenario.write_text(
        "name: own\nseed: 5\nslots: [4]\n"
        "validators:\n  - id: v0\n    policy: Honest\n"
    )
    out = tmp_path / "own.json"
    code, stdout, _ = run_cli(capsys, ["run", str(scenario), "--seed", "99", "--out", str(out)])
    assert code == 0
    assert "seed=99" in stdout


def test_run_unknown_scenario(capsys):
    code, _, stderr = run_cli(capsys, ["run", "no-such-scenario"])
    assert code == 1
    assert "no scenario file" in stderr


def test_run_flags_verdict_mismatch(capsys, tmp_path):
    scenario = tmp_path / "wrongexpect.yaml"
    scenario.write_text(
        "name: wrongexpect\nseed: 5\nslots: [4]\n"
        "validators:\n  - id: v0\n    policy: Honest\n"
        "expected_verdicts:\n  fraud-0: DefenderLied\n"
    )
    code, _, stderr = run_cli(capsys, ["run", str(scenario), "--out", str(tmp_path / "o.json")])
    assert code == 2
    assert "MISMATCH" in stderr


def test_check_accepts_good_transcript(capsys, tmp_path):
    out = tmp_path / "t.json"
    run_cli(capsys, ["run", "false-challenge", "--out", str(out)])
    code, stdout, _ = run_cli(capsys, ["check", str(out)])
    assert code == 0
    assert "transcript ok" in stdout


def test_check_rejects_flipped_byte(capsys, tmp_path):
    out = tmp_path / "t.json"
    run_cli(capsys, ["run", "false-challenge", "--out", str(out)])
    blob = bytearray(out.read_bytes())
    blob[len(blob) // 2] ^= 0x20
    out.write_bytes(bytes(blob))
    code, _, stderr = run_cli(capsys, ["check", str(out)])
    assert code == 1


def test_check_rejects_semantic_rewrite(capsys, tmp_path):
    out = tmp_path / "t.json"
    run_cli(capsys, ["run", "stall-executor", "--out", str(out)])
    doc = json.loads(out.read_text())
    doc["final"]["stakes"]["executor"] = 10**6
    doc["digest"] = transcript_digest(doc)
    out.write_text(json.dumps(doc))
    code, _, stderr = run_cli(capsys, ["check", str(out)])
    assert code == 1
    assert "FAIL" in stderr


def test_check_missing_file(capsys, tmp_path):
    code, _, stderr = run_cli(capsys, ["check", str(tmp_path / "missing.json")])
    assert code == 1
    assert "error" in stderr


def test_report(capsys, tmp_path):
    out = tmp_path / "t.json"
    run_cli(capsys, ["run", "corrupt-ma", "--out", str(out)])
    code, stdout, _ = run_cli(capsys, ["report", str(out)])
    assert code == 0
    assert "messages:" in stdout
    assert "fraud-0" in stdout


def test_demo_over_own_directory(capsys, tmp_path):
    (tmp_path / "one.yaml").write_text(
        "name: one\nseed: 5\nslots: [4]\n"
        "validators:\n  - id: v0\n    policy: Honest\n"
        "expected_verdicts: {}\n"
    )
    out_dir = tmp_path / "transcripts"
    code, stdout, _ = run_cli(capsys, ["demo", "--dir", str(tmp_path),
                                       "--out-dir", str(out_dir)])
    assert code == 0
    assert "one: verdicts={}" in stdout
    assert (out_dir / "one.transcript.json").exists()


def test_demo_empty_directory(capsys, tmp_path):
    code, _, stderr = run_cli(capsys, ["demo", "--dir", str(tmp_path)])
    assert code == 1
    assert "no scenarios" in stderr


def test_demo_reports_mismatch(capsys, tmp_path):
    (tmp_path / "bad.yaml").write_text(
        "name: bad\nseed: 5\nslots: [4]\n"
        "validators:\n  - id: v0\n    policy: Honest\n"
        "expected_verdicts:\n  fraud-0: DefenderLied\n"
    )
    code, stdout, _ = run_cli(capsys, ["demo", "--dir", str(tmp_path)])
    assert code == 2
    assert "MISMATCH" in stdout
