"""Command line entry points: run, check, demo, report.

Exit codes: 0 success, 1 file or integrity problems, 2 verdict
expectations not met.
"""

import argparse
import os
import sys
from pathlib import Path

from .engine import run_scenario
from .scenario import InvalidScenario, Scenario, load_scenario
from .transcript import TranscriptError, load_transcript, summarize, verify, write_transcript


def scenario_dir() -> Path:
    override = os.environ.get("ROLLUPSIM_SCENARIO_DIR")
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "scenarios"


def _resolve_scenario_path(name: str) -> Path:
    direct = Path(name)
    if direct.exists():
        return direct
    candidate = scenario_dir() / name
    if candidate.exists():
        return candidate
    if not name.endswith(".yaml"):
        candidate = scenario_dir() / f"{name}.yaml"
        if candidate.exists():
            return candidate
    raise InvalidScenario(f"no scenario file {name!r} (searched . and {scenario_dir()})")


def _check_expectations(scenario: Scenario, doc: dict) -> list[str]:
    problems = []
    got = doc["final"]["verdicts"]
    expected = scenario.expected_verdicts
    if expected and got != expected:
        problems.append(f"verdicts {got} do not match expected {expected}")
    if scenario.expect_no_honest_loss:
        net = doc["final"]["ledger_net"]
        for party in scenario.honest_parties():
            if net.get(party, 0) < 0:
                problems.append(f"honest party {party} ended {net[party]} down")
    return problems


def _cmd_run(args) -> int:
    try:
        path = _resolve_scenario_path(args.scenario)
        scenario = load_scenario(str(path), seed_override=args.seed)
        doc = run_scenario(scenario)
    except InvalidScenario as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    out = args.out or f"{scenario.name}.transcript.json"
    write_transcript(doc, out)
    final = doc["final"]
    print(f"{scenario.name}: seed={scenario.seed} ticks={final['tick']} "
          f"next_slot={final['next_slot']} verdicts={final['verdicts'] or '{}'}")
    print(f"transcript written to {out}")
    problems = _check_expectations(scenario, doc)
    for p in problems:
        print(f"MISMATCH: {p}", file=sys.stderr)
    return 2 if problems else 0


def _cmd_check(args) -> int:
    try:
        doc = load_transcript(args.transcript)
    except TranscriptError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    problems = verify(doc)
    if problems:
        for p in problems:
            print(f"FAIL: {p}", file=sys.stderr)
        return 1
    messages = sum(1 for ev in doc["events"] if ev.get("kind") == "message")
    print(f"transcript ok: digest verified, {messages} messages refold to the same state")
    return 0


def _cmd_demo(args) -> int:
    directory = Path(args.dir) if args.dir else scenario_dir()
    files = sorted(directory.glob("*.yaml"))
    if not files:
        print(f"error: no scenarios in {directory}", file=sys.stderr)
        return 1
    failures = 0
    for path in files:
        try:
            scenario = load_scenario(str(path))
            doc = run_scenario(scenario)
        except InvalidScenario as err:
            print(f"{path.name}: ERROR {err}")
            failures += 1
            continue
        if args.out_dir:
            out_dir = Path(args.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            write_transcript(doc, str(out_dir / f"{scenario.name}.transcript.json"))
        problems = _check_expectations(scenario, doc)
        verdicts = doc["final"]["verdicts"]
        status = "ok" if not problems else "MISMATCH: " + "; ".join(problems)
        print(f"{scenario.name}: verdicts={verdicts or '{}'} {status}")
        failures += bool(problems)
    return 2 if failures else 0


def _cmd_report(args) -> int:
    try:
        doc = load_transcript(args.transcript)
    except TranscriptError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    from .transcript import transcript_digest

    if transcript_digest(doc) != doc["digest"]:
        print("error: digest mismatch, transcript bytes were altered", file=sys.stderr)
        return 1
    stats = summarize(doc)
    name = doc["scenario"]["name"]
    print(f"scenario {name} (seed {doc['scenario']['seed']})")
    print(f"  messages: {stats['messages']} ({stats['message_bytes']} bytes, {stats['rejected']} rejected)")
    for op, count in stats["ops"].items():
        print(f"    {op}: {count}")
    if stats["rounds"]:
        print("  response rounds:")
        for game, count in stats["rounds"].items():
            print(f"    {game}: {count}")
    print(f"  verdicts: {stats['verdicts'] or '{}'}")
    print(f"  final stakes: {stats['stakes']}")
    print(f"  ledger net: {stats['ledger_net'] or '{}'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rollupsim",
        description="Deterministic rollup protocol simulator: fraud proofs, audits, sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write its transcript")
    p_run.add_argument("scenario", help="scenario file, or a name resolved in the scenario directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--out", default=None, help="transcript output path")
    p_run.set_defaults(fn=_cmd_run)

    p_check = sub.add_parser("check", help="re-verify a transcript offline")
    p_check.add_argument("transcript")
    p_check.set_defaults(fn=_cmd_check)

    p_demo = sub.add_parser("demo", help="run the bundled scenario gallery")
    p_demo.add_argument("--dir", default=None, help="scenario directory (default: bundled)")
    p_demo.add_argument("--out-dir", default=None, help="write transcripts here")
    p_demo.set_defaults(fn=_cmd_demo)

    p_report = sub.add_parser("report", help="summarize a transcript")
    p_report.add_argument("transcript")
    p_report.set_defaults(fn=_cmd_report)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
