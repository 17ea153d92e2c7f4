"""Transcript files: canonical bytes, embedded digest, offline check.

A transcript is the canonical JSON of {format, scenario, events, final}
plus a digest over exactly those four keys. ``verify`` replays every
recorded contract message through a fresh contract, so the offline
check re-runs each proof verification, signature check, and pairing the
original run performed; any flipped byte either breaks the JSON, the
digest, or the refold.
"""

import hashlib
import json

from .contract import ArbiterContract, ContractMessage

FORMAT = "rollupsim-transcript-v1"

_DIGESTED_KEYS = ("format", "scenario", "events", "final")


class TranscriptError(Exception):
    """The file is not a well-formed transcript."""


def canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def transcript_digest(doc: dict) -> str:
    body = {key: doc[key] for key in _DIGESTED_KEYS}
    return hashlib.sha256(canonical_bytes(body)).hexdigest()


def finalize(doc: dict) -> bytes:
    """Stamp the digest and return the exact file bytes."""
    out = {key: doc[key] for key in _DIGESTED_KEYS}
    out["digest"] = transcript_digest(doc)
    return canonical_bytes(out) + b"\n"


def write_transcript(doc: dict, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(finalize(doc))


def load_transcript(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as err:
        raise TranscriptError(f"cannot read {path}: {err}") from None
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise TranscriptError(f"{path} is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise TranscriptError(f"{path}: top level must be an object")
    missing = [k for k in (*_DIGESTED_KEYS, "digest") if k not in doc]
    if missing:
        raise TranscriptError(f"{path}: missing keys {missing}")
    if doc["format"] != FORMAT:
        raise TranscriptError(f"{path}: unknown format {doc['format']!r}")
    return doc


def verify(doc: dict) -> list[str]:
    """Every discrepancy found, empty meaning the transcript checks out.

    Two layers: the digest covers the bytes, and a full refold of the
    message log through a fresh contract covers the meaning. The refold
    re-executes all replay checks, signature verifications, and opening
    verifications the run claims happened.
    """
    problems: list[str] = []
    if transcript_digest(doc) != doc["digest"]:
        problems.append("digest mismatch: transcript bytes were altered")
        return problems  # content is untrustworthy, stop here

    contract = ArbiterContract()
    for i, ev in enumerate(doc["events"]):
        if ev.get("kind") != "message":
            continue
        try:
            msg = ContractMessage(tick=ev["tick"], seq=ev["seq"], sender=ev["sender"],
                                  op=ev["op"], body=ev["body"])
        except KeyError as err:
            problems.append(f"events[{i}]: missing field {err}")
            return problems
        result = contract.apply(msg)
        if result.accepted != ev["accepted"] or result.error != ev["error"]:
            problems.append(
                f"events[{i}] ({msg.op}): recorded outcome "
                f"({ev['accepted']}, {ev['error']}) but refold gives "
                f"({result.accepted}, {result.error})")
            return problems
        recorded = canonical_bytes(ev["events"])
        refolded = canonical_bytes([dict(e) for e in result.events])
        if recorded != refolded:
            problems.append(f"events[{i}] ({msg.op}): contract events diverge on refold")
            return problems

    final = doc["final"]
    if contract.state_digest() != final["state_digest"]:
        problems.append("final state digest does not match the refolded contract")
    if dict(sorted(contract.stakes.items())) != final["stakes"]:
        problems.append("final stakes do not match the refolded contract")
    verdicts = {}
    for gid, game in {**contract.fraud_games, **contract.audit_games}.items():
        verdicts[gid] = game.verdict if game.verdict is not None else game.phase
    if dict(sorted(verdicts.items())) != final["verdicts"]:
        problems.append("final verdicts do not match the refolded contract")
    if list(contract.voided_slots) != final["voided_slots"]:
        problems.append("voided slots do not match the refolded contract")
    if contract.next_slot != final["next_slot"]:
        problems.append("next_slot does not match the refolded contract")
    return problems


def summarize(doc: dict) -> dict:
    """Cheap statistics for the report command."""
    messages = 0
    message_bytes = 0
    ops: dict[str, int] = {}
    rejected = 0
    responses: dict[str, int] = {}
    oversized = 0
    for ev in doc["events"]:
        if ev.get("kind") != "message":
            continue
        messages += 1
        record = canonical_bytes({"tick": ev["tick"], "seq": ev["seq"], "sender": ev["sender"],
                                  "op": ev["op"], "body": ev["body"]})
        message_bytes += len(record)
        ops[ev["op"]] = ops.get(ev["op"], 0) + 1
        if not ev["accepted"]:
            rejected += 1
        if ev["op"] in ("bisect_respond", "audit_respond") and ev["accepted"]:
            game = ev["body"].get("game", "?")
            responses[game] = responses.get(game, 0) + 1
        if ev["op"] == "submit_data" and ev["accepted"]:
            if len(bytes.fromhex(ev["body"].get("payload", ""))) > 1232:
                oversized += 1
    return {
        "messages": messages,
        "message_bytes": message_bytes,
        "rejected": rejected,
        "ops": dict(sorted(ops.items())),
        "rounds": dict(sorted(responses.items())),
        "oversized_accepts": oversized,
        "verdicts": doc["final"]["verdicts"],
        "stakes": doc["final"]["stakes"],
        "ledger_net": doc["final"].get("ledger_net", {}),
    }
