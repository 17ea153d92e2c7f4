"""Simulated base-layer arbiter contract.

One logical state machine fed by a totally ordered message log: slot
commitment registry, the interactive fraud-proof game with replay
arbitration, DA commitment registration behind a signature threshold,
the storage audit game over homomorphically combined commitments, and
the stake ledger that settles every game to zero.

Every mutation flows through ``apply``; rejected messages leave the
state untouched and are recorded alongside accepted ones, so replaying
the log reproduces the state (and its digest) exactly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .accumulator import CommitmentAccumulator
from .curve import G1Point
from .hashing import NULL_DIGEST
from .kzg import KzgCommitment, OpeningProof, combine_commitments, verification_setup, verify_opening
from .polynomial import SCALAR_MODULUS
from .signing import verify_signature
from .slots import StepCommitment, chain_step
from .smt import MerkleProof, TransitionError, smt_transition, verify_proof
from .vm import (
    UndeclaredAccess,
    account_digest,
    declared_accounts,
    deserialize_account,
    deserialize_tx,
    execute,
    smt_key_for_address,
)

MAX_TX_BYTES = 1232


# -- errors ------------------------------------------------------------


class ContractError(Exception):
    """A rejected message. The state is left exactly as it was."""


class NotBonded(ContractError): ...
class SlotGap(ContractError): ...
class DuplicateSlot(ContractError): ...
class InsufficientStake(ContractError): ...
class NoSuchSlot(ContractError): ...
class WindowClosed(ContractError): ...
class WrongPhase(ContractError): ...
class WrongStep(ContractError): ...
class Timeout(ContractError): ...
class NotExpired(ContractError): ...
class MalformedSubmission(ContractError): ...
class InsufficientSignatures(ContractError): ...
class BadSignature(ContractError): ...
class DuplicateMember(ContractError): ...
class RangeEmpty(ContractError): ...
class LengthMismatch(ContractError): ...
class NoSuchIndex(ContractError): ...
class PayloadTooLarge(ContractError): ...
class NoSuchGame(ContractError): ...


def enforce_size_limit(payload: bytes) -> None:
    """Direct data submissions must fit one base-layer transaction."""
    if len(payload) > MAX_TX_BYTES:
        raise PayloadTooLarge(f"{len(payload)} bytes exceeds the {MAX_TX_BYTES}-byte limit")


# -- protocol parameters and game records ------------------------------


@dataclass(frozen=True)
class ProtocolParams:
    challenge_stake: int = 100
    executor_bond: int = 1000
    response_deadline: int = 10
    challenge_window: int = 100
    max_tx_bytes: int = MAX_TX_BYTES

    def __post_init__(self) -> None:
        if min(self.challenge_stake, self.executor_bond, self.response_deadline, self.challenge_window) <= 0:
            raise ValueError("protocol parameters must be positive")
        if self.max_tx_bytes != MAX_TX_BYTES:
            raise ValueError(f"max_tx_bytes is fixed at {MAX_TX_BYTES}")


DEFENDER_LIED = "DefenderLied"
CHALLENGER_LIED = "ChallengerLied"
OPENER_LIED = "OpenerLied"
PROVIDER_LIED = "ProviderLied"
STORAGE_PROVEN = "StorageProven"

BISECTING = "Bisecting"
AWAITING_REPLAY = "AwaitingReplay"
AWAITING_OPENING = "AwaitingOpening"
RESOLVED = "Resolved"


@dataclass
class FraudGame:
    id: str
    slot: int
    challenger: str
    defender: str
    lo: int
    hi: int
    lo_commit: StepCommitment
    hi_commit: StepCommitment
    phase: str
    deadline: int
    turn: str  # party-id expected to move next
    stake: int
    pending_mid: StepCommitment | None = None
    verdict: str | None = None

    @property
    def mid_step(self) -> int:
        return (self.lo + self.hi) // 2


@dataclass
class AuditGame:
    id: str
    opener: str
    provider: str
    count: int  # entries 1..count of the registry are under audit
    randoms: tuple[int, ...]
    eval_point: int
    lo: int
    hi: int
    lo_sum: KzgCommitment
    hi_sum: KzgCommitment
    hi_claimant: str  # party whose claim hi_sum currently is
    phase: str
    deadline: int
    turn: str
    stake: int
    pending: tuple[int, KzgCommitment] | None = None  # provider's midpoint offer
    consensus_sum: KzgCommitment | None = None
    verdict: str | None = None

    @property
    def mid_index(self) -> int:
        return (self.lo + self.hi) // 2


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    root: bytes
    chain_head: bytes
    tx_count: int
    submitter: str
    recorded_tick: int


@dataclass(frozen=True)
class ContractMessage:
    tick: int
    seq: int
    sender: str
    op: str
    body: dict

    def to_record(self) -> bytes:
        doc = {"tick": self.tick, "seq": self.seq, "sender": self.sender, "op": self.op, "body": self.body}
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def from_record(cls, blob: bytes) -> "ContractMessage":
        doc = json.loads(blob.decode())
        return cls(tick=doc["tick"], seq=doc["seq"], sender=doc["sender"], op=doc["op"], body=doc["body"])


@dataclass(frozen=True)
class ApplyResult:
    accepted: bool
    error: str | None
    events: tuple[dict, ...]


@dataclass(frozen=True)
class LedgerEntry:
    party: str
    delta: int
    reason: str  # ChallengeStake | Slash | Reward | Refund
    game: str


def serialize_log(messages: list[ContractMessage]) -> bytes:
    out = []
    for msg in messages:
        rec = msg.to_record()
        out.append(len(rec).to_bytes(4, "big"))
        out.append(rec)
    return b"".join(out)


def parse_log(blob: bytes) -> list[ContractMessage]:
    msgs = []
    off = 0
    while off < len(blob):
        if off + 4 > len(blob):
            raise ValueError("truncated log record header")
        n = int.from_bytes(blob[off : off + 4], "big")
        off += 4
        if off + n > len(blob):
            raise ValueError("truncated log record")
        msgs.append(ContractMessage.from_record(blob[off : off + n]))
        off += n
    return msgs


# -- the contract ------------------------------------------------------


class ArbiterContract:
    """Deterministic fold over a message log.

    Construct, then feed messages through ``apply`` in log order. The
    first message must be the genesis configuration. ``state_digest``
    commits to every observable field, and feeding the same log to a
    fresh instance reproduces it bit for bit.
    """

    def __init__(self) -> None:
        self.initialized = False
        self.current_tick = 0
        self.params = ProtocolParams()
        self.genesis_root = NULL_DIGEST
        self.next_slot = 0
        self.slots: dict[int, SlotRecord] = {}
        self.voided_slots: list[int] = []
        self.da_registry: list[KzgCommitment] = []
        self.da_signers: list[tuple[str, ...]] = []
        self.commitment_tree = CommitmentAccumulator()
        self.fraud_games: dict[str, FraudGame] = {}
        self.audit_games: dict[str, AuditGame] = {}
        self.stakes: dict[str, int] = {}
        self.stake_ledger: list[LedgerEntry] = []
        self.data_submissions: list[tuple[str, int, str]] = []
        self.dac_members: dict[str, bytes] = {}
        self.dac_threshold = 0
        self.provider = ""
        self._vsetup = None
        self._kzg_degree = 0
        self._kzg_seed = b""
        self._fraud_counter = 0
        self._audit_counter = 0
        self.log: list[tuple[ContractMessage, ApplyResult]] = []

    # -- plumbing ------------------------------------------------------

    def apply(self, msg: ContractMessage) -> ApplyResult:
        if msg.tick < self.current_tick:
            result = ApplyResult(False, "NonMonotonicTick", ())
            self.log.append((msg, result))
            return result
        self.current_tick = msg.tick
        handler = getattr(self, f"_op_{msg.op}", None)
        if handler is None or (msg.op != "genesis" and not self.initialized):
            result = ApplyResult(False, "UnknownOp" if handler is None else "NotInitialized", ())
        else:
            try:
                events = handler(msg)
                result = ApplyResult(True, None, tuple(events))
            except ContractError as err:
                result = ApplyResult(False, type(err).__name__, ())
        self.log.append((msg, result))
        return result

    @classmethod
    def replay(cls, messages: list[ContractMessage]) -> "ArbiterContract":
        contract = cls()
        for msg in messages:
            contract.apply(msg)
        return contract

    def messages(self) -> list[ContractMessage]:
        return [msg for msg, _ in self.log]

    def _credit(self, party: str, delta: int, reason: str, game: str) -> dict:
        balance = self.stakes.get(party, 0) + delta
        assert balance >= 0, "stake ledger went negative"
        self.stakes[party] = balance
        self.stake_ledger.append(LedgerEntry(party, delta, reason, game))
        return {"type": "stake", "party": party, "delta": delta, "reason": reason, "game": game}

    # -- genesis -------------------------------------------------------

    def _op_genesis(self, msg: ContractMessage) -> list[dict]:
        if self.initialized:
            raise ContractError("genesis already applied")
        body = msg.body
        self.params = ProtocolParams(
            challenge_stake=body.get("challenge_stake", 100),
            executor_bond=body.get("executor_bond", 1000),
            response_deadline=body.get("response_deadline", 10),
            challenge_window=body.get("challenge_window", 100),
        )
        self.genesis_root = bytes.fromhex(body["genesis_root"])
        self.stakes = {party: int(bal) for party, bal in body.get("stakes", {}).items()}
        if any(bal < 0 for bal in self.stakes.values()):
            raise ContractError("negative genesis stake")
        members = [(m, bytes.fromhex(vk)) for m, vk in body.get("dac_members", [])]
        if len({m for m, _ in members}) != len(members):
            raise ContractError("duplicate DAC member")
        self.dac_members = dict(members)
        default_threshold = -(-2 * len(members) // 3)  # ceil(2n/3)
        self.dac_threshold = int(body.get("dac_threshold", default_threshold))
        self.provider = body.get("provider", "")
        self._kzg_degree = int(body.get("kzg_degree", 0))
        self._kzg_seed = bytes.fromhex(body.get("kzg_seed", ""))
        if self._kzg_degree > 0:
            self._vsetup = verification_setup(self._kzg_degree, self._kzg_seed)
        self.initialized = True
        return [{"type": "genesis"}]

    # -- slot commitments ----------------------------------------------

    def _op_submit_slot_commitment(self, msg: ContractMessage) -> list[dict]:
        body = msg.body
        slot = int(body["slot"])
        if self.stakes.get(msg.sender, 0) < self.params.executor_bond:
            raise NotBonded(f"{msg.sender} does not hold the executor bond")
        if slot in self.slots:
            raise DuplicateSlot(f"slot {slot} already committed")
        if slot != self.next_slot:
            raise SlotGap(f"expected slot {self.next_slot}, got {slot}")
        record = SlotRecord(
            slot=slot,
            root=bytes.fromhex(body["root"]),
            chain_head=bytes.fromhex(body["chain_head"]),
            tx_count=int(body["tx_count"]),
            submitter=msg.sender,
            recorded_tick=msg.tick,
        )
        self.slots[slot] = record
        self.next_slot = slot + 1
        return [{"type": "slot_committed", "slot": slot, "submitter": msg.sender}]

    def _pre_slot_commit(self, slot: int) -> StepCommitment:
        root = self.genesis_root if slot == 0 else self.slots[slot - 1].root
        return StepCommitment(slot=slot, step=0, root=root, chain=NULL_DIGEST)

    # -- fraud game ----------------------------------------------------

    def _op_open_challenge(self, msg: ContractMessage) -> list[dict]:
        slot = int(msg.body["slot"])
        record = self.slots.get(slot)
        if record is None:
            raise NoSuchSlot(f"no commitment for slot {slot}")
        if msg.tick - record.recorded_tick > self.params.challenge_window:
            raise WindowClosed(f"challenge window for slot {slot} has closed")
        if self.stakes.get(msg.sender, 0) < self.params.challenge_stake:
            raise InsufficientStake(f"{msg.sender} cannot cover the challenge stake")
        for game in self.fraud_games.values():
            if game.phase != RESOLVED and game.slot <= slot:
                raise WrongPhase(f"unresolved dispute on slot {game.slot}")
        if record.tx_count == 0:
            # an empty slot has nothing to bisect or replay; disputes about
            # it are disputes about the previous root, challenged there
            raise WrongPhase("cannot challenge an empty slot")

        game_id = f"fraud-{self._fraud_counter}"
        self._fraud_counter += 1
        stake = self.params.challenge_stake
        events = [self._credit(msg.sender, -stake, "ChallengeStake", game_id)]
        hi_commit = StepCommitment(slot=slot, step=record.tx_count, root=record.root, chain=record.chain_head)
        degenerate = record.tx_count == 1
        game = FraudGame(
            id=game_id,
            slot=slot,
            challenger=msg.sender,
            defender=record.submitter,
            lo=0,
            hi=record.tx_count,
            lo_commit=self._pre_slot_commit(slot),
            hi_commit=hi_commit,
            phase=AWAITING_REPLAY if degenerate else BISECTING,
            deadline=msg.tick + self.params.response_deadline,
            turn=record.submitter,
            stake=stake,
        )
        self.fraud_games[game_id] = game
        events.append({"type": "challenge_opened", "game": game_id, "slot": slot, "phase": game.phase,
                       "challenger": game.challenger, "defender": game.defender})
        return events

    def _fraud_game(self, game_id: str) -> FraudGame:
        game = self.fraud_games.get(game_id)
        if game is None:
            raise NoSuchGame(f"no fraud game {game_id}")
        return game

    def _op_bisect_submit(self, msg: ContractMessage) -> list[dict]:
        game = self._fraud_game(msg.body["game"])
        if game.phase != BISECTING or game.pending_mid is not None:
            raise WrongPhase(f"{game.id} is not awaiting a midpoint")
        if msg.sender != game.defender:
            raise WrongPhase("only the defender submits midpoints")
        if msg.tick > game.deadline:
            raise Timeout("midpoint submitted after the deadline")
        step = int(msg.body["step"])
        if step != game.mid_step:
            raise WrongStep(f"expected step {game.mid_step}, got {step}")
        game.pending_mid = StepCommitment(
            slot=game.slot, step=step, root=bytes.fromhex(msg.body["root"]), chain=bytes.fromhex(msg.body["chain"])
        )
        game.turn = game.challenger
        game.deadline = msg.tick + self.params.response_deadline
        return [{"type": "midpoint_submitted", "game": game.id, "step": step}]

    def _op_bisect_respond(self, msg: ContractMessage) -> list[dict]:
        game = self._fraud_game(msg.body["game"])
        if game.phase != BISECTING or game.pending_mid is None:
            raise WrongPhase(f"{game.id} has no pending midpoint")
        if msg.sender != game.challenger:
            raise WrongPhase("only the challenger responds to midpoints")
        if msg.tick > game.deadline:
            raise Timeout("response after the deadline")
        mid = game.pending_mid
        game.pending_mid = None
        if bool(msg.body["agree"]):
            game.lo, game.lo_commit = mid.step, mid
        else:
            game.hi, game.hi_commit = mid.step, mid
        events = [{"type": "bisect_narrowed", "game": game.id, "lo": game.lo, "hi": game.hi}]
        game.turn = game.defender
        game.deadline = msg.tick + self.params.response_deadline
        if game.hi == game.lo + 1:
            game.phase = AWAITING_REPLAY
            events.append({"type": "awaiting_replay", "game": game.id, "step": game.hi})
        return events

    def _op_replay(self, msg: ContractMessage) -> list[dict]:
        game = self._fraud_game(msg.body["game"])
        if game.phase != AWAITING_REPLAY:
            raise WrongPhase(f"{game.id} is not awaiting a replay")
        if msg.sender != game.defender:
            raise WrongPhase("only the defender submits the replay")
        if msg.tick > game.deadline:
            raise Timeout("replay after the deadline")

        body = msg.body
        try:
            tx = deserialize_tx(bytes.fromhex(body["tx"]))
            inputs: list[tuple[bytes, object]] = []
            for addr_hex, acct_hex in body["inputs"]:
                addr = bytes.fromhex(addr_hex)
                acct = None if acct_hex is None else deserialize_account(bytes.fromhex(acct_hex))
                inputs.append((addr, acct))
            proofs = [MerkleProof.from_bytes(bytes.fromhex(p)) for p in body["proofs"]]
        except (ValueError, KeyError, TypeError) as err:
            raise MalformedSubmission(str(err)) from None
        if len(proofs) != len(inputs):
            raise MalformedSubmission("one proof per input required")

        honest = self._run_replay_checks(game, tx, inputs, proofs)
        verdict = CHALLENGER_LIED if honest else DEFENDER_LIED
        return self._settle_fraud(game, verdict)

    def _run_replay_checks(self, game: FraudGame, tx, inputs, proofs) -> bool:
        lo, hi = game.lo_commit, game.hi_commit
        # (1) each claimed input is bound to the agreed root by its proof
        for (addr, acct), proof in zip(inputs, proofs):
            if proof.key != smt_key_for_address(addr):
                return False
            expected_leaf = None if acct is None else account_digest(acct)
            if proof.value != expected_leaf:
                return False
            if not verify_proof(lo.root, proof):
                return False
        # (2) inputs cover the declared account set exactly
        addrs = [addr for addr, _ in inputs]
        if len(set(addrs)) != len(addrs) or set(addrs) != set(declared_accounts(tx)):
            return False
        # (3) execute
        try:
            ma = execute(tx, dict(inputs))
        except UndeclaredAccess:
            return False
        # (4) the disputed chain value must extend the agreed one
        if chain_step(lo.chain, tx, ma) != hi.chain:
            return False
        # (5) the disputed root must follow from the agreed root plus ma
        writes = [(smt_key_for_address(a), account_digest(p)) for a, p in ma.entries]
        try:
            new_root = smt_transition(lo.root, proofs, writes)
        except (TransitionError, ValueError):
            return False
        return new_root == hi.root

    def _settle_fraud(self, game: FraudGame, verdict: str) -> list[dict]:
        game.phase = RESOLVED
        game.verdict = verdict
        events: list[dict] = [{"type": "verdict", "game": game.id, "verdict": verdict, "slot": game.slot}]
        if verdict == CHALLENGER_LIED:
            events.append(self._credit(game.defender, game.stake, "Reward", game.id))
        else:
            events.append(self._credit(game.challenger, game.stake, "Refund", game.id))
            slashed = min(self.params.executor_bond, self.stakes.get(game.defender, 0))
            if slashed:
                events.append(self._credit(game.defender, -slashed, "Slash", game.id))
                events.append(self._credit(game.challenger, slashed, "Reward", game.id))
            events.extend(self._void_from(game.slot))
        return events

    def _void_from(self, slot: int) -> list[dict]:
        voided = sorted(s for s in self.slots if s >= slot)
        for s in voided:
            del self.slots[s]
            self.voided_slots.append(s)
        self.next_slot = slot
        return [{"type": "slots_voided", "from_slot": slot, "voided": voided}]

    def _op_game_timeout(self, msg: ContractMessage) -> list[dict]:
        game_id = msg.body["game"]
        if game_id in self.fraud_games:
            game = self.fraud_games[game_id]
            if game.phase == RESOLVED:
                raise WrongPhase(f"{game_id} already resolved")
            if msg.tick <= game.deadline:
                raise NotExpired(f"{game_id} deadline not reached")
            verdict = DEFENDER_LIED if game.turn == game.defender else CHALLENGER_LIED
            return self._settle_fraud(game, verdict) + [{"type": "timeout", "game": game_id}]
        if game_id in self.audit_games:
            game = self.audit_games[game_id]
            if game.phase == RESOLVED:
                raise WrongPhase(f"{game_id} already resolved")
            if msg.tick <= game.deadline:
                raise NotExpired(f"{game_id} deadline not reached")
            verdict = PROVIDER_LIED if game.turn == game.provider else OPENER_LIED
            return self._settle_audit(game, verdict) + [{"type": "timeout", "game": game_id}]
        raise NoSuchGame(f"no game {game_id}")

    # -- DA registration -----------------------------------------------

    def _op_register_da_commitment(self, msg: ContractMessage) -> list[dict]:
        body = msg.body
        try:
            cm_bytes = bytes.fromhex(body["cm"])
            cm = KzgCommitment.from_bytes(cm_bytes)
        except ValueError as err:
            raise MalformedSubmission(str(err)) from None
        signatures = [(member, bytes.fromhex(sig)) for member, sig in body["signatures"]]
        seen: set[str] = set()
        for member, sig in signatures:
            if member in seen:
                raise DuplicateMember(f"{member} signed twice")
            seen.add(member)
            key = self.dac_members.get(member)
            if key is None:
                raise BadSignature(f"{member} is not a committee member")
            if not verify_signature(key, cm_bytes, sig):
                raise BadSignature(f"invalid signature from {member}")
        if len(signatures) < self.dac_threshold:
            raise InsufficientSignatures(f"{len(signatures)} of {self.dac_threshold} required signatures")
        index = self.commitment_tree.append(cm_bytes)
        self.da_registry.append(cm)
        self.da_signers.append(tuple(member for member, _ in signatures))
        return [{"type": "da_registered", "index": index, "cm": cm_bytes.hex()}]

    def commitment_membership_proof(self, index: int):
        """Read-only: (commitment bytes, Merkle proof against the registry root)."""
        if not 0 <= index < len(self.da_registry):
            raise NoSuchIndex(f"no commitment at index {index}")
        return self.commitment_tree.get(index), self.commitment_tree.prove(index)

    # -- direct data submissions ---------------------------------------

    def _op_submit_data(self, msg: ContractMessage) -> list[dict]:
        payload = bytes.fromhex(msg.body["payload"])
        enforce_size_limit(payload)
        digest = hashlib.sha256(payload).hexdigest()
        self.data_submissions.append((msg.sender, len(payload), digest))
        return [{"type": "data_accepted", "size": len(payload), "digest": digest}]

    # -- audit game ----------------------------------------------------

    def _op_audit_open(self, msg: ContractMessage) -> list[dict]:
        body = msg.body
        count = int(body["count"])
        if count < 1 or not self.da_registry:
            raise RangeEmpty("audit range must cover at least one registered commitment")
        if count > len(self.da_registry):
            raise RangeEmpty(f"registry holds only {len(self.da_registry)} commitments")
        randoms = tuple(int(r) % SCALAR_MODULUS for r in body["randoms"])
        if len(randoms) != count:
            raise LengthMismatch(f"{len(randoms)} randoms for {count} entries")
        if self.stakes.get(msg.sender, 0) < self.params.challenge_stake:
            raise InsufficientStake(f"{msg.sender} cannot cover the audit stake")
        try:
            claimed_total = KzgCommitment.from_bytes(bytes.fromhex(body["claimed_total"]))
        except ValueError as err:
            raise MalformedSubmission(str(err)) from None
        eval_point = int(body["point"]) % SCALAR_MODULUS

        game_id = f"audit-{self._audit_counter}"
        self._audit_counter += 1
        stake = self.params.challenge_stake
        events = [self._credit(msg.sender, -stake, "ChallengeStake", game_id)]
        game = AuditGame(
            id=game_id,
            opener=msg.sender,
            provider=self.provider,
            count=count,
            randoms=randoms,
            eval_point=eval_point,
            lo=0,
            hi=count,
            lo_sum=KzgCommitment(G1Point.identity()),
            hi_sum=claimed_total,
            hi_claimant=msg.sender,
            phase=BISECTING,
            deadline=msg.tick + self.params.response_deadline,
            turn=self.provider,
            stake=stake,
        )
        self.audit_games[game_id] = game
        events.append({"type": "audit_opened", "game": game_id, "count": count})
        if count == 1:
            # single term: the contract checks the total directly, no
            # bisection and no provider response about the sum
            if self._audit_step_holds(game, game.lo_sum, claimed_total, 0):
                events.extend(self._audit_to_opening(game, claimed_total))
            else:
                events.extend(self._settle_audit(game, OPENER_LIED))
        else:
            game.pending = (count, claimed_total)
        return events

    def _audit_game(self, game_id: str) -> AuditGame:
        game = self.audit_games.get(game_id)
        if game is None:
            raise NoSuchGame(f"no audit game {game_id}")
        return game

    def _audit_step_holds(self, game: AuditGame, lo_sum: KzgCommitment, hi_sum: KzgCommitment, lo_index: int) -> bool:
        """Does CM_{0,lo+1} equal CM_{0,lo} + r_{lo+1}·cm_{lo+1}?"""
        term = combine_commitments([(1, lo_sum), (game.randoms[lo_index], self.da_registry[lo_index])])
        return term.point == hi_sum.point

    def _audit_to_opening(self, game: AuditGame, consensus: KzgCommitment) -> list[dict]:
        game.phase = AWAITING_OPENING
        game.consensus_sum = consensus
        game.turn = game.provider
        game.deadline = self.current_tick + self.params.response_deadline
        return [{"type": "awaiting_opening", "game": game.id, "cm": consensus.to_bytes().hex()}]

    def _op_audit_bisect(self, msg: ContractMessage) -> list[dict]:
        game = self._audit_game(msg.body["game"])
        if game.phase != BISECTING or game.pending is not None:
            raise WrongPhase(f"{game.id} is not awaiting a midpoint sum")
        if msg.sender != game.provider:
            raise WrongPhase("only the provider submits midpoint sums")
        if msg.tick > game.deadline:
            raise Timeout("midpoint sum after the deadline")
        k = int(msg.body["k"])
        if k != game.mid_index:
            raise WrongStep(f"expected prefix index {game.mid_index}, got {k}")
        try:
            mid_sum = KzgCommitment.from_bytes(bytes.fromhex(msg.body["sum"]))
        except ValueError as err:
            raise MalformedSubmission(str(err)) from None
        game.pending = (k, mid_sum)
        game.turn = game.opener
        game.deadline = msg.tick + self.params.response_deadline
        return [{"type": "audit_midpoint", "game": game.id, "k": k}]

    def _op_audit_respond(self, msg: ContractMessage) -> list[dict]:
        game = self._audit_game(msg.body["game"])
        if game.phase != BISECTING or game.pending is None:
            raise WrongPhase(f"{game.id} has no pending sum")
        if msg.sender != game.turn:
            raise WrongPhase(f"it is {game.turn}'s turn to respond")
        if msg.tick > game.deadline:
            raise Timeout("response after the deadline")
        k, offered = game.pending
        game.pending = None
        agree = bool(msg.body["agree"])
        events: list[dict] = []

        if k == game.count and game.lo == 0 and game.hi == game.count:
            # provider's verdict on the opener's claimed total
            if agree:
                return self._audit_to_opening(game, offered)
            game.turn = game.provider
            game.deadline = msg.tick + self.params.response_deadline
            events.append({"type": "audit_disputed", "game": game.id})
            return events

        # opener's verdict on a provider midpoint
        if agree:
            game.lo, game.lo_sum = k, offered
        else:
            game.hi, game.hi_sum = k, offered
            game.hi_claimant = game.provider
        events.append({"type": "audit_narrowed", "game": game.id, "lo": game.lo, "hi": game.hi})
        if game.hi == game.lo + 1:
            # everything needed is on-chain: judge the adjacent step now
            if self._audit_step_holds(game, game.lo_sum, game.hi_sum, game.lo):
                liar = game.opener if game.hi_claimant == game.provider else game.provider
            else:
                liar = game.hi_claimant
            verdict = OPENER_LIED if liar == game.opener else PROVIDER_LIED
            events.extend(self._settle_audit(game, verdict))
        else:
            game.turn = game.provider
            game.deadline = msg.tick + self.params.response_deadline
        return events

    def _op_audit_finalize(self, msg: ContractMessage) -> list[dict]:
        game = self._audit_game(msg.body["game"])
        if game.phase != AWAITING_OPENING:
            raise WrongPhase(f"{game.id} is not awaiting an opening")
        if msg.sender != game.provider:
            raise WrongPhase("only the provider finalizes")
        if msg.tick > game.deadline:
            raise Timeout("opening after the deadline")
        if self._vsetup is None:
            raise ContractError("no verification setup configured")
        try:
            witness = G1Point.from_bytes(bytes.fromhex(msg.body["witness"]))
            value = int(msg.body["value"]) % SCALAR_MODULUS
        except ValueError as err:
            raise MalformedSubmission(str(err)) from None
        proof = OpeningProof(witness=witness, point=game.eval_point, value=value)
        ok = verify_opening(self._vsetup, game.consensus_sum, proof)
        return self._settle_audit(game, STORAGE_PROVEN if ok else PROVIDER_LIED)

    def _settle_audit(self, game: AuditGame, verdict: str) -> list[dict]:
        game.phase = RESOLVED
        game.verdict = verdict
        events: list[dict] = [{"type": "verdict", "game": game.id, "verdict": verdict}]
        if verdict == OPENER_LIED:
            events.append(self._credit(game.provider, game.stake, "Reward", game.id))
        elif verdict == PROVIDER_LIED:
            events.append(self._credit(game.opener, game.stake, "Refund", game.id))
            slashed = min(self.params.executor_bond, self.stakes.get(game.provider, 0))
            if slashed:
                events.append(self._credit(game.provider, -slashed, "Slash", game.id))
                events.append(self._credit(game.opener, slashed, "Reward", game.id))
        else:  # storage proven: routine audit, stake returns home
            events.append(self._credit(game.opener, game.stake, "Refund", game.id))
        return events

    # -- digests -------------------------------------------------------

    def state_digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self._state_doc(), sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest()

    def _state_doc(self) -> dict:
        def step_doc(sc: StepCommitment | None):
            if sc is None:
                return None
            return [sc.slot, sc.step, sc.root.hex(), sc.chain.hex()]

        return {
            "tick": self.current_tick,
            "initialized": self.initialized,
            "params": [
                self.params.challenge_stake,
                self.params.executor_bond,
                self.params.response_deadline,
                self.params.challenge_window,
            ],
            "genesis_root": self.genesis_root.hex(),
            "next_slot": self.next_slot,
            "slots": {
                str(s): [r.root.hex(), r.chain_head.hex(), r.tx_count, r.submitter, r.recorded_tick]
                for s, r in self.slots.items()
            },
            "voided": self.voided_slots,
            "registry": [cm.to_bytes().hex() for cm in self.da_registry],
            "signers": [list(s) for s in self.da_signers],
            "tree_root": self.commitment_tree.root.hex(),
            "stakes": dict(sorted(self.stakes.items())),
            "ledger": [[e.party, e.delta, e.reason, e.game] for e in self.stake_ledger],
            "data": [list(entry) for entry in self.data_submissions],
            "fraud_games": {
                gid: {
                    "slot": g.slot,
                    "challenger": g.challenger,
                    "defender": g.defender,
                    "lo": g.lo,
                    "hi": g.hi,
                    "lo_commit": step_doc(g.lo_commit),
                    "hi_commit": step_doc(g.hi_commit),
                    "pending": step_doc(g.pending_mid),
                    "phase": g.phase,
                    "deadline": g.deadline,
                    "turn": g.turn,
                    "stake": g.stake,
                    "verdict": g.verdict,
                }
                for gid, g in sorted(self.fraud_games.items())
            },
            "audit_games": {
                gid: {
                    "opener": g.opener,
                    "provider": g.provider,
                    "count": g.count,
                    "randoms": list(g.randoms),
                    "point": g.eval_point,
                    "lo": g.lo,
                    "hi": g.hi,
                    "lo_sum": g.lo_sum.to_bytes().hex(),
                    "hi_sum": g.hi_sum.to_bytes().hex(),
                    "hi_claimant": g.hi_claimant,
                    "pending": None if g.pending is None else [g.pending[0], g.pending[1].to_bytes().hex()],
                    "consensus": None if g.consensus_sum is None else g.consensus_sum.to_bytes().hex(),
                    "phase": g.phase,
                    "deadline": g.deadline,
                    "turn": g.turn,
                    "stake": g.stake,
                    "verdict": g.verdict,
                }
                for gid, g in sorted(self.audit_games.items())
            },
        }
