"""Deterministic tick-based scenario engine.

One logical thread, one event heap ordered by (tick, seq), reliable
delivery with a fixed delay, and per-actor RNG substreams derived by
hashing actor-id with the root seed. Nodes react to push notifications
of applied contract messages; the heap draining to empty is the run
ending.
"""

import hashlib
import heapq
import random

from .contract import (
    AWAITING_OPENING,
    AWAITING_REPLAY,
    BISECTING,
    DEFENDER_LIED,
    RESOLVED,
    ApplyResult,
    ArbiterContract,
    ContractMessage,
)
from .curve import G1Point
from .dac import DacError, DacMember, SamplingParty, sample_and_reconstruct
from .kzg import KzgCommitment, combine_commitments, commit, kzg_setup, open_at
from .polynomial import EncodingParams, Polynomial, encode_blob, fr_random
from .scenario import InvalidScenario, ProviderSpec, Scenario
from .slots import (
    NULL_CHAIN,
    RollupState,
    SlotCommitment,
    SlotTrace,
    StepCommitment,
    chain_step,
    execute_slot,
    state_diff,
    step_input_proofs,
)
from .vm import (
    Account,
    ModifiedAccounts,
    Transaction,
    UndeclaredAccess,
    account_digest,
    declared_accounts,
    deserialize_tx,
    execute,
    serialize_account,
    serialize_tx,
    smt_key_for_address,
)


class DaUnavailable(Exception):
    """Requested slot data is not in the availability store."""


def account_address(index: int) -> bytes:
    return hashlib.sha256(b"rollup-account-" + index.to_bytes(8, "big")).digest()


def frame(chunks: list[bytes]) -> bytes:
    return b"".join(len(c).to_bytes(4, "big") + c for c in chunks)


def unframe(blob: bytes) -> list[bytes]:
    out, off = [], 0
    while off < len(blob):
        if off + 4 > len(blob):
            raise ValueError("truncated frame header")
        n = int.from_bytes(blob[off : off + 4], "big")
        off += 4
        if off + n > len(blob):
            raise ValueError("truncated frame")
        out.append(blob[off : off + n])
        off += n
    return out


class DaService:
    """Always-available off-chain data plumbing.

    The threat model has no network adversary, so availability of what
    an executor chose to publish is unconditional; whether the content
    is honest is a different question answered by re-execution.
    """

    def __init__(self) -> None:
        self._slots: dict[int, dict] = {}

    def publish_slot(self, slot: int, doc: dict) -> None:
        self._slots[slot] = doc

    def fetch_slot(self, slot: int) -> dict:
        if slot not in self._slots:
            raise DaUnavailable(f"no published data for slot {slot}")
        return self._slots[slot]


def execute_slot_tampered(state: RollupState, slot: int, txs: list[Transaction], tamper):
    """The corrupt executor's pipeline: same shape as the honest one,
    but each ma passes through ``tamper(j, tx, inputs, ma)`` before it
    touches anything. The resulting trace is internally consistent with
    the corrupted commitment, which is exactly what makes the replay
    phase decisive."""
    tree = state.tree
    accounts = dict(state.accounts)
    steps = [StepCommitment(slot=slot, step=0, root=tree.root, chain=NULL_CHAIN)]
    trees = [tree]
    ma_list, snapshots = [], []
    for j, tx in enumerate(txs, start=1):
        declared = declared_accounts(tx)
        inputs = {a: accounts.get(a) for a in declared}
        snapshots.append(dict(inputs))
        ma = tamper(j - 1, tx, inputs, execute(tx, inputs))
        for addr, post in ma.entries:
            tree = tree.update(smt_key_for_address(addr), account_digest(post))
            if post is None:
                accounts.pop(addr, None)
            else:
                accounts[addr] = post
        steps.append(StepCommitment(slot=slot, step=j, root=tree.root, chain=chain_step(steps[-1].chain, tx, ma)))
        trees.append(tree)
        ma_list.append(ma)
    head = steps[-1]
    commitment = SlotCommitment(slot=slot, root=head.root, chain_head=head.chain, tx_count=len(txs))
    trace = SlotTrace(slot=slot, txs=tuple(txs), steps=tuple(steps), ma_list=tuple(ma_list),
                      input_snapshots=tuple(snapshots), step_trees=tuple(trees))
    return RollupState(tree=tree, accounts=accounts), commitment, trace


def _flip_last_byte(digest: bytes) -> bytes:
    return digest[:-1] + bytes([digest[-1] ^ 0x01])


# -- nodes -------------------------------------------------------------


class Node:
    id = "node"

    def __init__(self, engine: "Engine") -> None:
        self.engine = engine
        self._armed: set[tuple[str, int]] = set()

    def on_contract_event(self, msg: ContractMessage, result: ApplyResult) -> None:
        raise NotImplementedError

    # a party expecting its opponent to move arms a probe for just past
    # the deadline; the probe either finds progress or calls the timeout
    def watch(self, game_id: str) -> None:
        game = self.engine.game(game_id)
        if game is None or game.phase == RESOLVED:
            return
        key = (game_id, game.deadline)
        if key in self._armed:
            return
        self._armed.add(key)
        self.engine.at(game.deadline + 1, lambda d=game.deadline: self._probe(game_id, d))

    def _probe(self, game_id: str, armed_deadline: int) -> None:
        self._armed.discard((game_id, armed_deadline))
        game = self.engine.game(game_id)
        if game is None or game.phase == RESOLVED:
            return
        if self.engine.tick <= game.deadline:
            self.watch(game_id)  # the opponent moved; arm for the new deadline
            return
        if game.turn != self.id:
            self.engine.send(self.id, "game_timeout", {"game": game_id})


class ExecutorNode(Node):
    id = "executor"

    def __init__(self, engine: "Engine") -> None:
        super().__init__(engine)
        self.policy = engine.scenario.executor
        self.state = engine.genesis_state
        self.traces: dict[int, SlotTrace] = {}
        self.commitments: dict[int, SlotCommitment] = {}
        self.next_slot = 0
        self.stopped = False
        self._awaiting_registration = False

    def on_start(self) -> None:
        self._build_next()

    def _build_next(self) -> None:
        engine = self.engine
        if self.stopped or self.next_slot >= len(engine.slot_txs):
            return
        slot = self.next_slot
        txs = engine.slot_txs[slot]
        state, commitment, trace = self._run_policy(slot, txs)
        self.state = state
        self.traces[slot] = trace
        self.commitments[slot] = commitment
        engine.da.publish_slot(slot, {
            "txs": list(trace.txs),
            "ma_list": list(trace.ma_list),
            "snapshots": list(trace.input_snapshots),
            "diff": state_diff(trace),
            "claimed_root": commitment.root,
            "claimed_chain": commitment.chain_head,
        })
        if engine.scenario.dac_enabled:
            self._publish_blob(slot, txs)
            self._awaiting_registration = True
        else:
            self._submit(slot)

    def _run_policy(self, slot: int, txs: list[Transaction]):
        kind = self.policy.kind
        if kind == "Honest" or slot != self.policy.slot or not txs:
            return execute_slot(self.state, slot, txs)
        if kind == "CorruptMaAtStep":
            target = min(self.policy.step, len(txs) - 1)

            def tamper(j, tx, inputs, ma):
                if j != target:
                    return ma
                entries = list(ma.entries)
                if entries:
                    addr, post = entries[0]
                    bad = Account(addr, 1, addr, b"") if post is None else Account(
                        addr, post.balance ^ 1, post.owner, post.data)
                    entries[0] = (addr, bad)
                else:
                    # the tx failed; claim a write it never made
                    payer = inputs[tx.fee_payer]
                    entries = [(tx.fee_payer, Account(payer.address, payer.balance ^ 1, payer.owner, payer.data))]
                return ModifiedAccounts(tuple(entries))

            return execute_slot_tampered(self.state, slot, txs, tamper)
        # WrongRoot, WrongChain, StallInGame: execute honestly, lie in
        # the commitment only
        state, commitment, trace = execute_slot(self.state, slot, txs)
        if kind == "WrongChain":
            commitment = SlotCommitment(slot=slot, root=commitment.root,
                                        chain_head=_flip_last_byte(commitment.chain_head),
                                        tx_count=commitment.tx_count)
        else:  # WrongRoot and StallInGame both misstate the root
            commitment = SlotCommitment(slot=slot, root=_flip_last_byte(commitment.root),
                                        chain_head=commitment.chain_head, tx_count=commitment.tx_count)
        return state, commitment, trace

    def _publish_blob(self, slot: int, txs: list[Transaction]) -> None:
        engine = self.engine
        blob = frame([serialize_tx(tx) for tx in txs])
        poly = encode_blob(blob, engine.enc_params)
        cm = commit(engine.setup, poly)
        signatures = []
        for member in engine.members:
            try:
                signatures.append([member.id, member.receive(blob, cm).hex()])
            except DacError:
                continue  # a refusal to sign just thins the quorum
        index = len(engine.published_blobs)
        engine.published_blobs.append(blob)
        if engine.provider_node is not None:
            engine.provider_node.receive_blob(index, poly)
        engine.note(self.id, "blob_published", {
            "slot": slot, "cm": cm.to_bytes().hex(), "size": len(blob), "signers": len(signatures),
        })
        engine.send(self.id, "register_da_commitment", {"cm": cm.to_bytes().hex(), "signatures": signatures})

    def _submit(self, slot: int) -> None:
        c = self.commitments[slot]
        self.engine.send(self.id, "submit_slot_commitment", {
            "slot": slot, "root": c.root.hex(), "chain_head": c.chain_head.hex(), "tx_count": c.tx_count,
        })

    def on_contract_event(self, msg: ContractMessage, result: ApplyResult) -> None:
        if not result.accepted:
            if msg.sender == self.id and msg.op in ("submit_slot_commitment", "register_da_commitment"):
                self.stopped = True  # bond gone or quorum unreachable
            return
        games = []
        for ev in result.events:
            kind = ev.get("type")
            if kind == "da_registered" and msg.sender == self.id and self._awaiting_registration:
                self._awaiting_registration = False
                self._submit(self.next_slot)
            elif kind == "slot_committed" and ev.get("submitter") == self.id:
                self.next_slot = ev["slot"] + 1
                self.engine.at(self.engine.tick + 1, self._build_next)
            elif "game" in ev and ev["game"] not in games:
                games.append(ev["game"])
        for gid in games:
            self._act(gid)

    def _act(self, game_id: str) -> None:
        engine = self.engine
        game = engine.contract.fraud_games.get(game_id)
        if game is None or game.defender != self.id:
            return
        if game.phase == RESOLVED:
            if game.verdict == DEFENDER_LIED:
                self.stopped = True
            return
        if self.policy.kind == "StallInGame" and game.slot == self.policy.slot:
            return  # silence; the deadline does the judging
        if game.turn != self.id:
            self.watch(game_id)
            return
        trace = self.traces[game.slot]
        if game.phase == BISECTING and game.pending_mid is None:
            sc = trace.steps[game.mid_step]
            engine.send(self.id, "bisect_submit", {
                "game": game_id, "step": sc.step, "root": sc.root.hex(), "chain": sc.chain.hex(),
            })
        elif game.phase == AWAITING_REPLAY:
            self._send_replay(game_id, game.hi, trace)

    def _send_replay(self, game_id: str, step: int, trace: SlotTrace) -> None:
        tx = trace.txs[step - 1]
        snapshot = trace.input_snapshots[step - 1]
        inputs = []
        for addr in declared_accounts(tx):
            acct = snapshot[addr]
            inputs.append([addr.hex(), None if acct is None else serialize_account(acct).hex()])
        proofs = [p.to_bytes().hex() for p in step_input_proofs(trace, step)]
        self.engine.send(self.id, "replay", {
            "game": game_id, "tx": serialize_tx(tx).hex(), "inputs": inputs, "proofs": proofs,
        })


class ValidatorNode(Node):
    def __init__(self, engine: "Engine", spec) -> None:
        super().__init__(engine)
        self.id = spec.id
        self.spec = spec
        self.state = engine.genesis_state
        self.traces: dict[int, SlotTrace] = {}
        self.challenged: set[int] = set()
        self.deferred: set[int] = set()
        self.responses: dict[str, int] = {}
        self._sampling_rng = engine.rng_for(self.id)

    def on_contract_event(self, msg: ContractMessage, result: ApplyResult) -> None:
        if not result.accepted:
            if msg.sender == self.id and msg.op == "open_challenge":
                # lost a race against a challenge in flight; retry once
                # the blocking game settles
                slot = msg.body["slot"]
                self.challenged.discard(slot)
                self.deferred.add(slot)
            return
        games = []
        saw_verdict = False
        for ev in result.events:
            if ev.get("type") == "slot_committed" and ev.get("submitter") != self.id:
                self._verify_slot(ev["slot"])
            elif ev.get("type") == "verdict":
                saw_verdict = True
            if "game" in ev and ev["game"] not in games:
                games.append(ev["game"])
        for gid in games:
            self._act(gid)
        if saw_verdict:
            for slot in sorted(self.deferred):
                if slot not in self.engine.contract.slots:
                    self.deferred.discard(slot)  # voided along with the loser
                else:
                    self._try_challenge(slot)

    def _verify_slot(self, slot: int) -> None:
        engine = self.engine
        record = engine.contract.slots.get(slot)
        if record is None:
            return  # voided before the notification arrived
        data = engine.da.fetch_slot(slot)
        txs = [deserialize_tx(serialize_tx(tx)) for tx in data["txs"]]

        if self.spec.kind == "SamplingCheck" and self._sampled_consistent(record, data):
            self._apply_diff(data["diff"])
            return

        new_state, commitment, trace = execute_slot(self.state, slot, txs)
        self.traces[slot] = trace
        matches = (commitment.root == record.root
                   and commitment.chain_head == record.chain_head
                   and commitment.tx_count == record.tx_count)
        if matches:
            self.state = new_state
        challenge = not matches
        if self.spec.kind in ("FalseChallenge", "StallAfterMidpoint") and slot == self.spec.slot:
            challenge = True
        if challenge:
            self._try_challenge(slot)

    def _try_challenge(self, slot: int) -> None:
        if slot in self.challenged:
            return
        blocked = any(g.phase != RESOLVED and g.slot <= slot
                      for g in self.engine.contract.fraud_games.values())
        if blocked:
            # winning the earlier game voids this slot anyway; keep the
            # stake until that game settles
            self.deferred.add(slot)
            return
        self.deferred.discard(slot)
        self.challenged.add(slot)
        self.engine.send(self.id, "open_challenge", {"slot": slot})

    def _sampled_consistent(self, record, data) -> bool:
        # replay a seeded subset of steps against the published
        # snapshots; also insist the published diff actually yields the
        # committed root, otherwise the publication is self-refuting
        tree = self.state.tree
        for addr, post in data["diff"]:
            tree = tree.update(smt_key_for_address(addr), account_digest(post))
        if tree.root != record.root:
            return False
        for j, tx in enumerate(data["txs"]):
            if self._sampling_rng.random() >= self.spec.rate:
                continue
            try:
                ma = execute(tx, dict(data["snapshots"][j]))
            except UndeclaredAccess:
                return False
            if ma != data["ma_list"][j]:
                return False
        return True

    def _apply_diff(self, diff) -> None:
        tree = self.state.tree
        accounts = dict(self.state.accounts)
        for addr, post in diff:
            tree = tree.update(smt_key_for_address(addr), account_digest(post))
            if post is None:
                accounts.pop(addr, None)
            else:
                accounts[addr] = post
        self.state = RollupState(tree=tree, accounts=accounts)

    def _act(self, game_id: str) -> None:
        engine = self.engine
        game = engine.contract.fraud_games.get(game_id)
        if game is None or game.challenger != self.id or game.phase == RESOLVED:
            return
        stalling = (self.spec.kind == "StallAfterMidpoint"
                    and game.slot == self.spec.slot
                    and self.responses.get(game_id, 0) >= 1)
        if stalling:
            return
        if game.turn != self.id:
            self.watch(game_id)
            return
        if game.phase == BISECTING and game.pending_mid is not None:
            mid = game.pending_mid
            if self.spec.kind == "FalseChallenge" and game.slot == self.spec.slot:
                agree = False  # sustaining the false claim
            else:
                mine = self.traces[game.slot].steps[mid.step]
                agree = mid.root == mine.root and mid.chain == mine.chain
            self.responses[game_id] = self.responses.get(game_id, 0) + 1
            engine.send(self.id, "bisect_respond", {"game": game_id, "agree": agree})


class ProviderNode(Node):
    id = "provider"

    def __init__(self, engine: "Engine", spec) -> None:
        super().__init__(engine)
        self.spec = spec
        self.store: dict[int, Polynomial] = {}

    def receive_blob(self, index: int, poly: Polynomial) -> None:
        if self.spec.kind == "LoseBlob" and index == self.spec.index:
            return  # takes custody, fails to keep it
        self.store[index] = poly

    def on_contract_event(self, msg: ContractMessage, result: ApplyResult) -> None:
        if not result.accepted:
            return
        games = []
        for ev in result.events:
            if "game" in ev and ev["game"] not in games:
                games.append(ev["game"])
        for gid in games:
            self._act(gid)

    def _prefix_sum(self, game, k: int) -> KzgCommitment:
        terms = [(game.randoms[j], self.engine.contract.da_registry[j]) for j in range(k)]
        return combine_commitments(terms)

    def _act(self, game_id: str) -> None:
        engine = self.engine
        game = engine.contract.audit_games.get(game_id)
        if game is None or game.provider != self.id or game.phase == RESOLVED:
            return
        if game.turn != self.id:
            self.watch(game_id)
            return
        if game.phase == BISECTING:
            if game.pending is not None:
                # the opener's claimed total awaits a verdict; registry
                # commitments are public, so the honest total is too
                _, offered = game.pending
                honest = self._prefix_sum(game, game.count)
                engine.send(self.id, "audit_respond", {"game": game_id, "agree": offered == honest})
            else:
                k = game.mid_index
                engine.send(self.id, "audit_bisect", {
                    "game": game_id, "k": k, "sum": self._prefix_sum(game, k).to_bytes().hex(),
                })
        elif game.phase == AWAITING_OPENING:
            combined = Polynomial.zero()
            for j in range(game.count):
                poly = self.store.get(j)
                if poly is not None:
                    combined = combined + poly.scale(game.randoms[j])
            proof = open_at(engine.setup, combined, game.eval_point)
            engine.send(self.id, "audit_finalize", {
                "game": game_id, "witness": proof.witness.to_bytes().hex(), "value": proof.value,
            })


class OpenerNode(Node):
    def __init__(self, engine: "Engine", spec) -> None:
        super().__init__(engine)
        self.id = spec.opener
        self.spec = spec
        self.registered = 0
        self.opened = False
        self.randoms: list[int] = []

    def on_contract_event(self, msg: ContractMessage, result: ApplyResult) -> None:
        if not result.accepted:
            return
        games = []
        for ev in result.events:
            if ev.get("type") == "da_registered":
                self.registered += 1
                if self.registered >= self.spec.count and not self.opened:
                    self.opened = True
                    self.engine.at(self.engine.tick + 1, self._open)
            elif "game" in ev and ev["game"] not in games:
                games.append(ev["game"])
        for gid in games:
            self._act(gid)

    def _prefix_sum(self, k: int) -> KzgCommitment:
        terms = [(self.randoms[j], self.engine.contract.da_registry[j]) for j in range(k)]
        return combine_commitments(terms)

    def _open(self) -> None:
        engine = self.engine
        rng = engine.rng_for(self.id)
        count = self.spec.count
        self.randoms = [fr_random(rng) for _ in range(count)]
        point = fr_random(rng)
        total = self._prefix_sum(count)
        if self.spec.inflate:
            total = combine_commitments([(1, total), (1, KzgCommitment(G1Point.generator()))])
        engine.send(self.id, "audit_open", {
            "count": count, "randoms": self.randoms, "point": point,
            "claimed_total": total.to_bytes().hex(),
        })

    def _act(self, game_id: str) -> None:
        engine = self.engine
        game = engine.contract.audit_games.get(game_id)
        if game is None or game.opener != self.id or game.phase == RESOLVED:
            return
        if game.turn != self.id:
            self.watch(game_id)
            return
        if game.phase == BISECTING and game.pending is not None:
            k, offered = game.pending
            if self.spec.inflate:
                agree = True  # the lie lives in the total alone
            else:
                agree = offered == self._prefix_sum(k)
            engine.send(self.id, "audit_respond", {"game": game_id, "agree": agree})


# -- the engine --------------------------------------------------------


class Engine:
    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.contract = ArbiterContract()
        self.da = DaService()
        self.tick = 0
        self._seq = 0
        self._msg_seq = 0
        self._heap: list = []
        self.events: list[dict] = []
        self.published_blobs: list[bytes] = []
        self._sampling_done = False

        self.genesis_accounts = [
            Account(account_address(i), scenario.balance, account_address(i), b"")
            for i in range(scenario.accounts)
        ]
        self.genesis_state = RollupState.genesis(self.genesis_accounts)
        self.slot_txs = [self._build_slot_txs(i, script) for i, script in enumerate(scenario.slots)]

        self.enc_params = EncodingParams(degree_bound=scenario.kzg_degree)
        self.setup = None
        self.members: list[DacMember] = []
        if scenario.dac_enabled:
            self._ceremony_seed = hashlib.sha256(
                b"scenario-ceremony-" + scenario.seed.to_bytes(8, "big")).digest()[:16]
            self.setup = kzg_setup(scenario.kzg_degree, self._ceremony_seed)
            for i in range(scenario.dac.members):
                member_id = f"member-{i}"
                key_seed = hashlib.sha256(b"dac-key-" + member_id.encode()
                                          + scenario.seed.to_bytes(8, "big")).digest()
                self.members.append(DacMember(member_id, key_seed, self.setup, self.enc_params,
                                              policy=scenario.dac.policies[i]))
            for slot, txs in enumerate(self.slot_txs):
                blob_len = len(frame([serialize_tx(tx) for tx in txs]))
                if blob_len > self.enc_params.capacity:
                    raise InvalidScenario(
                        f"slot {slot} serializes to {blob_len} bytes, over the "
                        f"{self.enc_params.capacity}-byte blob capacity at degree {scenario.kzg_degree}")

        self.executor = ExecutorNode(self)
        self.validators = [ValidatorNode(self, spec) for spec in scenario.validators]
        self.provider_node = None
        self.opener_node = None
        if scenario.audit is not None:
            self.provider_node = ProviderNode(self, scenario.provider or ProviderSpec())
            self.opener_node = OpenerNode(self, scenario.audit)
        self.nodes: list[Node] = [self.executor, *self.validators]
        if self.provider_node is not None:
            self.nodes.append(self.provider_node)
        if self.opener_node is not None:
            self.nodes.append(self.opener_node)

    # -- plumbing ------------------------------------------------------

    def rng_for(self, actor_id: str) -> random.Random:
        digest = hashlib.sha256(actor_id.encode() + self.scenario.seed.to_bytes(8, "big")).digest()
        return random.Random(int.from_bytes(digest, "big"))

    def at(self, tick: int, fn) -> None:
        heapq.heappush(self._heap, (tick, self._seq, fn))
        self._seq += 1

    def send(self, sender: str, op: str, body: dict) -> None:
        self.at(self.tick + self.scenario.delivery_delay, lambda: self._deliver(sender, op, body))

    def note(self, actor: str, label: str, data: dict) -> None:
        self.events.append({"kind": "note", "tick": self.tick, "actor": actor, "label": label, "data": data})

    def game(self, game_id: str):
        return self.contract.fraud_games.get(game_id) or self.contract.audit_games.get(game_id)

    def _deliver(self, sender: str, op: str, body: dict) -> None:
        msg = ContractMessage(tick=self.tick, seq=self._msg_seq, sender=sender, op=op, body=body)
        self._msg_seq += 1
        result = self.contract.apply(msg)
        self.events.append({
            "kind": "message", "tick": msg.tick, "seq": msg.seq, "sender": sender, "op": op,
            "body": body, "accepted": result.accepted, "error": result.error,
            "events": [dict(ev) for ev in result.events],
        })
        for node in self.nodes:
            self.at(self.tick + self.scenario.delivery_delay,
                    lambda node=node: node.on_contract_event(msg, result))
        self._check_sampling_trigger()

    def _check_sampling_trigger(self) -> None:
        spec = self.scenario.sampling
        if spec is None or self._sampling_done:
            return
        if len(self.contract.da_registry) == len(self.scenario.slots) \
                and len(self.contract.slots) == len(self.scenario.slots):
            self._sampling_done = True
            self.at(self.tick + 1, self._run_sampling)

    def _run_sampling(self) -> None:
        spec = self.scenario.sampling
        parties = [SamplingParty(f"party-{i}", self.rng_for(f"party-{i}")) for i in range(16)]
        cm = KzgCommitment.from_bytes(self.contract.commitment_tree.get(spec.index))
        try:
            blob = sample_and_reconstruct(parties, self.members, cm, spec.index,
                                          self.contract.commitment_tree, self.setup, self.enc_params)
        except DacError as err:
            self.note("sampler", "sampling_reconstruction", {
                "index": spec.index, "ok": False, "error": type(err).__name__,
            })
            return
        self.note("sampler", "sampling_reconstruction", {
            "index": spec.index, "ok": True,
            "byte_equal": blob == self.published_blobs[spec.index],
            "blob_sha256": hashlib.sha256(blob).hexdigest(),
        })

    # -- scenario material ---------------------------------------------

    def _build_slot_txs(self, slot: int, script) -> list[Transaction]:
        if isinstance(script, int):
            rng = self.rng_for(f"slot-{slot}")
            txs = []
            for _ in range(script):
                src, dst = rng.sample(range(self.scenario.accounts), 2)
                txs.append(Transaction.transfer(account_address(src), account_address(dst),
                                                rng.randrange(1, 100)))
            return txs
        return [self._resolve_tx(doc) for doc in script]

    @staticmethod
    def _resolve_tx(doc: dict) -> Transaction:
        kind = doc["kind"]
        if kind == "transfer":
            return Transaction.transfer(account_address(doc["from"]), account_address(doc["to"]), doc["amount"])
        if kind == "create":
            return Transaction.create_account(account_address(doc["payer"]), account_address(doc["new"]),
                                              account_address(doc["owner"]), doc["balance"])
        if kind == "write":
            return Transaction.write_data(account_address(doc["payer"]), account_address(doc["target"]),
                                          bytes.fromhex(doc["data"]))
        if kind == "close":
            return Transaction.close_account(account_address(doc["payer"]), account_address(doc["target"]))
        return Transaction.noop(account_address(doc["payer"]))

    def _genesis_body(self) -> dict:
        s = self.scenario
        body = {
            "challenge_stake": s.protocol.challenge_stake,
            "executor_bond": s.protocol.executor_bond,
            "response_deadline": s.protocol.response_deadline,
            "challenge_window": s.protocol.challenge_window,
            "genesis_root": self.genesis_state.root.hex(),
            "stakes": dict(sorted(s.default_stakes().items())),
            "dac_members": [[m.id, m.verify_key.hex()] for m in self.members],
            "provider": "provider" if s.audit is not None else "",
            "kzg_degree": s.kzg_degree if s.dac_enabled else 0,
            "kzg_seed": self._ceremony_seed.hex() if s.dac_enabled else "",
        }
        if s.dac.threshold is not None:
            body["dac_threshold"] = s.dac.threshold
        return body

    # -- the run -------------------------------------------------------

    def run(self) -> dict:
        self.at(0, lambda: self._deliver("system", "genesis", self._genesis_body()))
        self.at(1, self.executor.on_start)
        while self._heap:
            tick, _, fn = heapq.heappop(self._heap)
            if tick > self.scenario.max_ticks:
                raise InvalidScenario(
                    f"scenario did not quiesce within {self.scenario.max_ticks} ticks")
            self.tick = tick
            fn()
        return self._transcript_doc()

    def _transcript_doc(self) -> dict:
        contract = self.contract
        verdicts = {}
        for gid, game in {**contract.fraud_games, **contract.audit_games}.items():
            verdicts[gid] = game.verdict if game.verdict is not None else game.phase
        net: dict[str, int] = {}
        for entry in contract.stake_ledger:
            net[entry.party] = net.get(entry.party, 0) + entry.delta
        return {
            "format": "rollupsim-transcript-v1",
            "scenario": self.scenario.to_doc(),
            "events": self.events,
            "final": {
                "tick": self.tick,
                "state_digest": contract.state_digest(),
                "stakes": dict(sorted(contract.stakes.items())),
                "ledger_net": dict(sorted(net.items())),
                "verdicts": dict(sorted(verdicts.items())),
                "voided_slots": list(contract.voided_slots),
                "next_slot": contract.next_slot,
            },
        }


def run_scenario(scenario: Scenario) -> dict:
    """One seeded deterministic run, returned as a transcript document
    ready for canonical serialization."""
    return Engine(scenario).run()
