"""Slot execution pipeline.

Runs a slot's transactions in order against the account state, keeps
the sparse Merkle tree in lockstep, and threads the per-step hash chain
whose head lands in the slot commitment. The trace it emits carries
enough evidence (per-step input snapshots plus tree handles) to serve a
fraud-proof replay for any step without re-deriving history.
"""

from __future__ import annotations

from dataclasses import dataclass

from .hashing import NULL_DIGEST, TX_CHAIN, tagged_hash
from .smt import MerkleProof, SparseMerkleTree
from .vm import (
    Account,
    ModifiedAccounts,
    Transaction,
    account_digest,
    declared_accounts,
    execute,
    serialize_ma,
    serialize_tx,
    smt_key_for_address,
)

# chain value before any transaction in a slot has been hashed in
NULL_CHAIN = NULL_DIGEST


def chain_step(prev: bytes, tx: Transaction, ma: ModifiedAccounts) -> bytes:
    """Next hash-chain value: hash of tx and ma serializations plus prev.

    Both serializations are self-delimiting (fixed-width fields with
    length-framed variable parts), so the concatenation parses
    unambiguously and the chain commits to the pair, not just the bytes.
    """
    return tagged_hash(TX_CHAIN, serialize_tx(tx) + serialize_ma(ma) + prev)


@dataclass(frozen=True)
class StepCommitment:
    slot: int
    step: int
    root: bytes
    chain: bytes


@dataclass(frozen=True)
class SlotCommitment:
    slot: int
    root: bytes
    chain_head: bytes
    tx_count: int


@dataclass(frozen=True)
class SlotTrace:
    """Execution evidence for one slot.

    steps has length tx_count + 1 (step 0 is the pre-slot state).
    input_snapshots[j] holds the declared pre-states of transaction j,
    and step_trees[j] is the (persistent, cheaply shared) tree as of
    step j, from which input proofs for a replay of step j+1 are drawn.
    """

    slot: int
    txs: tuple[Transaction, ...]
    steps: tuple[StepCommitment, ...]
    ma_list: tuple[ModifiedAccounts, ...]
    input_snapshots: tuple[dict[bytes, Account | None], ...]
    step_trees: tuple[SparseMerkleTree, ...]

    def __post_init__(self) -> None:
        t = len(self.txs)
        if not (len(self.steps) == t + 1 == len(self.step_trees)):
            raise ValueError("trace length mismatch")
        if len(self.ma_list) != t or len(self.input_snapshots) != t:
            raise ValueError("trace length mismatch")


@dataclass(frozen=True)
class RollupState:
    """The executor's full view: account store plus its Merkle tree.

    The tree commits to digests only, so replaying and proving need the
    concrete accounts alongside it. Instances are immutable; execution
    returns a new state sharing unchanged tree nodes.
    """

    tree: SparseMerkleTree
    accounts: dict[bytes, Account]

    @staticmethod
    def genesis(accounts: list[Account]) -> "RollupState":
        store = {a.address: a for a in accounts}
        if len(store) != len(accounts):
            raise ValueError("duplicate genesis address")
        items = {smt_key_for_address(a.address): account_digest(a) for a in accounts}
        return RollupState(tree=SparseMerkleTree.from_items(items), accounts=store)

    @property
    def root(self) -> bytes:
        return self.tree.root


def execute_slot(
    state: RollupState, slot: int, txs: list[Transaction]
) -> tuple[RollupState, SlotCommitment, SlotTrace]:
    """Execute a slot and emit its commitment and evidence trace.

    UndeclaredAccess from the VM propagates: inputs are assembled from
    the declared sets here, so it firing means an execution-node bug,
    not bad transaction data.
    """
    tree = state.tree
    accounts = dict(state.accounts)
    steps = [StepCommitment(slot=slot, step=0, root=tree.root, chain=NULL_CHAIN)]
    trees = [tree]
    ma_list: list[ModifiedAccounts] = []
    snapshots: list[dict[bytes, Account | None]] = []

    for j, tx in enumerate(txs, start=1):
        declared = declared_accounts(tx)
        inputs = {a: accounts.get(a) for a in declared}
        snapshots.append(dict(inputs))
        ma = execute(tx, inputs)
        for addr, post in ma.entries:
            key = smt_key_for_address(addr)
            tree = tree.update(key, account_digest(post))
            if post is None:
                accounts.pop(addr, None)
            else:
                accounts[addr] = post
        steps.append(
            StepCommitment(slot=slot, step=j, root=tree.root, chain=chain_step(steps[-1].chain, tx, ma))
        )
        trees.append(tree)
        ma_list.append(ma)

    head = steps[-1]
    commitment = SlotCommitment(slot=slot, root=head.root, chain_head=head.chain, tx_count=len(txs))
    trace = SlotTrace(
        slot=slot,
        txs=tuple(txs),
        steps=tuple(steps),
        ma_list=tuple(ma_list),
        input_snapshots=tuple(snapshots),
        step_trees=tuple(trees),
    )
    return RollupState(tree=tree, accounts=accounts), commitment, trace


def state_diff(trace: SlotTrace) -> list[tuple[bytes, Account | None]]:
    """Net per-address effect of the slot, last write wins, sorted."""
    net: dict[bytes, Account | None] = {}
    for ma in trace.ma_list:
        for addr, post in ma.entries:
            net[addr] = post
    return sorted(net.items())


def step_input_proofs(trace: SlotTrace, step: int) -> list[MerkleProof]:
    """Merkle proofs of transaction ``step``'s declared inputs against
    the step-(step−1) root, in declared-account order."""
    if not 1 <= step <= len(trace.txs):
        raise ValueError("step out of range")
    tree = trace.step_trees[step - 1]
    return [smt_proof_for(tree, addr) for addr in declared_accounts(trace.txs[step - 1])]


def smt_proof_for(tree: SparseMerkleTree, address: bytes) -> MerkleProof:
    return tree.prove(smt_key_for_address(address))
