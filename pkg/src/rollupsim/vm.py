"""Deterministic account-based toy VM.

Five transaction kinds over a flat account space. Every transaction
declares the accounts it touches up front; execution is a pure function
of the transaction and the declared inputs, and emits the set of
modified accounts (full post-states). That output is what the hash
chain and the fraud-proof replay bind to, so determinism here is
load-bearing: same (tx, inputs) must serialize and execute identically
everywhere.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass

from .hashing import ACCOUNT, ADDRESS, tagged_hash
from .smt import DEFAULT_LEAF, SmtKey

ADDRESS_SIZE = 32
MAX_ACCOUNT_DATA = 1024
_U64_MAX = 2**64 - 1


class VmError(Exception):
    """Base class for VM protocol violations."""


class UndeclaredAccess(VmError):
    """Inputs do not cover exactly the declared account set.

    This is a malformed execution request, not a failed transaction:
    failed transactions still produce a (empty) modified-account set.
    """


def _check_address(addr: bytes, what: str) -> bytes:
    if not isinstance(addr, bytes) or len(addr) != ADDRESS_SIZE:
        raise ValueError(f"{what} must be {ADDRESS_SIZE} bytes")
    return addr


@dataclass(frozen=True)
class Account:
    address: bytes
    balance: int
    owner: bytes
    data: bytes = b""

    def __post_init__(self) -> None:
        _check_address(self.address, "account address")
        _check_address(self.owner, "account owner")
        if not 0 <= self.balance <= _U64_MAX:
            raise ValueError("balance out of range")
        if len(self.data) > MAX_ACCOUNT_DATA:
            raise ValueError("account data exceeds 1 KiB bound")


def serialize_account(acct: Account) -> bytes:
    """Canonical fixed-layout encoding: address, balance, owner, framed data."""
    return b"".join(
        (
            acct.address,
            acct.balance.to_bytes(8, "big"),
            acct.owner,
            len(acct.data).to_bytes(2, "big"),
            acct.data,
        )
    )


def deserialize_account(blob: bytes) -> Account:
    if len(blob) < 74:
        raise ValueError("truncated account encoding")
    address = blob[0:32]
    balance = int.from_bytes(blob[32:40], "big")
    owner = blob[40:72]
    n = int.from_bytes(blob[72:74], "big")
    if len(blob) != 74 + n:
        raise ValueError("account encoding length mismatch")
    return Account(address=address, balance=balance, owner=owner, data=blob[74:])


def account_digest(acct: Account | None) -> bytes:
    """SMT leaf value for an account; absent accounts map to the default leaf."""
    if acct is None:
        return DEFAULT_LEAF
    return tagged_hash(ACCOUNT, serialize_account(acct))


def smt_key_for_address(address: bytes) -> SmtKey:
    _check_address(address, "address")
    return SmtKey(tagged_hash(ADDRESS, address))


class TxKind(enum.IntEnum):
    TRANSFER = 0
    CREATE_ACCOUNT = 1
    WRITE_DATA = 2
    CLOSE_ACCOUNT = 3
    NOOP = 4


@dataclass(frozen=True)
class Transaction:
    """A declared-access transaction.

    `target`, `amount`, `owner`, and `payload` are kind-specific
    parameters; unused ones stay at their zero defaults so the canonical
    serialization has one fixed layout for every kind. Build instances
    through the kind-specific constructors below, which derive the
    minimal declared read/write sets.
    """

    kind: TxKind
    fee_payer: bytes
    declared_reads: tuple[bytes, ...] = ()
    declared_writes: tuple[bytes, ...] = ()
    amount: int = 0
    target: bytes = b"\x00" * ADDRESS_SIZE
    owner: bytes = b"\x00" * ADDRESS_SIZE
    payload: bytes = b""

    def __post_init__(self) -> None:
        _check_address(self.fee_payer, "fee payer")
        _check_address(self.target, "target")
        _check_address(self.owner, "owner param")
        for addr in self.declared_reads:
            _check_address(addr, "declared read")
        for addr in self.declared_writes:
            _check_address(addr, "declared write")
        if not 0 <= self.amount <= _U64_MAX:
            raise ValueError("amount out of range")
        if len(self.payload) > MAX_ACCOUNT_DATA:
            raise ValueError("payload exceeds account data bound")

    # -- constructors ---------------------------------------------------

    @staticmethod
    def transfer(source: bytes, dest: bytes, amount: int, fee_payer: bytes | None = None) -> "Transaction":
        # source is recoverable as declared_writes[0]; dest doubles as target
        fee_payer = source if fee_payer is None else fee_payer
        return Transaction(
            kind=TxKind.TRANSFER,
            fee_payer=fee_payer,
            declared_writes=(source, dest),
            amount=amount,
            target=dest,
        )

    @staticmethod
    def create_account(fee_payer: bytes, new_address: bytes, owner: bytes, initial_balance: int) -> "Transaction":
        return Transaction(
            kind=TxKind.CREATE_ACCOUNT,
            fee_payer=fee_payer,
            declared_writes=(new_address, fee_payer),
            amount=initial_balance,
            target=new_address,
            owner=owner,
        )

    @staticmethod
    def write_data(fee_payer: bytes, target: bytes, payload: bytes) -> "Transaction":
        return Transaction(
            kind=TxKind.WRITE_DATA,
            fee_payer=fee_payer,
            declared_writes=(target,),
            target=target,
            payload=payload,
        )

    @staticmethod
    def close_account(fee_payer: bytes, target: bytes) -> "Transaction":
        return Transaction(
            kind=TxKind.CLOSE_ACCOUNT,
            fee_payer=fee_payer,
            declared_writes=(target, fee_payer),
            target=target,
        )

    @staticmethod
    def noop(fee_payer: bytes) -> "Transaction":
        return Transaction(kind=TxKind.NOOP, fee_payer=fee_payer)

    # -- accessors ------------------------------------------------------

    @property
    def source(self) -> bytes:
        if self.kind is not TxKind.TRANSFER:
            raise ValueError("source is only defined for transfers")
        return self.declared_writes[0]

    @property
    def tx_id(self) -> bytes:
        return hashlib.sha256(serialize_tx(self)).digest()

    @property
    def size_bytes(self) -> int:
        return len(serialize_tx(self))


def declared_accounts(tx: Transaction) -> list[bytes]:
    """Sorted, deduplicated union of declared reads, writes, and fee payer."""
    return sorted({*tx.declared_reads, *tx.declared_writes, tx.fee_payer})


def serialize_tx(tx: Transaction) -> bytes:
    """Canonical fixed-width big-endian encoding; also the size-accounting unit."""
    parts = [
        bytes([tx.kind]),
        tx.fee_payer,
        len(tx.declared_reads).to_bytes(2, "big"),
        *tx.declared_reads,
        len(tx.declared_writes).to_bytes(2, "big"),
        *tx.declared_writes,
        tx.amount.to_bytes(8, "big"),
        tx.target,
        tx.owner,
        len(tx.payload).to_bytes(2, "big"),
        tx.payload,
    ]
    return b"".join(parts)


def deserialize_tx(blob: bytes) -> Transaction:
    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(blob):
            raise ValueError("truncated transaction encoding")
        piece = blob[off : off + n]
        off += n
        return piece

    off = 0
    kind_byte = take(1)[0]
    try:
        kind = TxKind(kind_byte)
    except ValueError:
        raise ValueError(f"unknown transaction kind {kind_byte}") from None
    fee_payer = take(32)
    n_reads = int.from_bytes(take(2), "big")
    reads = tuple(take(32) for _ in range(n_reads))
    n_writes = int.from_bytes(take(2), "big")
    writes = tuple(take(32) for _ in range(n_writes))
    amount = int.from_bytes(take(8), "big")
    target = take(32)
    owner = take(32)
    n_payload = int.from_bytes(take(2), "big")
    payload = take(n_payload)
    if off != len(blob):
        raise ValueError("trailing bytes after transaction encoding")
    return Transaction(
        kind=kind,
        fee_payer=fee_payer,
        declared_reads=reads,
        declared_writes=writes,
        amount=amount,
        target=target,
        owner=owner,
        payload=payload,
    )


@dataclass(frozen=True)
class ModifiedAccounts:
    """Full post-states of every account a transaction modified.

    Entries are (address, post-state) in ascending address order; a None
    post-state means the account was closed. Failed transactions carry
    an empty entry list.
    """

    entries: tuple[tuple[bytes, Account | None], ...] = ()

    def __post_init__(self) -> None:
        addrs = [addr for addr, _ in self.entries]
        if addrs != sorted(addrs):
            raise ValueError("modified accounts must be in canonical address order")
        if len(set(addrs)) != len(addrs):
            raise ValueError("duplicate address in modified accounts")
        for addr, post in self.entries:
            if post is not None and post.address != addr:
                raise ValueError("post-state address mismatch")

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def addresses(self) -> list[bytes]:
        return [addr for addr, _ in self.entries]


def serialize_ma(ma: ModifiedAccounts) -> bytes:
    parts = [len(ma.entries).to_bytes(2, "big")]
    for addr, post in ma.entries:
        parts.append(addr)
        if post is None:
            parts.append(b"\x00")
        else:
            parts.append(b"\x01")
            parts.append(serialize_account(post))
    return b"".join(parts)


def _ma(changed: dict[bytes, Account | None]) -> ModifiedAccounts:
    return ModifiedAccounts(tuple(sorted(changed.items())))


_EMPTY_MA = ModifiedAccounts()


def execute(tx: Transaction, inputs: dict[bytes, Account | None]) -> ModifiedAccounts:
    """Run one transaction against its declared inputs.

    Raises UndeclaredAccess when the input map does not cover exactly
    the declared account set. Semantic failures (insufficient balance,
    missing account, duplicate creation, oversized data) are not errors:
    they yield an empty modified-account set so the slot hash chain
    stays well-defined for failed transactions.
    """
    declared = declared_accounts(tx)
    if set(inputs.keys()) != set(declared):
        raise UndeclaredAccess("inputs must cover exactly the declared accounts")
    for addr, acct in inputs.items():
        if acct is not None and acct.address != addr:
            raise UndeclaredAccess("input account address mismatch")

    if tx.kind is TxKind.NOOP:
        return _EMPTY_MA

    if tx.kind is TxKind.TRANSFER:
        source, dest = tx.source, tx.target
        src = inputs[source]
        dst = inputs[dest]
        if src is None or dst is None or src.balance < tx.amount:
            return _EMPTY_MA
        if source == dest:
            return _ma({source: src})
        if dst.balance + tx.amount > _U64_MAX:
            return _EMPTY_MA
        new_src = Account(src.address, src.balance - tx.amount, src.owner, src.data)
        new_dst = Account(dst.address, dst.balance + tx.amount, dst.owner, dst.data)
        return _ma({source: new_src, dest: new_dst})

    if tx.kind is TxKind.CREATE_ACCOUNT:
        payer = inputs[tx.fee_payer]
        if inputs[tx.target] is not None:
            return _EMPTY_MA  # duplicate creation
        if tx.target == tx.fee_payer or payer is None or payer.balance < tx.amount:
            return _EMPTY_MA
        created = Account(tx.target, tx.amount, tx.owner, b"")
        new_payer = Account(payer.address, payer.balance - tx.amount, payer.owner, payer.data)
        return _ma({tx.target: created, tx.fee_payer: new_payer})

    if tx.kind is TxKind.WRITE_DATA:
        acct = inputs[tx.target]
        if acct is None:
            return _EMPTY_MA
        return _ma({tx.target: Account(acct.address, acct.balance, acct.owner, tx.payload)})

    if tx.kind is TxKind.CLOSE_ACCOUNT:
        victim = inputs[tx.target]
        payer = inputs[tx.fee_payer]
        if victim is None or payer is None or tx.target == tx.fee_payer:
            return _EMPTY_MA
        refunded = payer.balance + victim.balance
        if refunded > _U64_MAX:
            return _EMPTY_MA
        new_payer = Account(payer.address, refunded, payer.owner, payer.data)
        return _ma({tx.target: None, tx.fee_payer: new_payer})

    raise AssertionError(f"unhandled kind {tx.kind!r}")
