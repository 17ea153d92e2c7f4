"""Toy VM unit tests.

The transfer example is hand-computed; digests are cross-checked with a
raw hashlib oracle so the implementation's own helpers never vouch for
themselves.
"""

import hashlib
import random

import pytest

from rollupsim.hashing import NULL_DIGEST
from rollupsim.smt import DEFAULT_LEAF
from rollupsim.vm import (
    Account,
    ModifiedAccounts,
    Transaction,
    TxKind,
    UndeclaredAccess,
    account_digest,
    declared_accounts,
    deserialize_account,
    deserialize_tx,
    execute,
    serialize_account,
    serialize_ma,
    serialize_tx,
    smt_key_for_address,
)


def addr(i: int) -> bytes:
    return i.to_bytes(32, "big")


OWNER = addr(0xAA)


def acct(i: int, balance: int, data: bytes = b"") -> Account:
    return Account(address=addr(i), balance=balance, owner=OWNER, data=data)


def inputs_for(tx: Transaction, store: dict) -> dict:
    return {a: store.get(a) for a in declared_accounts(tx)}


# -- accounts and digests ----------------------------------------------


def test_account_validation():
    with pytest.raises(ValueError):
        Account(address=b"\x01" * 31, balance=0, owner=OWNER)
    with pytest.raises(ValueError):
        acct(1, -1)
    with pytest.raises(ValueError):
        acct(1, 2**64)
    with pytest.raises(ValueError):
        acct(1, 0, data=b"x" * 1025)
    acct(1, 0, data=b"x" * 1024)  # at the bound: fine


def test_account_serialization_roundtrip():
    a = acct(7, 12345, data=b"hello world")
    assert deserialize_account(serialize_account(a)) == a
    with pytest.raises(ValueError):
        deserialize_account(serialize_account(a) + b"\x00")


def test_account_digest_oracle():
    a = acct(3, 1000, data=b"\x01\x02")
    expected_payload = (
        addr(3) + (1000).to_bytes(8, "big") + OWNER + (2).to_bytes(2, "big") + b"\x01\x02"
    )
    expected = hashlib.sha256(b"\x03" + expected_payload).digest()
    assert account_digest(a) == expected


def test_absent_account_digest_is_default_leaf():
    assert account_digest(None) == DEFAULT_LEAF == NULL_DIGEST


def test_digest_sensitivity():
    base = acct(3, 1000, data=b"xy")
    variants = [
        acct(4, 1000, data=b"xy"),
        acct(3, 1001, data=b"xy"),
        acct(3, 1000, data=b"xz"),
        Account(addr(3), 1000, addr(0xBB), b"xy"),
    ]
    digests = {account_digest(v) for v in variants}
    assert account_digest(base) not in digests
    assert len(digests) == 4


def test_smt_key_is_hashed_address():
    k = smt_key_for_address(addr(9))
    assert k.to_bytes() == hashlib.sha256(b"\x04" + addr(9)).digest()


# -- declared accounts -------------------------------------------------


def test_declared_accounts_noop():
    tx = Transaction.noop(addr(5))
    assert declared_accounts(tx) == [addr(5)]


def test_declared_accounts_transfer_includes_fee_payer():
    tx = Transaction.transfer(addr(2), addr(1), 10, fee_payer=addr(3))
    assert declared_accounts(tx) == [addr(1), addr(2), addr(3)]


def test_declared_accounts_deduplicates():
    tx = Transaction.transfer(addr(2), addr(1), 10)  # fee payer defaults to source
    assert declared_accounts(tx) == [addr(1), addr(2)]


# -- execution ---------------------------------------------------------


def test_transfer_hand_computed():
    store = {addr(1): acct(1, 100), addr(2): acct(2, 40)}
    tx = Transaction.transfer(addr(1), addr(2), 10)
    ma = execute(tx, inputs_for(tx, store))
    assert ma.entries == (
        (addr(1), acct(1, 90)),
        (addr(2), acct(2, 50)),
    )


def test_transfer_insufficient_balance_fails_empty():
    store = {addr(1): acct(1, 5), addr(2): acct(2, 0)}
    tx = Transaction.transfer(addr(1), addr(2), 10)
    assert execute(tx, inputs_for(tx, store)).is_empty


def test_transfer_to_missing_account_fails_empty():
    store = {addr(1): acct(1, 50)}
    tx = Transaction.transfer(addr(1), addr(2), 10)
    assert execute(tx, inputs_for(tx, store)).is_empty


def test_transfer_overflow_fails_empty():
    store = {addr(1): acct(1, 10), addr(2): acct(2, 2**64 - 5)}
    tx = Transaction.transfer(addr(1), addr(2), 10)
    assert execute(tx, inputs_for(tx, store)).is_empty


def test_self_transfer_is_identity():
    store = {addr(1): acct(1, 50)}
    tx = Transaction.transfer(addr(1), addr(1), 20)
    ma = execute(tx, inputs_for(tx, store))
    assert ma.entries == ((addr(1), acct(1, 50)),)


def test_noop_empty_ma():
    tx = Transaction.noop(addr(1))
    assert execute(tx, {addr(1): acct(1, 1)}).is_empty
    assert execute(tx, {addr(1): None}).is_empty


def test_create_account():
    store = {addr(1): acct(1, 100)}
    tx = Transaction.create_account(addr(1), addr(9), OWNER, 30)
    ma = execute(tx, inputs_for(tx, store))
    assert ma.entries == (
        (addr(1), acct(1, 70)),
        (addr(9), Account(addr(9), 30, OWNER, b"")),
    )


def test_create_duplicate_fails_empty():
    store = {addr(1): acct(1, 100), addr(9): acct(9, 1)}
    tx = Transaction.create_account(addr(1), addr(9), OWNER, 30)
    assert execute(tx, inputs_for(tx, store)).is_empty


def test_create_underfunded_fails_empty():
    store = {addr(1): acct(1, 10)}
    tx = Transaction.create_account(addr(1), addr(9), OWNER, 30)
    assert execute(tx, inputs_for(tx, store)).is_empty


def test_write_data_replaces():
    store = {addr(4): acct(4, 7, data=b"old")}
    tx = Transaction.write_data(addr(4), addr(4), b"new bytes")
    ma = execute(tx, inputs_for(tx, store))
    assert ma.entries == ((addr(4), acct(4, 7, data=b"new bytes")),)


def test_write_data_missing_target_fails_empty():
    tx = Transaction.write_data(addr(4), addr(5), b"x")
    assert execute(tx, inputs_for(tx, {addr(4): acct(4, 1)})).is_empty


def test_close_account_refunds_fee_payer():
    store = {addr(1): acct(1, 100), addr(6): acct(6, 25, data=b"junk")}
    tx = Transaction.close_account(addr(1), addr(6))
    ma = execute(tx, inputs_for(tx, store))
    assert ma.entries == (
        (addr(1), acct(1, 125)),
        (addr(6), None),
    )


def test_close_self_fails_empty():
    store = {addr(1): acct(1, 100)}
    tx = Transaction.close_account(addr(1), addr(1))
    assert execute(tx, inputs_for(tx, store)).is_empty


def test_undeclared_access_is_not_a_failed_tx():
    tx = Transaction.transfer(addr(1), addr(2), 10)
    with pytest.raises(UndeclaredAccess):
        execute(tx, {addr(1): acct(1, 100)})  # missing addr(2)
    with pytest.raises(UndeclaredAccess):
        execute(tx, {addr(1): acct(1, 100), addr(2): None, addr(3): None})  # extra
    with pytest.raises(UndeclaredAccess):
        execute(tx, {addr(1): acct(2, 100), addr(2): None})  # address mismatch


def test_ma_subset_of_declared_writes():
    cases = [
        (Transaction.transfer(addr(1), addr(2), 5), {addr(1): acct(1, 9), addr(2): acct(2, 0)}),
        (Transaction.create_account(addr(1), addr(3), OWNER, 4), {addr(1): acct(1, 9), addr(3): None}),
        (Transaction.close_account(addr(1), addr(2)), {addr(1): acct(1, 9), addr(2): acct(2, 3)}),
        (Transaction.write_data(addr(2), addr(2), b"d"), {addr(2): acct(2, 3)}),
    ]
    for tx, ins in cases:
        ma = execute(tx, ins)
        assert set(ma.addresses()) <= set(tx.declared_writes)


def _random_tx(rng: random.Random, store: dict) -> Transaction:
    live = sorted(store)
    kind = rng.choice(list(TxKind))
    if kind is TxKind.TRANSFER and len(live) >= 2:
        a, b = rng.sample(live, 2)
        return Transaction.transfer(a, b, rng.randrange(0, 200))
    if kind is TxKind.CREATE_ACCOUNT and live:
        return Transaction.create_account(rng.choice(live), addr(rng.randrange(1000, 2000)), OWNER, rng.randrange(0, 120))
    if kind is TxKind.WRITE_DATA and live:
        t = rng.choice(live)
        return Transaction.write_data(t, t, rng.randbytes(rng.randrange(0, 64)))
    if kind is TxKind.CLOSE_ACCOUNT and len(live) >= 2:
        a, b = rng.sample(live, 2)
        return Transaction.close_account(a, b)
    return Transaction.noop(rng.choice(live) if live else addr(1))


def test_conservation_over_random_transactions():
    rng = random.Random(1234)
    store = {addr(i): acct(i, rng.randrange(0, 500)) for i in range(1, 9)}
    for _ in range(300):
        tx = _random_tx(rng, store)
        ins = inputs_for(tx, store)
        before = sum(a.balance for a in ins.values() if a is not None)
        ma = execute(tx, ins)
        touched = {a: v for a, v in ins.items()}
        for a, post in ma.entries:
            touched[a] = post
        after = sum(a.balance for a in touched.values() if a is not None)
        assert after == before
        for a, post in ma.entries:
            if post is None:
                store.pop(a, None)
            else:
                store[a] = post


def test_execute_determinism():
    rng = random.Random(77)
    store = {addr(i): acct(i, 100 + i) for i in range(1, 5)}
    for _ in range(50):
        tx = _random_tx(rng, store)
        ins = inputs_for(tx, store)
        assert execute(tx, ins) == execute(tx, dict(reversed(list(ins.items()))))


# -- serialization -----------------------------------------------------


def test_tx_serialization_roundtrip():
    txs = [
        Transaction.transfer(addr(1), addr(2), 10, fee_payer=addr(3)),
        Transaction.create_account(addr(1), addr(9), OWNER, 30),
        Transaction.write_data(addr(4), addr(4), b"payload bytes"),
        Transaction.close_account(addr(1), addr(6)),
        Transaction.noop(addr(5)),
    ]
    for tx in txs:
        blob = serialize_tx(tx)
        assert deserialize_tx(blob) == tx
        assert tx.size_bytes == len(blob)


def test_tx_serialization_rejects_malformed():
    blob = serialize_tx(Transaction.noop(addr(5)))
    with pytest.raises(ValueError):
        deserialize_tx(blob[:-1])
    with pytest.raises(ValueError):
        deserialize_tx(blob + b"\x00")
    with pytest.raises(ValueError):
        deserialize_tx(b"\xff" + blob[1:])


def test_transfer_size_is_small():
    # one transfer with distinct source/dest/payer stays far below the
    # 1232-byte direct submission cap
    tx = Transaction.transfer(addr(1), addr(2), 10, fee_payer=addr(3))
    assert tx.size_bytes == 175


def test_tx_id_changes_with_content():
    a = Transaction.transfer(addr(1), addr(2), 10)
    b = Transaction.transfer(addr(1), addr(2), 11)
    assert a.tx_id != b.tx_id
    assert a.tx_id == Transaction.transfer(addr(1), addr(2), 10).tx_id


def test_ma_serialization_distinguishes_closed_from_zeroed():
    closed = ModifiedAccounts(((addr(1), None),))
    zeroed = ModifiedAccounts(((addr(1), acct(1, 0)),))
    assert serialize_ma(closed) != serialize_ma(zeroed)
    assert serialize_ma(ModifiedAccounts()) == b"\x00\x00"


def test_ma_ordering_enforced():
    with pytest.raises(ValueError):
        ModifiedAccounts(((addr(2), None), (addr(1), None)))
    with pytest.raises(ValueError):
        ModifiedAccounts(((addr(1), None), (addr(1), None)))
    with pytest.raises(ValueError):
        ModifiedAccounts(((addr(1), acct(2, 0)),))
