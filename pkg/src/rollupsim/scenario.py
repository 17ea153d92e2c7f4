"""Scenario schema: what a run is, validated up front.

A scenario plus its seed fully determines a run. Loading normalizes
every default so the document embedded in a transcript is identical no
matter how sparse the source file was.
"""

from dataclasses import dataclass, field

import yaml

from .contract import ProtocolParams
from .dac import POLICIES as DAC_POLICIES

EXECUTOR_POLICIES = ("Honest", "CorruptMaAtStep", "WrongRoot", "WrongChain", "StallInGame")
VALIDATOR_POLICIES = ("Honest", "FalseChallenge", "StallAfterMidpoint", "SamplingCheck")
PROVIDER_POLICIES = ("Honest", "LoseBlob")

TX_KINDS = ("transfer", "create", "write", "close", "noop")

RESERVED_IDS = ("executor", "system", "provider")


class InvalidScenario(Exception):
    """The scenario document does not describe a runnable scenario."""


def _need(cond: bool, where: str, what: str) -> None:
    if not cond:
        raise InvalidScenario(f"{where}: {what}")


def _take(doc: dict, where: str, allowed: tuple[str, ...]) -> None:
    unknown = sorted(set(doc) - set(allowed))
    _need(not unknown, where, f"unknown keys {unknown}")


@dataclass(frozen=True)
class ExecutorPolicy:
    kind: str = "Honest"
    slot: int = 0  # 0-based slot number the misbehavior targets
    step: int = 0  # tx index, CorruptMaAtStep only


@dataclass(frozen=True)
class ValidatorSpec:
    id: str
    kind: str = "Honest"
    rate: float = 0.25  # SamplingCheck only
    slot: int = 0  # 0-based target for FalseChallenge / StallAfterMidpoint


@dataclass(frozen=True)
class DacSpec:
    members: int = 0
    policies: tuple[str, ...] = ()
    threshold: int | None = None


@dataclass(frozen=True)
class ProviderSpec:
    kind: str = "Honest"
    index: int = 0  # lost registry index, LoseBlob only


@dataclass(frozen=True)
class AuditSpec:
    opener: str = "auditor"
    count: int = 1
    inflate: bool = False  # opener claims an inflated total


@dataclass(frozen=True)
class SamplingSpec:
    index: int = 0  # registry index to reconstruct


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    delivery_delay: int = 1
    max_ticks: int = 20_000
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    accounts: int = 8
    balance: int = 1_000_000
    stakes: dict = field(default_factory=dict)  # overrides on top of defaults
    executor: ExecutorPolicy = field(default_factory=ExecutorPolicy)
    validators: tuple[ValidatorSpec, ...] = ()
    dac: DacSpec = field(default_factory=DacSpec)
    kzg_degree: int = 63
    slots: tuple = ()  # per slot: int (random transfers) or tuple of tx docs
    provider: ProviderSpec | None = None
    audit: AuditSpec | None = None
    sampling: SamplingSpec | None = None
    expected_verdicts: dict = field(default_factory=dict)
    expect_no_honest_loss: bool = True

    @property
    def dac_enabled(self) -> bool:
        return self.dac.members > 0

    def honest_parties(self) -> list[str]:
        """Staked parties whose policy is honest; the no-loss invariant
        applies to exactly these."""
        parties = []
        if self.executor.kind == "Honest":
            parties.append("executor")
        for v in self.validators:
            if v.kind in ("Honest", "SamplingCheck"):
                parties.append(v.id)
        if self.audit is not None:
            if self.provider is None or self.provider.kind == "Honest":
                parties.append("provider")
            if not self.audit.inflate:
                parties.append(self.audit.opener)
        return parties

    def default_stakes(self) -> dict[str, int]:
        stakes = {"executor": self.protocol.executor_bond}
        for v in self.validators:
            stakes[v.id] = 500
        if self.audit is not None:
            stakes["provider"] = self.protocol.executor_bond
            stakes.setdefault(self.audit.opener, 500)
        stakes.update(self.stakes)
        return stakes

    def to_doc(self) -> dict:
        doc = {
            "name": self.name,
            "seed": self.seed,
            "network": {"delivery_delay": self.delivery_delay, "max_ticks": self.max_ticks},
            "protocol": {
                "challenge_stake": self.protocol.challenge_stake,
                "executor_bond": self.protocol.executor_bond,
                "response_deadline": self.protocol.response_deadline,
                "challenge_window": self.protocol.challenge_window,
            },
            "genesis": {"accounts": self.accounts, "balance": self.balance},
            "stakes": dict(sorted(self.stakes.items())),
            "executor": {"policy": self.executor.kind, "slot": self.executor.slot, "step": self.executor.step},
            "validators": [
                {"id": v.id, "policy": v.kind, "rate": v.rate, "slot": v.slot} for v in self.validators
            ],
            "dac": {
                "members": self.dac.members,
                "policies": list(self.dac.policies),
                "threshold": self.dac.threshold,
            },
            "kzg_degree": self.kzg_degree,
            "slots": [s if isinstance(s, int) else [dict(tx) for tx in s] for s in self.slots],
            "expected_verdicts": dict(sorted(self.expected_verdicts.items())),
            "expect_no_honest_loss": self.expect_no_honest_loss,
        }
        if self.provider is not None:
            doc["provider"] = {"policy": self.provider.kind, "index": self.provider.index}
        if self.audit is not None:
            doc["audit"] = {
                "opener": self.audit.opener,
                "count": self.audit.count,
                "inflate": self.audit.inflate,
            }
        if self.sampling is not None:
            doc["sampling"] = {"index": self.sampling.index}
        return doc


def _parse_tx_doc(tx: dict, where: str) -> dict:
    _need(isinstance(tx, dict), where, "transaction entries must be mappings")
    kind = tx.get("kind")
    _need(kind in TX_KINDS, where, f"kind must be one of {TX_KINDS}, got {kind!r}")
    fields = {
        "transfer": ("kind", "from", "to", "amount"),
        "create": ("kind", "payer", "new", "owner", "balance"),
        "write": ("kind", "payer", "target", "data"),
        "close": ("kind", "payer", "target"),
        "noop": ("kind", "payer"),
    }[kind]
    _take(tx, where, fields)
    for key in fields:
        if key == "kind":
            continue
        _need(key in tx, where, f"missing field {key!r}")
        if key == "data":
            _need(isinstance(tx[key], str), where, "data must be a hex string")
            try:
                bytes.fromhex(tx[key])
            except ValueError:
                raise InvalidScenario(f"{where}: data is not valid hex") from None
        else:
            _need(isinstance(tx[key], int) and tx[key] >= 0, where, f"{key} must be a non-negative integer")
    return dict(tx)


def scenario_from_doc(doc: dict) -> Scenario:
    _need(isinstance(doc, dict), "scenario", "document must be a mapping")
    _take(doc, "scenario", (
        "name", "seed", "network", "protocol", "genesis", "stakes", "executor",
        "validators", "dac", "kzg_degree", "slots", "provider", "audit",
        "sampling", "expected_verdicts", "expect_no_honest_loss",
    ))

    name = doc.get("name")
    _need(isinstance(name, str) and name, "name", "required non-empty string")
    seed = doc.get("seed")
    _need(isinstance(seed, int) and not isinstance(seed, bool), "seed", "required integer")
    _need(0 <= seed < 2**64, "seed", "must fit in 64 bits")

    net = doc.get("network", {})
    _take(net, "network", ("delivery_delay", "max_ticks"))
    delay = net.get("delivery_delay", 1)
    max_ticks = net.get("max_ticks", 20_000)
    _need(isinstance(delay, int) and delay >= 1, "network.delivery_delay", "integer >= 1")
    _need(isinstance(max_ticks, int) and max_ticks >= 100, "network.max_ticks", "integer >= 100")

    proto_doc = doc.get("protocol", {})
    _take(proto_doc, "protocol", ("challenge_stake", "executor_bond", "response_deadline", "challenge_window"))
    try:
        protocol = ProtocolParams(**proto_doc)
    except (TypeError, ValueError) as err:
        raise InvalidScenario(f"protocol: {err}") from None
    # a round trip of notify and reply takes two hops; any tighter
    # deadline times out honest parties
    _need(protocol.response_deadline >= 4 * delay, "protocol.response_deadline",
          f"must be at least 4x the delivery delay ({4 * delay})")

    gen = doc.get("genesis", {})
    _take(gen, "genesis", ("accounts", "balance"))
    accounts = gen.get("accounts", 8)
    balance = gen.get("balance", 1_000_000)
    _need(isinstance(accounts, int) and 2 <= accounts <= 1024, "genesis.accounts", "integer in [2, 1024]")
    _need(isinstance(balance, int) and balance > 0, "genesis.balance", "positive integer")

    slots_doc = doc.get("slots")
    _need(isinstance(slots_doc, list) and slots_doc, "slots", "required non-empty list")
    slots = []
    for i, entry in enumerate(slots_doc):
        if isinstance(entry, int) and not isinstance(entry, bool):
            _need(0 <= entry <= 512, f"slots[{i}]", "tx count in [0, 512]")
            slots.append(entry)
        elif isinstance(entry, list):
            slots.append(tuple(_parse_tx_doc(tx, f"slots[{i}][{j}]") for j, tx in enumerate(entry)))
        else:
            raise InvalidScenario(f"slots[{i}]: must be a tx count or a list of transactions")

    exe_doc = doc.get("executor", {})
    _take(exe_doc, "executor", ("policy", "slot", "step"))
    exe_kind = exe_doc.get("policy", "Honest")
    _need(exe_kind in EXECUTOR_POLICIES, "executor.policy", f"must be one of {EXECUTOR_POLICIES}")
    # slot numbers are 0-based; slot 0 builds on the genesis root
    exe_slot = exe_doc.get("slot", 0)
    if exe_kind != "Honest":
        _need(isinstance(exe_slot, int) and 0 <= exe_slot < len(slots), "executor.slot", "slot number out of range")
    executor = ExecutorPolicy(kind=exe_kind, slot=exe_slot, step=exe_doc.get("step", 0))
    _need(isinstance(executor.step, int) and executor.step >= 0, "executor.step", "non-negative integer")

    val_doc = doc.get("validators")
    _need(isinstance(val_doc, list) and val_doc, "validators", "at least one validator required")
    validators = []
    seen_ids = set(RESERVED_IDS)
    for i, v in enumerate(val_doc):
        where = f"validators[{i}]"
        _need(isinstance(v, dict), where, "must be a mapping")
        _take(v, where, ("id", "policy", "rate", "slot"))
        vid = v.get("id")
        _need(isinstance(vid, str) and vid, where, "id required")
        _need(vid not in seen_ids, where, f"id {vid!r} already taken")
        seen_ids.add(vid)
        kind = v.get("policy", "Honest")
        _need(kind in VALIDATOR_POLICIES, where, f"policy must be one of {VALIDATOR_POLICIES}")
        rate = v.get("rate", 0.25)
        _need(isinstance(rate, (int, float)) and 0 < rate <= 1, where, "rate must be in (0, 1]")
        targeting = kind in ("FalseChallenge", "StallAfterMidpoint")
        slot = v.get("slot", 0)
        if targeting:
            _need(isinstance(slot, int) and 0 <= slot < len(slots), where, "slot number out of range")
        validators.append(ValidatorSpec(id=vid, kind=kind, rate=float(rate), slot=slot))

    dac_doc = doc.get("dac", {})
    _take(dac_doc, "dac", ("members", "policies", "threshold"))
    members = dac_doc.get("members", 0)
    _need(isinstance(members, int) and 0 <= members <= 64, "dac.members", "integer in [0, 64]")
    policies = list(dac_doc.get("policies", []))
    _need(len(policies) <= members, "dac.policies", "more policies than members")
    for i, p in enumerate(policies):
        _need(p in DAC_POLICIES, f"dac.policies[{i}]", f"must be one of {DAC_POLICIES}")
    policies += ["Honest"] * (members - len(policies))
    threshold = dac_doc.get("threshold")
    if threshold is not None:
        _need(isinstance(threshold, int) and 1 <= threshold <= members, "dac.threshold", "integer in [1, members]")
    dac = DacSpec(members=members, policies=tuple(policies), threshold=threshold)

    kzg_degree = doc.get("kzg_degree", 63)
    _need(isinstance(kzg_degree, int) and 1 <= kzg_degree <= 65536, "kzg_degree", "integer in [1, 65536]")

    provider = None
    if "provider" in doc:
        p_doc = doc["provider"]
        _take(p_doc, "provider", ("policy", "index"))
        provider = ProviderSpec(kind=p_doc.get("policy", "Honest"), index=p_doc.get("index", 0))
        _need(provider.kind in PROVIDER_POLICIES, "provider.policy", f"must be one of {PROVIDER_POLICIES}")
        _need(isinstance(provider.index, int) and provider.index >= 0, "provider.index", "non-negative integer")

    audit = None
    if "audit" in doc:
        a_doc = doc["audit"]
        _take(a_doc, "audit", ("opener", "count", "inflate"))
        audit = AuditSpec(
            opener=a_doc.get("opener", "auditor"),
            count=a_doc.get("count", len(slots)),
            inflate=bool(a_doc.get("inflate", False)),
        )
        _need(isinstance(audit.opener, str) and audit.opener, "audit.opener", "non-empty string")
        _need(audit.opener not in seen_ids, "audit.opener", "id already taken")
        _need(members > 0, "audit", "requires dac.members > 0")
        _need(isinstance(audit.count, int) and 1 <= audit.count <= len(slots), "audit.count",
              "must cover between 1 and one-per-slot registered commitments")
        if provider is not None and provider.kind == "LoseBlob":
            _need(provider.index < audit.count, "provider.index", "lost index outside the audited range")

    sampling = None
    if "sampling" in doc:
        s_doc = doc["sampling"]
        _take(s_doc, "sampling", ("index",))
        sampling = SamplingSpec(index=s_doc.get("index", 0))
        _need(members > 0, "sampling", "requires dac.members > 0")
        _need(isinstance(sampling.index, int) and 0 <= sampling.index < len(slots), "sampling.index",
              "registry index out of range")

    stakes = doc.get("stakes", {})
    _need(isinstance(stakes, dict), "stakes", "must be a mapping")
    for party, amount in stakes.items():
        _need(isinstance(party, str) and isinstance(amount, int) and amount >= 0, "stakes",
              f"bad entry {party!r}: {amount!r}")

    expected = doc.get("expected_verdicts", {})
    _need(isinstance(expected, dict), "expected_verdicts", "must be a mapping")
    for game, verdict in expected.items():
        _need(isinstance(game, str) and isinstance(verdict, str), "expected_verdicts", "string to string mapping")

    return Scenario(
        name=name,
        seed=seed,
        delivery_delay=delay,
        max_ticks=max_ticks,
        protocol=protocol,
        accounts=accounts,
        balance=balance,
        stakes=dict(stakes),
        executor=executor,
        validators=tuple(validators),
        dac=dac,
        kzg_degree=kzg_degree,
        slots=tuple(slots),
        provider=provider,
        audit=audit,
        sampling=sampling,
        expected_verdicts=dict(expected),
        expect_no_honest_loss=bool(doc.get("expect_no_honest_loss", True)),
    )


def load_scenario(path: str, seed_override: int | None = None) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as err:
        raise InvalidScenario(f"cannot read {path}: {err}") from None
    except yaml.YAMLError as err:
        # yaml errors carry line and column marks in their str form
        raise InvalidScenario(f"cannot parse {path}: {err}") from None
    if seed_override is not None:
        if not isinstance(doc, dict):
            raise InvalidScenario(f"{path}: document must be a mapping")
        doc = dict(doc)
        doc["seed"] = seed_override
    return scenario_from_doc(doc)
