"""Scenario document validation and loading."""

import pytest

from rollupsim.scenario import (
    InvalidScenario,
    Scenario,
    load_scenario,
    scenario_from_doc,
)


def minimal(**over):
    doc = {
        "name": "t",
        "seed": 1,
        "slots": [4],
        "validators": [{"id": "v0", "policy": "Honest"}],
    }
    doc.update(over)
    return doc


def test_minimal_doc_parses():
    sc = scenario_from_doc(minimal())
    assert sc.name == "t"
    assert sc.seed == 1
    assert sc.slots == (4,)
    assert sc.executor.kind == "Honest"
    assert not sc.dac_enabled


def test_defaults():
    sc = scenario_from_doc(minimal())
    assert sc.delivery_delay == 1
    assert sc.protocol.response_deadline == 10
    assert sc.accounts == 8
    assert sc.kzg_degree == 63
    assert sc.expect_no_honest_loss is True


@pytest.mark.parametrize("mutation,fragment", [
    ({"seed": None}, "seed"),
    ({"seed": "abc"}, "seed"),
    ({"seed": 2**64}, "seed"),
    ({"seed": True}, "seed"),
    ({"name": ""}, "name"),
    ({"slots": []}, "slots"),
    ({"slots": [-1]}, "slots[0]"),
    ({"slots": [513]}, "slots[0]"),
    ({"slots": ["x"]}, "slots[0]"),
    ({"validators": []}, "validator"),
    ({"validators": [{"id": "executor"}]}, "already taken"),
    ({"validators": [{"id": "a"}, {"id": "a"}]}, "already taken"),
    ({"validators": [{"id": "v", "policy": "Nope"}]}, "policy"),
    ({"validators": [{"id": "v", "policy": "SamplingCheck", "rate": 0}]}, "rate"),
    ({"validators": [{"id": "v", "policy": "SamplingCheck", "rate": 1.5}]}, "rate"),
    ({"executor": {"policy": "Bogus"}}, "executor.policy"),
    ({"executor": {"policy": "WrongRoot", "slot": 5}}, "executor.slot"),
    ({"executor": {"policy": "CorruptMaAtStep", "step": -1}}, "executor.step"),
    ({"network": {"delivery_delay": 0}}, "delivery_delay"),
    ({"network": {"max_ticks": 5}}, "max_ticks"),
    ({"protocol": {"response_deadline": 2}}, "response_deadline"),
    ({"genesis": {"accounts": 1}}, "accounts"),
    ({"genesis": {"balance": 0}}, "balance"),
    ({"dac": {"members": 65}}, "dac.members"),
    ({"dac": {"members": 2, "policies": ["A", "B", "C"]}}, "policies"),
    ({"dac": {"members": 2, "policies": ["Bad"]}}, "policies[0]"),
    ({"dac": {"members": 2, "threshold": 3}}, "threshold"),
    ({"audit": {"opener": "x"}}, "dac.members"),
    ({"stakes": {"v0": -5}}, "stakes"),
    ({"expected_verdicts": {"g": 3}}, "expected_verdicts"),
    ({"bogus_key": 1}, "bogus_key"),
    ({"executor": {"policy": "Honest", "oops": 1}}, "oops"),
], ids=repr)
def test_rejections(mutation, fragment):
    with pytest.raises(InvalidScenario, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        scenario_from_doc(minimal(**mutation))


def test_audit_requires_dac_and_range():
    base = minimal(slots=[4, 4], dac={"members": 2})
    sc = scenario_from_doc({**base, "audit": {"opener": "aud", "count": 2}})
    assert sc.audit.count == 2
    with pytest.raises(InvalidScenario, match="audit.count"):
        scenario_from_doc({**base, "audit": {"opener": "aud", "count": 3}})
    with pytest.raises(InvalidScenario, match="already taken"):
        scenario_from_doc({**base, "audit": {"opener": "v0"}})


def test_lost_blob_must_be_audited():
    base = minimal(slots=[4, 4], dac={"members": 2},
                   provider={"policy": "LoseBlob", "index": 1})
    scenario_from_doc({**base, "audit": {"opener": "aud", "count": 2}})
    with pytest.raises(InvalidScenario, match="provider.index"):
        scenario_from_doc({**base, "audit": {"opener": "aud", "count": 1}})


def test_sampling_requires_dac():
    with pytest.raises(InvalidScenario, match="sampling"):
        scenario_from_doc(minimal(sampling={"index": 0}))
    sc = scenario_from_doc(minimal(dac={"members": 2}, sampling={"index": 0}))
    assert sc.sampling.index == 0
    with pytest.raises(InvalidScenario, match="sampling.index"):
        scenario_from_doc(minimal(dac={"members": 2}, sampling={"index": 1}))


def test_scripted_txs_validation():
    good = [
        {"kind": "transfer", "from": 0, "to": 1, "amount": 5},
        {"kind": "create", "payer": 0, "new": 9, "owner": 0, "balance": 10},
        {"kind": "write", "payer": 0, "target": 9, "data": "ff00"},
        {"kind": "close", "payer": 0, "target": 9},
        {"kind": "noop", "payer": 1},
    ]
    sc = scenario_from_doc(minimal(slots=[good]))
    assert len(sc.slots[0]) == 5

    with pytest.raises(InvalidScenario, match="kind"):
        scenario_from_doc(minimal(slots=[[{"kind": "steal"}]]))
    with pytest.raises(InvalidScenario, match="missing field"):
        scenario_from_doc(minimal(slots=[[{"kind": "transfer", "from": 0, "to": 1}]]))
    with pytest.raises(InvalidScenario, match="hex"):
        scenario_from_doc(minimal(slots=[[{"kind": "write", "payer": 0, "target": 1, "data": "zz"}]]))
    with pytest.raises(InvalidScenario, match="amount"):
        scenario_from_doc(minimal(slots=[[{"kind": "transfer", "from": 0, "to": 1, "amount": -2}]]))


def test_dac_policy_padding():
    sc = scenario_from_doc(minimal(dac={"members": 4, "policies": ["Withhold"]}))
    assert sc.dac.policies == ("Withhold", "Honest", "Honest", "Honest")


def test_to_doc_round_trip():
    doc = minimal(
        slots=[4, [{"kind": "noop", "payer": 0}]],
        dac={"members": 2},
        executor={"policy": "WrongRoot", "slot": 1},
        sampling={"index": 0},
    )
    sc = scenario_from_doc(doc)
    again = scenario_from_doc(sc.to_doc())
    assert again == sc


def test_load_scenario_and_seed_override(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(
        "name: filetest\nseed: 9\nslots: [3]\n"
        "validators:\n  - id: v0\n    policy: Honest\n"
    )
    sc = load_scenario(str(p))
    assert sc.seed == 9
    sc2 = load_scenario(str(p), seed_override=77)
    assert sc2.seed == 77
    assert sc2.name == sc.name


def test_load_scenario_errors(tmp_path):
    with pytest.raises(InvalidScenario, match="cannot read"):
        load_scenario(str(tmp_path / "missing.yaml"))
    bad = tmp_path / "bad.yaml"
    bad.write_text("нет: [unclosed\n")
    with pytest.raises(InvalidScenario):
        load_scenario(str(bad))
    notmap = tmp_path / "notmap.yaml"
    notmap.write_text("- 1\n- 2\n")
    with pytest.raises(InvalidScenario, match="mapping"):
        load_scenario(str(notmap))


def test_honest_parties_classification():
    sc = scenario_from_doc(minimal(
        slots=[4, 4],
        executor={"policy": "WrongRoot", "slot": 0},
        validators=[
            {"id": "good", "policy": "Honest"},
            {"id": "sampler", "policy": "SamplingCheck", "rate": 0.5},
            {"id": "liar", "policy": "FalseChallenge", "slot": 0},
        ],
        dac={"members": 2},
        audit={"opener": "aud", "count": 1},
    ))
    honest = sc.honest_parties()
    assert "good" in honest and "sampler" in honest
    assert "liar" not in honest
    assert "executor" not in honest  # WrongRoot
    assert "provider" in honest  # default honest provider
    assert "aud" in honest  # not inflating


def test_default_stakes_cover_everyone():
    sc = scenario_from_doc(minimal(
        slots=[4],
        dac={"members": 2},
        audit={"opener": "aud", "count": 1},
        stakes={"v0": 12345},
    ))
    stakes = sc.default_stakes()
    assert stakes["v0"] == 12345  # explicit override wins
    assert stakes["executor"] == sc.protocol.executor_bond
    assert stakes["provider"] == sc.protocol.executor_bond
    assert stakes["aud"] > 0
