"""
Tests for fault injection and scenario validation.
"""
from fractions import Fraction

import pytest

from fastpaxos.checker import check_all
from fastpaxos.errors import InvalidConfigError, ScenarioError
from fastpaxos.simulation import (FaultPlan, Scenario, Simulation,
                                  campaign_scenario)

import os
import sys
sys.path.append(os.path.join(os.path.dirname(__file__), ".."))
from utils.setup import load_scenario


def _passes(trace):
    return all(v.passed for v in check_all(trace)
               if v.property != "expectation")


def test_fault_plan_parsing():
    plan = FaultPlan.from_dict({"drop": 0.25, "duplicate": "1/3",
                                "delay": [1, 3],
                                "links": [{"from": "p1", "to": "a1", "delay": 5}],
                                "script": [{"time": 3, "crash": "a1"}],
                                "seed": 4})
    assert(plan.drop_probability == Fraction(1, 4))
    assert(plan.duplicate_probability == Fraction(1, 3))
    assert(plan.delay_bounds == (1, 3))
    assert(plan.links == {("p1", "a1"): 5})
    assert(plan.agents() == {"p1", "a1"})
    assert(FaultPlan.from_dict(plan.to_dict()) == plan)


@pytest.mark.parametrize("faults", [{"drop": 1.5},
                                    {"duplicate": "often"},
                                    {"delay": [3, 1]},
                                    {"script": [{"time": 1}]},
                                    {"script": [{"time": 1, "position": 2,
                                                 "crash": "a1"}]},
                                    {"script": [{"position": 2}]},
                                    {"script": [{"time": "soon", "crash": "a1"}]},
                                    {"script": [{"position": -1, "drop": True}]},
                                    {"links": [{"from": "p1"}]}])
def test_invalid_fault_plans(faults):
    with pytest.raises(ScenarioError):
        FaultPlan.from_dict(faults)


def test_invalid_scenarios():
    """
    Scenarios are validated before they are run.
    """
    with pytest.raises(ScenarioError):
        Scenario(proposals=[{"time": 0, "proposer": "p7", "value": "x"}]).validate()
    with pytest.raises(ScenarioError):
        Scenario(rounds=[{"time": 0, "coordinator": "c1", "round": 1}],
                 coordinators=2).validate()
    with pytest.raises(ScenarioError):
        Scenario(factorized=True, fast="none").validate()
    with pytest.raises(ScenarioError):
        Scenario(rule="majority").validate()
    with pytest.raises(ScenarioError):
        Scenario(faults=FaultPlan(scripted=[{"time": 1, "crash": "a9"}])).validate()
    with pytest.raises(InvalidConfigError):
        Scenario(n_acceptors=4, policy="2,2").validate()


@pytest.mark.parametrize("rounds, proposals", [
    ([{"time": 0, "coordinator": "c1", "round": 0}], []),
    ([{"time": 0, "coordinator": "c1", "round": -2}], []),
    ([{"time": 0, "coordinator": "c1", "round": "two"}], []),
    ([{"time": 1.5, "coordinator": "c1", "round": 1}], []),
    ([{"time": 0, "coordinator": "c1", "mode": "restart"}], []),
    ([], [{"time": "later", "proposer": "p1", "value": "x"}]),
    ([], [{"time": -1, "proposer": "p1", "value": "x"}]),
])
def test_invalid_directive_fields(rounds, proposals):
    """
    Round numbers start at 1 and times are non-negative integers.
    """
    with pytest.raises(ScenarioError):
        Scenario(rounds=rounds, proposals=proposals).validate()


def test_scenario_round_trip():
    scenario = load_scenario("collision")
    again = Scenario.from_dict(scenario.to_dict())
    assert(again.to_dict() == scenario.to_dict())
    assert(again.config == scenario.config)


def test_positional_drop():
    """
    Dropping the messages sent while handling the proposal prevents any
    decision.
    """
    scenario = load_scenario("fast_happy",
                             faults=FaultPlan(scripted=[{"position": 0,
                                                         "drop": True}]))
    trace = Simulation(scenario).run()
    assert(trace.records[0]["event"] == "inject")
    fates = {e["fate"] for e in trace.records[0]["effects"] if e["op"] == "send"}
    assert(fates == {"lost"})
    assert(trace.learns() == [])


def test_crash_after_persist():
    """
    An agent crashed right after its durable write recovers that state.
    """
    scenario = load_scenario("fast_happy",
                             faults=FaultPlan(scripted=[{"position": 0,
                                                         "crash": True,
                                                         "recover_after": 3}]))
    trace = Simulation(scenario).run()
    first = trace.records[0]
    assert(first["crashed"])
    assert(first["effects"][0]["op"] == "persist")
    recover = [r for r in trace.records if r["event"] == "recover"][0]
    assert(recover["time"] == 3)
    assert(recover["restored"]["value"] == "x")
    assert(_passes(trace))


def test_duplicates_and_delays():
    scenario = load_scenario("classic",
                             faults=FaultPlan(duplicate_probability=1,
                                              delay_bounds=(1, 3),
                                              scripted=[{"time": 2,
                                                         "delay": [1, 1]}]))
    trace = Simulation(scenario).run(seed=3)
    assert(_passes(trace))
    assert(len(trace.learns()) == 1)
    delay = [r for r in trace.records if r["event"] == "delay"]
    assert(delay[0]["delay"] == [1, 1])
    sends = [e for r in trace.records for e in r.get("effects", [])
             if e["op"] == "send"]
    assert(all(len(e["at"]) == 2 for e in sends))


def test_link_delays():
    scenario = load_scenario("collision")
    trace = Simulation(scenario).run()
    first = trace.records[0]
    requests = [e for e in first["effects"]
                if e["op"] == "send" and e["msg"].get("round") == 1]
    assert({e["msg"]["recipient"]: e["at"][0] for e in requests}
           == {"a1": 1, "a2": 1, "a3": 2, "a4": 2})


def test_campaign_scenarios():
    """
    Campaign scenarios are reproducible, valid and safe.
    """
    for seed in range(10):
        scenario = campaign_scenario(seed)
        assert(scenario.to_dict() == campaign_scenario(seed).to_dict())
        scenario.validate()
        assert(3 <= scenario.n_acceptors <= 5)
        assert(scenario.faults.drop_probability <= Fraction(3, 10))
        trace = Simulation(scenario).run()
        assert(_passes(trace))
