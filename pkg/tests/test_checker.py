"""
Tests for the property checks in :mod:`fastpaxos.checker`.

Most trace checks are tested on forged traces that contain exactly the
violation a check has to detect.
"""
import pytest

from fastpaxos.checker import (PROPERTIES, check_agreement, check_all,
                               check_durability, check_expectation,
                               check_validity, check_vote_discipline,
                               check_vote_provenance, latency_probe,
                               rule_equivalence_sweep, safety_campaign,
                               sweep_configs)
from fastpaxos.errors import NoDecision
from fastpaxos.quorum import QuorumConfig, RoundType
from fastpaxos.rules import (FREE, Mandated, o4_holds_count, o4_holds_oracle,
                             tally_votes)

import os
import sys
sys.path.append(os.path.dirname(__file__))
from utils.setup import forged_trace, persist, reports, send


def inject(value, proposer="p1"):
    return {"event": "inject", "agent": proposer,
            "msg": {"kind": "propose", "sender": "client",
                    "recipient": proposer, "value": value, "round": None}}


def learn(learner, value, **extra):
    record = {"event": "deliver", "agent": learner, "learned": value, "round": 1}
    record.update(extra)
    return record


def vote(acceptor, round, value, request="phase2a", learners=("l1",)):
    msg = {"kind": request, "sender": "c1", "recipient": acceptor,
           "round": round, "value": value}
    effects = [persist(role="acceptor", promised_round=round,
                       last_vote_round=round, last_vote_value=value)]
    effects += [send("phase2b", acceptor, l, round=round, value=value)
                for l in learners]
    return {"event": "deliver", "agent": acceptor, "msg": msg,
            "effects": effects}

################################################################################
# Trace properties
################################################################################


def test_agreement():
    trace = forged_trace([inject("x"), learn("l1", "x"), learn("l2", "x")])
    assert(check_agreement(trace).passed)

    trace = forged_trace([inject("x"), inject("y", "p2"), learn("l1", "x"),
                          learn("l2", "y")])
    verdict = check_agreement(trace)
    assert(not verdict.passed)
    assert(verdict.position == 3)

    trace = forged_trace([inject("x"), learn("l1", "x", conflict=True)])
    assert(check_agreement(trace).position == 1)


def test_validity():
    assert(check_validity(forged_trace([inject("x"), learn("l1", "x")])).passed)
    verdict = check_validity(forged_trace([inject("x"), learn("l1", "z")]))
    assert(not verdict.passed)
    assert(verdict.position == 1)
    assert(not check_validity(forged_trace([learn("l1", "x"), inject("x")])).passed)


def test_vote_discipline():
    """
    Votes in decreasing rounds and votes below a joined round are detected.
    """
    trace = forged_trace([vote("a1", 1, "x"), vote("a1", 2, "y")])
    assert(check_vote_discipline(trace).passed)

    trace = forged_trace([vote("a1", 2, "x"), vote("a1", 1, "y")])
    verdict = check_vote_discipline(trace)
    assert(not verdict.passed)
    assert(verdict.position == 1)

    trace = forged_trace([vote("a1", 2, "x"), vote("a1", 2, "y")])
    assert(not check_vote_discipline(trace).passed)

    join = {"event": "deliver", "agent": "a1",
            "effects": [persist(role="acceptor", promised_round=3),
                        send("phase1b", "a1", "c1", round=3, voted_round=0,
                             voted_value=None)]}
    trace = forged_trace([join, vote("a1", 2, "x")])
    assert(check_vote_discipline(trace).position == 1)

    trace = forged_trace([join, join])
    assert(check_vote_discipline(trace).position == 1)


def recovery(acceptor, promised_round, last_vote_round, value=None):
    return {"event": "recover", "agent": acceptor,
            "restored": {"role": "acceptor", "promised_round": promised_round,
                         "last_vote_round": last_vote_round,
                         "last_vote_value": value}}


def test_vote_discipline_across_recovery():
    """
    A recovered acceptor keeps the rounds it joined and voted in.
    """
    trace = forged_trace([vote("a1", 2, "x"), recovery("a1", 2, 2, "x"),
                          vote("a1", 3, "y")])
    assert(check_vote_discipline(trace).passed)

    trace = forged_trace([vote("a1", 2, "x"), recovery("a1", 2, 1, "x")])
    verdict = check_vote_discipline(trace)
    assert(not verdict.passed)
    assert(verdict.position == 1)

    join = {"event": "deliver", "agent": "a1",
            "effects": [persist(role="acceptor", promised_round=3),
                        send("phase1b", "a1", "c1", round=3, voted_round=0,
                             voted_value=None)]}
    trace = forged_trace([join, recovery("a1", 0, 0)])
    assert(check_vote_discipline(trace).position == 1)

    coordinator = {"event": "recover", "agent": "c1",
                   "restored": {"role": "coordinator", "current_round": 1}}
    trace = forged_trace([vote("a1", 2, "x"), coordinator])
    assert(check_vote_discipline(trace).passed)


def test_durability():
    trace = forged_trace([vote("a1", 1, "x")])
    assert(check_durability(trace).passed)

    unpersisted = vote("a1", 1, "x")
    unpersisted["effects"] = unpersisted["effects"][1:]
    assert(check_durability(forged_trace([unpersisted])).position == 0)

    reordered = vote("a1", 1, "x")
    reordered["effects"] = reordered["effects"][::-1]
    assert(not check_durability(forged_trace([reordered])).passed)

    restored = {"event": "recover", "agent": "a1",
                "restored": {"role": "acceptor", "promised_round": 0,
                             "last_vote_round": 0, "last_vote_value": None}}
    verdict = check_durability(forged_trace([vote("a1", 1, "x"), restored]))
    assert(verdict.position == 1)

    restored["restored"] = vote("a1", 1, "x")["effects"][0]["state"]
    assert(check_durability(forged_trace([vote("a1", 1, "x"), restored])).passed)


def test_vote_provenance():
    assert(check_vote_provenance(forged_trace([vote("a1", 2, "x")])).passed)

    forged = vote("a1", 2, "x")
    forged["msg"]["value"] = "y"
    assert(check_vote_provenance(forged_trace([forged])).position == 0)

    # Round 2 is classic: acceptors must not follow proposers.
    trace = forged_trace([vote("a1", 2, "x", request="propose")])
    assert(not check_vote_provenance(trace).passed)
    trace = forged_trace([vote("a1", 1, "x", request="propose")], factorized=True)
    assert(check_vote_provenance(trace).passed)

    phase2a = {"event": "deliver", "agent": "c1",
               "effects": [send("phase2a", "c1", "a1", round=2, value="x"),
                           send("phase2a", "c1", "a2", round=2, value="y")]}
    assert(check_vote_provenance(forged_trace([phase2a])).position == 0)


def test_vote_requests_need_any():
    request = {"event": "deliver", "agent": "p1",
               "effects": [send("propose", "p1", "a1", round=3, value="x")]}
    trace = forged_trace([request])
    assert(not check_vote_provenance(trace).passed)

    any_message = {"event": "deliver", "agent": "p1",
                   "msg": {"kind": "any", "sender": "c1", "recipient": "p1",
                           "round": 3}}
    trace = forged_trace([any_message, request])
    assert(check_vote_provenance(trace).passed)


def test_expectation():
    trace = forged_trace([inject("x"), learn("l1", "x")],
                         expect={"decision": True, "latency": 1})
    assert(check_expectation(trace).passed)
    trace = forged_trace([inject("x"), learn("l1", "x")],
                         expect={"decision": True, "latency": 2})
    assert(not check_expectation(trace).passed)
    trace = forged_trace([inject("x")], expect={"decision": True})
    assert(not check_expectation(trace).passed)
    trace = forged_trace([inject("x")], expect={"decision": False})
    assert(check_expectation(trace).passed)


def test_check_all():
    verdicts = check_all(forged_trace([inject("x"), learn("l1", "x")]))
    assert([v.property for v in verdicts] == PROPERTIES)
    assert(all(v.passed for v in verdicts))


def test_latency_probe():
    trace = forged_trace([{"event": "inject", "agent": "p1", "time": 3,
                           "msg": {"kind": "propose", "value": "x"}},
                          learn("l1", "x", time=7)])
    assert(latency_probe(trace) == 4)
    with pytest.raises(NoDecision):
        latency_probe(forged_trace([inject("x")]))

################################################################################
# Rule sweep
################################################################################


def test_sweep_configs():
    assert([(c.max_faults_fast, c.max_faults_classic) for c in sweep_configs(3)]
           == [(0, 0), (0, 1)])
    assert(len(sweep_configs(4)) == 1)


def test_sweep_small():
    verdict = rule_equivalence_sweep(1)
    assert(verdict.passed)
    assert(verdict.cases == 14)


def test_sweep_up_to_four():
    """
    The simplified rule never contradicts the original rule for up to four
    acceptors. It is strictly more restrictive on some report sets.
    """
    verdict = rule_equivalence_sweep(4)
    assert(verdict.passed)
    assert(verdict.cases == 1582)
    assert(verdict.stats["per_n"] == {1: 14, 2: 98, 3: 784, 4: 686})
    assert(verdict.stats["more_restrictive"] > 0)
    assert(verdict.stats["realizable"] < verdict.cases)


def test_sweep_classic_k_without_majority():
    """
    With a classic round k, O4 can hold for a value voted by a minority of
    the quorum. The sweep must accept such report sets.
    """
    config = QuorumConfig(3, 1, 0)
    q = reports(("a1", 0, None), ("a2", 1, "x"))
    universe = ["a1", "a2", "a3"]
    assert(o4_holds_count(q, config, RoundType.CLASSIC, "x"))
    assert(o4_holds_oracle(q, universe, config, RoundType.CLASSIC, "x"))
    assert(2 * tally_votes(q).count("x") <= len(q))

    verdict = rule_equivalence_sweep(3)
    assert(verdict.passed)
    assert(verdict.stats["per_n"] == {1: 14, 2: 98, 3: 784})


@pytest.mark.slow
def test_sweep_up_to_six():
    """
    Exhaustive sweep over all configurations with up to six acceptors.
    """
    verdict = rule_equivalence_sweep(6, workers=4)
    assert(verdict.passed)
    assert(verdict.stats["per_n"] == {1: 14, 2: 98, 3: 784, 4: 686,
                                      5: 5488, 6: 38416})
    assert(verdict.stats["more_restrictive"] > 0)


@pytest.mark.parametrize("n_max", [0, 7])
def test_sweep_range(n_max):
    with pytest.raises(ValueError):
        rule_equivalence_sweep(n_max)


def always_free(reports):
    return FREE


def least_voted(reports):
    tally = tally_votes(reports)
    if not tally.value_counts:
        return FREE
    return Mandated(min(tally.value_counts, key=lambda v: (tally.count(v), v)))


@pytest.mark.parametrize("rule", [always_free, least_voted])
def test_sweep_detects_broken_rules(rule):
    """
    Replacing the simplified rule with a wrong one produces a witness.
    """
    verdict = rule_equivalence_sweep(3, simplified=rule)
    assert(not verdict.passed)
    assert(verdict.witness["reports"])
    assert(verdict.witness["check"])

################################################################################
# Safety campaign
################################################################################


def test_safety_campaign():
    results = []
    verdict = safety_campaign(runs=8, first_seed=100, callback=results.append)
    assert(verdict.passed)
    assert(verdict.cases == 8)
    assert([r.seed for r in results] == list(range(100, 108)))


@pytest.mark.slow
def test_safety_campaign_thousand_runs():
    """
    Agreement, validity and vote discipline hold on 1000 randomized runs.
    """
    verdict = safety_campaign(runs=1000, first_seed=0, workers=4)
    assert(verdict.passed)
    assert(verdict.cases == 1000)
    assert(verdict.stats["decided"] > 0)
