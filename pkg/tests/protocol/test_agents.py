"""
Tests for the agent wrappers driven by the simulator.
"""
from fastpaxos.protocol.acceptor import AcceptorState
from fastpaxos.protocol.agents import (AcceptorAgent, CoordinatorAgent,
                                       LearnerAgent, agent_recover, canonical,
                                       create_agent, digest)
from fastpaxos.protocol.learner import LearnerState
from fastpaxos.protocol.messages import Phase2b, Propose

import os
import sys
sys.path.append(os.path.join(os.path.dirname(__file__), ".."))
from utils.setup import context


def test_create_agent():
    ctx = context(n=3, coordinators=2)
    assert(isinstance(create_agent("a2", ctx), AcceptorAgent))
    assert(isinstance(create_agent("c2", ctx), CoordinatorAgent))
    assert(isinstance(create_agent("l1", ctx), LearnerAgent))


def test_canonical_and_digest():
    """
    Canonical forms don't depend on the insertion order of mappings or sets.
    """
    a = LearnerState(vote_tallies={(1, b"x"): frozenset({"a1", "a2"}),
                                   (2, b"y"): frozenset({"a3"})})
    b = LearnerState(vote_tallies={(2, b"y"): frozenset({"a3"}),
                                   (1, b"x"): frozenset({"a2", "a1"})})
    assert(canonical(a) == canonical(b))
    assert(digest(a) == digest(b))
    assert(digest(a) != digest(LearnerState()))
    assert(canonical(AcceptorState(1, 1, b"x").durable())["last_vote_value"] == "x")


def test_agent_recover():
    snapshot = AcceptorState(2, 1, b"x").durable()
    assert(agent_recover(snapshot) == AcceptorState(2, 1, b"x"))


def test_acceptor_ignores_proposer_in_classic_round():
    ctx = context(n=3)
    agent = create_agent("a1", ctx)
    assert(agent.handle(Propose("p1", "a1", value=b"x", round=2)) == [])
    out = agent.handle(Propose("p1", "a1", value=b"x", round=1))
    assert(out == [Phase2b("a1", "l1", round=1, value=b"x")])


def test_coordinator_timeouts():
    """
    Start directives record the started round, or a rejection for rounds the
    coordinator can't start.
    """
    ctx = context(n=3)
    agent = create_agent("c1", ctx)
    out = agent.on_timeout("start", {"round": 2})
    assert(len(out) == 3)
    assert(agent.drain_notes() == [{"started": 2, "type": "classic"}])

    assert(agent.on_timeout("start", {"round": 1}) == [])
    notes = agent.drain_notes()
    assert("rejected" in notes[0])

    agent.on_timeout("start", {"mode": "recover"})
    assert(agent.drain_notes() == [{"started": 4, "type": "classic"}])
    agent.on_timeout("start", {"mode": "takeover"})
    assert(agent.drain_notes() == [{"started": 5, "type": "fast"}])
    assert(agent.on_timeout("other", {}) == [])


def test_learner_notes_conflicts():
    ctx = context(n=3)
    agent = create_agent("l1", ctx)
    for a in ["a1", "a2", "a3"]:
        agent.handle(Phase2b(a, "l1", round=1, value=b"x"))
    assert(agent.drain_notes() == [{"learned": "x", "round": 1}])
    for a in ["a1", "a2", "a3"]:
        agent.handle(Phase2b(a, "l1", round=2, value=b"y"))
    assert(agent.drain_notes() == [{"learned": "y", "round": 2,
                                    "conflict": True}])
