"""
Tests for the coordinator state machine.
"""
import pytest

from fastpaxos.errors import RoundError
from fastpaxos.protocol.coordinator import (CoordinatorState, Phase,
                                            coordinator_on_phase1b,
                                            coordinator_on_propose,
                                            coordinator_start_round,
                                            recovery_round, takeover_round)
from fastpaxos.protocol.messages import Any, Phase1b, Phase2a, Propose
from fastpaxos.protocol.rounds import RoundScheme

import os
import sys
sys.path.append(os.path.join(os.path.dirname(__file__), ".."))
from utils.setup import context

ACCEPTORS = ("a1", "a2", "a3")


@pytest.fixture
def ctx():
    return context(n=3, policy="max-e", proposers=2)


def _start(ctx, number):
    return coordinator_start_round(CoordinatorState(), ctx.scheme.round_id(number),
                                   ctx.roster.acceptors, "c1")


def _report(ctx, state, sender, round, voted_round=0, voted_value=None):
    msg = Phase1b(sender, "c1", round=round, voted_round=voted_round,
                  voted_value=voted_value)
    return coordinator_on_phase1b(state, msg, ctx.config, ctx.rule, ctx.scheme,
                                  ctx.roster, "c1")


def test_start_round(ctx):
    state, out = _start(ctx, 2)
    assert(state.current_round == 2)
    assert(state.phase is Phase.COLLECTING)
    assert([m.recipient for m in out] == list(ACCEPTORS))
    assert(all(m.round == 2 for m in out))

    with pytest.raises(RoundError):
        coordinator_start_round(state, ctx.scheme.round_id(2), ACCEPTORS, "c1")
    with pytest.raises(RoundError):
        coordinator_start_round(state, ctx.scheme.round_id(4), ACCEPTORS, "c2")


def test_mandated_value(ctx):
    """
    Once a classic quorum reported, the mandated value is sent in Phase 2a.
    """
    state, _ = _start(ctx, 2)
    state, out = _report(ctx, state, "a1", 2, 1, b"x")
    assert(out == [])
    state, out = _report(ctx, state, "a1", 2, 1, b"x")
    assert(out == [] and len(state.reports) == 1)
    state, out = _report(ctx, state, "a2", 2)
    state, out = _report(ctx, state, "a3", 2)
    assert(state.phase is Phase.SENT)
    assert(out == [Phase2a("c1", a, round=2, value=b"x") for a in ACCEPTORS])

    state, out = _report(ctx, state, "a4", 2)
    assert(out == [])


def test_free_fast_round_sends_any(ctx):
    state, _ = _start(ctx, 3)
    for a in ACCEPTORS:
        state, out = _report(ctx, state, a, 3)
    assert(out == [Any("c1", p, round=3) for p in ("p1", "p2")])
    assert(state.phase is Phase.SENT)


def test_free_uses_proposal_pool(ctx):
    state, _ = _start(ctx, 3)
    state, out = coordinator_on_propose(state, Propose("p2", "c1", value=b"y"),
                                        ctx.roster, "c1")
    assert(out == [])
    for a in ACCEPTORS:
        state, out = _report(ctx, state, a, 3)
    assert(out == [Phase2a("c1", a, round=3, value=b"y") for a in ACCEPTORS])


def test_free_classic_round_waits(ctx):
    """
    In a classic round without proposals the coordinator waits for the
    first proposal.
    """
    state, _ = _start(ctx, 2)
    for a in ACCEPTORS:
        state, out = _report(ctx, state, a, 2)
    assert(out == [])
    assert(state.awaiting_proposal)

    state, out = coordinator_on_propose(state, Propose("p1", "c1", value=b"x"),
                                        ctx.roster, "c1")
    assert(state.phase is Phase.SENT)
    assert(out == [Phase2a("c1", a, round=2, value=b"x") for a in ACCEPTORS])


def test_reports_of_other_rounds_ignored(ctx):
    state, _ = _start(ctx, 2)
    state, out = _report(ctx, state, "a1", 1)
    assert(state.reports == ())
    state, _ = _report(ctx, state, "a1", 6)
    assert(state.highest_seen == 6)


def test_recovery_round():
    scheme = RoundScheme(("c1",))
    state = CoordinatorState(current_round=1, highest_seen=3)
    assert(recovery_round(state, scheme, "c1").number == 4)
    assert(takeover_round(state, scheme, "c1").number == 4)
    assert(takeover_round(state, scheme, "c1", after=6).number == 7)

    scheme = RoundScheme(("c1", "c2"))
    assert(recovery_round(CoordinatorState(), scheme, "c1").number == 2)
    # c2 coordinates only odd, fast rounds.
    assert(recovery_round(CoordinatorState(), scheme, "c2").number == 1)


def test_durable_state():
    state = CoordinatorState(current_round=4, proposal_pool=(b"x",),
                             phase=Phase.SENT)
    assert(state.durable() == {"role": "coordinator", "current_round": 4})
    recovered = CoordinatorState.recover(state.durable())
    assert(recovered.current_round == 4)
    assert(recovered.proposal_pool == ())
    assert(recovered.phase is Phase.IDLE)
