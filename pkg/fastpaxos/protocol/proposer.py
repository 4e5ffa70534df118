"""
fastpaxos.protocol.proposer
---------------------------

Proposer state machine. A proposer announces its value to the coordinators
and, once it learned that any value may be voted in a fast round, asks the
acceptors directly to vote for it. It sends at most one such request per
round.
"""
from dataclasses import dataclass, replace
from typing import Optional

from fastpaxos.protocol.messages import Propose


@dataclass(frozen=True)
class ProposerState:
    value: Optional[bytes] = None
    any_round: int = 0
    requested_round: int = 0

    role = "proposer"

    def durable(self):
        return {"role": self.role,
                "value": self.value,
                "requested_round": self.requested_round}

    @classmethod
    def recover(cls, snapshot):
        return cls(value=snapshot.get("value"),
                   requested_round=snapshot.get("requested_round", 0))


def _vote_requests(state, round, value, roster, proposer_id):
    if value is None or round <= state.requested_round:
        return state, []
    state = replace(state, requested_round=round)
    return state, [Propose(sender=proposer_id, recipient=a, value=value, round=round)
                   for a in roster.acceptors]


def proposer_on_propose(state, msg, roster, proposer_id):
    """
    Handle a value submitted to the proposer: remember it, forward it to
    every coordinator and, if an any message is pending, request votes for
    it.
    """
    state = replace(state, value=msg.value)
    forwarded = [Propose(sender=proposer_id, recipient=c, value=msg.value)
                 for c in roster.coordinators]
    state, requests = _vote_requests(state, state.any_round, state.value,
                                     roster, proposer_id)
    return state, forwarded + requests


def proposer_on_any(state, msg, own_value, roster, proposer_id):
    """
    Handle an any message for fast round :code:`msg.round` by asking every
    acceptor to vote for :code:`own_value`. Proposers without a value
    only remember the round.
    """
    state = replace(state, any_round=max(state.any_round, msg.round))
    return _vote_requests(state, msg.round, own_value, roster, proposer_id)
