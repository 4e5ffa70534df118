"""
fastpaxos.protocol.acceptor
---------------------------

Acceptor state machine. An acceptor joins rounds it is invited to unless it
already joined a higher one (Phase 1b) and casts at most one vote per round,
never in a round below one it has voted in or joined (Phase 2b).
"""
from dataclasses import dataclass, replace
from typing import Optional

from fastpaxos.protocol.messages import Phase1b, Phase2b
from fastpaxos.protocol.rounds import RoundId


@dataclass(frozen=True)
class AcceptorState:
    promised_round: int = 0
    last_vote_round: int = 0
    last_vote_value: Optional[bytes] = None

    role = "acceptor"

    def durable(self):
        return {"role": self.role,
                "promised_round": self.promised_round,
                "last_vote_round": self.last_vote_round,
                "last_vote_value": self.last_vote_value}

    @classmethod
    def recover(cls, snapshot):
        return cls(snapshot.get("promised_round", 0),
                   snapshot.get("last_vote_round", 0),
                   snapshot.get("last_vote_value"))


def acceptor_on_phase1a(state, msg):
    """
    Handle an invitation to join round :code:`msg.round`.

    Returns:

        The tuple :code:`(state, messages)`. The acceptor answers with its last
        vote if the round is higher than any round it joined before and
        ignores the invitation otherwise.
    """
    if msg.round <= state.promised_round:
        return state, []
    state = replace(state, promised_round=msg.round)
    reply = Phase1b(sender=msg.recipient,
                    recipient=msg.sender,
                    round=msg.round,
                    voted_round=state.last_vote_round,
                    voted_value=state.last_vote_value)
    return state, [reply]


def acceptor_on_vote_request(state, round, value, learners, acceptor_id):
    """
    Handle a request to vote for :code:`value` in :code:`round`, sent either
    by the coordinator (Phase 2a) or, in a fast round, by a proposer.

    Arguments:

        state(:class:`AcceptorState`): The current state.
        round: The round, a :class:`RoundId` or a round number.
        value: The value to vote for.
        learners: Identifiers of the learners that receive the vote.
        acceptor_id: Identifier of the acceptor itself.

    Returns:

        The tuple :code:`(state, messages)` with one Phase 2b message per
        learner if the vote is cast.
    """
    number = round.number if isinstance(round, RoundId) else round
    if value is None:
        return state, []
    if number < state.promised_round or state.last_vote_round >= number:
        return state, []
    state = AcceptorState(promised_round=max(state.promised_round, number),
                          last_vote_round=number,
                          last_vote_value=value)
    votes = [Phase2b(sender=acceptor_id, recipient=l, round=number, value=value)
             for l in learners]
    return state, votes
