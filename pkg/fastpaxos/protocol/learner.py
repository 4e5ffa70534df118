"""
fastpaxos.protocol.learner
--------------------------

Learner state machine. A learner learns value :math:`v` once it received
votes for :math:`v` in some round :math:`i` from a quorum of acceptors of
the type of round :math:`i`.
"""
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from fastpaxos.errors import ProtocolViolation
from fastpaxos.quorum import quorum_size


@dataclass(frozen=True)
class LearnerState:
    """
    Attributes:

        vote_tallies: Mapping from :code:`(round, value)` to the set of
            acceptors that voted for the value in the round.
        learned: The learned value or :code:`None` (durable).
        learned_round: The round in which the value was learned.
    """
    vote_tallies: Mapping = field(default_factory=dict)
    learned: Optional[bytes] = None
    learned_round: int = 0

    role = "learner"

    def durable(self):
        return {"role": self.role,
                "learned": self.learned,
                "learned_round": self.learned_round}

    @classmethod
    def recover(cls, snapshot):
        return cls(learned=snapshot.get("learned"),
                   learned_round=snapshot.get("learned_round", 0))


def learner_on_phase2b(state, msg, config, scheme):
    """
    Count the vote :code:`msg`.

    Returns:

        The tuple :code:`(state, learned)` where :code:`learned` is the value
        learned by this vote or :code:`None`.

    Raises:

        ProtocolViolation: If the vote completes a quorum for a value other
            than the one learned before.
    """
    key = (msg.round, msg.value)
    voters = state.vote_tallies.get(key, frozenset())
    if msg.sender in voters:
        return state, None
    voters = voters | {msg.sender}
    tallies = dict(state.vote_tallies)
    tallies[key] = voters
    state = replace(state, vote_tallies=tallies)

    if len(voters) < quorum_size(config, scheme.round_type(msg.round)):
        return state, None
    if state.learned is None:
        return replace(state, learned=msg.value, learned_round=msg.round), msg.value
    if state.learned != msg.value:
        raise ProtocolViolation("Learned {!r} in round {} but round {} has a "
                                "quorum for {!r}.".format(state.learned,
                                                          state.learned_round,
                                                          msg.round, msg.value),
                                learned=state.learned,
                                conflicting=msg.value)
    return state, None
