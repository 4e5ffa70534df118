"""
fastpaxos.protocol
------------------

Role state machines of Fast Paxos.

Each role is implemented as a set of pure functions
:code:`(state, input) -> (state, messages)` over an immutable state class
(:mod:`acceptor`, :mod:`coordinator`, :mod:`proposer`, :mod:`learner`).
The :mod:`agents` module wraps them into objects the simulator drives and
:mod:`storage` provides the stable storage agents recover from.
"""
from fastpaxos.protocol.acceptor import (AcceptorState, acceptor_on_phase1a,
                                         acceptor_on_vote_request)
from fastpaxos.protocol.agents import (Agent, ProtocolContext, agent_recover,
                                       create_agent)
from fastpaxos.protocol.coordinator import (CoordinatorState, Phase,
                                            coordinator_on_phase1b,
                                            coordinator_on_propose,
                                            coordinator_start_round)
from fastpaxos.protocol.learner import LearnerState, learner_on_phase2b
from fastpaxos.protocol.messages import (Any, Message, Phase1a, Phase1b,
                                         Phase2a, Phase2b, Propose)
from fastpaxos.protocol.proposer import (ProposerState, proposer_on_any,
                                         proposer_on_propose)
from fastpaxos.protocol.rounds import RoundId, RoundScheme
from fastpaxos.protocol.roster import Roster
from fastpaxos.protocol.storage import StableStore
