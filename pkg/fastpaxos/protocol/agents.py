"""
fastpaxos.protocol.agents
-------------------------

Agents wrap the role state machines for use in the simulator. Every agent
is a sequential state machine: the simulator feeds it one event at a time
and receives the messages it wants to send. Agents never share mutable
state.

The simulator compares an agent's durable snapshot before and after each
event and writes it to stable storage before any of the produced messages
are sent, so the state machines themselves stay free of I/O.
"""
import dataclasses
import enum
import hashlib
import logging
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass

from fastpaxos.errors import ProtocolViolation, RoundError
from fastpaxos.protocol import messages as msgs
from fastpaxos.protocol.acceptor import (AcceptorState, acceptor_on_phase1a,
                                         acceptor_on_vote_request)
from fastpaxos.protocol.coordinator import (CoordinatorState,
                                            coordinator_on_phase1b,
                                            coordinator_on_propose,
                                            coordinator_start_round,
                                            recovery_round, takeover_round)
from fastpaxos.protocol.learner import LearnerState, learner_on_phase2b
from fastpaxos.protocol.proposer import (ProposerState, proposer_on_any,
                                         proposer_on_propose)
from fastpaxos.quorum import RoundType

logger = logging.getLogger(__name__)

STATE_CLASSES = {cls.role: cls for cls in (AcceptorState, CoordinatorState,
                                           ProposerState, LearnerState)}


def agent_recover(snapshot):
    """
    Rebuild the in-memory state of an agent from its durable snapshot.
    Durable fields are restored exactly, volatile ones start empty.
    """
    return STATE_CLASSES[snapshot["role"]].recover(snapshot)


def _key(k):
    return k if isinstance(k, (str, int)) else repr(k)


def canonical(obj):
    """
    Canonical, hash-seed independent representation of a state used for
    digests and trace files.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: canonical(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, bytes):
        return msgs.decode_value(obj)
    if isinstance(obj, dict):
        items = [(_key(canonical(k)), canonical(v)) for k, v in obj.items()]
        return dict(sorted(items, key=lambda kv: repr(kv[0])))
    if isinstance(obj, (set, frozenset)):
        return sorted((canonical(v) for v in obj), key=repr)
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def digest(state):
    return hashlib.blake2b(repr(canonical(state)).encode("utf-8"),
                           digest_size=8).hexdigest()


@dataclass(frozen=True)
class ProtocolContext:
    """Everything an agent needs to know about the execution it is part of."""
    config: object
    scheme: object
    roster: object
    rule: object

################################################################################
# Agents
################################################################################


class Agent(metaclass=ABCMeta):
    """
    Abstract base class of the simulated agents.

    Attributes:

        agent_id: Identifier of the agent.
        context(:class:`ProtocolContext`): The execution context.
        state: The role state.
        notes: Observations the simulator records in the trace, such as
            learned values.
    """
    state_class = None

    def __init__(self, agent_id, context, state=None):
        self.agent_id = agent_id
        self.context = context
        self.state = state if state is not None else self.state_class()
        self.notes = []

    @abstractmethod
    def handle(self, message):
        """
        Process a delivered message and return the messages to send.
        """

    def on_timeout(self, tag, params):
        """
        Process a scripted timeout. Agents ignore timeouts by default.
        """
        return []

    def durable(self):
        return self.state.durable()

    def recover(self, snapshot):
        self.state = agent_recover(snapshot)

    def digest(self):
        return digest(self.state)

    def drain_notes(self):
        notes, self.notes = self.notes, []
        return notes

    def __repr__(self):
        return "{}({})".format(type(self).__name__, self.agent_id)


class AcceptorAgent(Agent):
    state_class = AcceptorState

    def handle(self, message):
        if isinstance(message, msgs.Phase1a):
            self.state, out = acceptor_on_phase1a(self.state, message)
            return out
        if isinstance(message, msgs.Phase2a):
            return self._vote(message.round, message.value)
        if isinstance(message, msgs.Propose) and message.round is not None:
            # Proposers may only ask for votes in fast rounds.
            if self.context.scheme.round_type(message.round) is RoundType.FAST:
                return self._vote(message.round, message.value)
        return []

    def _vote(self, round, value):
        self.state, out = acceptor_on_vote_request(self.state,
                                                   round,
                                                   value,
                                                   self.context.roster.learners,
                                                   self.agent_id)
        return out


class CoordinatorAgent(Agent):
    state_class = CoordinatorState

    def handle(self, message):
        ctx = self.context
        if isinstance(message, msgs.Phase1b):
            self.state, out = coordinator_on_phase1b(self.state, message,
                                                     ctx.config, ctx.rule,
                                                     ctx.scheme, ctx.roster,
                                                     self.agent_id)
            return out
        if isinstance(message, msgs.Propose) and message.round is None:
            self.state, out = coordinator_on_propose(self.state, message,
                                                     ctx.roster, self.agent_id)
            return out
        return []

    def on_timeout(self, tag, params):
        """
        Start a round. :code:`params` either names the round number
        (:code:`round`) or a :code:`mode`: :code:`recover` starts the next
        classic round, :code:`takeover` the next round of any type.
        """
        if tag != "start":
            return []
        ctx = self.context
        try:
            mode = params.get("mode")
            if params.get("round") is not None:
                round = ctx.scheme.round_id(int(params["round"]))
            elif mode == "recover":
                round = recovery_round(self.state, ctx.scheme, self.agent_id)
            elif mode == "takeover":
                round = takeover_round(self.state, ctx.scheme, self.agent_id,
                                       params.get("after", 0))
            else:
                round = ctx.scheme.round_id(
                    ctx.scheme.next_round(self.state.current_round, self.agent_id))
            self.state, out = coordinator_start_round(self.state, round,
                                                      ctx.roster.acceptors,
                                                      self.agent_id)
        except RoundError as e:
            logger.warning("%s: %s", self.agent_id, e)
            self.notes.append({"rejected": str(e)})
            return []
        self.notes.append({"started": round.number, "type": str(round.type)})
        return out


class ProposerAgent(Agent):
    state_class = ProposerState

    def handle(self, message):
        roster = self.context.roster
        if isinstance(message, msgs.Any):
            self.state, out = proposer_on_any(self.state, message,
                                              self.state.value, roster,
                                              self.agent_id)
            return out
        if isinstance(message, msgs.Propose) and message.round is None:
            self.state, out = proposer_on_propose(self.state, message,
                                                  roster, self.agent_id)
            return out
        return []


class LearnerAgent(Agent):
    state_class = LearnerState

    def handle(self, message):
        if not isinstance(message, msgs.Phase2b):
            return []
        try:
            self.state, learned = learner_on_phase2b(self.state, message,
                                                     self.context.config,
                                                     self.context.scheme)
        except ProtocolViolation as e:
            logger.error("%s: %s", self.agent_id, e)
            self.notes.append({"learned": msgs.decode_value(e.conflicting),
                               "round": message.round,
                               "conflict": True})
            return []
        if learned is not None:
            self.notes.append({"learned": msgs.decode_value(learned),
                               "round": message.round})
        return []


AGENT_CLASSES = {"acceptor": AcceptorAgent,
                 "coordinator": CoordinatorAgent,
                 "proposer": ProposerAgent,
                 "learner": LearnerAgent}


def create_agent(agent_id, context):
    role = context.roster.role(agent_id)
    return AGENT_CLASSES[role](agent_id, context)
