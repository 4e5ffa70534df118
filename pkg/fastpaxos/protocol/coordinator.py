"""
fastpaxos.protocol.coordinator
------------------------------

Coordinator state machine.

A coordinator starts a round by inviting all acceptors (Phase 1a). Once a
classic quorum of acceptors has answered, it evaluates its rule on exactly
these reports and either asks the acceptors to vote for a value (Phase 2a)
or, in a fast round without pending proposals, tells the proposers that any
value may be voted. In a classic round without proposals the coordinator
waits and sends Phase 2a for the first proposal that arrives.
"""
import enum
import logging
from dataclasses import dataclass, replace
from typing import Tuple

from fastpaxos.errors import RoundError, ScenarioError
from fastpaxos.protocol.messages import Any, Phase1a, Phase2a
from fastpaxos.protocol.rounds import RoundId
from fastpaxos.quorum import RoundType
from fastpaxos.rules import Mandated, Phase1bReport, ReportSet

logger = logging.getLogger(__name__)


class Phase(enum.Enum):
    IDLE = "idle"
    COLLECTING = "collecting_phase1b"
    SENT = "phase2a_sent"


@dataclass(frozen=True)
class CoordinatorState:
    """
    Attributes:

        current_round: The highest round started by the coordinator
            (durable).
        reports: Reports collected for :code:`current_round`.
        proposal_pool: Proposed values in order of arrival.
        phase: The phase of :code:`current_round`.
        awaiting_proposal: Whether the rule left the choice free in a
            classic round while no value was proposed yet.
        highest_seen: Highest round number observed in any message.
    """
    current_round: int = 0
    reports: Tuple[Phase1bReport, ...] = ()
    proposal_pool: Tuple[bytes, ...] = ()
    phase: Phase = Phase.IDLE
    awaiting_proposal: bool = False
    highest_seen: int = 0

    role = "coordinator"

    def durable(self):
        return {"role": self.role, "current_round": self.current_round}

    @classmethod
    def recover(cls, snapshot):
        current = snapshot.get("current_round", 0)
        return cls(current_round=current, highest_seen=current)


def coordinator_start_round(state, round, acceptors, coordinator_id):
    """
    Start round :code:`round` by sending Phase 1a to every acceptor.

    Raises:

        RoundError: If :code:`round` isn't coordinated by
            :code:`coordinator_id` or doesn't exceed the current round.
    """
    if round.coordinator != coordinator_id:
        raise RoundError("Round {} is coordinated by {}, not {}."
                         .format(round.number, round.coordinator, coordinator_id))
    if round.number <= state.current_round:
        raise RoundError("{} can't start round {} after round {}."
                         .format(coordinator_id, round.number, state.current_round))
    state = replace(state,
                    current_round=round.number,
                    reports=(),
                    phase=Phase.COLLECTING,
                    awaiting_proposal=False,
                    highest_seen=max(state.highest_seen, round.number))
    invitations = [Phase1a(sender=coordinator_id, recipient=a, round=round.number)
                   for a in acceptors]
    return state, invitations


def _phase2a(state, value, roster, coordinator_id):
    state = replace(state, phase=Phase.SENT, awaiting_proposal=False)
    return state, [Phase2a(sender=coordinator_id, recipient=a,
                           round=state.current_round, value=value)
                   for a in roster.acceptors]


def coordinator_on_phase1b(state, msg, config, rule, scheme, roster,
                           coordinator_id):
    """
    Collect a Phase 1b report and run the rule once a classic quorum has
    reported.

    Arguments:

        state(:class:`CoordinatorState`): The current state.
        msg(:class:`Phase1b`): The report.
        config(:class:`QuorumConfig`): The active quorum configuration.
        rule(:class:`CoordinatorRule`): The value selection rule.
        scheme(:class:`RoundScheme`): Round types and coordinators.
        roster(:class:`Roster`): The agents of the execution.
        coordinator_id: Identifier of the coordinator itself.

    Returns:

        The tuple :code:`(state, messages)`.
    """
    state = replace(state, highest_seen=max(state.highest_seen,
                                            msg.round, msg.voted_round))
    if (state.phase is not Phase.COLLECTING
            or state.awaiting_proposal
            or msg.round != state.current_round
            or msg.sender in {r.acceptor_id for r in state.reports}):
        return state, []

    report = Phase1bReport(msg.sender, msg.voted_round, msg.voted_value)
    state = replace(state, reports=state.reports + (report,))
    if len(state.reports) < config.classic_quorum_size:
        return state, []

    reports = ReportSet(state.reports)
    k = max(r.voted_round for r in state.reports)
    k_type = scheme.round_type(k) if k > 0 else RoundType.FAST
    choice = rule.choose(reports, config, k_type)
    logger.debug("%s: rule %s chose %s in round %d.",
                 coordinator_id, rule.name, choice, state.current_round)

    if isinstance(choice, Mandated):
        return _phase2a(state, choice.value, roster, coordinator_id)
    if state.proposal_pool:
        return _phase2a(state, state.proposal_pool[0], roster, coordinator_id)
    if scheme.round_type(state.current_round) is RoundType.FAST:
        state = replace(state, phase=Phase.SENT)
        return state, [Any(sender=coordinator_id, recipient=p,
                           round=state.current_round)
                       for p in roster.proposers]
    return replace(state, awaiting_proposal=True), []


def coordinator_on_propose(state, msg, roster, coordinator_id):
    """
    Add a proposed value to the pool and, if the coordinator is waiting for
    a proposal, send Phase 2a for it.
    """
    if msg.value is None:
        return state, []
    if msg.value not in state.proposal_pool:
        state = replace(state, proposal_pool=state.proposal_pool + (msg.value,))
    if state.phase is Phase.COLLECTING and state.awaiting_proposal:
        return _phase2a(state, state.proposal_pool[0], roster, coordinator_id)
    return state, []


def recovery_round(state, scheme, coordinator_id):
    """
    The classic round a coordinator starts to recover from a collision or
    a blocked round: the next classic round it coordinates above every round
    it has seen.
    """
    after = max(state.current_round, state.highest_seen)
    try:
        number = scheme.next_round(after, coordinator_id, RoundType.CLASSIC,
                                   limit=2 * len(scheme.coordinators) + 2)
    except ScenarioError:
        # Schemes where the coordinator owns no classic round.
        number = scheme.next_round(after, coordinator_id)
    return scheme.round_id(number)


def takeover_round(state, scheme, coordinator_id, after=0):
    """
    The round a coordinator starts when it takes over from another one: the
    next round of any type it coordinates above :code:`after` and every
    round it has seen.
    """
    after = max(state.current_round, state.highest_seen, after)
    return scheme.round_id(scheme.next_round(after, coordinator_id))
