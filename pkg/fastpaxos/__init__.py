"""

The :code:`fastpaxos` package is a laboratory for the Fast Paxos consensus
protocol. It derives quorum configurations, implements the coordinator's
value selection rules in their original and simplified forms, and runs
the protocol in a deterministic simulator whose traces are checked for
safety.

Overview
--------

Quorums are described by a :class:`QuorumConfig`, which holds the number
:math:`N` of acceptors and the numbers :math:`F` and :math:`E` of failures
tolerated in classic and fast rounds. Configurations are usually derived
from a :class:`QuorumPolicy` with :func:`derive_config`.

When a coordinator starts a new round, it applies one of the rules in
:mod:`fastpaxos.rules` to the Phase 1b reports of a classic quorum of
acceptors. The original rule needs the quorum sizes and the type of the
round in which the reported votes were cast. The simplified rule only
looks for the single value voted most often. The
:func:`fastpaxos.checker.rule_equivalence_sweep` function checks
exhaustively that the simplified rule never contradicts the original one.

Simulations
-----------

A :class:`Scenario` describes the agents of an execution, the proposals
they receive and the faults injected by the network. The
:class:`Simulation` class runs it on a virtual clock and records a
:class:`Trace`, on which the checks of :mod:`fastpaxos.checker` operate.
Runs are deterministic given the scenario and the seed of its fault plan,
so any trace can be reproduced with :func:`fastpaxos.simulation.replay`.

The agents themselves are defined in :mod:`fastpaxos.protocol` as pure
state machines. The simulator persists their durable state before it
sends any of the messages produced by an event, and crashed agents
recover from this state.
"""
from fastpaxos.quorum import (QuorumConfig, QuorumPolicy, MaximizeE,
                              MaximizeF, Explicit, RoundType, derive_config)
from fastpaxos.rules import (Free, Mandated, Phase1bReport, ReportSet,
                             pick_value_original, pick_value_simplified)
from fastpaxos.simulation import FaultPlan, Scenario, Simulation, Trace
