"""
fastpaxos.simulation
====================

Deterministic discrete-event simulation of Fast Paxos executions.

A :class:`Scenario` describes the agents taking part in an execution, the
quorum policy, the scripted proposals and coordinator actions, and a
:class:`FaultPlan` describing message loss, duplication, delays, crashes and
recoveries. The :class:`Simulation` class runs a scenario over a virtual
clock and records every processed event in a :class:`Trace`, the input to
all checks in :mod:`fastpaxos.checker`.

Determinism
-----------

Events are processed in :code:`(time, sequence)` order. All random draws
come from per-channel streams derived from the seed of the fault plan and
the sender and recipient of a message, so that adding an agent doesn't
change the draws on unrelated channels. Running a scenario twice with the
same seed yields byte-identical traces; :func:`replay` verifies this.

Durability
----------

After every event the simulator compares the durable snapshot of the
agent before and after the event. If it changed, the snapshot is written to
stable storage before any of the messages produced by the event are sent.
Crashed agents drop all events until they recover from their last durable
snapshot.

Reference
=========
"""
import heapq
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from copy import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np

from fastpaxos import io as fio
from fastpaxos.errors import NoDecision, ReplayDivergence, ScenarioError
from fastpaxos.protocol import messages as msgs
from fastpaxos.protocol.agents import ProtocolContext, canonical, create_agent
from fastpaxos.protocol.coordinator import CoordinatorState, Phase
from fastpaxos.protocol.acceptor import AcceptorState
from fastpaxos.protocol.proposer import ProposerState
from fastpaxos.protocol.rounds import RoundScheme
from fastpaxos.protocol.roster import Roster
from fastpaxos.protocol.storage import StableStore
from fastpaxos.quorum import RoundType, derive_config, parse_policy
from fastpaxos.rules import get_rule

logger = logging.getLogger(__name__)

CLIENT = "client"

################################################################################
# Fault plans
################################################################################


def _probability(value, name):
    try:
        p = Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise ScenarioError("{} must be a number in [0, 1], got {!r}."
                            .format(name, value))
    if not 0 <= p <= 1:
        raise ScenarioError("{} must lie in [0, 1], got {}.".format(name, p))
    return p


def _format_probability(p):
    return int(p) if p.denominator == 1 else str(p)


def _check_directive(d):
    d = dict(d)
    if ("time" in d) == ("position" in d):
        raise ScenarioError("Scripted directive {!r} needs exactly one of "
                            "'time' and 'position'.".format(d))
    for key in ("time", "position", "recover_after"):
        if d.get(key) is not None:
            d[key] = _check_int(d, key)
    if "time" in d:
        actions = [k for k in ("crash", "recover", "delay") if k in d]
        if len(actions) != 1:
            raise ScenarioError("Timed directive {!r} needs exactly one of "
                                "crash, recover or delay.".format(d))
        if "delay" in d:
            d["delay"] = _delay_bounds(d["delay"])
    else:
        if not (d.get("drop") or d.get("crash")):
            raise ScenarioError("Positional directive {!r} needs 'drop' or "
                                "'crash'.".format(d))
    return d


def _check_int(d, key, minimum=0):
    value = d[key]
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            value = int(str(value))
        except ValueError:
            raise ScenarioError("Field '{}' of {!r} must be an integer."
                                .format(key, d))
    if value < minimum:
        raise ScenarioError("Field '{}' of {!r} must be at least {}."
                            .format(key, d, minimum))
    return value


def _delay_bounds(bounds):
    try:
        lo, hi = [int(b) for b in bounds]
    except (TypeError, ValueError):
        raise ScenarioError("Delay bounds must be a pair of integers, got {!r}."
                            .format(bounds))
    if lo < 0 or lo > hi:
        raise ScenarioError("Delay bounds must satisfy 0 <= min <= max, got "
                            "({}, {}).".format(lo, hi))
    return (lo, hi)


@dataclass
class FaultPlan:
    """
    Faults injected into a simulation.

    Attributes:

        drop_probability: Probability that a sent message is lost.
        duplicate_probability: Probability that a sent message is delivered
            a second time, with an independently drawn delay.
        delay_bounds: Bounds :code:`(min, max)` of the uniformly drawn
            integral message delay.
        links: Mapping from :code:`(sender, recipient)` to a fixed delay
            overriding the drawn one.
        scripted: Directives keyed by :code:`time` (:code:`crash`,
            :code:`recover` or :code:`delay` bounds) or by trace
            :code:`position` (:code:`drop` the messages sent by the event at
            that position or :code:`crash` its agent right after its durable
            write, optionally with :code:`recover_after`).
        seed: Seed of the random streams.
    """
    drop_probability: Fraction = Fraction(0)
    duplicate_probability: Fraction = Fraction(0)
    delay_bounds: tuple = (1, 1)
    links: dict = field(default_factory=dict)
    scripted: list = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        self.drop_probability = _probability(self.drop_probability, "drop")
        self.duplicate_probability = _probability(self.duplicate_probability,
                                                  "duplicate")
        self.delay_bounds = _delay_bounds(self.delay_bounds)
        self.links = {tuple(k): int(v) for k, v in self.links.items()}
        self.scripted = [_check_directive(d) for d in self.scripted]
        self.seed = int(self.seed)

    @classmethod
    def from_dict(cls, d):
        d = dict(d or {})
        links = {}
        for link in d.get("links", []):
            try:
                links[(link["from"], link["to"])] = int(link["delay"])
            except (KeyError, TypeError, ValueError):
                raise ScenarioError("Malformed link {!r}.".format(link))
        return cls(drop_probability=d.get("drop", 0),
                   duplicate_probability=d.get("duplicate", 0),
                   delay_bounds=d.get("delay", (1, 1)),
                   links=links,
                   scripted=d.get("script", []),
                   seed=d.get("seed", 0))

    def to_dict(self):
        d = {"drop": _format_probability(self.drop_probability),
             "duplicate": _format_probability(self.duplicate_probability),
             "delay": list(self.delay_bounds),
             "seed": self.seed}
        if self.links:
            d["links"] = [{"from": s, "to": r, "delay": v}
                          for (s, r), v in sorted(self.links.items())]
        if self.scripted:
            d["script"] = [{k: (list(v) if isinstance(v, tuple) else v)
                            for k, v in s.items()} for s in self.scripted]
        return d

    def agents(self):
        """Agents referenced by the plan."""
        names = set()
        for s, r in self.links:
            names.update((s, r))
        for d in self.scripted:
            for k in ("crash", "recover"):
                if isinstance(d.get(k), str):
                    names.add(d[k])
        return names

################################################################################
# Scenarios
################################################################################


@dataclass
class Scenario:
    """
    Description of a simulated execution.

    Attributes:

        name: Name of the scenario.
        n_acceptors: Number of acceptors.
        policy: The quorum policy (:class:`QuorumPolicy` or its name).
        coordinators, proposers, learners: Number of agents per role.
        fast: Which rounds are fast (see :class:`RoundScheme`).
        round_overrides: Round types overriding :code:`fast`.
        rule: Name of the coordinator rule.
        factorized: Whether Phase 1 of round 1 and its any message are
            already executed when the simulation starts.
        proposals: Scripted proposals, dicts with :code:`time`,
            :code:`proposer` and :code:`value`.
        rounds: Scripted coordinator actions, dicts with :code:`time`,
            :code:`coordinator` and either :code:`round` or :code:`mode`
            (:code:`recover` or :code:`takeover`).
        faults(:class:`FaultPlan`): The injected faults.
        until: Virtual time at which the simulation stops.
        expect: Expected outcome, :code:`decision` (bool) and optionally
            :code:`latency` in message delays.
    """
    name: str = "scenario"
    n_acceptors: int = 3
    policy: object = "max-e"
    coordinators: int = 1
    proposers: int = 1
    learners: int = 1
    fast: str = "odd"
    round_overrides: dict = field(default_factory=dict)
    rule: str = "simplified"
    factorized: bool = False
    proposals: list = field(default_factory=list)
    rounds: list = field(default_factory=list)
    faults: FaultPlan = field(default_factory=FaultPlan)
    until: int = 1000
    expect: dict = field(default_factory=dict)

    @property
    def config(self):
        return derive_config(self.n_acceptors, self.policy)

    @property
    def roster(self):
        return Roster.build(self.n_acceptors, self.coordinators,
                            self.proposers, self.learners)

    @property
    def scheme(self):
        return RoundScheme(self.roster.coordinators, self.fast,
                           self.round_overrides)

    def validate(self):
        """
        Check the scenario against the quorum module and its roster.

        Raises:

            InvalidConfigError: If the quorum configuration is invalid.
            ScenarioError: If the scenario references unknown agents or
                rules, or asks for a factorized start with a classic round 1.
        """
        self.config
        roster = self.roster
        scheme = self.scheme
        try:
            get_rule(self.rule)
        except ValueError as e:
            raise ScenarioError(str(e))

        referenced = set(self.faults.agents())
        for p in self.proposals:
            if not {"time", "proposer", "value"} <= set(p):
                raise ScenarioError("Malformed proposal {!r}.".format(p))
            if p["proposer"] not in roster.proposers:
                raise ScenarioError("Proposal {!r} names unknown proposer."
                                    .format(p))
            p["time"] = _check_int(p, "time")
        for r in self.rounds:
            if not {"time", "coordinator"} <= set(r):
                raise ScenarioError("Malformed round directive {!r}.".format(r))
            if r["coordinator"] not in roster.coordinators:
                raise ScenarioError("Round directive {!r} names unknown "
                                    "coordinator.".format(r))
            r["time"] = _check_int(r, "time")
            if r.get("round") is not None:
                r["round"] = _check_int(r, "round", minimum=1)
            if r.get("after") is not None:
                r["after"] = _check_int(r, "after")
            if r.get("mode") not in (None, "recover", "takeover"):
                raise ScenarioError("Round directive {!r} has unknown mode."
                                    .format(r))
            if r.get("round") is not None and \
               scheme.coordinator(int(r["round"])) != r["coordinator"]:
                raise ScenarioError("Round {} is coordinated by {}, not {}."
                                    .format(r["round"],
                                            scheme.coordinator(int(r["round"])),
                                            r["coordinator"]))
        unknown = sorted(a for a in referenced if a not in roster)
        if unknown:
            raise ScenarioError("Scenario {} references unknown agents: {}."
                                .format(self.name, ", ".join(unknown)))
        if self.factorized and scheme.round_type(1) is not RoundType.FAST:
            raise ScenarioError("A factorized start needs round 1 to be fast.")
        return self

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("format_version", None)
        agents = d.pop("agents", {}) or {}
        scheme = d.pop("scheme", {}) or {}
        try:
            scenario = cls(
                name=str(d.get("name", "scenario")),
                n_acceptors=int(d.get("acceptors", 3)),
                policy=parse_policy(d.get("policy", "max-e")),
                coordinators=int(agents.get("coordinators", 1)),
                proposers=int(agents.get("proposers", 1)),
                learners=int(agents.get("learners", 1)),
                fast=scheme.get("fast", "odd"),
                round_overrides=scheme.get("overrides", {}) or {},
                rule=d.get("rule", "simplified"),
                factorized=bool(d.get("factorized", False)),
                proposals=[dict(p) for p in d.get("proposals", []) or []],
                rounds=[dict(r) for r in d.get("rounds", []) or []],
                faults=FaultPlan.from_dict(d.get("faults")),
                until=int(d.get("until", 1000)),
                expect=dict(d.get("expect", {}) or {}))
        except (TypeError, ValueError, AttributeError) as e:
            if isinstance(e, ScenarioError):
                raise
            raise ScenarioError("Malformed scenario: {}".format(e))
        for p in scenario.proposals:
            if p.get("value") is not None:
                p["value"] = str(p["value"])
        return scenario

    def to_dict(self):
        d = {"format_version": fio.FORMAT_VERSION,
             "name": self.name,
             "acceptors": self.n_acceptors,
             "policy": parse_policy(self.policy).name,
             "agents": {"coordinators": self.coordinators,
                        "proposers": self.proposers,
                        "learners": self.learners},
             "scheme": {"fast": self.fast},
             "rule": self.rule,
             "factorized": self.factorized,
             "proposals": [dict(p) for p in self.proposals],
             "rounds": [dict(r) for r in self.rounds],
             "faults": self.faults.to_dict(),
             "until": self.until}
        if self.round_overrides:
            d["scheme"]["overrides"] = {int(r): str(t) for r, t in
                                        sorted(self.round_overrides.items())}
        if self.expect:
            d["expect"] = dict(self.expect)
        return d

    @classmethod
    def read(cls, path):
        return cls.from_dict(fio.load_document(path, "scenario")).validate()

    def write(self, path):
        fio.dump_document(self.to_dict(), path)

################################################################################
# Events and traces
################################################################################


@dataclass(order=True)
class Event:
    time: int
    sequence: int
    kind: str = field(compare=False)
    agent: str = field(compare=False, default="-")
    message: object = field(compare=False, default=None)
    tag: Optional[str] = field(compare=False, default=None)
    params: dict = field(compare=False, default_factory=dict)


class Trace:
    """
    Totally ordered log of the events of a simulation.

    Attributes:

        header(:code:`dict`): The inputs of the run (scenario, seed and time
            bound) and whether it was truncated.
        records(:code:`list`): One dictionary per processed event with the
            keys :code:`pos`, :code:`time`, :code:`seq`, :code:`event`,
            :code:`agent` and, depending on the event, :code:`msg`,
            :code:`effects` (durable writes and sends in the order they
            happened), :code:`digest` of the agent state, :code:`learned`,
            :code:`restored` and others.
    """
    def __init__(self, header, records):
        self.header = dict(header)
        self.records = list(records)

    @property
    def truncated(self):
        return bool(self.header.get("truncated", False))

    @property
    def seed(self):
        return self.header.get("seed")

    @property
    def scenario(self):
        return Scenario.from_dict(self.header["scenario"])

    def learns(self):
        """Positions and records of all learn events."""
        return [(r["pos"], r) for r in self.records if "learned" in r]

    def lines(self):
        return fio.dump_records([self.header] + self.records).splitlines(True)

    def to_text(self):
        return "".join(self.lines())

    def write(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_text())

    @classmethod
    def read(cls, path):
        records = fio.load_records(path)
        if not records or records[0].get("kind") != "header":
            raise ScenarioError("Trace {} has no header record.".format(path))
        header = records[0]
        if header.get("format_version") != fio.FORMAT_VERSION:
            raise ScenarioError("Unsupported trace format_version {!r}."
                                .format(header.get("format_version")))
        return cls(header, records[1:])

    def __eq__(self, other):
        return isinstance(other, Trace) and self.to_text() == other.to_text()

    def __len__(self):
        return len(self.records)

    def __repr__(self):
        return "Trace({}: {} records{})".format(
            self.header.get("scenario", {}).get("name"), len(self.records),
            ", truncated" if self.truncated else "")

################################################################################
# Simulation
################################################################################

_STIMULUS_RANK = {"delay": 0, "crash": 1, "recover": 2, "inject": 3, "timeout": 4}


def _channel_key(name):
    return zlib.crc32(name.encode("utf-8"))


class Simulation:
    """
    Simulation of a :class:`Scenario`.

    The simulation is set up from scratch by every call to :meth:`run`, so
    that a simulation object can be run repeatedly with different seeds.
    """
    def __init__(self, scenario, fault_plan=None, max_events=200000):
        self._scenario = scenario.validate()
        self._fault_plan = fault_plan if fault_plan is not None else scenario.faults
        self.max_events = max_events
        self._setup = False
        self.output_file = None

    #
    # Properties
    #

    @property
    def scenario(self):
        return self._scenario

    @property
    def fault_plan(self):
        return self._fault_plan

    @property
    def config(self):
        return self._config

    @property
    def agents(self):
        return self._agents

    @property
    def store(self):
        return self._store

    @property
    def now(self):
        return self._now

    #
    # Setup
    #

    def setup(self, seed=None):
        """
        Create agents, stable storage and the initial event queue.
        """
        scenario = self._scenario
        plan = self._fault_plan
        self._config = scenario.config
        self._roster = scenario.roster
        self._scheme = scenario.scheme
        self._context = ProtocolContext(self._config, self._scheme,
                                        self._roster, get_rule(scenario.rule))
        self._agents = {a: create_agent(a, self._context)
                        for a in sorted(self._roster.agents)}
        if scenario.factorized:
            self._prime_factorized()

        self._store = StableStore()
        for a in sorted(self._agents):
            self._store.write(a, self._agents[a].durable())

        self._seed = plan.seed if seed is None else int(seed)
        self._crashed = set()
        self._queue = []
        self._sequence = 0
        self._now = 0
        self._delay_bounds = plan.delay_bounds
        self._channels = {}
        self._positional = {int(d["position"]): d for d in plan.scripted
                            if "position" in d}
        self._schedule_stimuli()
        self._setup = True

    def _prime_factorized(self):
        coordinator = self._scheme.coordinator(1)
        for a in self._roster.acceptors:
            self._agents[a].state = AcceptorState(promised_round=1)
        self._agents[coordinator].state = CoordinatorState(current_round=1,
                                                           phase=Phase.SENT,
                                                           highest_seen=1)
        for p in self._roster.proposers:
            self._agents[p].state = ProposerState(any_round=1)

    def _schedule_stimuli(self):
        stimuli = []
        for p in self._scenario.proposals:
            m = msgs.Propose(sender=CLIENT, recipient=p["proposer"],
                             value=msgs.encode_value(p["value"]))
            stimuli.append((int(p["time"]), "inject", p["proposer"], m, None, {}))
        for r in self._scenario.rounds:
            params = {k: v for k, v in r.items() if k not in ("time", "coordinator")}
            stimuli.append((int(r["time"]), "timeout", r["coordinator"], None,
                            "start", params))
        for d in self._fault_plan.scripted:
            if "time" not in d:
                continue
            if "delay" in d:
                stimuli.append((int(d["time"]), "delay", "-", None, None,
                                {"delay": list(d["delay"])}))
            else:
                kind = "crash" if "crash" in d else "recover"
                stimuli.append((int(d["time"]), kind, d[kind], None, None, {}))
        stimuli.sort(key=lambda s: (s[0], _STIMULUS_RANK[s[1]], s[2]))
        for time, kind, agent, message, tag, params in stimuli:
            self._push(time, kind, agent, message, tag, params)

    def _push(self, time, kind, agent, message=None, tag=None, params=None):
        event = Event(time, self._sequence, kind, agent, message, tag,
                      params or {})
        self._sequence += 1
        heapq.heappush(self._queue, event)

    #
    # Network
    #

    def _channel(self, sender, recipient):
        key = (sender, recipient)
        if key not in self._channels:
            seq = np.random.SeedSequence(entropy=self._seed,
                                         spawn_key=(_channel_key(sender),
                                                    _channel_key(recipient)))
            self._channels[key] = np.random.default_rng(seq)
        return self._channels[key]

    def _send(self, message):
        plan = self._fault_plan
        rng = self._channel(message.sender, message.recipient)
        lo, hi = self._delay_bounds
        u_drop = rng.random()
        delay = int(rng.integers(lo, hi + 1))
        u_dup = rng.random()
        delay_dup = int(rng.integers(lo, hi + 1))
        link = plan.links.get((message.sender, message.recipient))
        if link is not None:
            delay = delay_dup = link

        effect = {"op": "send", "msg": message.to_dict()}
        if u_drop < plan.drop_probability:
            effect["fate"] = "dropped"
            return effect
        times = [self._now + delay]
        self._push(times[0], "deliver", message.recipient, message)
        if u_dup < plan.duplicate_probability:
            times.append(self._now + delay_dup)
            self._push(times[1], "deliver", message.recipient, message)
        effect["fate"] = "scheduled"
        effect["at"] = times
        return effect

    #
    # Event processing
    #

    def _process(self, event, position):
        record = {"pos": position, "time": event.time, "seq": event.sequence,
                  "event": event.kind, "agent": event.agent}
        if event.message is not None:
            record["msg"] = event.message.to_dict()
        if event.tag is not None:
            record["tag"] = event.tag
            record["params"] = dict(event.params)

        if event.kind == "delay":
            self._delay_bounds = tuple(event.params["delay"])
            record["delay"] = list(self._delay_bounds)
            return record

        agent = self._agents[event.agent]
        if event.kind == "crash":
            if event.agent in self._crashed:
                record["ignored"] = "already crashed"
            else:
                self._crashed.add(event.agent)
            return record

        if event.kind == "recover":
            if event.agent not in self._crashed:
                record["ignored"] = "not crashed"
                return record
            snapshot = self._store.read(event.agent)
            agent.recover(snapshot)
            self._crashed.discard(event.agent)
            record["restored"] = canonical(snapshot)
            record["digest"] = agent.digest()
            return record

        if event.agent in self._crashed:
            record["dropped"] = "crashed"
            return record

        before = agent.durable()
        if event.kind == "timeout":
            out = agent.on_timeout(event.tag, event.params)
        else:
            out = agent.handle(event.message)
        after = agent.durable()

        directive = self._positional.get(position, {})
        effects = []
        if after != before:
            self._store.write(event.agent, after)
            effects.append({"op": "persist", "state": canonical(after)})
        lose = bool(directive.get("crash") or directive.get("drop"))
        for m in out:
            if lose:
                effects.append({"op": "send", "msg": m.to_dict(), "fate": "lost"})
            else:
                effects.append(self._send(m))
        if directive.get("crash"):
            self._crashed.add(event.agent)
            record["crashed"] = True
            if directive.get("recover_after") is not None:
                self._push(self._now + int(directive["recover_after"]),
                           "recover", event.agent)

        for note in agent.drain_notes():
            record.update(note)
        if effects:
            record["effects"] = effects
        record["digest"] = agent.digest()
        return record

    def run(self, seed=None, until=None):
        """
        Run the simulation.

        Arguments:

            seed(:code:`int`): Seed of the random streams. Defaults to the
                seed of the fault plan.
            until(:code:`int`): Virtual time bound. Defaults to the bound
                of the scenario. The run ends earlier if no events are left.

        Returns:

            The :class:`Trace` of the run. If events remain beyond the time
            bound or the event limit, the trace is flagged as truncated.
        """
        self.setup(seed)
        until = self._scenario.until if until is None else int(until)
        records = []
        truncated = False
        while self._queue:
            if self._queue[0].time > until or len(records) >= self.max_events:
                truncated = True
                break
            event = heapq.heappop(self._queue)
            self._now = event.time
            record = self._process(event, len(records))
            logger.debug("%s", record)
            records.append(record)

        header = {"kind": "header",
                  "format_version": fio.FORMAT_VERSION,
                  "scenario": self._scenario.to_dict(),
                  "seed": self._seed,
                  "until": until,
                  "truncated": truncated}
        if self._fault_plan is not self._scenario.faults:
            header["scenario"]["faults"] = self._fault_plan.to_dict()
        logger.info("Simulated %s with seed %d: %d events%s.",
                    self._scenario.name, self._seed, len(records),
                    " (truncated)" if truncated else "")
        return Trace(header, records)

    #
    # Multiple seeds
    #

    def run_seeds(self, seeds, workers=None, callback=None):
        """
        Run the scenario for several seeds and check each trace.

        Arguments:

            seeds: Iterable of seeds.
            workers(:code:`int`): Number of worker processes. Seeds are run
                sequentially if not given.
            callback: Optional function called with each :class:`SeedResult`.
                If not given and an output file has been initialized, the
                results are stored in it.

        Returns:

            List of :class:`SeedResult` objects in the order of
            :code:`seeds`.
        """
        jobs = [(self._scenario, self._fault_plan, s) for s in seeds]
        results = run_jobs(jobs, workers)
        for r in results:
            if callback is not None:
                callback(r)
            elif self.output_file is not None:
                self.output_file.store_results(r)
        return results

    def initialize_output_file(self, filename, mode="w"):
        from fastpaxos.checker import PROPERTIES
        self.output_file = fio.OutputFile(filename, PROPERTIES, mode=mode)

    def store_results(self, result):
        if self.output_file is not None:
            self.output_file.store_results(result)
        else:
            raise Exception("The output file must be initialized before results"
                            " can be written to it.")

    def __getstate__(self):
        state = copy(self.__dict__)
        for k in ("_agents", "_queue", "_channels", "_store"):
            state.pop(k, None)
        state["_setup"] = False
        return state

    def __setstate__(self, state):
        self.__dict__ = state

################################################################################
# Seed results and worker pools
################################################################################


@dataclass
class SeedResult:
    seed: int
    config: object
    verdicts: List = field(default_factory=list)
    latency: Optional[int] = None
    learned_round: Optional[int] = None
    n_events: int = 0
    truncated: bool = False

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    @property
    def failures(self):
        return [v for v in self.verdicts if not v.passed]


def simulate_seed(job):
    """
    Run and check a single seed. :code:`job` is a tuple
    :code:`(scenario, fault_plan, seed)`; module level so that it can be
    sent to worker processes.
    """
    from fastpaxos.checker import check_all, latency_probe

    scenario, plan, seed = job
    trace = Simulation(scenario, plan).run(seed=seed)
    try:
        latency = latency_probe(trace)
    except NoDecision:
        latency = None
    learns = trace.learns()
    return SeedResult(seed=trace.seed,
                      config=scenario.config,
                      verdicts=check_all(trace),
                      latency=latency,
                      learned_round=learns[0][1].get("round") if learns else None,
                      n_events=len(trace),
                      truncated=trace.truncated)


def run_jobs(jobs, workers=None):
    """
    Run :func:`simulate_seed` over :code:`jobs`, optionally in worker
    processes. Results are returned in job order.
    """
    jobs = list(jobs)
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [simulate_seed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(simulate_seed, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def replay(trace, seed=None):
    """
    Re-run the inputs recorded in :code:`trace`.

    Arguments:

        trace(:class:`Trace`): A recorded trace.
        seed(:code:`int`): Seed to use instead of the recorded one.

    Returns:

        The new trace.

    Raises:

        ReplayDivergence: If the recorded seed is used and the new trace
            differs from the recorded one.
    """
    recorded = trace.header["seed"]
    seed = recorded if seed is None else seed
    scenario = trace.scenario
    new = Simulation(scenario).run(seed=seed, until=trace.header["until"])
    if seed != recorded:
        return new
    old_lines, new_lines = trace.lines(), new.lines()
    for i, (a, b) in enumerate(zip(old_lines, new_lines)):
        if a != b:
            raise ReplayDivergence("Replay diverges at trace position {}."
                                   .format(i - 1), position=i - 1)
    if len(old_lines) != len(new_lines):
        i = min(len(old_lines), len(new_lines))
        raise ReplayDivergence("Replay has {} records, the recorded trace {}."
                               .format(len(new_lines) - 1, len(old_lines) - 1),
                               position=i - 1)
    return new

################################################################################
# Safety campaign scenarios
################################################################################


def campaign_scenario(seed):
    """
    Randomized scenario used by the safety campaign.

    Draws :math:`N \\in \\{3, 4, 5\\}`, a quorum policy, one or two
    coordinators, two proposers with distinct values, drop probability up to
    0.3, duplication probability up to 0.2, delays between 1 and 3 and up to
    :math:`F` acceptor crash-recoveries. Coordinators start recovery rounds
    at fixed times.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
    n = int(rng.choice([3, 4, 5]))
    policy = ("max-e", "max-f")[int(rng.integers(2))]
    config = derive_config(n, policy)
    coordinators = int(rng.integers(1, 3))
    factorized = bool(rng.integers(2))
    roster = Roster.build(n, coordinators, 2, 2)
    scheme = RoundScheme(roster.coordinators)

    proposals = [{"time": int(rng.integers(0, 4)), "proposer": "p1", "value": "v1"},
                 {"time": int(rng.integers(0, 4)), "proposer": "p2", "value": "v2"}]
    rounds = []
    if not factorized:
        rounds.append({"time": 0, "coordinator": scheme.coordinator(1), "round": 1})
    for i, t in enumerate((15, 30, 45, 60)):
        rounds.append({"time": t,
                       "coordinator": roster.coordinators[i % coordinators],
                       "mode": "recover"})

    script = []
    n_crashes = int(rng.integers(0, config.max_faults_classic + 1))
    crashed = rng.permutation(n)[:n_crashes]
    for i in sorted(int(c) for c in crashed):
        t = int(rng.integers(0, 30))
        script.append({"time": t, "crash": roster.acceptors[i]})
        script.append({"time": t + int(rng.integers(1, 16)),
                       "recover": roster.acceptors[i]})

    faults = FaultPlan(drop_probability=Fraction(int(rng.integers(0, 31)), 100),
                       duplicate_probability=Fraction(int(rng.integers(0, 21)), 100),
                       delay_bounds=(1, int(rng.integers(1, 4))),
                       scripted=script,
                       seed=int(seed))
    return Scenario(name="campaign-{}".format(seed),
                    n_acceptors=n,
                    policy=policy,
                    coordinators=coordinators,
                    proposers=2,
                    learners=2,
                    factorized=factorized,
                    proposals=proposals,
                    rounds=rounds,
                    faults=faults,
                    until=150)
