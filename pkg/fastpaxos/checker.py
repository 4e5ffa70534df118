"""
fastpaxos.checker
=================

Property checks on simulation traces and on the coordinator rules.

Trace checks take a :class:`fastpaxos.simulation.Trace` and return a
:class:`Verdict`. They only look at the trace, so they can be run on traces
read from disk as well as on forged ones:

- :func:`check_agreement`: no two learners learn different values,
- :func:`check_validity`: every learned value was proposed,
- :func:`check_vote_discipline`: acceptors vote at most once per round,
  never below a round they joined and never forget either across a
  recovery,
- :func:`check_durability`: state changes are persisted before the
  messages that depend on them are sent and recoveries restore the last
  persisted state,
- :func:`check_vote_provenance`: every vote was requested by a Phase 2a
  message or, in a fast round, by a proposer, and coordinators send a
  single Phase 2a value per round.

:func:`rule_equivalence_sweep` exhaustively compares the original rule
(evaluated with the quorum oracle) with the simplified rule on all report
sets of small configurations. :func:`safety_campaign` runs randomized
simulations and checks every trace.

Reference
=========
"""
import itertools
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

from fastpaxos.errors import NoDecision, ReportSetError
from fastpaxos.quorum import MaximizeE, MaximizeF, RoundType, derive_config
from fastpaxos.rules import (Mandated, Phase1bReport, ReportSet,
                             o4_holds_count, o4_holds_oracle,
                             pick_value_intermediate, pick_value_original,
                             pick_value_simplified, pick_value_unchecked,
                             tally_votes)

logger = logging.getLogger(__name__)

PROPERTIES = ["agreement", "validity", "vote_discipline", "durability",
              "vote_provenance", "expectation"]

#: Largest number of acceptors covered by the rule sweep.
SWEEP_MAX_ACCEPTORS = 6

SWEEP_VALUES = ("x", "y", "z")
SWEEP_ROUNDS = (1, 2)


@dataclass
class Verdict:
    """
    Result of a property check.

    Attributes:

        property: Name of the checked property.
        passed: Whether the property holds.
        position: Trace position of the first violation, if any.
        witness: Description of the first violation.
        cases: Number of checked cases, for exhaustive checks.
        stats: Additional counts.
        detail: Human readable summary.
    """
    property: str
    passed: bool
    position: Optional[int] = None
    witness: Any = None
    cases: Optional[int] = None
    stats: dict = field(default_factory=dict)
    detail: str = ""

    def to_dict(self):
        d = {"property": self.property, "passed": self.passed}
        for k in ("position", "witness", "cases"):
            if getattr(self, k) is not None:
                d[k] = getattr(self, k)
        if self.stats:
            d["stats"] = dict(self.stats)
        if self.detail:
            d["detail"] = self.detail
        return d

    def __str__(self):
        s = "{}: {}".format(self.property, "PASS" if self.passed else "FAIL")
        if self.position is not None:
            s += " at position {}".format(self.position)
        if self.detail:
            s += " ({})".format(self.detail)
        return s


def _verdict(name, failure=None, **kwargs):
    if failure is None:
        return Verdict(name, True, **kwargs)
    position, detail = failure
    verdict = Verdict(name, False, position=position, detail=detail, **kwargs)
    logger.warning("%s", verdict)
    return verdict


def _sends(record, kind=None):
    for effect in record.get("effects", []):
        if effect["op"] != "send":
            continue
        if kind is None or effect["msg"]["kind"] == kind:
            yield effect

################################################################################
# Trace properties
################################################################################


def check_agreement(trace):
    """No two learn events in :code:`trace` name different values."""
    first = None
    for pos, record in trace.learns():
        if record.get("conflict"):
            return _verdict("agreement", (pos, "{} observed quorums for two "
                                          "values".format(record["agent"])))
        if first is None:
            first = record
        elif record["learned"] != first["learned"]:
            return _verdict("agreement", (pos, "{} learned {} but {} learned {}"
                                          .format(record["agent"],
                                                  record["learned"],
                                                  first["agent"],
                                                  first["learned"])))
    return _verdict("agreement")


def check_validity(trace):
    """Every learned value was injected as a proposal before it was learned."""
    proposed = set()
    for record in trace.records:
        if record["event"] == "inject":
            proposed.add(record["msg"]["value"])
        if "learned" in record and record["learned"] not in proposed:
            return _verdict("validity", (record["pos"], "{} learned {} which "
                                         "was never proposed"
                                         .format(record["agent"],
                                                 record["learned"])))
    return _verdict("validity")


def check_vote_discipline(trace):
    """
    Acceptors join only rounds above the ones they joined before, cast at
    most one vote per round and never vote in a round below one they joined
    or voted in. A recovered acceptor must not have forgotten a round it
    joined or voted in before its crash.
    """
    promised = defaultdict(int)
    voted = defaultdict(dict)
    for record in trace.records:
        agent = record["agent"]
        restored = record.get("restored") or {}
        if restored.get("role") == "acceptor":
            last = max(voted[agent]) if voted[agent] else 0
            if restored.get("promised_round", 0) < promised[agent] or \
               restored.get("last_vote_round", 0) < last:
                return _verdict("vote_discipline",
                                (record["pos"], "{} recovered promised round {} "
                                 "and vote round {} after joining round {} and "
                                 "voting in round {}".format(
                                     agent, restored.get("promised_round", 0),
                                     restored.get("last_vote_round", 0),
                                     promised[agent], last)))
        for effect in _sends(record, "phase1b"):
            r = effect["msg"]["round"]
            if r <= promised[agent]:
                return _verdict("vote_discipline",
                                (record["pos"], "{} joined round {} after "
                                 "round {}".format(agent, r, promised[agent])))
            promised[agent] = r
        votes = {(e["msg"]["round"], e["msg"]["value"])
                 for e in _sends(record, "phase2b")}
        if len(votes) > 1:
            return _verdict("vote_discipline",
                            (record["pos"], "{} cast {} votes in one step"
                             .format(agent, len(votes))))
        for r, v in votes:
            if r < promised[agent]:
                return _verdict("vote_discipline",
                                (record["pos"], "{} voted in round {} after "
                                 "joining round {}".format(agent, r,
                                                           promised[agent])))
            if voted[agent] and r <= max(voted[agent]):
                return _verdict("vote_discipline",
                                (record["pos"], "{} voted in round {} after "
                                 "voting in round {}"
                                 .format(agent, r, max(voted[agent]))))
            voted[agent][r] = v
            promised[agent] = max(promised[agent], r)
    return _verdict("vote_discipline")


def check_durability(trace):
    """
    Within every event the durable write precedes all sends, acceptors
    persist before answering Phase 1a or voting, and every recovery restores
    the state persisted last.
    """
    persisted = {}
    for record in trace.records:
        agent = record["agent"]
        effects = record.get("effects", [])
        ops = [e["op"] for e in effects]
        if "persist" in ops:
            if ops.index("persist") != 0 or ops.count("persist") > 1:
                return _verdict("durability",
                                (record["pos"], "{} sent messages before its "
                                 "durable write".format(agent)))
            persisted[agent] = effects[0]["state"]
        if any(True for _ in _sends(record, "phase1b")) or \
           any(True for _ in _sends(record, "phase2b")):
            if "persist" not in ops:
                return _verdict("durability",
                                (record["pos"], "{} answered without persisting "
                                 "its promise or vote".format(agent)))
        if "restored" in record and agent in persisted:
            if record["restored"] != persisted[agent]:
                return _verdict("durability",
                                (record["pos"], "{} recovered a state other than "
                                 "the one it persisted last".format(agent)))
    return _verdict("durability")


def check_vote_provenance(trace):
    """
    Every vote is for the value and round of the request that triggered it,
    proposer requests are only honoured in fast rounds and each round has at
    most one Phase 2a value.
    """
    scheme = trace.scenario.scheme
    phase2a_values = {}
    any_rounds = defaultdict(set)
    if trace.header["scenario"].get("factorized"):
        for p in trace.scenario.roster.proposers:
            any_rounds[p].add(1)
    for record in trace.records:
        msg = record.get("msg") or {}
        if msg.get("kind") == "any" and "dropped" not in record:
            any_rounds[record["agent"]].add(msg["round"])
        for effect in _sends(record, "propose"):
            r = effect["msg"].get("round")
            if r is not None and r not in any_rounds[record["agent"]]:
                return _verdict("vote_provenance",
                                (record["pos"], "{} requested votes in round {} "
                                 "without an any message"
                                 .format(record["agent"], r)))
        for effect in _sends(record, "phase2a"):
            r, v = effect["msg"]["round"], effect["msg"]["value"]
            if phase2a_values.setdefault(r, v) != v:
                return _verdict("vote_provenance",
                                (record["pos"], "round {} has Phase 2a values {}"
                                 " and {}".format(r, phase2a_values[r], v)))
        votes = list(_sends(record, "phase2b"))
        if not votes:
            continue
        request = record.get("msg") or {}
        for effect in votes:
            vote = effect["msg"]
            if request.get("kind") not in ("phase2a", "propose") or \
               request.get("round") != vote["round"] or \
               request.get("value") != vote["value"]:
                return _verdict("vote_provenance",
                                (record["pos"], "{} voted {} in round {} "
                                 "without a matching request"
                                 .format(record["agent"], vote["value"],
                                         vote["round"])))
            if request["kind"] == "propose" and \
               scheme.round_type(vote["round"]) is not RoundType.FAST:
                return _verdict("vote_provenance",
                                (record["pos"], "{} followed a proposer in "
                                 "classic round {}".format(record["agent"],
                                                          vote["round"])))
    return _verdict("vote_provenance")


def check_expectation(trace):
    """Compare the outcome of the run with the scenario's :code:`expect` block."""
    expect = trace.header["scenario"].get("expect") or {}
    if not expect:
        return _verdict("expectation", detail="nothing expected")
    learns = trace.learns()
    if "decision" in expect and bool(expect["decision"]) != bool(learns):
        position = learns[0][0] if learns else None
        return _verdict("expectation",
                        (position, "expected decision={} but {} learned"
                         .format(expect["decision"],
                                 "a value was" if learns else "nothing was")))
    if expect.get("latency") is not None and learns:
        latency = latency_probe(trace)
        if latency != expect["latency"]:
            return _verdict("expectation",
                            (learns[0][0], "expected latency {} but got {}"
                             .format(expect["latency"], latency)))
    return _verdict("expectation")


TRACE_CHECKS = [check_agreement, check_validity, check_vote_discipline,
                check_durability, check_vote_provenance, check_expectation]


def check_all(trace):
    """Run all trace checks and return their verdicts."""
    return [check(trace) for check in TRACE_CHECKS]


def latency_probe(trace):
    """
    Number of time units between the first proposal and the first learn
    event. With unit message delays this is the number of message delays
    on the critical path.

    Raises:

        NoDecision: If no value is learned in :code:`trace`.
    """
    learns = trace.learns()
    if not learns:
        raise NoDecision("No learner learned a value in {} events."
                         .format(len(trace)))
    start = min((r["time"] for r in trace.records if r["event"] == "inject"),
                default=0)
    return learns[0][1]["time"] - start

################################################################################
# Rule equivalence sweep
################################################################################


def sweep_configs(n):
    """The distinct configurations of the two standard policies for :code:`n`."""
    configs = {}
    for policy in (MaximizeE(), MaximizeF()):
        c = derive_config(n, policy)
        configs.setdefault((c.max_faults_fast, c.max_faults_classic), c)
    return [configs[k] for k in sorted(configs)]


def _last_votes():
    return [(0, None)] + [(r, v) for r in SWEEP_ROUNDS for v in SWEEP_VALUES]


def _is_realizable(tally, k_round_type):
    return k_round_type is RoundType.FAST or len(tally.values) <= 1


def _choice_repr(choice):
    return str(choice)


def _sweep_case(reports, config, k_round_type, universe, simplified):
    """
    Check one report set. Returns :code:`(failure, more_restrictive,
    realizable)` where :code:`failure` names the violated check or is
    :code:`None`.
    """
    tally = tally_votes(reports)
    realizable = _is_realizable(tally, k_round_type)

    for w in sorted(tally.values):
        oracle = o4_holds_oracle(reports, universe, config, k_round_type, w)
        count = o4_holds_count(reports, config, k_round_type, w)
        if oracle != count:
            return "o4 oracle and count disagree on {}".format(w), False, realizable

    if not realizable:
        return None, False, realizable

    satisfying = [w for w in sorted(tally.values)
                  if o4_holds_oracle(reports, universe, config, k_round_type, w)]
    if len(satisfying) > 1:
        return "values {} all satisfy O4".format(satisfying), False, realizable
    # With a classic round k the threshold can drop to a single vote.
    for w in satisfying if k_round_type is RoundType.FAST else []:
        if 2 * tally.count(w) <= len(reports):
            return "{} satisfies O4 without a majority".format(w), False, realizable

    original = pick_value_original(reports, config, k_round_type,
                                   o4_evaluator="oracle", universe=universe)
    intermediate = pick_value_intermediate(reports, config, k_round_type,
                                           o4_evaluator="oracle",
                                           universe=universe)
    unchecked = pick_value_unchecked(reports)
    final = simplified(reports)

    if intermediate != original:
        return "intermediate rule chose {} but original {}".format(
            intermediate, original), False, realizable
    if unchecked != final:
        return "unchecked rule chose {} but simplified {}".format(
            unchecked, final), False, realizable
    if isinstance(original, Mandated) and final != original:
        return "original rule mandates {} but simplified chose {}".format(
            original.value, final), False, realizable
    return None, (original.is_free and not final.is_free), realizable


def _sweep_config(job):
    config, simplified = job
    n = config.n_acceptors
    q = config.classic_quorum_size
    universe = ["a{}".format(i + 1) for i in range(n)]
    stats = {"cases": 0, "realizable": 0, "more_restrictive": 0}
    for assignment in itertools.product(_last_votes(), repeat=q):
        reports = ReportSet(Phase1bReport(universe[i], r, v)
                            for i, (r, v) in enumerate(assignment))
        for k_round_type in (RoundType.FAST, RoundType.CLASSIC):
            stats["cases"] += 1
            try:
                failure, restrictive, realizable = _sweep_case(
                    reports, config, k_round_type, universe, simplified)
            except ReportSetError as e:
                failure, restrictive, realizable = str(e), False, True
            stats["realizable"] += int(realizable)
            stats["more_restrictive"] += int(restrictive)
            if failure is not None:
                witness = {"n": n,
                           "e": config.max_faults_fast,
                           "f": config.max_faults_classic,
                           "k_round_type": str(k_round_type),
                           "reports": [[r.acceptor_id, r.voted_round, r.voted_value]
                                       for r in reports],
                           "check": failure}
                return stats, witness
    return stats, None


def rule_equivalence_sweep(n_max, simplified=pick_value_simplified, workers=None):
    """
    Exhaustively compare the coordinator rules.

    For every :math:`N \\leq` :code:`n_max` and every distinct configuration
    of the :class:`MaximizeE` and :class:`MaximizeF` policies, the sweep
    enumerates all last votes of a minimum classic quorum :math:`Q`, with
    rounds 1 and 2 and three values, for both types of round :math:`k`. On
    every case the quorum oracle and the counting form of :math:`O4` must
    agree. On report sets that some execution can produce (round :math:`k`
    fast, or a single value voted in a classic round :math:`k`) the sweep
    also checks that

    - at most one value satisfies :math:`O4`, and if round :math:`k` is
      fast it is a strict majority of :math:`Q`,
    - the intermediate rule equals the original one and the unchecked rule
      equals the simplified one,
    - whenever the original rule mandates a value, the simplified rule
      mandates the same value.

    Arguments:

        n_max(:code:`int`): Largest number of acceptors, at most
            :data:`SWEEP_MAX_ACCEPTORS`.
        simplified: The simplified rule under test. Replace it to check that
            the sweep detects broken rules.
        workers(:code:`int`): Number of worker processes. Requires
            :code:`simplified` to be picklable.

    Returns:

        A :class:`Verdict` with the number of cases and, in its
        :code:`stats`, how often the simplified rule is more restrictive
        than the original one.
    """
    if not 1 <= n_max <= SWEEP_MAX_ACCEPTORS:
        raise ValueError("The rule sweep supports 1 <= n_max <= {}, got {}."
                         .format(SWEEP_MAX_ACCEPTORS, n_max))
    jobs = [(c, simplified) for n in range(1, n_max + 1) for c in sweep_configs(n)]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_config, jobs))
    else:
        outcomes = [_sweep_config(j) for j in jobs]

    stats = {"cases": 0, "realizable": 0, "more_restrictive": 0}
    per_n = defaultdict(int)
    witness = None
    for (config, _), (s, w) in zip(jobs, outcomes):
        for k in stats:
            stats[k] += s[k]
        per_n[config.n_acceptors] += s["cases"]
        if w is not None and witness is None:
            witness = w
    stats["per_n"] = dict(per_n)
    logger.info("Rule sweep up to n=%d: %d cases, %d realizable, simplified "
                "more restrictive in %d.", n_max, stats["cases"],
                stats["realizable"], stats["more_restrictive"])
    if witness is not None:
        return _verdict("rule_equivalence", (None, witness["check"]),
                        witness=witness, cases=stats["cases"], stats=stats)
    return _verdict("rule_equivalence", cases=stats["cases"], stats=stats)

################################################################################
# Safety campaign
################################################################################


def safety_campaign(runs=1000, first_seed=0, workers=None, callback=None):
    """
    Run :code:`runs` randomized scenarios (see
    :func:`fastpaxos.simulation.campaign_scenario`) and check each trace.

    Arguments:

        runs(:code:`int`): Number of simulated seeds.
        first_seed(:code:`int`): First seed.
        workers(:code:`int`): Number of worker processes.
        callback: Optional function called with every
            :class:`fastpaxos.simulation.SeedResult`.

    Returns:

        A :class:`Verdict` that fails with the first failing seed as witness.
    """
    from fastpaxos.simulation import campaign_scenario, run_jobs

    jobs = []
    for seed in range(first_seed, first_seed + runs):
        scenario = campaign_scenario(seed)
        jobs.append((scenario, scenario.faults, seed))
    results = run_jobs(jobs, workers)

    stats = {"decided": 0, "truncated": 0}
    witness = None
    for r in results:
        if callback is not None:
            callback(r)
        stats["decided"] += int(r.latency is not None)
        stats["truncated"] += int(r.truncated)
        safety = [v for v in r.failures if v.property != "expectation"]
        if safety and witness is None:
            witness = {"seed": r.seed,
                       "failed": [v.property for v in safety],
                       "detail": safety[0].detail}
    logger.info("Safety campaign over %d seeds: %d decided.", runs,
                stats["decided"])
    if witness is not None:
        return _verdict("safety_campaign",
                        (None, "seed {} violates {}".format(
                            witness["seed"], ", ".join(witness["failed"]))),
                        witness=witness, cases=runs, stats=stats)
    return _verdict("safety_campaign", cases=runs, stats=stats)
