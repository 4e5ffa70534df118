"""
fastpaxos.rules
===============

The coordinator's value selection rules of Fast Paxos.

When a coordinator starts round :math:`i` it collects the last votes
:math:`(vr(a), vv(a))` of a set :math:`Q` of acceptors. Let :math:`k` be the
largest voted round in :math:`Q` and :math:`V` the set of values voted in
round :math:`k`. The rules decide whether the coordinator is bound to a value
(:class:`Mandated`) or may pick any proposed value (:class:`Free`).

The module provides

1. :func:`pick_value_original`, the general rule using the :math:`O4`
   condition, which is evaluated either by counting votes or, as a test
   oracle, by enumerating all candidate :math:`k`-quorums
   (:func:`o4_holds_oracle`),

2. :func:`pick_value_intermediate` and :func:`pick_value_unchecked`, the two
   intermediate rewritings which lead from the original rule to the
   simplified one,

3. :func:`pick_value_simplified`, the final rule which only looks for a
   single most often voted value and needs neither quorum sizes nor round
   types.

Rules never choose among proposals themselves. Resolving :class:`Free` against
the pool of proposed values is left to the coordinator.

Reference
=========
"""
import functools
import logging
from abc import ABCMeta, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Hashable, Mapping, Optional

import numpy as np

from fastpaxos.errors import ReportSetError
from fastpaxos.quorum import RoundType, quorum_size

logger = logging.getLogger(__name__)

#: Largest universe for which the O4 oracle enumerates subsets.
ORACLE_MAX_ACCEPTORS = 20

################################################################################
# Reports and tallies
################################################################################


@dataclass(frozen=True)
class Phase1bReport:
    """
    The last vote reported by an acceptor in Phase 1b.

    Round 0 is reserved for acceptors which haven't voted yet, in which case
    the voted value must be :code:`None`.
    """
    acceptor_id: Hashable
    voted_round: int = 0
    voted_value: Optional[Any] = None

    def __post_init__(self):
        if self.voted_round < 0:
            raise ReportSetError("Negative voted round in report of {}."
                                 .format(self.acceptor_id))
        if (self.voted_round == 0) != (self.voted_value is None):
            raise ReportSetError(
                "Report of {} has voted round {} and value {!r}; round 0 must "
                "come with a null value and vice versa."
                .format(self.acceptor_id, self.voted_round, self.voted_value))

    @property
    def has_voted(self):
        return self.voted_round > 0


class ReportSet:
    """
    The set :math:`Q` of Phase 1b reports collected by a coordinator.

    Arguments:

        reports: Iterable of :class:`Phase1bReport` objects or of
            :code:`(acceptor_id, voted_round, voted_value)` tuples.

    Raises:

        ReportSetError: If two reports come from the same acceptor.
    """
    def __init__(self, reports=()):
        parsed = []
        seen = set()
        for r in reports:
            if not isinstance(r, Phase1bReport):
                r = Phase1bReport(*r)
            if r.acceptor_id in seen:
                raise ReportSetError("Duplicate report from acceptor {}."
                                     .format(r.acceptor_id))
            seen.add(r.acceptor_id)
            parsed.append(r)
        self._reports = tuple(parsed)

    @property
    def reports(self):
        return self._reports

    @property
    def acceptor_ids(self):
        return [r.acceptor_id for r in self._reports]

    def __len__(self):
        return len(self._reports)

    def __iter__(self):
        return iter(self._reports)

    def __eq__(self, other):
        return isinstance(other, ReportSet) and self._reports == other._reports

    def __repr__(self):
        return "ReportSet({})".format(list(self._reports))


def as_report_set(reports):
    if isinstance(reports, ReportSet):
        return reports
    return ReportSet(reports)


@dataclass(frozen=True)
class VoteTally:
    """
    Votes cast in the highest reported round.

    Attributes:

        max_round: The largest voted round :math:`k` (0 if nobody voted).
        value_counts: Mapping from each value in :math:`V` to the number
            :math:`T` of reports that voted for it in round :math:`k`.
    """
    max_round: int
    value_counts: Mapping[Any, int] = field(default_factory=dict)

    @property
    def values(self):
        return set(self.value_counts)

    def count(self, value):
        return self.value_counts.get(value, 0)

    def most_often_voted(self):
        """
        The single value voted most often in round :math:`k` or
        :code:`None` if there is no value or the top count is tied.
        """
        if not self.value_counts:
            return None
        ranked = sorted(self.value_counts.items(), key=lambda kv: -kv[1])
        if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
            return None
        return ranked[0][0]


def tally_votes(reports):
    """
    Compute :math:`k` and the vote counts of :math:`V` for a set of reports.

    Raises:

        ReportSetError: If :code:`reports` is empty or contains duplicate
            acceptors.
    """
    reports = as_report_set(reports)
    if len(reports) == 0:
        raise ReportSetError("Can't tally an empty report set.")
    k = max(r.voted_round for r in reports)
    if k == 0:
        return VoteTally(0, {})
    counts = Counter(r.voted_value for r in reports if r.voted_round == k)
    return VoteTally(k, dict(counts))

################################################################################
# Coordinator choices
################################################################################


class CoordinatorChoice:
    """Outcome of a coordinator rule."""
    @property
    def is_free(self):
        return isinstance(self, Free)


@dataclass(frozen=True)
class Mandated(CoordinatorChoice):
    """The coordinator must propose :code:`value`."""
    value: Any

    def __str__(self):
        return "Mandated({})".format(_printable(self.value))


@dataclass(frozen=True)
class Free(CoordinatorChoice):
    """The coordinator may propose any proposed value."""

    def __str__(self):
        return "Free"


FREE = Free()


def _printable(value):
    if isinstance(value, bytes):
        return value.decode("utf-8", errors="replace")
    return str(value)

################################################################################
# O4
################################################################################


def o4_count_threshold(config, q_size, k_round_type):
    """
    Minimum number of votes for :math:`w` in round :math:`k` among
    :code:`q_size` reports for which some :math:`k`-quorum :math:`R` agrees
    with the reports on :math:`Q \\cap R`.

    Assuming that every acceptor outside of :math:`Q` voted for :math:`w`, the
    smallest possible intersection is
    :math:`|Q| + |R| - N`.
    """
    return q_size + quorum_size(config, k_round_type) - config.n_acceptors


def o4_threshold(config, current_round_type, k_round_type=RoundType.FAST):
    """
    Vote count threshold for :math:`O4` when :math:`Q` is a minimum quorum
    of a round of type :code:`current_round_type`.

    For the case of interest, a fast round :math:`k`, this is
    :math:`N - E - F` if the current round is classic and :math:`N - 2E` if
    it is fast. In both cases the threshold is a majority of :math:`Q`.
    """
    q_size = quorum_size(config, current_round_type)
    return o4_count_threshold(config, q_size, k_round_type)


@functools.lru_cache(maxsize=None)
def _subset_matrix(n):
    """
    All subsets of :code:`n` elements as rows of a 0/1 matrix together with
    their sizes.
    """
    masks = np.arange(2 ** n, dtype=np.int64)
    members = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int32)
    return members, members.sum(axis=1)


def _disagreeing(reports, k, candidate):
    return {r.acceptor_id for r in reports
            if not (r.voted_round == k and r.voted_value == candidate)}


def o4_holds_oracle(reports, universe, config, k_round_type, candidate):
    """
    Evaluate :math:`O4(w)` by brute force: search all subsets :math:`R` of
    the acceptors for a :math:`k`-quorum such that every acceptor in
    :math:`Q \\cap R` reported a vote for :code:`candidate` in round
    :math:`k`.

    Arguments:

        reports: The report set :math:`Q`.
        universe: Identifiers of all :math:`N` acceptors.
        config(:class:`QuorumConfig`): The quorum configuration.
        k_round_type(:class:`RoundType`): Type of round :math:`k`.
        candidate: The value :math:`w`.

    Raises:

        ReportSetError: If :code:`universe` doesn't contain exactly
            :math:`N` acceptors, the reports aren't drawn from it or
            :math:`N` exceeds :data:`ORACLE_MAX_ACCEPTORS`.
    """
    reports = as_report_set(reports)
    universe = sorted(set(universe), key=str)
    n = len(universe)
    if n != config.n_acceptors:
        raise ReportSetError("Universe has {} acceptors but the configuration "
                             "has N={}.".format(n, config.n_acceptors))
    if n > ORACLE_MAX_ACCEPTORS:
        raise ReportSetError("The O4 oracle enumerates 2^N subsets and is "
                             "limited to N <= {}.".format(ORACLE_MAX_ACCEPTORS))
    unknown = set(reports.acceptor_ids) - set(universe)
    if unknown:
        raise ReportSetError("Reports from acceptors outside of the universe: "
                             "{}.".format(sorted(unknown, key=str)))

    k = tally_votes(reports).max_round
    if k == 0:
        return False

    bad_ids = _disagreeing(reports, k, candidate)
    bad = np.array([a in bad_ids for a in universe], dtype=np.int32)
    members, sizes = _subset_matrix(n)
    admissible = (members @ bad == 0) & (sizes >= quorum_size(config, k_round_type))
    return bool(np.any(admissible))


def o4_holds_count(reports, config, k_round_type, candidate):
    """
    Evaluate :math:`O4(w)` by counting: the closed form of
    :func:`o4_holds_oracle`.
    """
    reports = as_report_set(reports)
    tally = tally_votes(reports)
    if tally.max_round == 0:
        return False
    threshold = o4_count_threshold(config, len(reports), k_round_type)
    return tally.count(candidate) >= threshold

################################################################################
# Rules
################################################################################


def check_report_count(reports, config):
    """Raise :class:`ReportSetError` unless :code:`reports` covers a classic quorum."""
    if len(reports) < config.classic_quorum_size:
        raise ReportSetError("The rule needs at least a classic quorum of {} "
                             "reports, got {}."
                             .format(config.classic_quorum_size, len(reports)))


def _fill_universe(reports, config):
    ids = list(reports.acceptor_ids)
    i = 0
    while len(ids) < config.n_acceptors:
        i += 1
        filler = "_unreported{}".format(i)
        if filler not in ids:
            ids.append(filler)
    return ids


def _o4_evaluator(reports, config, k_round_type, o4_evaluator, universe):
    if o4_evaluator == "cardinality":
        return lambda w: o4_holds_count(reports, config, k_round_type, w)
    elif o4_evaluator == "oracle":
        if universe is None:
            universe = _fill_universe(reports, config)
        return lambda w: o4_holds_oracle(reports, universe, config,
                                         k_round_type, w)
    raise ValueError("O4 evaluator must be 'cardinality' or 'oracle', got {!r}."
                     .format(o4_evaluator))


def pick_value_original(reports,
                        config,
                        k_round_type,
                        o4_evaluator="cardinality",
                        universe=None):
    """
    The original coordinator rule.

    Arguments:

        reports: The report set :math:`Q`, at least a classic quorum.
        config(:class:`QuorumConfig`): The active quorum configuration.
        k_round_type(:class:`RoundType`): Type of the round :math:`k`.
        o4_evaluator(:code:`str`): :code:`"cardinality"` to evaluate
            :math:`O4` by counting votes or :code:`"oracle"` to enumerate
            quorums.
        universe: Optional identifiers of all acceptors, only used by the
            oracle. Unreported acceptors are filled in if not given.

    Raises:

        ReportSetError: If the report set is smaller than a classic quorum
            or more than one value satisfies :math:`O4`, which no execution
            of the protocol can produce.
    """
    reports = as_report_set(reports)
    check_report_count(reports, config)
    tally = tally_votes(reports)
    if tally.max_round == 0:
        return FREE
    if len(tally.values) == 1:
        return Mandated(next(iter(tally.values)))

    o4 = _o4_evaluator(reports, config, k_round_type, o4_evaluator, universe)
    satisfying = [w for w in sorted(tally.values, key=str) if o4(w)]
    if len(satisfying) > 1:
        raise ReportSetError("Values {} all satisfy O4; no execution of the "
                             "protocol produces such reports."
                             .format(satisfying))
    if satisfying:
        return Mandated(satisfying[0])
    return FREE


def pick_value_intermediate(reports,
                            config,
                            k_round_type,
                            o4_evaluator="cardinality",
                            universe=None):
    """
    First rewriting of the original rule: look for the single most often
    voted value before testing :math:`O4` on it.
    """
    reports = as_report_set(reports)
    check_report_count(reports, config)
    tally = tally_votes(reports)
    if tally.max_round == 0:
        return FREE
    if len(tally.values) == 1:
        return Mandated(next(iter(tally.values)))
    w = tally.most_often_voted()
    if w is None:
        return FREE
    o4 = _o4_evaluator(reports, config, k_round_type, o4_evaluator, universe)
    if o4(w):
        return Mandated(w)
    return FREE


def pick_value_unchecked(reports):
    """
    Second rewriting: the :math:`O4` test is dropped but the single element
    test is kept.
    """
    tally = tally_votes(reports)
    if tally.max_round == 0:
        return FREE
    if len(tally.values) == 1:
        return Mandated(next(iter(tally.values)))
    w = tally.most_often_voted()
    if w is None:
        return FREE
    return Mandated(w)


def pick_value_simplified(reports):
    """
    The simplified rule: if some value was voted most often in round
    :math:`k`, the coordinator must pick it.

    The rule is independent of the quorum configuration and of round types.
    The caller is responsible for passing at least a classic quorum of
    reports.
    """
    tally = tally_votes(reports)
    if tally.max_round == 0:
        return FREE
    w = tally.most_often_voted()
    if w is None:
        return FREE
    return Mandated(w)

################################################################################
# Rule objects
################################################################################


class CoordinatorRule(metaclass=ABCMeta):
    """
    Common interface of the rules as used by the coordinator and the command
    line interface.
    """
    name = None

    @abstractmethod
    def choose(self, reports, config, k_round_type):
        """
        Apply the rule to the report set :code:`reports`.

        Arguments:

            reports: The collected reports.
            config(:class:`QuorumConfig`): The active quorum configuration.
            k_round_type(:class:`RoundType`): Type of the highest reported
                round.

        Returns:

            A :class:`CoordinatorChoice`.
        """

    def __repr__(self):
        return "{}()".format(type(self).__name__)


class OriginalRule(CoordinatorRule):
    def __init__(self, o4_evaluator="cardinality"):
        self.o4_evaluator = o4_evaluator
        self.name = "original" if o4_evaluator == "cardinality" else "original-oracle"

    def choose(self, reports, config, k_round_type):
        return pick_value_original(reports, config, k_round_type,
                                   o4_evaluator=self.o4_evaluator)


class IntermediateRule(CoordinatorRule):
    name = "intermediate"

    def choose(self, reports, config, k_round_type):
        return pick_value_intermediate(reports, config, k_round_type)


class UncheckedRule(CoordinatorRule):
    name = "unchecked"

    def choose(self, reports, config, k_round_type):
        return pick_value_unchecked(reports)


class SimplifiedRule(CoordinatorRule):
    name = "simplified"

    def choose(self, reports, config, k_round_type):
        return pick_value_simplified(reports)


RULES = {
    "original": lambda: OriginalRule("cardinality"),
    "original-oracle": lambda: OriginalRule("oracle"),
    "intermediate": IntermediateRule,
    "unchecked": UncheckedRule,
    "simplified": SimplifiedRule,
}


def get_rule(name):
    """
    Look up a rule by name.

    Raises:

        ValueError: If there is no rule with the given name.
    """
    if isinstance(name, CoordinatorRule):
        return name
    try:
        return RULES[name]()
    except KeyError:
        raise ValueError("Unknown rule '{}'. Available rules: {}."
                         .format(name, ", ".join(sorted(RULES))))
