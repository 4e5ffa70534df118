"""
fastpaxos.quorum
================

Cardinality-based quorum configurations for Fast Paxos.

With :math:`N` acceptors, at most :math:`F` failed acceptors in classic
rounds and at most :math:`E` in fast rounds, a classic quorum is any set of
:math:`N - F` acceptors and a fast quorum any set of :math:`N - E`
acceptors. The quorum requirements reduce to

    - :math:`N > 2F`
    - :math:`N > 2E + F`

and we can always assume :math:`E \\leq F`.

The :class:`QuorumPolicy` classes choose :math:`E` and :math:`F` for a
given :math:`N`. :class:`MaximizeE` tolerates the same number of failures in
both kinds of rounds, :class:`MaximizeF` tolerates as many failures as
possible in classic rounds, and :class:`Explicit` takes the values as they
are given.

Reference
=========
"""
import enum
import logging
from abc import ABCMeta, abstractmethod
from dataclasses import dataclass

import numpy as np

from fastpaxos.errors import InvalidConfigError

logger = logging.getLogger(__name__)

################################################################################
# Round types
################################################################################


class RoundType(enum.Enum):
    """The two types of Fast Paxos rounds."""
    FAST = "fast"
    CLASSIC = "classic"

    @classmethod
    def parse(cls, text):
        """
        Parse round type from its name (case insensitive).

        Raises:

            InvalidConfigError: If :code:`text` names no round type.
        """
        if isinstance(text, RoundType):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise InvalidConfigError("Unknown round type '{}', expected 'fast' "
                                     "or 'classic'.".format(text))

    def __str__(self):
        return self.value

################################################################################
# Quorum configuration
################################################################################


def validate_config(n, e, f):
    """
    Check whether :code:`n` acceptors tolerating :code:`f` failures in
    classic and :code:`e` failures in fast rounds satisfy the quorum
    requirements.

    Returns:

        :code:`True` iff :math:`n > 2f`, :math:`n > 2e + f` and
        :math:`e \\leq f`. Arguments outside their domain (:code:`n < 1`
        or negative fault counts) yield :code:`False`.
    """
    if n < 1 or e < 0 or f < 0:
        return False
    return n > 2 * f and n > 2 * e + f and e <= f


@dataclass(frozen=True)
class QuorumConfig:
    """
    A validated quorum configuration.

    Quorum sizes are stored as exact minimums. Any superset of a minimum
    quorum is a quorum as well.

    Attributes:

        n_acceptors(:code:`int`): The number of acceptors :math:`N`.
        max_faults_classic(:code:`int`): The number :math:`F` of faulty
            acceptors tolerated in classic rounds.
        max_faults_fast(:code:`int`): The number :math:`E` of faulty
            acceptors tolerated in fast rounds.
    """
    n_acceptors: int
    max_faults_classic: int
    max_faults_fast: int

    def __post_init__(self):
        if not validate_config(self.n_acceptors,
                               self.max_faults_fast,
                               self.max_faults_classic):
            raise InvalidConfigError(
                "N={}, E={}, F={} violates the quorum requirements N > 2F, "
                "N > 2E + F and E <= F.".format(self.n_acceptors,
                                                self.max_faults_fast,
                                                self.max_faults_classic))

    @property
    def classic_quorum_size(self):
        return self.n_acceptors - self.max_faults_classic

    @property
    def fast_quorum_size(self):
        return self.n_acceptors - self.max_faults_fast

    def quorum_size(self, round_type):
        return quorum_size(self, round_type)

    def is_quorum(self, acceptors, round_type):
        """
        Whether the acceptor set :code:`acceptors` is a quorum for rounds of
        type :code:`round_type`.
        """
        return len(set(acceptors)) >= quorum_size(self, round_type)

    def to_dict(self):
        return {"n": self.n_acceptors,
                "e": self.max_faults_fast,
                "f": self.max_faults_classic,
                "classic_quorum": self.classic_quorum_size,
                "fast_quorum": self.fast_quorum_size}

    def __str__(self):
        return "F={} E={} Qc={} Qf={}".format(self.max_faults_classic,
                                              self.max_faults_fast,
                                              self.classic_quorum_size,
                                              self.fast_quorum_size)


def quorum_size(config, round_type):
    """
    The minimum quorum size of :code:`config` for rounds of type
    :code:`round_type`.
    """
    if RoundType.parse(round_type) is RoundType.FAST:
        return config.fast_quorum_size
    return config.classic_quorum_size

################################################################################
# Quorum policies
################################################################################


class QuorumPolicy(metaclass=ABCMeta):
    """
    Abstract base class for the rules that choose :math:`E` and :math:`F`
    for a given number of acceptors.
    """
    @abstractmethod
    def faults(self, n):
        """
        Return the pair :code:`(e, f)` of tolerated faults for :code:`n`
        acceptors.
        """

    @property
    @abstractmethod
    def name(self):
        """Name of the policy as used on the command line."""

    def __repr__(self):
        return self.name


class MaximizeE(QuorumPolicy):
    """
    Tolerate as many faults in fast rounds as possible, which leads to
    :math:`E = F = \\lceil N/3 \\rceil - 1`.
    """
    name = "max-e"

    def faults(self, n):
        f = max(-(-n // 3) - 1, 0)
        return f, f


class MaximizeF(QuorumPolicy):
    """
    Tolerate as many faults in classic rounds as possible:
    :math:`F = \\lceil N/2 \\rceil - 1` and
    :math:`E = \\lfloor N/4 \\rfloor`.
    """
    name = "max-f"

    def faults(self, n):
        f = max(-(-n // 2) - 1, 0)
        e = min(n // 4, f)
        return e, f


class Explicit(QuorumPolicy):
    """
    Explicitly given fault counts. They are checked when a configuration
    is derived from the policy.
    """
    def __init__(self, e, f):
        self.e = int(e)
        self.f = int(f)

    @property
    def name(self):
        return "{},{}".format(self.e, self.f)

    def faults(self, n):
        return self.e, self.f

    def __eq__(self, other):
        return (isinstance(other, Explicit)
                and (self.e, self.f) == (other.e, other.f))

    def __hash__(self):
        return hash((self.e, self.f))


def parse_policy(text):
    """
    Parse a quorum policy from its textual representation.

    Arguments:

        text(:code:`str`): One of :code:`max-e`, :code:`max-f`, or explicit
            fault counts given as :code:`E,F` or :code:`explicit:E,F`.

    Raises:

        InvalidConfigError: If :code:`text` can't be parsed.
    """
    if isinstance(text, QuorumPolicy):
        return text
    s = str(text).strip().lower()
    if s in ("max-e", "maximize-e", "maxe"):
        return MaximizeE()
    if s in ("max-f", "maximize-f", "maxf"):
        return MaximizeF()
    if s.startswith("explicit:"):
        s = s[len("explicit:"):]
    try:
        e, f = [int(v) for v in s.split(",")]
    except ValueError:
        raise InvalidConfigError("Unknown quorum policy '{}'. Expected max-e, "
                                 "max-f or E,F.".format(text))
    return Explicit(e, f)


def derive_config(n, policy):
    """
    Derive the quorum configuration for :code:`n` acceptors.

    Arguments:

        n(:code:`int`): The number of acceptors.
        policy(:class:`QuorumPolicy` or :code:`str`): The policy used to
            choose :math:`E` and :math:`F`.

    Raises:

        InvalidConfigError: If :code:`n < 1` or an explicit policy violates
            the quorum requirements.
    """
    if n < 1:
        raise InvalidConfigError("At least one acceptor is required, got "
                                 "n={}.".format(n))
    policy = parse_policy(policy)
    e, f = policy.faults(n)
    config = QuorumConfig(n, f, e)
    logger.debug("Derived %s for n=%d with policy %s.", config, n, policy)
    return config

################################################################################
# Intersection check
################################################################################


def _subset_masks(n, min_size):
    masks = np.arange(2 ** n, dtype=np.int64)
    sizes = np.zeros(masks.shape, dtype=np.int64)
    for i in range(n):
        sizes += (masks >> i) & 1
    return masks[sizes >= min_size]


def check_intersection(config):
    """
    Exhaustively check the quorum intersection requirements of
    :code:`config` by enumerating acceptor subsets as bit masks:

        1. any two quorums intersect,
        2. any quorum and any two fast quorums share a member.

    Raises:

        InvalidConfigError: If the configuration has more than 10 acceptors.
    """
    n = config.n_acceptors
    if n > 10:
        raise InvalidConfigError("Exhaustive intersection check is limited to "
                                 "n <= 10, got n={}.".format(n))
    quorums = _subset_masks(n, config.classic_quorum_size)
    fast = _subset_masks(n, config.fast_quorum_size)

    if np.any(np.bitwise_and.outer(quorums, quorums) == 0):
        return False

    pairs = np.bitwise_and.outer(fast, fast).ravel()
    for q in quorums:
        if np.any(np.bitwise_and(pairs, q) == 0):
            return False
    return True
