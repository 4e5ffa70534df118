"""
fastpaxos.errors
----------------

Exceptions raised by the :code:`fastpaxos` package. All of them derive from
:class:`FastPaxosError` so that callers such as the command line interface
can tell input and harness errors apart from unexpected failures.
"""


class FastPaxosError(Exception):
    """Base class of all errors raised by :code:`fastpaxos`."""


class InvalidConfigError(FastPaxosError, ValueError):
    """A quorum configuration or policy violates the quorum requirements."""


class ReportSetError(FastPaxosError, ValueError):
    """
    A set of Phase 1b reports can't be fed to a coordinator rule, e.g.
    because it contains two reports of the same acceptor or is smaller
    than a classic quorum.
    """


class ScenarioError(FastPaxosError, ValueError):
    """A scenario or input file is malformed or references unknown agents."""


class ProtocolViolation(FastPaxosError):
    """
    Raised by a learner that observes quorums of votes for two distinct
    values. This must never happen in a correct execution.
    """
    def __init__(self, message, learned=None, conflicting=None):
        super().__init__(message)
        self.learned = learned
        self.conflicting = conflicting


class ReplayDivergence(FastPaxosError):
    """A replayed run produced a trace that differs from the recorded one."""
    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class NoDecision(FastPaxosError):
    """A trace contains no learn event."""


class RoundError(FastPaxosError, ValueError):
    """A coordinator was asked to start a round it can't start."""
