"""
fastpaxos.protocol.rounds
-------------------------

Round identifiers. Rounds are numbered by positive integers and each
number determines the coordinator of the round and its type. The mapping is
defined by a :class:`RoundScheme`.
"""
from dataclasses import dataclass

from fastpaxos.errors import ScenarioError
from fastpaxos.quorum import RoundType


@dataclass(frozen=True)
class RoundId:
    number: int
    type: RoundType
    coordinator: str

    def __post_init__(self):
        if self.number < 1:
            raise ValueError("Round numbers start at 1, got {}."
                             .format(self.number))

    @property
    def is_fast(self):
        return self.type is RoundType.FAST


_FAST_PREDICATES = {
    "odd": lambda r: r % 2 == 1,
    "even": lambda r: r % 2 == 0,
    "all": lambda r: True,
    "none": lambda r: False,
}


class RoundScheme:
    """
    Deterministic mapping from round numbers to round types and
    coordinators.

    By default round :math:`r` is fast iff it is odd and is coordinated by
    coordinator :math:`r \\bmod C` of the :math:`C` configured coordinators.

    Arguments:

        coordinators: Identifiers of the coordinator-capable agents in a
            fixed order.
        fast(:code:`str`): Which rounds are fast: :code:`odd`, :code:`even`,
            :code:`all` or :code:`none`.
        overrides(:code:`dict`): Optional mapping from round numbers to
            round types overriding :code:`fast`.
    """
    def __init__(self, coordinators, fast="odd", overrides=None):
        self.coordinators = tuple(coordinators)
        if not self.coordinators:
            raise ScenarioError("A round scheme needs at least one coordinator.")
        if fast not in _FAST_PREDICATES:
            raise ScenarioError("Unknown fast round predicate '{}', expected one "
                                "of {}.".format(fast, ", ".join(_FAST_PREDICATES)))
        self.fast = fast
        self.overrides = {int(r): RoundType.parse(t)
                          for r, t in (overrides or {}).items()}

    def round_type(self, number):
        if number in self.overrides:
            return self.overrides[number]
        if _FAST_PREDICATES[self.fast](number):
            return RoundType.FAST
        return RoundType.CLASSIC

    def coordinator(self, number):
        return self.coordinators[number % len(self.coordinators)]

    def round_id(self, number):
        return RoundId(number, self.round_type(number), self.coordinator(number))

    def next_round(self, after, coordinator, round_type=None, limit=10000):
        """
        The smallest round above :code:`after` that is coordinated by
        :code:`coordinator` and, if given, has type :code:`round_type`.
        """
        if coordinator not in self.coordinators:
            raise ScenarioError("{} is not a coordinator.".format(coordinator))
        for r in range(max(after, 0) + 1, max(after, 0) + 1 + limit):
            if self.coordinator(r) != coordinator:
                continue
            if round_type is not None and self.round_type(r) is not round_type:
                continue
            return r
        raise ScenarioError("No {} round of {} within {} rounds after {}."
                            .format(round_type or "", coordinator, limit, after))

    def to_dict(self):
        d = {"fast": self.fast}
        if self.overrides:
            d["overrides"] = {r: str(t) for r, t in sorted(self.overrides.items())}
        return d
