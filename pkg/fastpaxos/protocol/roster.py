"""
fastpaxos.protocol.roster
-------------------------

The agents taking part in an execution, grouped by role. Agent identifiers
are the role letter followed by a 1-based index, e.g. :code:`a3` for the
third acceptor.
"""
from dataclasses import dataclass
from typing import Tuple

from fastpaxos.errors import ScenarioError

ROLE_PREFIXES = {"acceptor": "a", "coordinator": "c",
                 "proposer": "p", "learner": "l"}


@dataclass(frozen=True)
class Roster:
    acceptors: Tuple[str, ...]
    coordinators: Tuple[str, ...]
    proposers: Tuple[str, ...]
    learners: Tuple[str, ...]

    @classmethod
    def build(cls, acceptors, coordinators=1, proposers=1, learners=1):
        """
        Create a roster with the given number of agents per role.

        Raises:

            ScenarioError: If there are no acceptors, coordinators or
                learners.
        """
        if acceptors < 1 or coordinators < 1 or learners < 1 or proposers < 0:
            raise ScenarioError("A roster needs at least one acceptor, one "
                                "coordinator and one learner.")

        def ids(role, n):
            return tuple("{}{}".format(ROLE_PREFIXES[role], i + 1)
                         for i in range(n))

        return cls(ids("acceptor", acceptors),
                   ids("coordinator", coordinators),
                   ids("proposer", proposers),
                   ids("learner", learners))

    @property
    def agents(self):
        return self.acceptors + self.coordinators + self.proposers + self.learners

    def role(self, agent_id):
        for role, members in (("acceptor", self.acceptors),
                              ("coordinator", self.coordinators),
                              ("proposer", self.proposers),
                              ("learner", self.learners)):
            if agent_id in members:
                return role
        raise ScenarioError("Unknown agent '{}'.".format(agent_id))

    def __contains__(self, agent_id):
        return agent_id in self.agents
