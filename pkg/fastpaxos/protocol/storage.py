"""
fastpaxos.protocol.storage
--------------------------

Stable storage for agents that crash and recover.

An agent's durable state is a plain dictionary snapshot. Writes are
synchronous: once :meth:`StableStore.write` returns, the snapshot survives
any later crash of the agent. The simulator performs the write before it
sends any message produced by the same event.
"""
import copy
import logging

logger = logging.getLogger(__name__)


class StableStore:
    def __init__(self):
        self._snapshots = {}
        self.n_writes = 0

    def write(self, key, snapshot):
        self._snapshots[key] = copy.deepcopy(snapshot)
        self.n_writes += 1
        logger.debug("Durable write for %s: %s", key, snapshot)

    def read(self, key, default=None):
        if key not in self._snapshots:
            return copy.deepcopy(default)
        return copy.deepcopy(self._snapshots[key])

    def __contains__(self, key):
        return key in self._snapshots
