"""
fastpaxos.data
--------------

Bundled example scenarios.

Scenarios are looked up by name in the directories listed in the
:code:`FASTPAXOS_SCENARIO_PATH` environment variable, which uses the
platform's path separator, and then among the scenarios shipped with the
package. A name may also be the path of a scenario file.
"""
import glob
import logging
import os

from fastpaxos.errors import ScenarioError

logger = logging.getLogger(__name__)

bundled_path = os.path.join(os.path.dirname(__file__), "scenarios")
SUFFIX = ".scn"


def search_path():
    """The directories searched for scenarios, in order."""
    paths = []
    if "FASTPAXOS_SCENARIO_PATH" in os.environ:
        paths += [p for p in os.environ["FASTPAXOS_SCENARIO_PATH"].split(os.pathsep)
                  if p]
    paths.append(bundled_path)
    return paths


def list_scenarios():
    """Names of all scenarios on the search path."""
    names = set()
    for path in search_path():
        for f in glob.glob(os.path.join(path, "*" + SUFFIX)):
            names.add(os.path.basename(f)[:-len(SUFFIX)])
    return sorted(names)


def find_scenario(name):
    """
    Resolve a scenario name or path to a file.

    Raises:

        ScenarioError: If no such scenario exists.
    """
    if os.path.isfile(name):
        return name
    base = name if name.endswith(SUFFIX) else name + SUFFIX
    for path in search_path():
        candidate = os.path.join(path, base)
        if os.path.isfile(candidate):
            logger.debug("Scenario %s found in %s.", name, path)
            return candidate
    raise ScenarioError("No scenario '{}'. Available scenarios: {}."
                        .format(name, ", ".join(list_scenarios())))
