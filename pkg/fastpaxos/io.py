"""
fastpaxos.io
============

The `fastpaxos.io` module provides the file formats of the package.

Scenario, report and verdict files are single YAML documents. Traces are
YAML sequences with one flow-style record per line, so that they can be
streamed, diffed and compared byte by byte. Every file carries a
:code:`format_version` field.

Results of simulation campaigns are stored in NetCDF files by the
:class:`OutputFile` class, with one entry per simulated seed along the
unlimited :code:`run` dimension.
"""
import io
import logging
import os
from copy import copy

import numpy as np
import yaml
from netCDF4 import Dataset

from fastpaxos.errors import ScenarioError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

################################################################################
# YAML documents
################################################################################


def load_document(source, kind=None):
    """
    Load a single YAML document and check its format version.

    Arguments:

        source: Path of the file or an open text stream.
        kind(:code:`str`): Optional description of the expected document
            used in error messages.

    Raises:

        ScenarioError: If the file can't be read or parsed, or has an
            unsupported format version.
    """
    what = kind or "document"
    try:
        if hasattr(source, "read"):
            data = yaml.safe_load(source)
        else:
            with open(os.path.expanduser(source), encoding="utf-8") as f:
                data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ScenarioError("Could not read {} {}: {}".format(what, source, e))
    if not isinstance(data, dict):
        raise ScenarioError("The {} {} is not a mapping.".format(what, source))
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ScenarioError("Unsupported format_version {!r} in {} {}, expected "
                            "{}.".format(version, what, source, FORMAT_VERSION))
    return data


def dump_document(data, path=None):
    """
    Write :code:`data` as a YAML document. Returns the text if no path is
    given.
    """
    data = dict(data)
    data.setdefault("format_version", FORMAT_VERSION)
    text = yaml.safe_dump(data, sort_keys=True, default_flow_style=False)
    if path is None:
        return text
    with open(os.path.expanduser(path), "w", encoding="utf-8") as f:
        f.write(text)
    return text

################################################################################
# Record streams
################################################################################


def dump_record(record):
    """A record as a single line of a YAML sequence."""
    text = yaml.safe_dump(record, default_flow_style=True, sort_keys=True,
                          width=float("inf"))
    return "- " + text.strip() + "\n"


def dump_records(records):
    return "".join(dump_record(r) for r in records)


def load_records(source):
    """
    Read a record stream. Each line is parsed on its own so that truncated
    files still yield all complete records.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    elif isinstance(source, str) and "\n" in source:
        lines = source.splitlines()
    else:
        with open(os.path.expanduser(source), encoding="utf-8") as f:
            lines = f.read().splitlines()
    records = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        if not line.startswith("- "):
            raise ScenarioError("Line {} is not a record: {!r}".format(i + 1, line))
        try:
            records.append(yaml.safe_load(io.StringIO(line[2:])))
        except yaml.YAMLError as e:
            raise ScenarioError("Malformed record on line {}: {}".format(i + 1, e))
    return records

################################################################################
# Campaign archive
################################################################################


class OutputFile:
    """
    Class to store results of simulation campaigns in a NetCDF file.
    """
    def __init__(self,
                 filename,
                 properties,
                 mode="w"):
        """
        Create output file to store campaign results to.

        Arguments:

            filename(str): Path of the output file.
            properties(list): Names of the checked properties. One variable
                holding the verdicts is created for each of them.
            mode(str): :code:`w` to create a new file, :code:`a` to append
                to an existing one.
        """
        filename = os.path.expanduser(filename)
        self.filename = filename
        self.mode = mode
        self.properties = list(properties)

        if os.path.isfile(self.filename):
            if mode == "w":
                os.remove(self.filename)
                self._initialized = False
            else:
                self._initialized = True
        else:
            self._initialized = False

    @property
    def initialized(self):
        return self._initialized

    def initialize(self):
        """
        Create the :code:`run` dimension and all variables. This function is
        run automatically before the first entry is stored in the file.
        """
        self.file_handle = Dataset(self.filename, mode="w")
        try:
            root = self.file_handle
            root.format_version = FORMAT_VERSION
            root.createDimension("run", None)
            for name in ["seed", "n_acceptors", "max_faults_fast",
                         "max_faults_classic", "n_events", "latency",
                         "learned_round"]:
                root.createVariable(name, "i8", ("run",))
            root.createVariable("truncated", "i1", ("run",))
            for p in self.properties:
                root.createVariable("passed_" + p, "i1", ("run",))
        finally:
            self._initialized = True
            self.close()

    def store_results(self, result):
        """
        Append the result of one simulated seed.

        Arguments:

            result: A :class:`fastpaxos.simulation.SeedResult`.
        """
        if not self.initialized:
            self.initialize()
        self.open()
        try:
            root = self.file_handle
            i = root.dimensions["run"].size
            root["seed"][i] = result.seed
            root["n_acceptors"][i] = result.config.n_acceptors
            root["max_faults_fast"][i] = result.config.max_faults_fast
            root["max_faults_classic"][i] = result.config.max_faults_classic
            root["n_events"][i] = result.n_events
            root["latency"][i] = -1 if result.latency is None else result.latency
            root["learned_round"][i] = result.learned_round or 0
            root["truncated"][i] = int(result.truncated)
            verdicts = {v.property: v for v in result.verdicts}
            for p in self.properties:
                root["passed_" + p][i] = int(verdicts[p].passed) if p in verdicts else -1
        finally:
            self.close()

    def load(self):
        """
        Read all stored results as a dictionary of numpy arrays.
        """
        self.open()
        try:
            return {name: np.array(v[:]) for name, v in
                    self.file_handle.variables.items()}
        finally:
            self.close()

    @property
    def dimensions(self):
        dimensions = {}
        self.open()
        try:
            for d, dim in self.file_handle.dimensions.items():
                dimensions[d] = dim.size
        finally:
            self.close()
        return dimensions

    def open(self):
        if self.initialized:
            if hasattr(self, "file_handle"):
                if not self.file_handle.isopen():
                    self.file_handle = Dataset(self.filename, mode="r+")
            else:
                self.file_handle = Dataset(self.filename, mode="r+")

    def close(self):
        if hasattr(self, "file_handle") and self.file_handle.isopen():
            self.file_handle.close()

    def __getstate__(self):
        state = copy(self.__dict__)
        state.pop("file_handle", None)
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
