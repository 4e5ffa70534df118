"""
Tests for the file formats in :mod:`fastpaxos.io`, including the storing of
simulation results to NetCDF files.
"""
import io
import os
import shutil
import tempfile

import numpy as np
import pytest

from fastpaxos import io as fio
from fastpaxos.checker import PROPERTIES
from fastpaxos.errors import ScenarioError
from fastpaxos.simulation import Scenario, Simulation

import sys
sys.path.append(os.path.dirname(__file__))
from utils.setup import load_scenario


def test_records():
    """
    Records are written one per line and read back unchanged.
    """
    records = [{"pos": 0, "msg": {"kind": "phase2b", "value": "x"}},
               {"pos": 1, "restored": {"learned": None}, "at": [3, 4]}]
    text = fio.dump_records(records)
    assert(len(text.splitlines()) == 2)
    assert(all(line.startswith("- {") for line in text.splitlines()))
    assert(fio.load_records(text) == records)
    assert(fio.load_records(io.StringIO(text)) == records)


def test_malformed_records():
    with pytest.raises(ScenarioError):
        fio.load_records("pos: 0\n")
    with pytest.raises(ScenarioError):
        fio.load_records("- {pos: [0\n")


def test_documents():
    path = tempfile.mkdtemp()
    try:
        filename = os.path.join(path, "scenario.scn")
        scenario = load_scenario("collision")
        scenario.write(filename)
        assert(fio.load_document(filename)["format_version"] == 1)
        assert(Scenario.read(filename).to_dict() == scenario.to_dict())

        with open(filename, "w") as f:
            f.write("format_version: 2\nname: future\n")
        with pytest.raises(ScenarioError):
            fio.load_document(filename)
        with open(filename, "w") as f:
            f.write("- just\n- a list\n")
        with pytest.raises(ScenarioError):
            fio.load_document(filename)
        with pytest.raises(ScenarioError):
            fio.load_document(os.path.join(path, "missing.scn"))
    finally:
        shutil.rmtree(path)


def test_dump_document():
    text = fio.dump_document({"name": "x"})
    assert("format_version: 1" in text)


def test_output_file():
    """
    Results of a seed range are appended along the run dimension.
    """
    path = tempfile.mkdtemp()
    try:
        output_file = os.path.join(path, "results.nc")
        simulation = Simulation(load_scenario("fast_happy"))
        simulation.initialize_output_file(output_file)
        simulation.run_seeds(range(3))

        assert(simulation.output_file.dimensions["run"] == 3)
        results = simulation.output_file.load()
        assert(np.all(results["seed"] == [0, 1, 2]))
        assert(np.all(results["latency"] == 2))
        assert(np.all(results["n_acceptors"] == 3))
        for p in PROPERTIES:
            assert(np.all(results["passed_" + p] == 1))

        # Appending to an existing file.
        appended = fio.OutputFile(output_file, PROPERTIES, mode="a")
        for r in simulation.run_seeds([9], callback=lambda r: None):
            appended.store_results(r)
        assert(appended.dimensions["run"] == 4)
    finally:
        shutil.rmtree(path)


def test_undecided_results():
    path = tempfile.mkdtemp()
    try:
        output_file = os.path.join(path, "results.nc")
        simulation = Simulation(load_scenario("drop_all"))
        simulation.initialize_output_file(output_file)
        simulation.run_seeds([0])
        results = simulation.output_file.load()
        assert(results["latency"][0] == -1)
        assert(results["learned_round"][0] == 0)
    finally:
        shutil.rmtree(path)
