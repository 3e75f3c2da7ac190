"""
Shared fixtures.
Loads the shipped configuration with file logging disabled and gives access to the corpus.
"""

import os

import pytest

from algebra.gates import named_gate
from frontend.ast import CzOp, QubitRef, SqOp
from frontend.parser import parse
from logging_config import setup_logging
from utils.misc import load_config, update_config_value
from verifier.simulator import SimCircuit, deviation

ROOT = os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))
CORPUS_DIR = os.path.join(ROOT, "corpus")
CONFIG_PATH = os.path.join(ROOT, "config.yaml")


def quiet_config():
    config = load_config(CONFIG_PATH)
    update_config_value(config, "logging.to_files", False)
    return config


@pytest.fixture(scope="session", autouse=True)
def _logging():
    setup_logging(quiet_config())


@pytest.fixture
def config():
    return quiet_config()


@pytest.fixture
def corpus_path():
    def path(name):
        return os.path.join(CORPUS_DIR, name)

    return path


@pytest.fixture
def corpus():
    """Parse a corpus program by file name."""

    def load(name):
        with open(os.path.join(CORPUS_DIR, name), "r", encoding="utf-8") as f:
            return parse(f.read())

    return load


def q(slope, intercept, array="q"):
    return QubitRef(array, slope, intercept)


def sq(name, target, *params):
    return SqOp(named_gate(name, params), target)


def cz(a, b):
    return CzOp(a, b)


def circuit_of(instructions, i=None):
    """Concrete circuit of known-gate instructions, frozen at iteration ``i`` when given."""
    circuit = SimCircuit()
    for instr in instructions:
        if i is not None:
            instr = instr.freeze(i)
        if isinstance(instr, CzOp):
            circuit.cz((instr.a.array, instr.a.intercept), (instr.b.array, instr.b.intercept), instr.variant)
        else:
            circuit.sq((instr.target.array, instr.target.intercept), instr.gate.matrix)
    return circuit


def same_circuit(expected, actual, tol=1e-7):
    qubits = sorted(set(expected.qubits) | set(actual.qubits))
    return deviation(expected, actual, qubits=qubits) <= tol
