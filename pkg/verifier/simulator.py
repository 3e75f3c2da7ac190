"""
Circuit simulator.
Contains concrete circuits over named qubits and their comparison up to a global phase,
either through the full unitary or through a batch of random input states.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from algebra.gates import STANDARD_CZ, CzVariant
from logging_config import get_logger

logger = get_logger()

Qubit = Tuple[str, int]

UNITARY = "unitary"
STATES = "states"
AUTO = "auto"
UNITARY_MAX_QUBITS = 10


@dataclass
class SimCircuit:
    """Gate sequence on concrete qubits: ``("sq", q, matrix)`` or ``("cz", a, b, variant)``."""

    ops: List[tuple] = field(default_factory=list)

    def sq(self, qubit: Qubit, matrix: np.ndarray):
        self.ops.append(("sq", qubit, np.asarray(matrix, dtype=complex)))

    def cz(self, a: Qubit, b: Qubit, variant: CzVariant = STANDARD_CZ):
        if a == b:
            raise ValueError(f"CZ on a single qubit {a}")
        self.ops.append(("cz", a, b, variant))

    def extend(self, other: "SimCircuit"):
        self.ops.extend(other.ops)

    @property
    def qubits(self) -> List[Qubit]:
        seen = set()
        for op in self.ops:
            seen.update(op[1:2] if op[0] == "sq" else op[1:3])
        return sorted(seen)

    def __len__(self) -> int:
        return len(self.ops)


class QubitMap:
    """Axis of every touched qubit in the simulated register."""

    def __init__(self, qubits: Iterable[Qubit]):
        self.order = sorted(set(qubits))
        self.axis: Dict[Qubit, int] = {q: k for k, q in enumerate(self.order)}

    def __len__(self) -> int:
        return len(self.order)


def apply(circuit: SimCircuit, psi: np.ndarray, qubits: QubitMap) -> np.ndarray:
    """
    Run ``circuit`` on a batch of states.

    Args:
        psi: Array of shape ``(2,) * n + (batch,)``

    Returns:
        np.ndarray: the evolved batch, same shape
    """
    n = len(qubits)
    for op in circuit.ops:
        if op[0] == "sq":
            k = qubits.axis[op[1]]
            psi = np.moveaxis(np.tensordot(op[2], psi, axes=([1], [k])), 0, k)
        else:
            _, a, b, variant = op
            index = [slice(None)] * (n + 1)
            index[qubits.axis[a]] = variant.x
            index[qubits.axis[b]] = variant.y
            psi = psi.copy()
            psi[tuple(index)] *= -1
    return psi


def unitary(circuit: SimCircuit, qubits: QubitMap) -> np.ndarray:
    """Matrix of ``circuit`` with the first qubit of the map as the most significant bit."""
    dim = 2 ** len(qubits)
    psi = np.eye(dim, dtype=complex).reshape((2,) * len(qubits) + (dim,))
    return apply(circuit, psi, qubits).reshape(dim, dim)


def random_states(n: int, count: int, seed: int) -> np.ndarray:
    """``count`` normalised random states on ``n`` qubits, as columns."""
    rng = np.random.default_rng(seed)
    dim = 2 ** n
    states = rng.standard_normal((dim, count)) + 1j * rng.standard_normal((dim, count))
    return states / np.linalg.norm(states, axis=0)


def phase_aligned_deviation(expected: np.ndarray, actual: np.ndarray) -> float:
    """
    Largest entry-wise difference after removing one global phase.

    The phase is read off the largest entry of the first column of ``expected``.
    """
    column = expected[:, 0]
    k = int(np.argmax(np.abs(column)))
    if abs(actual[k, 0]) == 0:
        return float(np.max(np.abs(expected - actual)))
    phase = column[k] / actual[k, 0]
    phase /= abs(phase)
    return float(np.max(np.abs(expected - phase * actual)))


def deviation(c1: SimCircuit, c2: SimCircuit, mode: str = AUTO, states: int = 8,
              seed: int = 0, qubits: Optional[Sequence[Qubit]] = None) -> float:
    """
    Distance between two circuits up to a global phase.

    Args:
        mode: ``unitary``, ``states`` or ``auto`` (unitary up to ten qubits)
        states: Number of random input states in state mode
        seed: Seed for the input states
        qubits: Register to simulate; defaults to the qubits either circuit touches
    """
    register = QubitMap(qubits if qubits is not None else c1.qubits + c2.qubits)
    n = len(register)
    if mode == AUTO:
        mode = UNITARY if n <= UNITARY_MAX_QUBITS else STATES
    if mode == UNITARY:
        logger.debug(f"Comparing unitaries on {n} qubit(s)")
        return phase_aligned_deviation(unitary(c1, register), unitary(c2, register))
    if mode != STATES:
        raise ValueError(f"Unknown simulation mode {mode!r}")
    logger.debug(f"Comparing {states} random state(s) on {n} qubit(s)")
    psi = random_states(n, states, seed).reshape((2,) * n + (states,))
    out1 = apply(c1, psi, register).reshape(-1, states)
    out2 = apply(c2, psi, register).reshape(-1, states)
    return phase_aligned_deviation(out1, out2)


def equivalent(c1: SimCircuit, c2: SimCircuit, mode: str = AUTO, tol: float = 1e-7,
               states: int = 8, seed: int = 0) -> bool:
    """True when the circuits agree up to a global phase within ``tol``."""
    return deviation(c1, c2, mode, states, seed) <= tol
