"""
Gate bindings.
Contains the deterministic instantiation of symbolic gate arrays used by the verifier.
"""

import zlib
from typing import Dict, Mapping

import numpy as np

from algebra.gates import GateClass, GateRef, KnownGate, SqGate, rz, rz_plus
from frontend.ast import GateDef


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 2x2 unitary (QR of a complex Gaussian with the phase fixed)."""
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


class GateBindings:
    """
    Matrices for every element of every declared gate array.

    Symbolic elements are drawn from a generator seeded by ``seed``, the array
    name and the index, so the same element gets the same matrix no matter in
    which order elements are requested. Diagonal arrays get ``RZ`` gates,
    antidiagonal arrays ``RZ+`` gates and unknown arrays random unitaries.
    Arrays with defined matrices use those.
    """

    def __init__(self, seed: int, gate_defs: Mapping[str, GateDef]):
        self.seed = seed
        self.gate_defs = dict(gate_defs)
        self._cache: Dict[tuple, np.ndarray] = {}

    def element(self, array: str, index: int) -> np.ndarray:
        key = (array, index)
        if key in self._cache:
            return self._cache[key]
        d = self.gate_defs.get(array)
        if d is None:
            raise KeyError(f"Undeclared gate array {array!r}")
        if not 0 <= index < d.size:
            raise IndexError(f"Index {index} out of bounds for {array}[{d.size}]")
        if d.is_known:
            matrix = d.matrices[index].matrix
        else:
            rng = np.random.default_rng([self.seed, zlib.crc32(array.encode()), index + 2 ** 31])
            if d.hint == GateClass.DIAGONAL:
                matrix = rz(rng.uniform(0, 2 * np.pi))
            elif d.hint == GateClass.ANTIDIAGONAL:
                matrix = rz_plus(rng.uniform(0, 2 * np.pi))
            else:
                matrix = random_unitary(rng)
        self._cache[key] = matrix
        return matrix

    def matrix(self, gate: SqGate) -> np.ndarray:
        """Matrix of a concrete gate; factors are applied left to right."""
        if isinstance(gate, KnownGate):
            return gate.matrix
        out = np.eye(2, dtype=complex)
        for f in gate.factors:
            if isinstance(f, GateRef):
                if not f.is_concrete:
                    raise ValueError(f"Gate reference {f} is not concrete")
                m = self.element(f.array, f.intercept)
            else:
                m = f.matrix
            out = m @ out
        return out
