"""
Single-qubit gate algebra.
Contains gate representations, classification, merging and CZ conjugation rules.

Products of gates are kept in application order: ``merge(a, b)`` is the gate
obtained by applying ``a`` first and ``b`` second, i.e. the matrix ``b @ a``.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from algebra.indexing import LinearRef

TOL = 1e-9


class GateClass(Enum):
    """Structural class of a 2x2 unitary."""

    DIAGONAL = "diagonal"
    ANTIDIAGONAL = "antidiagonal"
    GENERAL = "unknown"

    @classmethod
    def from_hint(cls, text: str) -> "GateClass":
        for member in cls:
            if member.value == text:
                return member
        raise ValueError(f"Unknown gate hint: {text}")


@dataclass(frozen=True)
class GateRef(LinearRef):
    """Element ``array[k*i + b]`` of a symbolic gate array, with the array's hint."""

    hint: GateClass = GateClass.GENERAL


@dataclass(frozen=True)
class GateLabel:
    """How a known gate is spelled: a library name with parameters, or an element of a defined array."""

    name: str
    params: Tuple[float, ...] = ()
    index: Optional[int] = None

    def __str__(self) -> str:
        if self.index is not None:
            return f"SQ({self.name}[{self.index}])"
        if self.params:
            return f"{self.name}(" + ", ".join(repr(float(p)) for p in self.params) + ")"
        return self.name


@dataclass(frozen=True)
class KnownGate:
    """A concrete 2x2 unitary, stored row-major, with an optional spelling."""

    entries: Tuple[complex, complex, complex, complex]
    label: Optional[GateLabel] = field(default=None, compare=False)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=complex).reshape(2, 2)

    @property
    def factors(self) -> tuple:
        return (self,)

    def shift(self, delta: int) -> "KnownGate":
        return self

    def reindex(self, scale: int, offset: int) -> "KnownGate":
        return self

    def freeze(self, value: int) -> "KnownGate":
        return self

    def __str__(self) -> str:
        return str(self.label) if self.label else "[" + ", ".join(f"{z:.4g}" for z in self.entries) + "]"


@dataclass(frozen=True)
class SymbolicGate:
    """Product of gate-array elements and known gates, in application order."""

    factors: Tuple[Union[GateRef, KnownGate], ...]
    hint: GateClass = GateClass.GENERAL

    def _map(self, fn) -> "SymbolicGate":
        return SymbolicGate(
            tuple(f if isinstance(f, KnownGate) else fn(f) for f in self.factors), self.hint
        )

    def shift(self, delta: int) -> "SymbolicGate":
        return self._map(lambda f: f.shift(delta))

    def reindex(self, scale: int, offset: int) -> "SymbolicGate":
        return self._map(lambda f: f.reindex(scale, offset))

    def freeze(self, value: int) -> "SymbolicGate":
        return self._map(lambda f: f.freeze(value))

    @property
    def refs(self) -> Tuple[GateRef, ...]:
        return tuple(f for f in self.factors if isinstance(f, GateRef))

    @property
    def arrays(self) -> Tuple[str, ...]:
        return tuple(f.array for f in self.refs)

    def __str__(self) -> str:
        return "*".join(str(f) for f in self.factors)


SqGate = Union[KnownGate, SymbolicGate]


@dataclass(frozen=True)
class CzVariant:
    """``CZ_xy``: the controlled phase that flips the sign of basis state ``|x y>``."""

    x: int = 1
    y: int = 1

    @property
    def is_standard(self) -> bool:
        return self.x == 1 and self.y == 1


STANDARD_CZ = CzVariant(1, 1)


def known(matrix, label: Optional[GateLabel] = None) -> KnownGate:
    """Wrap a 2x2 array-like as a :class:`KnownGate`."""
    m = np.asarray(matrix, dtype=complex).reshape(4)
    return KnownGate(tuple(complex(z) for z in m), label)


def classify(g: SqGate, tol: float = TOL) -> GateClass:
    """
    Classify a gate as diagonal, antidiagonal or general.

    Args:
        g: Known or symbolic gate
        tol: Absolute tolerance for zero entries

    Returns:
        GateClass: the structural class; symbolic gates report their hint
    """
    if isinstance(g, SymbolicGate):
        return g.hint
    a, b, c, d = g.entries
    if abs(b) <= tol and abs(c) <= tol:
        return GateClass.DIAGONAL
    if abs(a) <= tol and abs(d) <= tol:
        return GateClass.ANTIDIAGONAL
    return GateClass.GENERAL


def combine_classes(first: GateClass, second: GateClass) -> GateClass:
    """Class of a product given the classes of its factors."""
    if GateClass.GENERAL in (first, second):
        return GateClass.GENERAL
    if first == second:
        return GateClass.DIAGONAL
    return GateClass.ANTIDIAGONAL


def merge(a: SqGate, b: SqGate) -> SqGate:
    """
    Merge two gates acting on the same qubit, ``a`` applied first.

    Known products are multiplied out. Mixed products keep a factor list in
    application order with neighbouring known factors folded together, and a
    hint derived by the diagonal/antidiagonal group law.

    Args:
        a: Gate applied first
        b: Gate applied second

    Returns:
        SqGate: the product

    Example:
        merge(h, merge(z, h))  ->  X
    """
    if isinstance(a, KnownGate) and isinstance(b, KnownGate):
        return _label_standard(known(b.matrix @ a.matrix))

    factors = []
    for f in a.factors + b.factors:
        if factors and isinstance(f, KnownGate) and isinstance(factors[-1], KnownGate):
            folded = known(f.matrix @ factors[-1].matrix)
            if is_identity(folded):
                factors.pop()
            else:
                factors[-1] = folded
        else:
            factors.append(f)

    hint = combine_classes(classify(a), classify(b))
    if not factors:
        return IDENTITY
    if len(factors) == 1 and isinstance(factors[0], KnownGate):
        return _label_standard(factors[0])
    return SymbolicGate(tuple(factors), hint)


def is_identity(g: SqGate, tol: float = TOL) -> bool:
    """True for a known gate equal to the identity up to global phase."""
    if not isinstance(g, KnownGate):
        return False
    a, b, c, d = g.entries
    return abs(b) <= tol and abs(c) <= tol and abs(a - d) <= tol


def conjugate_through_cz(g: SqGate, side: str, variant: CzVariant) -> Tuple[SqGate, CzVariant]:
    """
    Exchange ``g`` on operand ``side`` with ``CZ_variant``.

    Args:
        g: Diagonal or antidiagonal gate
        side: ``"a"`` for the first CZ operand, ``"b"`` for the second
        variant: Variant before the exchange

    Returns:
        tuple: (the gate, unchanged; the new variant). The variant is kept for
        diagonal gates and has its ``side`` bit toggled for antidiagonal gates

    Raises:
        ValueError: If ``g`` is general
    """
    cls = classify(g)
    if cls == GateClass.DIAGONAL:
        return g, variant
    if cls == GateClass.GENERAL:
        raise ValueError("General single-qubit gates do not commute with CZ")
    if side == "a":
        return g, CzVariant(1 - variant.x, variant.y)
    if side == "b":
        return g, CzVariant(variant.x, 1 - variant.y)
    raise ValueError(f"CZ side must be 'a' or 'b', got {side!r}")


def variant_to_standard(variant: CzVariant):
    """
    Express ``CZ_xy`` as ``phase * CZ_11`` followed by Z corrections.

    A 0 control on one operand is a Z on the other: ``CZ_01 = Z_b CZ_11``.

    Returns:
        tuple: (list of operand sides that receive a Z gate, global phase)
    """
    sides = []
    if variant.y == 0:
        sides.append("a")
    if variant.x == 0:
        sides.append("b")
    phase = -1 if len(sides) == 2 else 1
    return sides, phase


def cz_variant_matrix(variant: CzVariant) -> np.ndarray:
    """4x4 diagonal matrix of ``CZ_xy`` on basis ``|a b>`` with ``a`` most significant."""
    diag = np.ones(4, dtype=complex)
    diag[2 * variant.x + variant.y] = -1
    return np.diag(diag)


def embed(u, side: str) -> np.ndarray:
    """Lift a 2x2 gate onto operand ``side`` of a two-qubit register."""
    u = np.asarray(u, dtype=complex)
    eye = np.eye(2, dtype=complex)
    return np.kron(u, eye) if side == "a" else np.kron(eye, u)


# Standard gate library


def rz(alpha: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * alpha), 0], [0, np.exp(0.5j * alpha)]], dtype=complex)


def rz_plus(alpha: float) -> np.ndarray:
    return np.array([[0, np.exp(0.5j * alpha)], [np.exp(-0.5j * alpha), 0]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


def u2(phi: float, lam: float) -> np.ndarray:
    return u3(np.pi / 2, phi, lam)


def u1(lam: float) -> np.ndarray:
    return u3(0.0, 0.0, lam)


_SQRT_HALF = 1 / np.sqrt(2)

STANDARD_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(0.25j * np.pi)]], dtype=complex),
    "TDG": np.array([[1, 0], [0, np.exp(-0.25j * np.pi)]], dtype=complex),
}

PARAMETRIC_GATES = {
    "RX": (1, rx),
    "RY": (1, ry),
    "RZ": (1, rz),
    "RZP": (1, rz_plus),
    "U1": (1, u1),
    "U2": (2, u2),
    "U3": (3, u3),
}

STANDARD_GATES = {name: known(m, GateLabel(name)) for name, m in STANDARD_MATRICES.items()}
IDENTITY = STANDARD_GATES["I"]
Z_GATE = STANDARD_GATES["Z"]


def _label_standard(g: KnownGate, tol: float = TOL) -> KnownGate:
    """Attach a standard label when the product is exactly a named gate."""
    for name, gate in STANDARD_GATES.items():
        if np.allclose(g.entries, gate.entries, atol=tol, rtol=0):
            return gate
    return KnownGate(g.entries)


def named_gate(name: str, params=()) -> KnownGate:
    """
    Build a library gate by name.

    Args:
        name: Standard or parametric gate name (upper case)
        params: Parameters for parametric gates

    Returns:
        KnownGate: labelled with its name and parameters

    Raises:
        ValueError: For unknown names or a wrong parameter count
    """
    params = tuple(float(p) for p in params)
    if name in STANDARD_MATRICES:
        if params:
            raise ValueError(f"Gate {name} takes no parameters")
        return STANDARD_GATES[name]
    if name in PARAMETRIC_GATES:
        arity, build = PARAMETRIC_GATES[name]
        if len(params) != arity:
            raise ValueError(f"Gate {name} takes {arity} parameter(s), got {len(params)}")
        return known(build(*params), GateLabel(name, params))
    raise ValueError(f"Unknown gate: {name}")


def common_class(classes) -> GateClass:
    """Class shared by every element of a gate array (not their product)."""
    classes = list(classes)
    first = classes[0]
    return first if all(c == first for c in classes) else GateClass.GENERAL
