"""
Loop program representation.
Contains qubit references, the two instruction kinds and the parsed program.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple, Union

from algebra.aliasing import IterRange, UNBOUNDED
from algebra.gates import (
    STANDARD_CZ,
    CzVariant,
    GateClass,
    KnownGate,
    SqGate,
    classify,
)
from algebra.indexing import LinearRef


@dataclass(frozen=True)
class QubitRef(LinearRef):
    """Qubit ``array[k*i + b]``."""


@dataclass(frozen=True)
class SqOp:
    """Single-qubit gate applied to ``target``."""

    gate: SqGate
    target: QubitRef
    source_index: int = field(default=-1, compare=False)

    is_cz = False

    @property
    def qubits(self) -> Tuple[QubitRef, ...]:
        return (self.target,)

    @property
    def gate_class(self) -> GateClass:
        return classify(self.gate)

    def shift(self, delta: int) -> "SqOp":
        return replace(self, gate=self.gate.shift(delta), target=self.target.shift(delta))

    def reindex(self, scale: int, offset: int) -> "SqOp":
        return replace(self, gate=self.gate.reindex(scale, offset),
                       target=self.target.reindex(scale, offset))

    def freeze(self, value: int) -> "SqOp":
        return replace(self, gate=self.gate.freeze(value), target=self.target.freeze(value))

    @property
    def is_concrete(self) -> bool:
        if not self.target.is_concrete:
            return False
        return isinstance(self.gate, KnownGate) or all(r.is_concrete for r in self.gate.refs)

    def __str__(self) -> str:
        return f"{self.gate} {self.target}"


@dataclass(frozen=True)
class CzOp:
    """Controlled-Z variant ``CZ_xy`` on operands ``a`` and ``b``."""

    a: QubitRef
    b: QubitRef
    variant: CzVariant = STANDARD_CZ
    source_index: int = field(default=-1, compare=False)

    is_cz = True

    @property
    def qubits(self) -> Tuple[QubitRef, ...]:
        return (self.a, self.b)

    def shift(self, delta: int) -> "CzOp":
        return replace(self, a=self.a.shift(delta), b=self.b.shift(delta))

    def reindex(self, scale: int, offset: int) -> "CzOp":
        return replace(self, a=self.a.reindex(scale, offset), b=self.b.reindex(scale, offset))

    def freeze(self, value: int) -> "CzOp":
        return replace(self, a=self.a.freeze(value), b=self.b.freeze(value))

    @property
    def is_concrete(self) -> bool:
        return self.a.is_concrete and self.b.is_concrete

    def same_gate(self, other: "CzOp") -> bool:
        """Equal as operators, allowing the operands to be listed in either order."""
        if (self.a, self.b, self.variant) == (other.a, other.b, other.variant):
            return True
        swapped = CzVariant(other.variant.y, other.variant.x)
        return (self.a, self.b, self.variant) == (other.b, other.a, swapped)

    def side_of(self, ref: QubitRef) -> Optional[str]:
        if ref == self.a:
            return "a"
        if ref == self.b:
            return "b"
        return None

    def other(self, side: str) -> QubitRef:
        return self.b if side == "a" else self.a

    def __str__(self) -> str:
        name = "CZ" if self.variant.is_standard else f"CZ{self.variant.x}{self.variant.y}"
        return f"{name} {self.a}, {self.b}"


Instruction = Union[SqOp, CzOp]


@dataclass(frozen=True)
class GateDef:
    """A ``defgate`` declaration: an array of known matrices or of symbolic gates with a hint."""

    name: str
    size: int
    hint: GateClass
    matrices: Optional[Tuple[KnownGate, ...]] = None

    @property
    def is_known(self) -> bool:
        return self.matrices is not None


Bound = Union[int, str]


@dataclass
class LoopSpec:
    """The single top-level loop ``for var in lo to hi`` with stride 1."""

    var: str
    lo: Bound
    hi: Bound
    body: List[Instruction]

    @property
    def is_known(self) -> bool:
        return isinstance(self.lo, int) and isinstance(self.hi, int)

    @property
    def iter_range(self) -> IterRange:
        return IterRange(self.lo, self.hi) if self.is_known else UNBOUNDED

    @property
    def trips(self) -> Optional[int]:
        return self.iter_range.trips


@dataclass
class LoopProgram:
    """Declarations, straight-line code before and after, and the loop."""

    qubit_arrays: Dict[str, int]
    gate_defs: Dict[str, GateDef]
    symbols: List[str]
    pre_body: List[Instruction]
    loop: LoopSpec
    post_body: List[Instruction]

    def with_loop(self, loop: LoopSpec) -> "LoopProgram":
        return replace(self, loop=loop)
