"""
Quantum dependency graph.
Contains edge construction from qubit aliasing and the commutation rules, and multi-edge reduction.

An edge ``u -> v`` with label ``(min, dif)`` requires the instance of ``v``
``dif`` iterations later to start at least ``min`` ticks after ``u``:
``t_v + II*dif - t_u >= min``.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from algebra.aliasing import IterRange, UNBOUNDED, across_loop_alias, in_loop_alias
from algebra.gates import GateClass, KnownGate
from frontend.ast import CzOp, Instruction, SqOp
from logging_config import get_logger

logger = get_logger()


@dataclass(frozen=True)
class QdgEdge:
    src: int
    dst: int
    min: int
    dif: int

    def weight(self, ii: int) -> int:
        return self.min - ii * self.dif

    @property
    def order_key(self) -> Tuple[int, int]:
        return self.dif, -self.min


@dataclass(frozen=True)
class CommutingPair:
    """An antidiagonal gate freed from a CZ that shares its qubit on ``side``."""

    anti: int
    cz: int
    side: str


@dataclass
class Qdg:
    nodes: List[Instruction]
    edges: List[QdgEdge] = field(default_factory=list)
    commuting: List[CommutingPair] = field(default_factory=list)
    iters: IterRange = UNBOUNDED

    def successors(self, u: int) -> List[int]:
        return sorted({e.dst for e in self.edges if e.src == u})

    def out_edges(self, u: int) -> List[QdgEdge]:
        return [e for e in self.edges if e.src == u]

    def in_edges(self, v: int) -> List[QdgEdge]:
        return [e for e in self.edges if e.dst == v]


def _independent(a: Instruction, b: Instruction) -> bool:
    if a.is_cz and b.is_cz:
        return True
    if a.is_cz or b.is_cz:
        sq = b if a.is_cz else a
        return sq.gate_class == GateClass.DIAGONAL
    return False


def _mergeable(a: SqOp, b: SqOp) -> bool:
    """Same-slope gates that may share a tick and be multiplied out."""
    if a.target.slope != b.target.slope:
        return False
    if isinstance(a.gate, KnownGate) and isinstance(b.gate, KnownGate):
        return True
    if isinstance(a.gate, KnownGate) or isinstance(b.gate, KnownGate):
        return False
    return a.gate.arrays == b.gate.arrays


def _ever_aliases(r1, r2, iters: IterRange) -> bool:
    return bool(
        in_loop_alias(r1, r2, iters)
        or across_loop_alias(r1, r2, iters)
        or across_loop_alias(r2, r1, iters)
    )


def _freed_side(sq: SqOp, cz: CzOp, iters: IterRange) -> Optional[str]:
    """Operand of ``cz`` an antidiagonal ``sq`` may pass, leaving a Z on the other one."""
    if sq.gate_class != GateClass.ANTIDIAGONAL:
        return None
    target = sq.target
    for side, shared, other in (("a", cz.a, cz.b), ("b", cz.b, cz.a)):
        if shared.array != target.array or shared.slope != target.slope:
            continue
        if not _ever_aliases(target, shared, iters):
            continue
        if _ever_aliases(target, other, iters):
            return None
        return side
    return None


def _min_delay(a: Instruction, b: Instruction) -> int:
    if isinstance(a, SqOp) and isinstance(b, SqOp) and _mergeable(a, b):
        return 0
    return 1


def _in_loop(a: Instruction, b: Instruction, iters: IterRange) -> bool:
    return any(in_loop_alias(x, y, iters) for x in a.qubits for y in b.qubits)


def _across(a: Instruction, b: Instruction, iters: IterRange) -> Optional[int]:
    deltas = [
        hit.delta
        for x in a.qubits
        for y in b.qubits
        if (hit := across_loop_alias(x, y, iters))
    ]
    return min(deltas) if deltas else None


def build(body: Sequence[Instruction], iters: IterRange = UNBOUNDED,
          free_antidiagonals: bool = True) -> Qdg:
    """
    Build the dependency graph of a loop body.

    Rules, applied to every ordered pair of instructions:

    1. CZ/CZ and CZ/diagonal pairs commute and get no edge.
    2. An in-loop alias of ``u`` before ``v`` gives ``(min, 0)``.
    3. An across-loop alias at minimal distance ``d`` gives ``(min, d)``.
    4. With ``free_antidiagonals``, an antidiagonal gate on exactly one CZ
       operand (same slope, never touching the other operand) gets no edge;
       the pair is recorded so the scheduler can repair inversions.
    5. Same-slope single-qubit gates that can be merged get ``min = 0``;
       every other edge has ``min = 1``.

    Args:
        body: Loop body after unrolling and rotation
        iters: Range of the loop variable
        free_antidiagonals: Whether rule 4 applies

    Returns:
        Qdg: graph with multi-edges already reduced
    """
    graph = Qdg(list(body), iters=iters)
    edges = []
    for u, a in enumerate(body):
        for v, b in enumerate(body):
            if _independent(a, b):
                continue
            if free_antidiagonals and a.is_cz != b.is_cz:
                anti, cz = (u, v) if b.is_cz else (v, u)
                side = _freed_side(body[anti], body[cz], iters)
                if side is not None:
                    pair = CommutingPair(anti, cz, side)
                    if pair not in graph.commuting:
                        graph.commuting.append(pair)
                    continue
            delay = _min_delay(a, b)
            if u < v and _in_loop(a, b, iters):
                edges.append(QdgEdge(u, v, delay, 0))
            distance = _across(a, b, iters)
            if distance is not None:
                edges.append(QdgEdge(u, v, delay, distance))

    graph.edges = reduce_multiedges(edges)
    logger.debug(
        f"QDG: {len(body)} nodes, {len(graph.edges)} edges, {len(graph.commuting)} freed antidiagonal pairs"
    )
    return graph


def reduce_multiedges(edges: Sequence[QdgEdge]) -> List[QdgEdge]:
    """
    Keep one edge per ordered pair: the smallest by ``(dif, -min)``.

    With ``min <= 1`` the kept edge has the largest ``min - II*dif`` for every
    ``II >= 1``, so the others never constrain a schedule.
    """
    best: Dict[Tuple[int, int], QdgEdge] = {}
    for e in edges:
        key = (e.src, e.dst)
        if key not in best or e.order_key < best[key].order_key:
            best[key] = e
    return [best[k] for k in sorted(best)]


def to_dot(graph: Qdg) -> str:
    """Render the graph in DOT format; freed antidiagonal pairs are drawn dashed."""
    lines = ["digraph qdg {"]
    for k, instr in enumerate(graph.nodes):
        label = str(instr).replace('"', '\\"')
        lines.append(f'    n{k} [label="{k}: {label}"];')
    for e in graph.edges:
        lines.append(f'    n{e.src} -> n{e.dst} [label="({e.min},{e.dif})"];')
    for pair in graph.commuting:
        lines.append(f'    n{pair.anti} -> n{pair.cz} [style=dashed, dir=none, label="{pair.side}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
