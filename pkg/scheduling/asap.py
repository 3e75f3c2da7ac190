"""
ASAP layering of straight-line code.
Contains the greedy earliest-tick placement used for prologues, epilogues and the baselines.

Every gate takes one tick. An instruction goes to the first tick after all
earlier instructions it does not commute with and fills any earlier gap
that leaves its qubits free. CZs commute with each other and with diagonal
gates, so those pairs only compete for qubits.
"""

from typing import Dict, List, Sequence, Set, Tuple

from algebra.aliasing import IterRange, UNBOUNDED, in_loop_alias
from algebra.gates import GateClass
from frontend.ast import Instruction


def commutes(a: Instruction, b: Instruction) -> bool:
    if a.is_cz and b.is_cz:
        return True
    if a.is_cz != b.is_cz:
        sq = b if a.is_cz else a
        return sq.gate_class == GateClass.DIAGONAL
    return False


def overlap(a: Instruction, b: Instruction, iters: IterRange) -> bool:
    return any(in_loop_alias(x, y, iters) for x in a.qubits for y in b.qubits)


def _keyed_ticks(instrs: Sequence[Instruction]) -> List[List[Instruction]]:
    ticks: List[List[Instruction]] = []
    busy: List[Set[Tuple[str, int]]] = []
    history: Dict[Tuple[str, int], List[Tuple[int, Instruction]]] = {}
    for instr in instrs:
        keys = [(q.array, q.intercept) for q in instr.qubits]
        lb = 0
        for key in keys:
            for t, other in history.get(key, ()):
                if t >= lb and not commutes(other, instr):
                    lb = t + 1
        t = lb
        while t < len(ticks) and any(key in busy[t] for key in keys):
            t += 1
        if t == len(ticks):
            ticks.append([])
            busy.append(set())
        ticks[t].append(instr)
        busy[t].update(keys)
        for key in keys:
            history.setdefault(key, []).append((t, instr))
    return ticks


def asap_ticks(instrs: Sequence[Instruction], iters: IterRange = UNBOUNDED) -> List[List[Instruction]]:
    """
    Greedy earliest-tick layering.

    Args:
        instrs: Instructions in execution order
        iters: Range of the loop variable for symbolic references; all
            references are taken at one common value of the variable

    Returns:
        list: Ticks, each a list of instructions on pairwise distinct qubits
    """
    if all(instr.is_concrete for instr in instrs):
        return _keyed_ticks(instrs)
    ticks: List[List[Instruction]] = []
    placed: List[Tuple[int, Instruction]] = []
    for instr in instrs:
        lb = 0
        for t, other in placed:
            if t >= lb and not commutes(other, instr) and overlap(other, instr, iters):
                lb = t + 1
        t = lb
        while t < len(ticks) and any(overlap(other, instr, iters) for other in ticks[t]):
            t += 1
        if t == len(ticks):
            ticks.append([])
        ticks[t].append(instr)
        placed.append((t, instr))
    return ticks


def asap_depth(instrs: Sequence[Instruction], iters: IterRange = UNBOUNDED) -> int:
    """Number of ticks of the ASAP layering; 0 for no instructions."""
    return len(asap_ticks(instrs, iters))
