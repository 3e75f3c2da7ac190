"""
Loop-body compaction.
Merges single-qubit gates and cancels CZ pairs through commuting instructions.

A pass walks the body in execution order (or in reverse for right-normalisation)
and tries to move each instruction towards the already placed ones:

* a single-qubit gate merges into the nearest placed gate on the same qubit,
  passing CZs it commutes with: diagonal gates pass any CZ, antidiagonal gates
  pass a CZ sharing their exact qubit and leave a Z on the CZ's other operand;
* a CZ cancels against the nearest identical CZ, passing other CZs; the
  cancelled pair leaves a tombstone so that a third identical CZ revives it;
* anything else stays where it is.
"""

import heapq
from bisect import insort
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from algebra.aliasing import IterRange, UNBOUNDED, in_loop_alias
from algebra.gates import GateClass, Z_GATE, is_identity, merge
from frontend.ast import CzOp, Instruction, SqOp
from logging_config import get_logger

logger = get_logger()

LEFT = "left"
RIGHT = "right"

FIXPOINT_PASSES = 3

LIVE, TOMB, DEAD = "live", "tomb", "dead"


@dataclass
class _Entry:
    instr: Instruction
    rank: Tuple[int, int]
    marked: bool = False
    state: str = LIVE
    z_count: int = 0


class _Placement:
    """
    Placed entries in rank order.

    With all-concrete instructions the entries are indexed per qubit, so a scan
    only visits entries that share a qubit with the instruction being placed.
    """

    def __init__(self, keyed: bool):
        self.keyed = keyed
        self.entries: List[_Entry] = []
        self.by_key: Dict[tuple, List[_Entry]] = {}
        self.next_base = 0

    def append(self, instr: Instruction, marked: bool) -> _Entry:
        entry = _Entry(instr, (self.next_base, 0), marked)
        self.next_base += 1
        self._index(entry)
        return entry

    def insert_after(self, anchor: _Entry, instr: Instruction) -> _Entry:
        anchor.z_count += 1
        entry = _Entry(instr, (anchor.rank[0], anchor.z_count))
        self._index(entry)
        return entry

    def _index(self, entry: _Entry):
        if not self.keyed:
            insort(self.entries, entry, key=lambda e: e.rank)
            return
        self.entries.append(entry)
        for q in entry.instr.qubits:
            insort(self.by_key.setdefault((q.array, q.intercept), []), entry, key=lambda e: e.rank)

    def scan(self, instr: Instruction):
        """Entries that may interact with ``instr``, nearest first."""
        if not self.keyed:
            yield from reversed(self.entries)
            return
        lists = [self.by_key.get((q.array, q.intercept), []) for q in instr.qubits]
        previous = None
        for entry in heapq.merge(*(reversed(x) for x in lists), key=lambda e: e.rank, reverse=True):
            if entry is not previous:
                yield entry
            previous = entry

    def result(self):
        ordered = sorted(self.entries, key=lambda e: e.rank)
        return [e for e in ordered if e.state == LIVE]


def _aliases(r1, r2, iters: IterRange) -> bool:
    if r1.array != r2.array:
        return False
    if r1 == r2:
        return True
    return bool(in_loop_alias(r1, r2, iters))


def _place_sq(placement: _Placement, instr: SqOp, marked: bool, direction: str,
              iters: IterRange) -> str:
    cls = instr.gate_class
    target = instr.target
    debts: List[Tuple[_Entry, object]] = []

    for entry in placement.scan(instr):
        if entry.state != LIVE:
            continue
        other = entry.instr
        if isinstance(other, SqOp):
            if other.target == target:
                return _merge_into(placement, entry, instr, marked, debts, direction)
            if _aliases(other.target, target, iters):
                break
            continue

        side = other.side_of(target)
        far = other.b if side == "a" else other.a
        if side is not None:
            if _aliases(far, target, iters):
                if cls == GateClass.DIAGONAL:
                    continue
                break
            if cls == GateClass.DIAGONAL:
                continue
            if cls == GateClass.ANTIDIAGONAL:
                debts.append((entry, far))
                continue
            break
        if _aliases(other.a, target, iters) or _aliases(other.b, target, iters):
            if cls == GateClass.DIAGONAL:
                continue
            break

    placement.append(instr, marked)
    return "placed"


def _merge_into(placement: _Placement, entry: _Entry, instr: SqOp, marked: bool,
                debts, direction: str) -> str:
    earlier, later = (entry.instr.gate, instr.gate) if direction == LEFT else (instr.gate, entry.instr.gate)
    product = merge(earlier, later)
    vanishes = is_identity(product)
    if len(debts) - 1 - (1 if vanishes else 0) > 0:
        placement.append(instr, marked)
        return "placed"

    for cz_entry, far in sorted(debts, key=lambda d: d[0].rank, reverse=True):
        placement.insert_after(cz_entry, SqOp(Z_GATE, far))
    if vanishes:
        entry.state = DEAD
        logger.debug(f"Merged {instr} into {entry.instr}: identity removed")
    else:
        logger.debug(f"Merged {instr} into {entry.instr}")
        entry.instr = replace(entry.instr, gate=product)
        entry.marked = False
    return "merged"


def _place_cz(placement: _Placement, instr: CzOp, marked: bool, iters: IterRange) -> str:
    for entry in placement.scan(instr):
        if entry.state == DEAD:
            continue
        other = entry.instr
        if isinstance(other, SqOp):
            if entry.state == LIVE and (
                _aliases(other.target, instr.a, iters) or _aliases(other.target, instr.b, iters)
            ):
                break
            continue
        if other.same_gate(instr):
            if entry.state == LIVE:
                entry.state = TOMB
                logger.debug(f"Cancelled {instr} against an earlier copy")
                return "cancelled"
            entry.state = LIVE
            logger.debug(f"Revived {instr} from a cancelled pair")
            return "revived"

    placement.append(instr, marked)
    return "placed"


def _compact_pass(body: Sequence[Instruction], marks: Sequence[bool], direction: str,
                  iters: IterRange):
    order = list(zip(body, marks))
    if direction == RIGHT:
        order.reverse()
    placement = _Placement(keyed=all(instr.is_concrete for instr in body))
    for instr, marked in order:
        if isinstance(instr, SqOp):
            _place_sq(placement, instr, marked, direction, iters)
        else:
            _place_cz(placement, instr, marked, iters)

    placed = placement.result()
    if direction == RIGHT:
        placed.reverse()
    new_body = [replace(e.instr, source_index=k) for k, e in enumerate(placed)]
    return new_body, [e.marked for e in placed]


def compact_marked(body: Sequence[Instruction], marks: Sequence[bool], direction: str = LEFT,
                   iters: IterRange = UNBOUNDED):
    """
    Compaction pass that threads rotation marks through.

    Merged gates lose their mark; gates that survive untouched keep it.

    Returns:
        tuple: (new body, marks aligned with the new body)
    """
    return _compact_pass(body, marks, direction, iters)


def compact_once(body: Sequence[Instruction], direction: str = LEFT,
                 iters: IterRange = UNBOUNDED) -> List[Instruction]:
    """
    One compaction pass.

    Args:
        body: Instructions in execution order
        direction: ``"left"`` moves instructions towards earlier ones, ``"right"`` towards later ones
        iters: Range of the loop variable used for aliasing queries

    Returns:
        list: Compacted instructions, renumbered by position
    """
    new_body, _ = _compact_pass(body, [False] * len(body), direction, iters)
    return new_body


def is_fixpoint(body: Sequence[Instruction], iters: IterRange = UNBOUNDED,
                direction: str = LEFT, marks: Optional[Sequence[bool]] = None) -> bool:
    """True when one more pass leaves ``body`` unchanged."""
    marks = list(marks) if marks is not None else [False] * len(body)
    return _compact_pass(list(body), marks, direction, iters)[0] == list(body)


def compact_fixpoint(body: Sequence[Instruction], iters: IterRange = UNBOUNDED,
                     direction: str = LEFT, marks: Optional[Sequence[bool]] = None):
    """
    Run three compaction passes, which reach a fixpoint.

    A fourth pass checks the fixpoint; if it still changes the body a warning
    is logged and the three-pass result is kept.

    Returns:
        list: Compacted body, or ``(body, marks)`` when ``marks`` is given
    """
    current = list(body)
    current_marks = list(marks) if marks is not None else [False] * len(current)
    stable = False
    for _ in range(FIXPOINT_PASSES):
        new_body, new_marks = _compact_pass(current, current_marks, direction, iters)
        stable = new_body == current
        current, current_marks = new_body, new_marks
        if stable:
            break
    if not stable and not is_fixpoint(current, iters, direction, current_marks):
        logger.warning(
            f"Compaction is not a fixpoint after {FIXPOINT_PASSES} passes "
            f"({direction}, {len(current)} instructions)"
        )
    if marks is not None:
        return current, current_marks
    return current


def compact_bidirectional(body: Sequence[Instruction], iters: IterRange = UNBOUNDED,
                          marks: Optional[Sequence[bool]] = None):
    """
    Right-normalise to a fixpoint, then left-normalise to a fixpoint.

    Returns:
        list: Compacted body, or ``(body, marks)`` when ``marks`` is given
    """
    if marks is not None:
        body, marks = compact_fixpoint(body, iters, RIGHT, marks)
        return compact_fixpoint(body, iters, LEFT, marks)
    return compact_fixpoint(compact_fixpoint(body, iters, RIGHT), iters, LEFT)
