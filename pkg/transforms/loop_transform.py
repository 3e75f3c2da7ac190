"""
Loop rotation and unrolling.
Contains merge-candidate discovery, instruction movability, loop rotation and C-fold unrolling.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from algebra.aliasing import IterRange, UNBOUNDED, across_loop_alias, in_loop_alias
from frontend.ast import CzOp, Instruction, LoopProgram, SqOp
from frontend.output import BinOp, Expr, IntLit, Var, offset
from logging_config import get_logger
from transforms.compaction import LEFT, compact_fixpoint

logger = get_logger()

MERGE = "merge"
CANCEL = "cancel"


@dataclass(frozen=True)
class MergeCandidate:
    """``src`` at iteration ``i`` may merge with (or cancel) ``dst`` at iteration ``i + distance``."""

    src: int
    dst: int
    distance: int
    kind: str


@dataclass
class RotationResult:
    """
    Rotated loop.

    The prologue is evaluated at the original lower bound. The epilogue is
    expressed relative to the upper bound of the rotated loop, which is the
    original upper bound minus ``rotations``.
    """

    body: List[Instruction]
    prologue: List[Instruction] = field(default_factory=list)
    epilogue: List[Instruction] = field(default_factory=list)
    marks: List[bool] = field(default_factory=list)
    rotations: int = 0


@dataclass
class UnrollCase:
    """
    One unrolled main loop.

    ``residue`` is ``None`` for a known range, otherwise the class ``lo mod C``
    the case is selected for. The main loop runs ``j`` from ``lo`` to ``hi``;
    a known range leaves a concrete ``remainder``, an unknown range a residual
    loop of the original body from ``residual_lo`` to the original upper bound.
    """

    residue: Optional[int]
    body: List[Instruction]
    lo: Union[int, Expr]
    hi: Union[int, Expr]
    remainder: List[Instruction] = field(default_factory=list)
    residual_lo: Optional[Expr] = None

    @property
    def iter_range(self) -> IterRange:
        if isinstance(self.lo, int) and isinstance(self.hi, int):
            return IterRange(self.lo, self.hi)
        return UNBOUNDED


@dataclass
class UnrollResult:
    factor: int
    cases: List[UnrollCase]


def _aliases(r1, r2, iters: IterRange) -> bool:
    return r1.array == r2.array and (r1 == r2 or bool(in_loop_alias(r1, r2, iters)))


def _touches(instr: Instruction, ref, iters: IterRange) -> bool:
    return any(_aliases(q, ref, iters) for q in instr.qubits)


def _unblocked(body, src: int, dst: int, iters: IterRange) -> bool:
    """Nothing after ``src`` in its iteration, or before ``dst`` in the next, touches their qubits."""
    after = body[src + 1:]
    before = body[:dst]
    if body[src].is_cz:
        # CZs commute with each other
        after = [x for x in after if not x.is_cz]
        before = [x for x in before if not x.is_cz]
    for q in body[src].qubits:
        if any(_touches(x, q, iters) for x in after):
            return False
    for q in body[dst].qubits:
        if any(_touches(x, q, iters) for x in before):
            return False
    return True


def _cancel_distance(src: CzOp, dst: CzOp, iters: IterRange) -> Optional[int]:
    for partner in (dst.a, dst.b):
        hit = across_loop_alias(src.a, partner, iters)
        if hit and src.same_gate(dst.shift(hit.delta)):
            return hit.delta
    return None


def find_merge_candidates(body: Sequence[Instruction], iters: IterRange = UNBOUNDED,
                          max_distance: int = 1) -> List[MergeCandidate]:
    """
    Pairs of instructions that meet again a few iterations later.

    Args:
        body: Compacted loop body
        iters: Range of the loop variable
        max_distance: Largest iteration distance considered

    Returns:
        list: Candidates ordered by (src, dst); distance-1 candidates are only
        reported when no instruction in between touches the qubits involved
    """
    found = []
    for src, a in enumerate(body):
        for dst, b in enumerate(body):
            if src == dst or a.is_cz != b.is_cz:
                continue
            if isinstance(a, SqOp):
                if a.target.array != b.target.array or a.target.slope != b.target.slope:
                    continue
                hit = across_loop_alias(a.target, b.target, iters)
                distance, kind = (hit.delta if hit else None), MERGE
            else:
                distance, kind = _cancel_distance(a, b, iters), CANCEL
            if distance is None or distance > max_distance:
                continue
            if distance == 1 and not _unblocked(body, src, dst, iters):
                continue
            found.append(MergeCandidate(src, dst, distance, kind))
    return found


def is_movable(body: Sequence[Instruction], index: int,
               iters: IterRange = UNBOUNDED) -> Tuple[bool, Optional[int]]:
    """
    Whether ``body[index]`` commutes with everything before it in the iteration.

    A CZ whose only blocker is a single-qubit gate on its single constant
    operand is movable together with that gate.

    Returns:
        tuple: (movable, index of the companion gate or ``None``)
    """
    instr = body[index]
    before = body[:index]
    if isinstance(instr, SqOp):
        return not any(_touches(x, instr.target, iters) for x in before), None

    blockers = [
        j for j, x in enumerate(before)
        if isinstance(x, SqOp) and (_aliases(x.target, instr.a, iters) or _aliases(x.target, instr.b, iters))
    ]
    if not blockers:
        return True, None
    if len(blockers) > 1:
        return False, None
    constant = [q for q in instr.qubits if q.slope == 0]
    if len(constant) != 1:
        return False, None
    j = blockers[0]
    companion = body[j]
    if companion.target != constant[0]:
        return False, None
    others = [x for k, x in enumerate(before) if k != j]
    if any(_touches(x, companion.target, iters) for x in others):
        return False, None
    return True, j


def rotate(body: Sequence[Instruction], iters: IterRange = UNBOUNDED,
           marks: Optional[Sequence[bool]] = None) -> RotationResult:
    """
    Rotate movable instructions to the end of the body while that exposes merges.

    Each step takes the first unmarked movable instruction that is the
    destination of a distance-1 candidate, moves its first instance into the
    prologue, appends its next-iteration instance to the body and left-compacts.

    Args:
        body: Compacted loop body
        iters: Range of the loop variable; a known range loses one iteration per rotation
        marks: Initial rotation marks

    Returns:
        RotationResult: rotated body, prologue, epilogue and rotation count
    """
    result = RotationResult(list(body), marks=list(marks) if marks is not None else [False] * len(body))
    budget = max(1, len(body) ** 2)

    while result.rotations < budget:
        if iters.is_known and iters.trips < 2:
            break
        candidates = find_merge_candidates(result.body, iters, max_distance=1)
        targets = {c.dst for c in candidates}
        chosen = None
        for idx in range(len(result.body)):
            if result.marks[idx] or idx not in targets:
                continue
            movable, companion = is_movable(result.body, idx, iters)
            if movable:
                chosen = [companion, idx] if companion is not None else [idx]
                break
        if chosen is None:
            break

        moved = [result.body[k] for k in chosen]
        rest = [x for k, x in enumerate(result.body) if k not in chosen]
        rest_marks = [m for k, m in enumerate(result.marks) if k not in chosen]
        logger.debug(f"Rotating {', '.join(str(m) for m in moved)}")

        result.prologue.extend(moved)
        result.epilogue = [x.shift(1) for x in rest] + [x.shift(1) for x in result.epilogue]
        iters = iters.narrow(0, -1)
        new_body = rest + [m.shift(1) for m in moved]
        new_marks = rest_marks + [True] * len(moved)
        result.body, result.marks = compact_fixpoint(new_body, iters, LEFT, new_marks)
        result.rotations += 1

    if result.rotations:
        logger.info(f"Rotated loop {result.rotations} time(s); body has {len(result.body)} instructions")
    return result


def flatten(body: Sequence[Instruction], lo: int, hi: int) -> List[Instruction]:
    """Concrete instructions of iterations ``lo..hi`` in execution order."""
    return [instr.freeze(i) for i in range(lo, hi + 1) for instr in body]


def _replicate(body: Sequence[Instruction], factor: int, base: int) -> List[Instruction]:
    return [instr.reindex(factor, base + t) for t in range(factor) for instr in body]


def unroll(program: LoopProgram, factor: int) -> UnrollResult:
    """
    Unroll the loop ``factor`` times with the stride renormalised to 1.

    For a known range ``m..n`` the main loop runs ``j = 0..n'`` with
    ``n' = (n-m+1)//C - 1`` and the last ``(n-m+1) % C`` iterations become a
    concrete remainder. For an unknown range ``a..b`` one case per residue
    ``q = a mod C`` is produced; the main loop runs ``j`` from ``a/C`` for
    ``(b-a+1)/C`` iterations, followed by a residual loop.

    Args:
        program: Parsed program
        factor: Unroll factor C

    Returns:
        UnrollResult: one case for a known range, C cases otherwise

    Raises:
        ValueError: If ``factor < 1``
    """
    if factor < 1:
        raise ValueError(f"Unroll factor must be at least 1, got {factor}")
    loop = program.loop

    if loop.is_known:
        m, n = loop.lo, loop.hi
        trips = max(0, n - m + 1)
        if factor == 1:
            return UnrollResult(1, [UnrollCase(None, list(loop.body), m, n)])
        last = trips // factor - 1
        case = UnrollCase(
            residue=None,
            body=_replicate(loop.body, factor, m),
            lo=0,
            hi=last,
            remainder=flatten(loop.body, factor * (last + 1) + m, n),
        )
        logger.debug(f"Unrolled {trips} iterations into {last + 1} x {factor} and {len(case.remainder)} remainder ops")
        return UnrollResult(factor, [case])

    lo_expr = _bound(loop.lo)
    hi_expr = _bound(loop.hi)
    if factor == 1:
        return UnrollResult(1, [UnrollCase(None, list(loop.body), lo_expr, hi_expr)])

    trips = offset(BinOp("-", hi_expr, lo_expr), 1)
    main_trips = BinOp("/", trips, IntLit(factor))
    main_lo = BinOp("/", lo_expr, IntLit(factor))
    main_hi = offset(BinOp("+", main_lo, main_trips), -1)
    residual_lo = BinOp("+", lo_expr, BinOp("*", IntLit(factor), main_trips))
    cases = [
        UnrollCase(q, _replicate(loop.body, factor, q), main_lo, main_hi, residual_lo=residual_lo)
        for q in range(factor)
    ]
    return UnrollResult(factor, cases)


def _bound(bound) -> Expr:
    return IntLit(bound) if isinstance(bound, int) else Var(bound)
