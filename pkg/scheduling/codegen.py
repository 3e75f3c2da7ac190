"""
Code generation from modulo schedules.
Contains prologue/kernel/epilogue extraction, straight-line layout, guard
construction and the translation of instructions into output statements.

Straight-line code is kept "anchored": an instruction whose loop variable
stands for a fixed anchor (the lower bound for prologues, the upper bound for
epilogues). Known ranges freeze anchored code to concrete indices; unknown
ranges print the anchor expression in place of the variable.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from algebra.aliasing import IterRange, UNBOUNDED
from algebra.gates import GateRef, KnownGate, SqGate, variant_to_standard, Z_GATE
from frontend.ast import Instruction, SqOp
from frontend.output import (
    ArrayGate,
    BinOp,
    Compare,
    CompositeDef,
    CzStmt,
    Expr,
    ForStmt,
    GuardStmt,
    IntLit,
    MatrixGate,
    NamedGate,
    OutQubit,
    ParallelStmt,
    SqStmt,
    Stmt,
    Var,
    linear,
    offset,
)
from logging_config import get_logger
from scheduling.asap import asap_ticks, overlap
from scheduling.scheduler import ModuloSchedule
from transforms.compaction import compact_bidirectional

logger = get_logger()

Ticks = List[List[Instruction]]

COMPOSITE_PREFIX = "composite_"
COMPOSITE_PARAM = "n"


class CompositeRegistry:
    """Declares one ``defgate composite_N`` per distinct merged gate, numbered by first use."""

    def __init__(self):
        self._defs: Dict[tuple, CompositeDef] = {}

    @property
    def defs(self) -> List[CompositeDef]:
        return list(self._defs.values())

    def _declare(self, key: tuple, param: Optional[str], factors) -> str:
        if key not in self._defs:
            name = f"{COMPOSITE_PREFIX}{len(self._defs)}"
            self._defs[key] = CompositeDef(name, param, tuple(factors))
        return self._defs[key].name

    def spec(self, gate: SqGate, var: Expr):
        """Output spelling of ``gate`` with the loop variable replaced by ``var``."""
        if isinstance(gate, KnownGate):
            label = gate.label
            if label is not None and label.index is not None:
                return ArrayGate(label.name, IntLit(label.index))
            if label is not None:
                return NamedGate(label.name, label.params)
            name = self._declare(("matrix", gate.entries), None, [MatrixGate(gate.entries)])
            return ArrayGate(name, IntLit(0))

        if len(gate.factors) == 1 and isinstance(gate.factors[0], GateRef):
            ref = gate.factors[0]
            return ArrayGate(ref.array, linear(ref.slope, var, ref.intercept))

        if isinstance(var, IntLit) or all(f.is_concrete for f in gate.refs):
            at = var if isinstance(var, IntLit) else IntLit(0)
            factors = [self._factor(f, at) for f in gate.factors]
            name = self._declare(("fixed", tuple(factors)), None, factors)
            return ArrayGate(name, IntLit(0))

        param = Var(COMPOSITE_PARAM)
        factors = [self._factor(f, param) for f in gate.factors]
        name = self._declare(("family", tuple(factors)), COMPOSITE_PARAM, factors)
        return ArrayGate(name, var)

    def _factor(self, f, var: Expr):
        if isinstance(f, GateRef):
            return ArrayGate(f.array, linear(f.slope, var, f.intercept))
        if f.label is not None and f.label.index is not None:
            return ArrayGate(f.label.name, IntLit(f.label.index))
        if f.label is not None:
            return NamedGate(f.label.name, f.label.params)
        return MatrixGate(f.entries)


def out_qubit(ref, var: Expr) -> OutQubit:
    return OutQubit(ref.array, linear(ref.slope, var, ref.intercept))


def to_stmts(instr: Instruction, var: Expr, registry: CompositeRegistry) -> List[Stmt]:
    """
    Output statements for one instruction.

    A non-standard CZ variant is written as a CZ followed by Z gates on the
    operands whose control value is 0; the global phase is dropped.
    """
    if isinstance(instr, SqOp):
        return [SqStmt(registry.spec(instr.gate, var), out_qubit(instr.target, var))]
    stmts: List[Stmt] = [CzStmt(out_qubit(instr.a, var), out_qubit(instr.b, var))]
    sides, _ = variant_to_standard(instr.variant)
    for side in sides:
        ref = instr.a if side == "a" else instr.b
        stmts.append(SqStmt(registry.spec(Z_GATE, var), out_qubit(ref, var)))
    return stmts


def ticks_to_stmts(ticks: Sequence[Sequence[Instruction]], var: Expr,
                   registry: CompositeRegistry) -> List[Stmt]:
    """One statement per non-empty tick: the bare operation, or a parallel block."""
    out: List[Stmt] = []
    for tick in ticks:
        ops = [s for instr in tick for s in to_stmts(instr, var, registry)]
        if not ops:
            continue
        out.append(ops[0] if len(ops) == 1 else ParallelStmt(ops))
    return out


@dataclass
class KernelLoop:
    """
    Steady-state loop. ``ticks`` are written in the kernel variable, which
    runs from the lower anchor plus ``lo_offset`` to the upper anchor plus
    ``hi_offset``.
    """

    ticks: Ticks
    lo_offset: int
    hi_offset: int

    @property
    def depth(self) -> int:
        return sum(1 for tick in self.ticks if tick)

    def shifted(self, lo_delta: int, hi_delta: int) -> "KernelLoop":
        return KernelLoop(self.ticks, self.lo_offset + lo_delta, self.hi_offset + hi_delta)


@dataclass
class EmissionPlan:
    """
    Pipelined loop: anchored prologue ticks, the kernel and anchored epilogue
    ticks. ``min_trips`` is the smallest trip count with a non-empty kernel.
    """

    prologue: Ticks
    kernel: KernelLoop
    epilogue: Ticks
    min_trips: int
    ii: int = 1
    notes: List[str] = field(default_factory=list)


def fill_ticks(schedule: ModuloSchedule) -> Ticks:
    """
    Pipeline fill: kernel iterations ``lo .. lo + maxP - 1`` restricted to
    the instances whose source iteration has started, anchored at ``lo``.
    """
    out: Ticks = []
    for s in range(schedule.max_stage):
        for q in range(schedule.ii):
            ops = schedule.tick_ops(q, lambda stage, s=s: s - stage >= 0)
            out.append([op.shift(s) for op in ops])
    return out


def drain_ticks(schedule: ModuloSchedule) -> Ticks:
    """
    Pipeline drain: kernel iterations ``hi + minP + 1 .. hi + maxP``
    restricted to instances whose source iteration is still in range,
    anchored at ``hi``.
    """
    out: Ticks = []
    for e in range(schedule.min_stage + 1, schedule.max_stage + 1):
        for q in range(schedule.ii):
            ops = schedule.tick_ops(q, lambda stage, e=e: e - stage <= 0)
            out.append([op.shift(e) for op in ops])
    return out


def kernel_loop(schedule: ModuloSchedule) -> KernelLoop:
    return KernelLoop(schedule.kernel_ticks(), schedule.max_stage, schedule.min_stage)


def freeze_ticks(ticks: Sequence[Sequence[Instruction]], value: int) -> Ticks:
    return [[instr.freeze(value) for instr in tick] for tick in ticks]


def _disjoint(tick: Sequence[Instruction], iters: IterRange) -> bool:
    return not any(overlap(a, b, iters) for k, a in enumerate(tick) for b in tick[k + 1:])


def layout(chunks: Sequence[Sequence[Sequence[Instruction]]], iters: IterRange = UNBOUNDED,
           compact: bool = True) -> Ticks:
    """
    Lay out straight-line code given as consecutive chunks of ticks.

    The chunks are joined, optionally compacted in both directions and
    ASAP-layered. The joined tick layout is kept instead when it is
    shallower and no tick uses a qubit twice.
    """
    flat = [instr for chunk in chunks for tick in chunk for instr in tick]
    if not flat:
        return []
    raw = [list(tick) for chunk in chunks for tick in chunk if tick]
    code = compact_bidirectional(flat, iters) if compact else flat
    asap = asap_ticks(code, iters)
    if len(raw) < len(asap) and all(_disjoint(tick, iters) for tick in raw):
        logger.debug(f"Keeping scheduled layout: {len(raw)} ticks against {len(asap)} from ASAP")
        return raw
    return asap


def emit_schedule(schedule: ModuloSchedule, compact: bool = True) -> Optional[EmissionPlan]:
    """
    Prologue, kernel and epilogue of a single schedule.

    For a known range the straight-line parts are concrete; otherwise they
    stay anchored at the loop bounds.

    Returns:
        EmissionPlan: or ``None`` when the range is too short for a kernel
    """
    iters = schedule.iters
    window = schedule.kernel_range()
    if iters.is_known and window.is_empty:
        logger.warning(f"Range of {iters.trips} iteration(s) leaves no kernel for {schedule.span} stage(s)")
        return None
    fill, drain = fill_ticks(schedule), drain_ticks(schedule)
    if iters.is_known:
        fill, drain = freeze_ticks(fill, iters.lo), freeze_ticks(drain, iters.hi)
    return EmissionPlan(
        prologue=layout([fill], UNBOUNDED, compact),
        kernel=kernel_loop(schedule),
        epilogue=layout([drain], UNBOUNDED, compact),
        min_trips=schedule.span + 1,
        ii=schedule.ii,
    )


def loop_stmt(kernel: KernelLoop, var: str, lo: Expr, hi: Expr,
              registry: CompositeRegistry) -> ForStmt:
    return ForStmt(var, offset(lo, kernel.lo_offset), offset(hi, kernel.hi_offset),
                   ticks_to_stmts(kernel.ticks, Var(var), registry))


def trip_count(lo: Expr, hi: Expr) -> Expr:
    return offset(BinOp("-", hi, lo), 1)


def emit_guarded(cases: Sequence[List[Stmt]], factor: int, min_trips: int, lo: Expr, hi: Expr,
                 fallback: List[Stmt]) -> GuardStmt:
    """
    Dispatch an unknown range to its pipelined case or to the plain loop.

    The outer guard requires ``hi - lo + 1 >= min_trips``; with an unroll
    factor above 1 an inner guard selects the case of ``lo mod factor``, the
    last residue taking the ``otherwise`` branch.
    """
    if factor == 1:
        inner = list(cases[0])
    else:
        residue = BinOp("%", lo, IntLit(factor))
        branches = [(Compare("==", residue, IntLit(q)), list(cases[q])) for q in range(factor - 1)]
        inner = [GuardStmt(branches, list(cases[factor - 1]))]
    return GuardStmt([(Compare(">=", trip_count(lo, hi), IntLit(min_trips)), inner)], list(fallback))
