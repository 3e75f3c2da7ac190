"""
Compilation driver.
Runs parsing, compaction, unrolling, rotation, modulo scheduling, inversion
repair, legalisation and code generation, and assembles the output program
and its statistics.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

from algebra.aliasing import UNBOUNDED, in_loop_alias
from algebra.gates import SymbolicGate
from frontend import emitter
from frontend.ast import CzOp, Instruction, LoopProgram, SqOp
from frontend.output import ArrayDef, Expr, IntLit, OutputProgram, Stmt, bound_expr, offset
from frontend.parser import parse
from logging_config import get_logger
from pipeline.stats import StatsRecord, totals
from scheduling import qdg
from scheduling.asap import asap_depth, asap_ticks
from scheduling.codegen import (
    CompositeRegistry,
    KernelLoop,
    Ticks,
    drain_ticks,
    emit_guarded,
    fill_ticks,
    freeze_ticks,
    kernel_loop,
    layout,
    loop_stmt,
    ticks_to_stmts,
)
from scheduling.scheduler import ModuloSchedule, fix_inversions, reservation_table, reschedule_legalize, search_ii
from transforms.compaction import compact_bidirectional, compact_fixpoint
from transforms.loop_transform import RotationResult, UnrollCase, rotate, unroll
from utils.errors import SchedulingError, ValidationError
from utils.misc import get_config_value
from verifier.baselines import compacted_body, kernel_asap_loop, kernel_asap_total, unroll_total, unrolled_ticks

logger = get_logger()

PIPELINED = "pipelined"
KERNEL_ASAP = "kernel-asap"
UNROLLED_ASAP = "unrolled-asap"
EMIT_MODES = (PIPELINED, KERNEL_ASAP, UNROLLED_ASAP)

UNKNOWN_LO, UNKNOWN_HI = "a", "b"


@dataclass
class CaseArtifacts:
    """Intermediate results for one unrolled case."""

    residue: Optional[int]
    rotation: RotationResult
    graphs: List[qdg.Qdg] = field(default_factory=list)
    schedules: List[ModuloSchedule] = field(default_factory=list)

    @property
    def final(self) -> ModuloSchedule:
        return self.schedules[-1]

    def kernel(self) -> KernelLoop:
        if len(self.schedules) == 1:
            return kernel_loop(self.schedules[0])
        first, second = self.schedules
        return kernel_loop(second).shifted(first.max_stage, first.min_stage)

    @property
    def span(self) -> int:
        return self.rotation.rotations + sum(s.span for s in self.schedules)


@dataclass
class CompileResult:
    source: LoopProgram
    program: OutputProgram
    text: str
    stats: StatsRecord
    cases: List[CaseArtifacts] = field(default_factory=list)
    fallback: bool = False

    def dot_graphs(self) -> List[str]:
        return [qdg.to_dot(g) for case in self.cases for g in case.graphs]

    def tables(self) -> List[str]:
        return [reservation_table(s).render() for case in self.cases for s in case.schedules]


def override_range(program: LoopProgram, text: Optional[str]) -> LoopProgram:
    """
    Replace the loop range by ``m:n`` or by the symbolic range ``a..b`` for ``unknown``.

    Raises:
        ValidationError: On a malformed range or indices outside their arrays
    """
    if not text:
        return program
    loop = program.loop
    symbols = list(program.symbols)
    if text == "unknown":
        if loop.is_known:
            for name in (UNKNOWN_LO, UNKNOWN_HI):
                if name in program.qubit_arrays or name in program.gate_defs:
                    raise ValidationError(f"Cannot introduce symbol {name!r}: name already declared")
                if name not in symbols:
                    symbols.append(name)
            lo, hi = UNKNOWN_LO, UNKNOWN_HI
        else:
            lo, hi = loop.lo, loop.hi
    else:
        try:
            lo_text, hi_text = text.split(":")
            lo, hi = int(lo_text), int(hi_text)
        except ValueError:
            raise ValidationError(f"Range must be m:n or unknown, got {text!r}")
    program = replace(program, symbols=symbols, loop=replace(loop, lo=lo, hi=hi))
    check_bounds(program)
    return program


def check_bounds(program: LoopProgram):
    """
    Check every loop index against its array for a known range.

    Raises:
        ValidationError: For an index outside its array
    """
    loop = program.loop
    if not loop.is_known or loop.lo > loop.hi:
        return
    for instr in loop.body:
        if isinstance(instr, CzOp):
            hit = in_loop_alias(instr.a, instr.b, loop.iter_range)
            if hit:
                raise ValidationError(f"CZ operands of {instr} coincide at {loop.var}={hit.witness}")
        refs = list(instr.qubits)
        if isinstance(instr, SqOp) and isinstance(instr.gate, SymbolicGate):
            refs.extend(instr.gate.refs)
        for ref in refs:
            if ref.slope == 0:
                continue
            size = program.qubit_arrays.get(ref.array)
            if size is None:
                size = program.gate_defs[ref.array].size
            for i in (loop.lo, loop.hi):
                if not 0 <= ref.at(i) < size:
                    raise ValidationError(
                        f"Index {ref.at(i)} of {instr} at {loop.var}={i} is outside {ref.array}[{size}]"
                    )


def _declarations(program: LoopProgram, registry: CompositeRegistry) -> list:
    defs = []
    for d in program.gate_defs.values():
        matrices = tuple(g.entries for g in d.matrices) if d.is_known else None
        defs.append(ArrayDef(d.name, d.size, d.hint, matrices))
    return defs + registry.defs


def _straight(instrs: List[Instruction], compact: bool, registry: CompositeRegistry) -> List[Stmt]:
    if not instrs:
        return []
    code = compact_bidirectional(instrs) if compact else list(instrs)
    return ticks_to_stmts(asap_ticks(code), IntLit(0), registry)


def _as_expr(bound) -> Expr:
    return IntLit(bound) if isinstance(bound, int) else bound


def _shift_ticks(ticks: Ticks, delta: int) -> Ticks:
    return [[instr.shift(delta) for instr in tick] for tick in ticks]


def schedule_case(case: UnrollCase, config: Dict[str, Any]) -> CaseArtifacts:
    """
    Compact, rotate and modulo-schedule one unrolled case.

    Raises:
        SchedulingError: If no initiation interval up to the limit works
    """
    compact = get_config_value(config, "pipeline.compact", True)
    max_ii = get_config_value(config, "scheduler.max_ii")
    iters = case.iter_range
    body = compact_fixpoint(case.body, iters) if compact else list(case.body)
    if compact:
        rotation = rotate(body, iters)
    else:
        rotation = RotationResult(body, marks=[False] * len(body))
    iters = iters.narrow(0, -rotation.rotations)

    graph = qdg.build(rotation.body, iters, free_antidiagonals=True)
    first = fix_inversions(search_ii(graph, max_ii), graph)
    artifacts = CaseArtifacts(case.residue, rotation, [graph], [first])
    if first.inserted_z:
        second, legal_graph = reschedule_legalize(first, max_ii)
        artifacts.graphs.append(legal_graph)
        artifacts.schedules.append(second)
    return artifacts


def _kernel_fits(case: CaseArtifacts) -> bool:
    for schedule in case.schedules:
        if schedule.iters.is_known and schedule.kernel_range().is_empty:
            return False
    return True


def _case_parts(case: CaseArtifacts, unrolled: UnrollCase, known: bool):
    """Anchored prologue and epilogue chunks for one case; known ranges are frozen."""
    first = case.schedules[0]
    prologue = [asap_ticks(case.rotation.prologue), fill_ticks(first)]
    epilogue = [drain_ticks(first), asap_ticks(case.rotation.epilogue)]
    if len(case.schedules) == 2:
        second = case.schedules[1]
        prologue.append(_shift_ticks(fill_ticks(second), first.max_stage))
        epilogue.insert(0, _shift_ticks(drain_ticks(second), first.min_stage))
    if known:
        lo = first.iters.lo
        hi = first.iters.hi
        prologue = [freeze_ticks(chunk, lo) for chunk in prologue]
        epilogue = [freeze_ticks(chunk, hi) for chunk in epilogue]
        if unrolled.remainder:
            epilogue.append(asap_ticks(unrolled.remainder))
    return prologue, epilogue


def _emit_case(case: CaseArtifacts, unrolled: UnrollCase, var: str, compact: bool,
               registry: CompositeRegistry, residual_body: List[Instruction], hi_expr: Expr):
    known = unrolled.iter_range.is_known
    prologue_chunks, epilogue_chunks = _case_parts(case, unrolled, known)
    prologue = layout(prologue_chunks, UNBOUNDED, compact)
    epilogue = layout(epilogue_chunks, UNBOUNDED, compact)
    kernel = case.kernel()

    lo = _as_expr(unrolled.lo)
    hi = offset(_as_expr(unrolled.hi), -case.rotation.rotations)
    lo_anchor, hi_anchor = (IntLit(0), IntLit(0)) if known else (lo, hi)

    stmts = ticks_to_stmts(prologue, lo_anchor, registry)
    stmts.append(loop_stmt(kernel, var, lo, hi, registry))
    stmts.extend(ticks_to_stmts(epilogue, hi_anchor, registry))
    if unrolled.residual_lo is not None:
        ticks = asap_ticks(residual_body)
        stmts.append(loop_stmt(KernelLoop(ticks, 0, 0), var, unrolled.residual_lo, hi_expr, registry))
    return stmts, len(prologue), len(epilogue), kernel


def _kernel_trips(kernel: KernelLoop, case: UnrollCase, rotations: int) -> Optional[int]:
    if not case.iter_range.is_known:
        return None
    first = case.lo + kernel.lo_offset
    last = case.hi - rotations + kernel.hi_offset
    return max(0, last - first + 1)


def compile_program(program: LoopProgram, config: Dict[str, Any]) -> CompileResult:
    """
    Compile a parsed loop program.

    Args:
        program: Parsed program, with any range override applied
        config: Validated configuration

    Returns:
        CompileResult: output program, its text and statistics
    """
    mode = get_config_value(config, "pipeline.emit", PIPELINED)
    compact = get_config_value(config, "pipeline.compact", True)
    factor = get_config_value(config, "pipeline.unroll", 2)
    if mode not in EMIT_MODES:
        raise ValidationError(f"Unknown emit mode {mode!r}")

    loop = program.loop
    registry = CompositeRegistry()
    body = compacted_body(program, compact)
    pre = _straight(program.pre_body, compact, registry)
    post = _straight(program.post_body, compact, registry)
    stats = StatsRecord(
        asap=asap_depth(body),
        iters=loop.trips,
        kernel_asap_total=kernel_asap_total(program, compact),
        unroll_total=unroll_total(program, compact),
    )

    if mode == UNROLLED_ASAP:
        ticks = unrolled_ticks(program, compact)
        stats.pre_depth, stats.kernel_depth, stats.qsp_iters = len(ticks), 0, 0
        stmts = ticks_to_stmts(ticks, IntLit(0), registry)
        return _finish(program, registry, pre + stmts + post, totals(stats), [], False)

    if mode == KERNEL_ASAP:
        return _plain(program, registry, body, pre, post, stats, compact, [], False)

    unrolled = unroll(program.with_loop(replace(loop, body=body)), factor)
    stats.c_asap = asap_depth(compact_bidirectional(unrolled.cases[0].body, unrolled.cases[0].iter_range)
                              if compact else unrolled.cases[0].body)
    try:
        cases = [schedule_case(case, config) for case in unrolled.cases]
    except SchedulingError as e:
        logger.warning(f"Software pipelining failed ({e}); emitting the compacted loop")
        return _plain(program, registry, body, pre, post, stats, compact, [], True)

    depths = [case.kernel().depth for case in cases]
    if not all(_kernel_fits(case) for case in cases):
        logger.warning("Loop range too short for the pipelined kernel; emitting the compacted loop")
        return _plain(program, registry, body, pre, post, stats, compact, cases, True)
    if min(depths) == 0 or max(depths) >= stats.c_asap:
        logger.warning(
            f"Pipelining not profitable (kernel depth {max(depths)}, unrolled ASAP depth {stats.c_asap}); "
            f"emitting the compacted loop"
        )
        return _plain(program, registry, body, pre, post, stats, compact, cases, True)

    hi_expr = bound_expr(loop.hi)
    emitted = [
        _emit_case(case, u, loop.var, compact, registry, body, hi_expr)
        for case, u in zip(cases, unrolled.cases)
    ]
    stats.kernel_depth = max(depths)
    if loop.is_known:
        stmts, stats.pre_depth, stats.post_depth, kernel = emitted[0]
        stats.qsp_iters = _kernel_trips(kernel, unrolled.cases[0], cases[0].rotation.rotations)
        body_stmts = pre + stmts + post
    else:
        stats.pre_depth = max(e[1] for e in emitted)
        stats.post_depth = max(e[2] for e in emitted)
        stats.qsp_iters = None
        min_trips = factor * (max(case.span for case in cases) + 1)
        fallback, _ = kernel_asap_loop(program, registry, compact, body)
        guard = emit_guarded([e[0] for e in emitted], factor, min_trips,
                             bound_expr(loop.lo), hi_expr, [fallback])
        logger.info(f"Guarded output: {factor} case(s), at least {min_trips} iterations")
        body_stmts = pre + [guard] + post

    logger.info(
        f"Kernel depth {stats.kernel_depth} (II {', '.join(str(c.final.ii) for c in cases)}), "
        f"prologue {stats.pre_depth}, epilogue {stats.post_depth}"
    )
    return _finish(program, registry, body_stmts, totals(stats), cases, False)


def _plain(program, registry, body, pre, post, stats, compact, cases, fallback) -> CompileResult:
    loop_stmt_, depth = kernel_asap_loop(program, registry, compact, body)
    stats.kernel_depth = depth
    stats.pre_depth = stats.post_depth = 0
    stats.qsp_iters = program.loop.trips
    stats.fallback = fallback
    return _finish(program, registry, pre + [loop_stmt_] + post, totals(stats), cases, fallback)


def _finish(program, registry, stmts, stats, cases, fallback) -> CompileResult:
    output = OutputProgram(
        qubit_arrays=dict(program.qubit_arrays),
        symbols=list(program.symbols),
        gate_defs=_declarations(program, registry),
        body=stmts,
    )
    return CompileResult(program, output, emitter.emit(output), stats, cases, fallback)


def compile_source(source: str, config: Dict[str, Any], range_text: Optional[str] = None) -> CompileResult:
    """Parse, apply a range override and compile."""
    program = override_range(parse(source), range_text)
    return compile_program(program, config)
