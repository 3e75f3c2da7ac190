"""
Baseline passes.
Contains the Kernel-ASAP loop (compacted body, ASAP-layered, original range)
and the fully unrolled, compacted and ASAP-layered circuit.
"""

from typing import List, Optional, Tuple

from algebra.aliasing import UNBOUNDED
from frontend.ast import Instruction, LoopProgram
from frontend.output import ForStmt, Var, bound_expr
from logging_config import get_logger
from scheduling.asap import asap_depth, asap_ticks
from scheduling.codegen import CompositeRegistry, Ticks, ticks_to_stmts
from transforms.compaction import compact_bidirectional
from transforms.loop_transform import flatten
from utils.errors import ValidationError

logger = get_logger()


def compacted_body(program: LoopProgram, compact: bool = True) -> List[Instruction]:
    """Loop body compacted right then left within one iteration."""
    body = list(program.loop.body)
    if not compact:
        return body
    return compact_bidirectional(body, program.loop.iter_range)


def kernel_asap_loop(program: LoopProgram, registry: CompositeRegistry,
                     compact: bool = True, body: Optional[List[Instruction]] = None) -> Tuple[ForStmt, int]:
    """
    The source loop with an ASAP-layered body.

    Returns:
        tuple: (loop statement, depth of one iteration)
    """
    loop = program.loop
    if body is None:
        body = compacted_body(program, compact)
    ticks = asap_ticks(body, UNBOUNDED)
    stmt = ForStmt(loop.var, bound_expr(loop.lo), bound_expr(loop.hi),
                   ticks_to_stmts(ticks, Var(loop.var), registry))
    return stmt, len(ticks)


def unrolled_ticks(program: LoopProgram, compact: bool = True) -> Ticks:
    """
    The whole loop unrolled into concrete instructions, compacted and ASAP-layered.

    Raises:
        ValidationError: If the loop range is not known
    """
    loop = program.loop
    if not loop.is_known:
        raise ValidationError("Unrolling needs a known loop range")
    flat = flatten(loop.body, loop.lo, loop.hi)
    if compact:
        flat = compact_bidirectional(flat)
    ticks = asap_ticks(flat)
    logger.debug(f"Unrolled {len(flat)} instructions into {len(ticks)} ticks")
    return ticks


def kernel_asap_total(program: LoopProgram, compact: bool = True) -> Optional[int]:
    """Depth of the Kernel-ASAP loop over its whole range, or ``None`` for an unknown range."""
    trips = program.loop.trips
    if trips is None:
        return None
    return asap_depth(compacted_body(program, compact)) * trips


def unroll_total(program: LoopProgram, compact: bool = True) -> Optional[int]:
    """Depth of the fully unrolled loop, or ``None`` for an unknown range."""
    if not program.loop.is_known:
        return None
    return len(unrolled_ticks(program, compact))
