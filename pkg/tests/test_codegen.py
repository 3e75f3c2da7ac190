"""
Tests for prologue, kernel and epilogue generation.
"""

from collections import Counter

from algebra.aliasing import IterRange
from algebra.gates import GateClass, GateRef, STANDARD_GATES, SymbolicGate, merge
from conftest import q, sq
from frontend.emitter import emit
from frontend.output import (
    ArrayGate,
    BinOp,
    Compare,
    GuardStmt,
    IntLit,
    OutputProgram,
    Var,
    format_expr,
)
from scheduling.codegen import (
    CompositeRegistry,
    KernelLoop,
    drain_ticks,
    emit_guarded,
    emit_schedule,
    fill_ticks,
    freeze_ticks,
    kernel_loop,
    layout,
    loop_stmt,
    ticks_to_stmts,
    trip_count,
)
from scheduling.scheduler import ModuloSchedule

H, T = STANDARD_GATES["H"], STANDARD_GATES["T"]


def staggered(iters=IterRange(0, 2)):
    """Four independent gates over three stages, two slots."""
    body = [sq("H", q(1, 0, name)) for name in "abcd"]
    return ModuloSchedule(body, 2, [0, 2, 3, 4], iters)


def arrays(ticks):
    return {instr.target.array for tick in ticks for instr in tick}


def instances(ticks):
    return [(instr.target.array, instr.target.intercept) for tick in ticks for instr in tick]


def test_kernel_slots():
    schedule = staggered()
    assert schedule.kernel_range() == IterRange(2, 2)
    slot0, slot1 = schedule.kernel_ticks()
    assert {x.target.array for x in slot0} == {"a", "b", "d"}
    assert slot1 == [sq("H", q(1, -1, "c"))]
    kernel = kernel_loop(schedule)
    assert (kernel.lo_offset, kernel.hi_offset) == (2, 0)
    assert kernel.depth == 2


def test_fill_and_drain():
    schedule = staggered()
    fill = fill_ticks(schedule)
    assert len(fill) == 4
    assert arrays(fill[0:2]) == {"a"}
    assert arrays(fill[2:4]) == {"a", "b", "c"}
    drain = drain_ticks(schedule)
    assert arrays(drain[0:2]) == {"b", "c", "d"}
    assert arrays(drain[2:4]) == {"d"}


def test_every_instance_is_emitted_once():
    plan = emit_schedule(staggered())
    assert plan.min_trips == 3
    assert plan.ii == 2
    kernel = freeze_ticks(plan.kernel.ticks, 2)
    counts = Counter(instances(plan.prologue) + instances(kernel) + instances(plan.epilogue))
    assert counts == Counter((name, i) for name in "abcd" for i in range(3))


def test_short_range_has_no_kernel():
    assert emit_schedule(staggered(IterRange(0, 1))) is None


def test_layout_compacts_across_chunks():
    first = [[sq("H", q(0, 0)), sq("H", q(0, 1))]]
    second = [[sq("T", q(0, 0))]]
    assert len(layout([first, second], compact=False)) == 2
    (tick,) = layout([first, second])
    assert len(tick) == 2
    assert layout([[], []]) == []


def test_composite_declarations():
    registry = CompositeRegistry()
    fixed = merge(H, T)
    assert registry.spec(fixed, Var("i")) == ArrayGate("composite_0", IntLit(0))
    assert registry.spec(fixed, Var("i")) == ArrayGate("composite_0", IntLit(0))

    u = SymbolicGate((GateRef("U", 1, 0, GateClass.GENERAL),), GateClass.GENERAL)
    assert registry.spec(u, Var("i")) == ArrayGate("U", Var("i"))
    family = merge(u, H)
    assert registry.spec(family, Var("i")) == ArrayGate("composite_1", Var("i"))
    assert registry.spec(family, IntLit(3)) == ArrayGate("composite_2", IntLit(0))

    names = [(d.name, d.param) for d in registry.defs]
    assert names == [("composite_0", None), ("composite_1", "n"), ("composite_2", None)]


def test_loop_statement_offsets():
    kernel = KernelLoop([[sq("H", q(1, 0))]], 2, -1)
    loop = loop_stmt(kernel, "i", Var("a"), Var("b"), CompositeRegistry())
    assert format_expr(loop.lo) == "a+2"
    assert format_expr(loop.hi) == "b-1"
    assert len(loop.body) == 1


def test_parallel_ticks():
    ticks = [[sq("H", q(0, 0)), sq("H", q(0, 1))], [], [sq("T", q(0, 0))]]
    program = OutputProgram({"q": 2}, [], [], ticks_to_stmts(ticks, IntLit(0), CompositeRegistry()))
    assert emit(program) == "qubit q[2];\n\nparallel {\n    H q[0];\n    H q[1];\n}\nT q[0];\n"


def test_guard_dispatch():
    a, b = Var("a"), Var("b")
    assert format_expr(trip_count(a, b)) == "b-a+1"
    guard = emit_guarded([["case0"], ["case1"]], 2, 5, a, b, ["plain"])
    assert isinstance(guard, GuardStmt)
    (condition, inner), = guard.branches
    assert condition == Compare(">=", trip_count(a, b), IntLit(5))
    assert guard.otherwise == ["plain"]
    (dispatch,) = inner
    assert dispatch.branches == [(Compare("==", BinOp("%", a, IntLit(2)), IntLit(0)), ["case0"])]
    assert dispatch.otherwise == ["case1"]

    single = emit_guarded([["case0"]], 1, 2, a, b, [])
    assert single.branches[0][1] == ["case0"]
