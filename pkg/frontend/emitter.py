"""
Printers for both languages.
Renders an OutputProgram as text that ``frontend.output_parser`` reads back, and a
LoopProgram as input-language text that ``frontend.parser`` reads back.
"""

from typing import List

from algebra.gates import GateRef, KnownGate, SymbolicGate, variant_to_standard
from algebra.indexing import format_linear
from frontend.ast import CzOp, GateDef, Instruction, LoopProgram
from frontend.output import (
    ArrayDef,
    ArrayGate,
    CompositeDef,
    CzStmt,
    ForStmt,
    GuardStmt,
    MatrixGate,
    NamedGate,
    OutputProgram,
    OutQubit,
    ParallelStmt,
    SqStmt,
    format_expr,
)

INDENT = "    "


def format_complex(z: complex) -> str:
    return f"({float(z.real)!r},{float(z.imag)!r})"


def format_matrix(entries) -> str:
    return "{" + ",".join(format_complex(complex(z)) for z in entries) + "}"


def format_gate(gate) -> str:
    if isinstance(gate, NamedGate):
        if gate.params:
            return f"{gate.name}(" + ", ".join(repr(float(p)) for p in gate.params) + ")"
        return gate.name
    if isinstance(gate, ArrayGate):
        return f"SQ({gate.array}[{format_expr(gate.index)}])"
    if isinstance(gate, MatrixGate):
        return format_matrix(gate.entries)
    raise TypeError(f"Cannot format gate {gate!r}")


def format_qubit(q: OutQubit) -> str:
    return f"{q.array}[{format_expr(q.index)}]"


def format_op(op) -> str:
    if isinstance(op, CzStmt):
        return f"CZ {format_qubit(op.a)}, {format_qubit(op.b)};"
    return f"{format_gate(op.gate)} {format_qubit(op.target)};"


def _format_def(d) -> str:
    if isinstance(d, ArrayDef):
        if d.matrices is None:
            return f"defgate {d.name}[{d.size}] = {d.hint.value};"
        return f"defgate {d.name}[{d.size}] = [" + ", ".join(format_matrix(m) for m in d.matrices) + "];"
    if isinstance(d, CompositeDef):
        factors = ", ".join(format_gate(f) for f in d.factors)
        if d.param is None:
            return f"defgate {d.name}[1] = product({factors});"
        return f"defgate {d.name}({d.param}) = product({factors});"
    raise TypeError(f"Cannot format definition {d!r}")


def _emit_block(stmts, depth: int, out: List[str]):
    pad = INDENT * depth
    for stmt in stmts:
        if isinstance(stmt, (SqStmt, CzStmt)):
            out.append(pad + format_op(stmt))
        elif isinstance(stmt, ParallelStmt):
            out.append(pad + "parallel {")
            for op in stmt.ops:
                out.append(pad + INDENT + format_op(op))
            out.append(pad + "}")
        elif isinstance(stmt, ForStmt):
            out.append(f"{pad}for {stmt.var} in {format_expr(stmt.lo)} to {format_expr(stmt.hi)} {{")
            _emit_block(stmt.body, depth + 1, out)
            out.append(pad + "}")
        elif isinstance(stmt, GuardStmt):
            out.append(pad + "guard {")
            for cond, body in stmt.branches:
                text = f"{format_expr(cond.left)}{cond.op}{format_expr(cond.right)}"
                out.append(f"{pad}{INDENT}{text} => {{")
                _emit_block(body, depth + 2, out)
                out.append(pad + INDENT + "}")
            out.append(pad + INDENT + "otherwise => {")
            _emit_block(stmt.otherwise, depth + 2, out)
            out.append(pad + INDENT + "}")
            out.append(pad + "}")
        else:
            raise TypeError(f"Cannot emit statement {stmt!r}")


def emit(program: OutputProgram) -> str:
    """
    Render an output program.

    Args:
        program: Program to print

    Returns:
        str: Program text terminated by a newline
    """
    out = [f"qubit {name}[{size}];" for name, size in program.qubit_arrays.items()]
    if program.symbols:
        out.append("symbolic " + ", ".join(program.symbols) + ";")
    out.extend(_format_def(d) for d in program.gate_defs)
    if out:
        out.append("")
    _emit_block(program.body, 0, out)
    return "\n".join(out) + "\n"


# Input language


def _loop_ref(ref, var: str) -> str:
    return f"{ref.array}[{format_linear(ref.slope, var, ref.intercept)}]"


def _source_gate(gate, var: str) -> str:
    if isinstance(gate, KnownGate) and gate.label is not None:
        return str(gate.label)
    if isinstance(gate, SymbolicGate) and len(gate.factors) == 1 and isinstance(gate.factors[0], GateRef):
        return f"SQ({_loop_ref(gate.factors[0], var)})"
    raise ValueError(f"Gate {gate} has no input-language spelling")


def _source_instr(instr: Instruction, var: str) -> List[str]:
    if not isinstance(instr, CzOp):
        return [f"{_source_gate(instr.gate, var)} {_loop_ref(instr.target, var)};"]
    lines = [f"CZ {_loop_ref(instr.a, var)}, {_loop_ref(instr.b, var)};"]
    # the global phase of CZ_00 is dropped
    sides, _ = variant_to_standard(instr.variant)
    lines.extend(f"Z {_loop_ref(instr.a if side == 'a' else instr.b, var)};" for side in sides)
    return lines


def _source_def(d: GateDef) -> str:
    if not d.is_known:
        return f"defgate {d.name}[{d.size}] = {d.hint.value};"
    return f"defgate {d.name}[{d.size}] = [" + ", ".join(format_matrix(g.entries) for g in d.matrices) + "];"


def emit_source(program: LoopProgram) -> str:
    """
    Render a loop program in the input language.

    CZ variants are written as a standard CZ followed by Z corrections.

    Raises:
        ValueError: For merged gates, which the input language cannot spell
    """
    var = program.loop.var
    out = [f"qubit {name}[{size}];" for name, size in program.qubit_arrays.items()]
    if program.symbols:
        out.append("symbolic " + ", ".join(program.symbols) + ";")
    out.extend(_source_def(d) for d in program.gate_defs.values())
    out.append("")
    for instr in program.pre_body:
        out.extend(_source_instr(instr, var))
    out.append(f"for {var} in {program.loop.lo} to {program.loop.hi} {{")
    for instr in program.loop.body:
        out.extend(INDENT + line for line in _source_instr(instr, var))
    out.append("}")
    for instr in program.post_body:
        out.extend(_source_instr(instr, var))
    return "\n".join(out) + "\n"
