"""
Input language parser.
Contains the recursive-descent parser that turns loop program text into a LoopProgram.

The concrete grammar is documented in ``frontend/grammar.md``.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from algebra.aliasing import in_loop_alias
from algebra.gates import (
    GateClass,
    GateLabel,
    GateRef,
    SymbolicGate,
    classify,
    common_class,
    known,
    named_gate,
)
from frontend.ast import CzOp, GateDef, LoopProgram, LoopSpec, QubitRef, SqOp
from frontend.lexer import Token, TokenStream, tokenize
from logging_config import get_logger
from utils.errors import ParseError

logger = get_logger()

UNITARY_TOL = 1e-9


@dataclass
class Affine:
    """Integer affine form ``sum(coef[v] * v) + const`` over index variables."""

    coef: Dict[str, int] = field(default_factory=dict)
    const: int = 0

    def add(self, other: "Affine", sign: int = 1) -> "Affine":
        coef = dict(self.coef)
        for var, c in other.coef.items():
            coef[var] = coef.get(var, 0) + sign * c
        return Affine({v: c for v, c in coef.items() if c != 0}, self.const + sign * other.const)

    def scale(self, k: int) -> "Affine":
        if k == 0:
            return Affine()
        return Affine({v: c * k for v, c in self.coef.items()}, self.const * k)

    @property
    def is_constant(self) -> bool:
        return not self.coef


def parse_real(stream: TokenStream) -> float:
    """Parse a real-valued gate parameter: numbers, ``pi``, ``+ - * /`` and parentheses."""
    value = _real_term(stream)
    while stream.at("+") or stream.at("-"):
        op = stream.advance().text
        rhs = _real_term(stream)
        value = value + rhs if op == "+" else value - rhs
    return value


def _real_term(stream: TokenStream) -> float:
    value = _real_unary(stream)
    while stream.at("*") or stream.at("/"):
        op_tok = stream.advance()
        rhs = _real_unary(stream)
        if op_tok.text == "*":
            value *= rhs
        else:
            if rhs == 0:
                stream.error("division by zero in gate parameter", op_tok)
            value /= rhs
    return value


def _real_unary(stream: TokenStream) -> float:
    if stream.accept("-"):
        return -_real_unary(stream)
    if stream.accept("+"):
        return _real_unary(stream)
    tok = stream.current
    if tok.kind in ("FLOAT", "INT"):
        stream.advance()
        return float(tok.text)
    if tok.kind == "IDENT" and tok.text == "pi":
        stream.advance()
        return math.pi
    if stream.accept("("):
        value = parse_real(stream)
        stream.expect(")")
        return value
    stream.error(f"expected a number, found {stream.describe(tok)}")


def parse_complex(stream: TokenStream) -> complex:
    """``(re, im)`` or a bare real."""
    if stream.accept("("):
        re_part = parse_real(stream)
        stream.expect(",")
        im_part = parse_real(stream)
        stream.expect(")")
        return complex(re_part, im_part)
    return complex(parse_real(stream), 0.0)


def parse_matrix(stream: TokenStream) -> np.ndarray:
    """``{ c00, c01, c10, c11 }`` in row-major order."""
    start = stream.expect("{")
    entries = [parse_complex(stream)]
    while stream.accept(","):
        entries.append(parse_complex(stream))
    stream.expect("}")
    if len(entries) != 4:
        stream.error(f"a gate matrix needs 4 entries, found {len(entries)}", start)
    matrix = np.array(entries, dtype=complex).reshape(2, 2)
    if np.max(np.abs(matrix.conj().T @ matrix - np.eye(2))) > UNITARY_TOL:
        stream.invalid("gate matrix is not unitary", start)
    return matrix


def parse_gate_params(stream: TokenStream) -> tuple:
    """Optional parenthesised, comma-separated parameter list."""
    if not stream.accept("("):
        return ()
    params = [parse_real(stream)]
    while stream.accept(","):
        params.append(parse_real(stream))
    stream.expect(")")
    return tuple(params)


class LoopParser:
    """
    Recursive-descent parser for the loop input language.

    Declarations may appear anywhere before their first use. Exactly one
    top-level ``for`` loop is allowed; statements before it form the pre-body
    and statements after it the post-body. ``for`` loops nested in the main
    loop must have constant bounds and are unrolled while parsing.
    """

    def __init__(self, source: str):
        self.stream = TokenStream(tokenize(source))
        self.qubits: Dict[str, int] = {}
        self.gate_defs: Dict[str, GateDef] = {}
        self.symbols: List[str] = []
        self.pre_body = []
        self.post_body = []
        self.loop: Optional[LoopSpec] = None
        self.main_var: Optional[str] = None

    def parse(self) -> LoopProgram:
        s = self.stream
        while s.current.kind != "EOF":
            if s.at("qubit"):
                self._qubit_decl()
            elif s.at("symbolic"):
                self._symbolic_decl()
            elif s.at("defgate"):
                self._gate_decl()
            elif s.at("for"):
                if self.loop is not None:
                    s.error("only one top-level loop is allowed")
                self._main_loop()
            else:
                target = self.pre_body if self.loop is None else self.post_body
                target.extend(self._statement({}, in_loop=False))

        if self.loop is None:
            s.error("program has no loop")

        program = LoopProgram(
            qubit_arrays=dict(self.qubits),
            gate_defs=dict(self.gate_defs),
            symbols=list(self.symbols),
            pre_body=_number(self.pre_body),
            loop=replace(self.loop, body=_number(self.loop.body)),
            post_body=_number(self.post_body),
        )
        logger.debug(
            f"Parsed program: {len(program.pre_body)} pre, {len(program.loop.body)} body, "
            f"{len(program.post_body)} post instructions"
        )
        return program

    # Declarations

    def _new_name(self, tok: Token):
        if tok.text in self.qubits or tok.text in self.gate_defs or tok.text in self.symbols:
            self.stream.error(f"duplicate declaration of {tok.text!r}", tok)

    def _qubit_decl(self):
        s = self.stream
        s.expect("qubit")
        name = s.expect_kind("IDENT", "a qubit array name")
        self._new_name(name)
        s.expect("[")
        size = int(s.expect_kind("INT", "an array size").text)
        s.expect("]")
        s.expect(";")
        if size < 1:
            s.error("qubit array size must be positive", name)
        self.qubits[name.text] = size

    def _symbolic_decl(self):
        s = self.stream
        s.expect("symbolic")
        while True:
            name = s.expect_kind("IDENT", "a symbol name")
            self._new_name(name)
            self.symbols.append(name.text)
            if not s.accept(","):
                break
        s.expect(";")

    def _gate_decl(self):
        s = self.stream
        s.expect("defgate")
        name = s.expect_kind("IDENT", "a gate array name")
        self._new_name(name)
        s.expect("[")
        size = int(s.expect_kind("INT", "an array size").text)
        s.expect("]")
        s.expect("=")
        if s.at("diagonal") or s.at("antidiagonal") or s.at("unknown"):
            hint = GateClass.from_hint(s.advance().text)
            gate_def = GateDef(name.text, size, hint)
        else:
            open_tok = s.expect("[")
            matrices = [parse_matrix(s)]
            while s.accept(","):
                matrices.append(parse_matrix(s))
            s.expect("]")
            if len(matrices) != size:
                s.error(f"gate array {name.text} declares {size} matrices but lists {len(matrices)}",
                        open_tok)
            gates = tuple(
                known(m, GateLabel(name.text, index=k)) for k, m in enumerate(matrices)
            )
            hint = common_class(classify(g) for g in gates)
            gate_def = GateDef(name.text, size, hint, gates)
        s.expect(";")
        self.gate_defs[name.text] = gate_def

    # Loops

    def _bound(self):
        s = self.stream
        if s.accept("-"):
            return -int(s.expect_kind("INT", "a loop bound").text)
        tok = s.current
        if tok.kind == "INT":
            s.advance()
            return int(tok.text)
        if tok.kind == "IDENT":
            s.advance()
            if tok.text not in self.symbols:
                s.error(f"undeclared symbol {tok.text!r}", tok)
            return tok.text
        s.error(f"expected a loop bound, found {s.describe(tok)}")

    def _main_loop(self):
        s = self.stream
        s.expect("for")
        var = s.expect_kind("IDENT", "a loop variable")
        s.expect("in")
        lo = self._bound()
        s.expect("to")
        hi = self._bound()
        self.main_var = var.text
        self.loop = LoopSpec(var.text, lo, hi, [])
        s.expect("{")
        body = []
        while not s.at("}"):
            if s.current.kind == "EOF":
                s.error("unterminated loop body")
            body.extend(self._statement({}, in_loop=True))
        s.expect("}")
        self.loop.body = body
        self.main_var = None

    def _nested_loop(self, env: Dict[str, int]):
        s = self.stream
        s.expect("for")
        var = s.expect_kind("IDENT", "a loop variable")
        if var.text == self.main_var or var.text in env:
            s.error(f"loop variable {var.text!r} shadows an enclosing loop", var)
        s.expect("in")
        lo = self._constant(env)
        s.expect("to")
        hi = self._constant(env)
        s.expect("{")
        start = s.pos
        out = []
        for value in range(lo, hi + 1):
            s.pos = start
            inner = dict(env)
            inner[var.text] = value
            while not s.at("}"):
                if s.current.kind == "EOF":
                    s.error("unterminated loop body")
                out.extend(self._statement(inner, in_loop=True))
        if hi < lo:
            self._skip_block()
        s.expect("}")
        return out

    def _skip_block(self):
        s = self.stream
        depth = 0
        while not (depth == 0 and s.at("}")):
            if s.current.kind == "EOF":
                s.error("unterminated loop body")
            if s.at("{"):
                depth += 1
            elif s.at("}"):
                depth -= 1
            s.advance()

    def _constant(self, env: Dict[str, int]) -> int:
        tok = self.stream.current
        form = self._affine(env, allow_main=False)
        if not form.is_constant:
            self.stream.error("nested loop bounds must be constant", tok)
        return form.const

    # Statements

    def _statement(self, env: Dict[str, int], in_loop: bool):
        s = self.stream
        tok = s.current
        if s.at("measure"):
            s.invalid("measurement is not supported")
        if s.at("for"):
            if not in_loop:
                s.error("only one top-level loop is allowed")
            return self._nested_loop(env)
        if s.at("CZ"):
            s.advance()
            a = self._qref(env, in_loop)
            s.expect(",")
            b = self._qref(env, in_loop)
            s.expect(";")
            self._check_cz(a, b, tok, in_loop)
            return [CzOp(a, b)]
        if s.at("SQ"):
            s.advance()
            s.expect("(")
            gate = self._array_gate(env, in_loop)
            s.expect(")")
        elif tok.kind == "IDENT":
            s.advance()
            params = parse_gate_params(s)
            try:
                gate = named_gate(tok.text.upper(), params)
            except ValueError as e:
                s.error(str(e), tok)
        else:
            s.error(f"expected a statement, found {s.describe(tok)}")
        target = self._qref(env, in_loop)
        s.expect(";")
        return [SqOp(gate, target)]

    def _array_gate(self, env, in_loop):
        s = self.stream
        name = s.expect_kind("IDENT", "a gate array name")
        if name.text not in self.gate_defs:
            s.error(f"undeclared gate array {name.text!r}", name)
        gate_def = self.gate_defs[name.text]
        s.expect("[")
        form = self._affine(env, allow_main=in_loop)
        s.expect("]")
        slope, intercept = self._linear(form)
        self._check_bounds(name, slope, intercept, gate_def.size, in_loop)
        if gate_def.is_known and slope == 0:
            return gate_def.matrices[intercept]
        ref = GateRef(name.text, slope, intercept, gate_def.hint)
        return SymbolicGate((ref,), gate_def.hint)

    def _qref(self, env, in_loop) -> QubitRef:
        s = self.stream
        name = s.expect_kind("IDENT", "a qubit reference")
        if name.text not in self.qubits:
            s.error(f"undeclared qubit array {name.text!r}", name)
        s.expect("[")
        form = self._affine(env, allow_main=in_loop)
        s.expect("]")
        slope, intercept = self._linear(form)
        self._check_bounds(name, slope, intercept, self.qubits[name.text], in_loop)
        return QubitRef(name.text, slope, intercept)

    def _linear(self, form: Affine):
        return form.coef.get(self.main_var, 0) if self.main_var else 0, form.const

    def _check_bounds(self, name: Token, slope: int, intercept: int, size: int, in_loop: bool):
        if in_loop and slope != 0:
            if not self.loop.is_known:
                return
            if self.loop.lo > self.loop.hi:
                return
            indices = (slope * self.loop.lo + intercept, slope * self.loop.hi + intercept)
        else:
            indices = (intercept,)
        for idx in indices:
            if not 0 <= idx < size:
                self.stream.invalid(f"index {idx} out of bounds for {name.text}[{size}]", name)

    def _check_cz(self, a: QubitRef, b: QubitRef, tok: Token, in_loop: bool):
        if a == b:
            self.stream.invalid("CZ operands are identical", tok)
        if in_loop and self.loop.is_known:
            hit = in_loop_alias(a, b, self.loop.iter_range)
            if hit:
                self.stream.invalid(f"CZ operands coincide at {self.main_var}={hit.witness}", tok)
        elif a.is_concrete and b.is_concrete and in_loop_alias(a, b):
            self.stream.invalid("CZ operands are identical", tok)

    # Index expressions

    def _affine(self, env: Dict[str, int], allow_main: bool) -> Affine:
        s = self.stream
        form = self._affine_term(env, allow_main)
        while s.at("+") or s.at("-"):
            sign = 1 if s.advance().text == "+" else -1
            form = form.add(self._affine_term(env, allow_main), sign)
        return form

    def _affine_term(self, env, allow_main) -> Affine:
        s = self.stream
        form = self._affine_factor(env, allow_main)
        while s.at("*"):
            op = s.advance()
            rhs = self._affine_factor(env, allow_main)
            if form.is_constant:
                form = rhs.scale(form.const)
            elif rhs.is_constant:
                form = form.scale(rhs.const)
            else:
                s.error("non-linear index expression", op)
        if s.at("/") or s.at("%"):
            s.error("division is not allowed in index expressions")
        return form

    def _affine_factor(self, env, allow_main) -> Affine:
        s = self.stream
        tok = s.current
        if s.accept("-"):
            return self._affine_factor(env, allow_main).scale(-1)
        if s.accept("("):
            form = self._affine(env, allow_main)
            s.expect(")")
            return form
        if tok.kind == "INT":
            s.advance()
            return Affine(const=int(tok.text))
        if tok.kind == "IDENT":
            s.advance()
            if tok.text in env:
                return Affine(const=env[tok.text])
            if allow_main and tok.text == self.main_var:
                return Affine({tok.text: 1})
            s.error(f"undeclared identifier {tok.text!r}", tok)
        s.error(f"expected an index expression, found {s.describe(tok)}")


def _number(instructions):
    return [replace(instr, source_index=k) for k, instr in enumerate(instructions)]


def parse(source: str) -> LoopProgram:
    """
    Parse loop program text.

    Args:
        source: Program text

    Returns:
        LoopProgram: the parsed program

    Raises:
        ParseError: On syntax errors, undeclared names or non-linear indices
        ValidationError: On out-of-bounds indices, measurement, degenerate CZ
            operands or non-unitary matrices
    """
    return LoopParser(source).parse()
