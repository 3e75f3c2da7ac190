"""
Output language parser.
Reads text produced by ``frontend.emitter`` back into an OutputProgram.
"""

from typing import Dict, List, Set

from algebra.gates import GateClass, classify, common_class, known, named_gate
from frontend.lexer import TokenStream, tokenize
from frontend.output import (
    ArrayDef,
    ArrayGate,
    BinOp,
    Compare,
    CompositeDef,
    CzStmt,
    ForStmt,
    GuardStmt,
    IntLit,
    MatrixGate,
    NamedGate,
    Neg,
    OutputProgram,
    OutQubit,
    ParallelStmt,
    SqStmt,
    Var,
)
from frontend.parser import parse_gate_params, parse_matrix

COMPARISONS = (">=", "<=", "==", "!=", ">", "<")


class OutputParser:
    """Recursive-descent parser for the output language."""

    def __init__(self, source: str):
        self.stream = TokenStream(tokenize(source))
        self.qubits: Dict[str, int] = {}
        self.symbols: List[str] = []
        self.arrays: Set[str] = set()
        self.defs = []

    def parse(self) -> OutputProgram:
        s = self.stream
        body = []
        while s.current.kind != "EOF":
            if s.at("qubit"):
                s.advance()
                name = s.expect_kind("IDENT", "a qubit array name").text
                s.expect("[")
                self.qubits[name] = int(s.expect_kind("INT", "an array size").text)
                s.expect("]")
                s.expect(";")
            elif s.at("symbolic"):
                s.advance()
                self.symbols.append(s.expect_kind("IDENT", "a symbol name").text)
                while s.accept(","):
                    self.symbols.append(s.expect_kind("IDENT", "a symbol name").text)
                s.expect(";")
            elif s.at("defgate"):
                self.defs.append(self._gate_def())
            else:
                body.append(self._statement(set(self.symbols)))
        return OutputProgram(dict(self.qubits), list(self.symbols), list(self.defs), body)

    def _gate_def(self):
        s = self.stream
        s.expect("defgate")
        name = s.expect_kind("IDENT", "a gate name").text
        self.arrays.add(name)
        if s.accept("("):
            param = s.expect_kind("IDENT", "a parameter name").text
            s.expect(")")
            s.expect("=")
            factors = self._product({param})
            s.expect(";")
            return CompositeDef(name, param, factors)
        s.expect("[")
        size = int(s.expect_kind("INT", "an array size").text)
        s.expect("]")
        s.expect("=")
        if s.at("product"):
            factors = self._product(set())
            s.expect(";")
            return CompositeDef(name, None, factors)
        if s.at("diagonal") or s.at("antidiagonal") or s.at("unknown"):
            hint = GateClass.from_hint(s.advance().text)
            s.expect(";")
            return ArrayDef(name, size, hint)
        s.expect("[")
        matrices = [parse_matrix(s)]
        while s.accept(","):
            matrices.append(parse_matrix(s))
        s.expect("]")
        s.expect(";")
        gates = [known(m) for m in matrices]
        hint = common_class(classify(g) for g in gates)
        return ArrayDef(name, size, hint, tuple(g.entries for g in gates))

    def _product(self, scope: Set[str]):
        s = self.stream
        s.expect("product")
        s.expect("(")
        factors = [self._factor(scope)]
        while s.accept(","):
            factors.append(self._factor(scope))
        s.expect(")")
        return tuple(factors)

    def _factor(self, scope):
        s = self.stream
        if s.at("{"):
            return MatrixGate(known(parse_matrix(s)).entries)
        return self._gate(scope)

    def _gate(self, scope):
        s = self.stream
        tok = s.current
        if s.accept("SQ"):
            s.expect("(")
            name = s.expect_kind("IDENT", "a gate array name")
            if name.text not in self.arrays:
                s.error(f"undeclared gate array {name.text!r}", name)
            s.expect("[")
            index = self._expr(scope)
            s.expect("]")
            s.expect(")")
            return ArrayGate(name.text, index)
        name = s.expect_kind("IDENT", "a gate name")
        params = parse_gate_params(s)
        try:
            named_gate(name.text, params)
        except ValueError as e:
            s.error(str(e), tok)
        return NamedGate(name.text, tuple(float(p) for p in params))

    def _qubit(self, scope) -> OutQubit:
        s = self.stream
        name = s.expect_kind("IDENT", "a qubit reference")
        if name.text not in self.qubits:
            s.error(f"undeclared qubit array {name.text!r}", name)
        s.expect("[")
        index = self._expr(scope)
        s.expect("]")
        return OutQubit(name.text, index)

    def _op(self, scope):
        s = self.stream
        if s.accept("CZ"):
            a = self._qubit(scope)
            s.expect(",")
            b = self._qubit(scope)
            s.expect(";")
            return CzStmt(a, b)
        gate = self._gate(scope)
        target = self._qubit(scope)
        s.expect(";")
        return SqStmt(gate, target)

    def _block(self, scope):
        s = self.stream
        s.expect("{")
        body = []
        while not s.at("}"):
            if s.current.kind == "EOF":
                s.error("unterminated block")
            body.append(self._statement(scope))
        s.expect("}")
        return body

    def _statement(self, scope):
        s = self.stream
        if s.accept("for"):
            var = s.expect_kind("IDENT", "a loop variable").text
            s.expect("in")
            lo = self._expr(scope)
            s.expect("to")
            hi = self._expr(scope)
            return ForStmt(var, lo, hi, self._block(scope | {var}))
        if s.accept("parallel"):
            s.expect("{")
            ops = []
            while not s.at("}"):
                if s.current.kind == "EOF":
                    s.error("unterminated parallel block")
                ops.append(self._op(scope))
            s.expect("}")
            return ParallelStmt(ops)
        if s.accept("guard"):
            s.expect("{")
            branches = []
            while not s.at("otherwise"):
                left = self._expr(scope)
                op_tok = s.current
                if not any(s.at(c) for c in COMPARISONS):
                    s.error(f"expected a comparison, found {s.describe(op_tok)}")
                s.advance()
                right = self._expr(scope)
                s.expect("=>")
                branches.append((Compare(op_tok.text, left, right), self._block(scope)))
            s.expect("otherwise")
            s.expect("=>")
            otherwise = self._block(scope)
            s.expect("}")
            return GuardStmt(branches, otherwise)
        return self._op(scope)

    # Expressions

    def _expr(self, scope):
        s = self.stream
        left = self._term(scope)
        while s.at("+") or s.at("-"):
            op = s.advance().text
            left = BinOp(op, left, self._term(scope))
        return left

    def _term(self, scope):
        s = self.stream
        left = self._unary(scope)
        while s.at("*") or s.at("/") or s.at("%"):
            op = s.advance().text
            left = BinOp(op, left, self._unary(scope))
        return left

    def _unary(self, scope):
        s = self.stream
        if s.accept("-"):
            if s.current.kind == "INT":
                return IntLit(-int(s.advance().text))
            return Neg(self._unary(scope))
        tok = s.current
        if tok.kind == "INT":
            s.advance()
            return IntLit(int(tok.text))
        if tok.kind == "IDENT":
            s.advance()
            if tok.text not in scope:
                s.error(f"undeclared identifier {tok.text!r}", tok)
            return Var(tok.text)
        if s.accept("("):
            inner = self._expr(scope)
            s.expect(")")
            return inner
        s.error(f"expected an expression, found {s.describe(tok)}")


def parse_output(source: str) -> OutputProgram:
    """
    Parse output language text.

    Raises:
        ParseError: On syntax errors or undeclared names
    """
    return OutputParser(source).parse()
