"""
Tests for the output language: expressions, printer and reader.
"""

import pytest
from hypothesis import given, strategies as st

from frontend.emitter import emit
from frontend.output import (
    BinOp,
    Compare,
    CompositeDef,
    IntLit,
    Neg,
    Var,
    evaluate,
    format_expr,
    linear,
    offset,
)
from frontend.output_parser import parse_output
from utils.errors import ParseError

CANONICAL = """qubit q[8];
symbolic a, b;
defgate U[2] = unknown;
defgate M[1] = [{(0.0,0.0),(1.0,0.0),(1.0,0.0),(0.0,0.0)}];
defgate C0[1] = product(H, SQ(U[0]));
defgate C1(k) = product(SQ(U[k%2]), RZ(0.5));

H q[0];
for i in a to b-1 {
    parallel {
        CZ q[i], q[i+1];
        SQ(C1[i]) q[i+2];
    }
}
guard {
    b-a>=3 => {
        SQ(C0[0]) q[1];
    }
    otherwise => {
        CZ q[0], q[1];
    }
}
"""

exprs = st.recursive(
    st.one_of(st.integers(-5, 5).map(IntLit), st.sampled_from([Var("i"), Var("n")])),
    lambda children: st.one_of(
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "%"]), children, children),
        st.builds(Neg, children),
    ),
    max_leaves=8,
)


def parse_expr(text):
    program = parse_output(f"symbolic i, n;\nguard {{\n{text}==0 => {{\n}}\notherwise => {{\n}}\n}}\n")
    return program.body[0].branches[0][0].left


def safe_eval(expr, env):
    try:
        return evaluate(expr, env)
    except ZeroDivisionError:
        return None


def test_canonical_text_roundtrips():
    assert emit(parse_output(CANONICAL)) == CANONICAL


def test_composite_lookup():
    program = parse_output(CANONICAL)
    family = program.composite("C1")
    assert isinstance(family, CompositeDef)
    assert family.param == "k"
    assert program.composite("C0").param is None
    assert program.composite("U") is None


@given(exprs, st.integers(-7, 7), st.integers(-7, 7))
def test_printed_expressions_keep_their_value(expr, i, n):
    env = {"i": i, "n": n}
    assert safe_eval(parse_expr(format_expr(expr)), env) == safe_eval(expr, env)


def test_floor_division_and_modulo():
    env = {"i": -7}
    assert evaluate(BinOp("/", Var("i"), IntLit(2)), env) == -4
    assert evaluate(BinOp("%", Var("i"), IntLit(2)), env) == 1
    assert evaluate(BinOp("%", IntLit(7), IntLit(-2)), env) == -1


def test_minimal_parentheses():
    i = Var("i")
    assert format_expr(BinOp("-", i, BinOp("-", i, IntLit(1)))) == "i-(i-1)"
    assert format_expr(BinOp("-", BinOp("-", i, IntLit(1)), i)) == "i-1-i"
    assert format_expr(BinOp("*", BinOp("+", i, IntLit(1)), IntLit(2))) == "(i+1)*2"
    assert format_expr(Neg(BinOp("+", i, IntLit(1)))) == "-(i+1)"


def test_linear_folding():
    i = Var("i")
    assert format_expr(linear(1, i, 0)) == "i"
    assert format_expr(linear(3, i, -2)) == "3*i-2"
    assert format_expr(linear(-1, i, 4)) == "-i+4"
    assert linear(2, IntLit(5), 1) == IntLit(11)
    assert format_expr(offset(offset(i, 3), -1)) == "i+2"
    assert offset(offset(i, 3), -3) == i


@pytest.mark.parametrize(
    "op, expected",
    [(">=", True), ("<=", False), (">", True), ("<", False), ("==", False), ("!=", True)],
)
def test_compare(op, expected):
    assert Compare(op, Var("n"), IntLit(3)).holds({"n": 5}) is expected


@pytest.mark.parametrize(
    "source, message",
    [
        ("qubit q[2];\nH r[0];\n", "undeclared qubit array"),
        ("qubit q[2];\nH q[j];\n", "undeclared identifier 'j'"),
        ("qubit q[2];\nSQ(U[0]) q[0];\n", "undeclared gate array"),
        ("qubit q[2];\nguard {\n0 => {\n}\notherwise => {\n}\n}\n", "expected a comparison"),
    ],
)
def test_rejected_output(source, message):
    with pytest.raises(ParseError, match=message):
        parse_output(source)
