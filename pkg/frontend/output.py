"""
Output program representation.
Contains the integer expression language and the statement tree emitted by code generation.

Integer division and modulo follow floor semantics, so ``sign(a % b) == sign(b)``.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from algebra.gates import GateClass


# Expressions


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


Expr = Union[IntLit, Var, BinOp, Neg]

PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}
NEG_PRECEDENCE = 3


def evaluate(expr: Expr, env: Dict[str, int]) -> int:
    """
    Evaluate an integer expression.

    Raises:
        KeyError: For an unbound variable
        ZeroDivisionError: For division or modulo by zero
    """
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, env)
    left, right = evaluate(expr.left, env), evaluate(expr.right, env)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if expr.op == "/":
        return left // right
    if expr.op == "%":
        return left % right
    raise ValueError(f"Unknown operator {expr.op!r}")


def format_expr(expr: Expr) -> str:
    """Render with the minimal parentheses that preserve the tree shape."""
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        inner = format_expr(expr.operand)
        if isinstance(expr.operand, (BinOp, Neg)) or (
            isinstance(expr.operand, IntLit) and expr.operand.value < 0
        ):
            inner = f"({inner})"
        return f"-{inner}"
    prec = PRECEDENCE[expr.op]
    left, right = format_expr(expr.left), format_expr(expr.right)
    if _precedence(expr.left) < prec:
        left = f"({left})"
    if _precedence(expr.right) <= prec:
        right = f"({right})"
    return f"{left}{expr.op}{right}"


def _precedence(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return PRECEDENCE[expr.op]
    if isinstance(expr, Neg):
        return NEG_PRECEDENCE
    if isinstance(expr, IntLit) and expr.value < 0:
        # "-2" reparses as a literal but binds like a unary minus
        return NEG_PRECEDENCE
    return 4


def bound_expr(bound) -> Expr:
    """Expression for a loop bound that is either an integer or a symbol name."""
    return IntLit(bound) if isinstance(bound, int) else Var(bound)


def offset(expr: Expr, c: int) -> Expr:
    """``expr + c`` with trailing constants folded."""
    if c == 0:
        return expr
    if isinstance(expr, IntLit):
        return IntLit(expr.value + c)
    if isinstance(expr, BinOp) and expr.op in "+-" and isinstance(expr.right, IntLit):
        inner = expr.right.value if expr.op == "+" else -expr.right.value
        return offset(expr.left, inner + c)
    if c > 0:
        return BinOp("+", expr, IntLit(c))
    return BinOp("-", expr, IntLit(-c))


def linear(k: int, var: Expr, b: int) -> Expr:
    """``k*var + b`` for a linear index, folded when ``var`` is a literal."""
    if isinstance(var, IntLit):
        return IntLit(k * var.value + b)
    if k == 0:
        return IntLit(b)
    if k == 1:
        term = var
    elif k == -1:
        term = Neg(var)
    else:
        term = BinOp("*", IntLit(k), var)
    return offset(term, b)


# Gates


@dataclass(frozen=True)
class NamedGate:
    """Library gate such as ``H`` or ``RZ(0.5)``."""

    name: str
    params: Tuple[float, ...] = ()


@dataclass(frozen=True)
class ArrayGate:
    """Element of a declared gate array: ``SQ(U[index])``."""

    array: str
    index: Expr


@dataclass(frozen=True)
class MatrixGate:
    """Literal matrix, only used as a factor of a composite definition."""

    entries: Tuple[complex, complex, complex, complex]


GateSpec = Union[NamedGate, ArrayGate, MatrixGate]


@dataclass(frozen=True)
class OutQubit:
    array: str
    index: Expr


# Statements


@dataclass(frozen=True)
class SqStmt:
    gate: GateSpec
    target: OutQubit


@dataclass(frozen=True)
class CzStmt:
    a: OutQubit
    b: OutQubit


@dataclass
class ForStmt:
    var: str
    lo: Expr
    hi: Expr
    body: List["Stmt"]


@dataclass
class ParallelStmt:
    ops: List[Union[SqStmt, CzStmt]]


@dataclass(frozen=True)
class Compare:
    op: str
    left: Expr
    right: Expr

    def holds(self, env: Dict[str, int]) -> bool:
        left, right = evaluate(self.left, env), evaluate(self.right, env)
        return {
            ">=": left >= right,
            "<=": left <= right,
            ">": left > right,
            "<": left < right,
            "==": left == right,
            "!=": left != right,
        }[self.op]


@dataclass
class GuardStmt:
    """First branch whose condition holds is executed, otherwise the fallback."""

    branches: List[Tuple[Compare, List["Stmt"]]]
    otherwise: List["Stmt"]


Stmt = Union[SqStmt, CzStmt, ForStmt, ParallelStmt, GuardStmt]


# Declarations


@dataclass(frozen=True)
class ArrayDef:
    """Re-declared input gate array: hinted, or a list of matrices."""

    name: str
    size: int
    hint: GateClass
    matrices: Optional[Tuple[Tuple[complex, ...], ...]] = None


@dataclass(frozen=True)
class CompositeDef:
    """
    Product of gates in application order.

    With ``param`` set, the definition is a family indexed by that parameter
    and referenced as ``SQ(name[expr])``; otherwise it is a single matrix
    referenced as ``SQ(name[0])``.
    """

    name: str
    param: Optional[str]
    factors: Tuple[GateSpec, ...]


@dataclass
class OutputProgram:
    qubit_arrays: Dict[str, int]
    symbols: List[str]
    gate_defs: List[Union[ArrayDef, CompositeDef]] = field(default_factory=list)
    body: List[Stmt] = field(default_factory=list)

    def composite(self, name: str) -> Optional[CompositeDef]:
        for d in self.gate_defs:
            if isinstance(d, CompositeDef) and d.name == name:
                return d
        return None
