"""
Program interpreter.
Contains the expansion of source loops and emitted output programs into concrete
circuits, and the equivalence sweep run by ``--verify``.
"""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from algebra.gates import named_gate
from frontend.ast import CzOp, Instruction, LoopProgram
from frontend.output import (
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
    evaluate,
)
from logging_config import get_logger
from utils.errors import ValidationError, VerificationError
from utils.misc import get_config_value
from verifier.bindings import GateBindings
from verifier.simulator import AUTO, SimCircuit, deviation

logger = get_logger()

# lower bounds tried for unknown ranges; covers every residue up to an unroll factor of 4
START_VALUES = (0, 1, 2, 3)


def _bound(bound, env: Dict[str, int]) -> int:
    return bound if isinstance(bound, int) else env[bound]


def _append(circuit: SimCircuit, instr: Instruction, program: LoopProgram, bindings: GateBindings):
    for q in instr.qubits:
        size = program.qubit_arrays[q.array]
        if not 0 <= q.intercept < size:
            raise ValidationError(f"Index {q.intercept} out of bounds for {q.array}[{size}]")
    if isinstance(instr, CzOp):
        circuit.cz((instr.a.array, instr.a.intercept), (instr.b.array, instr.b.intercept), instr.variant)
        return
    for ref in getattr(instr.gate, "refs", ()):
        d = program.gate_defs.get(ref.array)
        if d is not None and not 0 <= ref.intercept < d.size:
            raise ValidationError(f"Gate index {ref.intercept} out of bounds for {ref.array}[{d.size}]")
    circuit.sq((instr.target.array, instr.target.intercept), bindings.matrix(instr.gate))


def unroll_concrete(program: LoopProgram, env: Dict[str, int], bindings: GateBindings) -> SimCircuit:
    """
    The source program as a concrete circuit.

    Args:
        env: Values of the symbolic loop bounds

    Raises:
        ValidationError: If an index falls outside its array for these bounds
    """
    circuit = SimCircuit()
    for instr in program.pre_body:
        _append(circuit, instr, program, bindings)
    loop = program.loop
    for i in range(_bound(loop.lo, env), _bound(loop.hi, env) + 1):
        for instr in loop.body:
            _append(circuit, instr.freeze(i), program, bindings)
    for instr in program.post_body:
        _append(circuit, instr, program, bindings)
    return circuit


class OutputInterpreter:
    """Walks an output program and records the gates it applies."""

    def __init__(self, program: OutputProgram, bindings: GateBindings):
        self.program = program
        self.bindings = bindings
        self.circuit = SimCircuit()

    def run(self, env: Dict[str, int]) -> SimCircuit:
        self._block(self.program.body, dict(env))
        return self.circuit

    def _block(self, stmts, env: Dict[str, int]):
        for stmt in stmts:
            if isinstance(stmt, ForStmt):
                lo, hi = evaluate(stmt.lo, env), evaluate(stmt.hi, env)
                for value in range(lo, hi + 1):
                    self._block(stmt.body, {**env, stmt.var: value})
            elif isinstance(stmt, GuardStmt):
                for condition, body in stmt.branches:
                    if condition.holds(env):
                        self._block(body, env)
                        break
                else:
                    self._block(stmt.otherwise, env)
            elif isinstance(stmt, ParallelStmt):
                touched = [q for op in stmt.ops for q in self._op_qubits(op, env)]
                if len(set(touched)) != len(touched):
                    raise VerificationError(f"Parallel block acts twice on one qubit: {sorted(touched)}")
                for op in stmt.ops:
                    self._op(op, env)
            else:
                self._op(stmt, env)

    def _qubit(self, q: OutQubit, env: Dict[str, int]):
        index = evaluate(q.index, env)
        size = self.program.qubit_arrays.get(q.array)
        if size is None or not 0 <= index < size:
            raise VerificationError(f"Output addresses {q.array}[{index}] outside its array")
        return q.array, index

    def _op_qubits(self, op, env):
        if isinstance(op, CzStmt):
            return [self._qubit(op.a, env), self._qubit(op.b, env)]
        return [self._qubit(op.target, env)]

    def _op(self, op, env: Dict[str, int]):
        if isinstance(op, CzStmt):
            self.circuit.cz(self._qubit(op.a, env), self._qubit(op.b, env))
        elif isinstance(op, SqStmt):
            self.circuit.sq(self._qubit(op.target, env), self.gate_matrix(op.gate, env))
        else:
            raise VerificationError(f"Unexpected statement in output: {op!r}")

    def gate_matrix(self, gate, env: Dict[str, int]) -> np.ndarray:
        if isinstance(gate, NamedGate):
            return named_gate(gate.name, gate.params).matrix
        if isinstance(gate, MatrixGate):
            return np.array(gate.entries, dtype=complex).reshape(2, 2)
        index = evaluate(gate.index, env)
        composite = self.program.composite(gate.array)
        if composite is None:
            try:
                return self.bindings.element(gate.array, index)
            except (KeyError, IndexError) as e:
                raise VerificationError(f"Bad gate reference {gate.array}[{index}]: {e}")
        return self._composite(composite, index)

    def _composite(self, composite: CompositeDef, index: int) -> np.ndarray:
        scope = {composite.param: index} if composite.param else {}
        if not composite.param and index != 0:
            raise VerificationError(f"Composite {composite.name} has a single element, got index {index}")
        out = np.eye(2, dtype=complex)
        for factor in composite.factors:
            out = self.gate_matrix(factor, scope) @ out
        return out


def execute_output(program: OutputProgram, env: Dict[str, int], bindings: GateBindings) -> SimCircuit:
    """
    The output program as a concrete circuit.

    Raises:
        VerificationError: On out-of-range indices or overlapping parallel operations
    """
    return OutputInterpreter(program, bindings).run(env)


def bound_environments(program: LoopProgram, trips: Sequence[int]) -> List[Dict[str, int]]:
    """Concrete values for symbolic loop bounds: each trip count in range, from several start values."""
    loop = program.loop
    if loop.is_known:
        return [{}]
    envs = []
    for t in range(trips[0], trips[1] + 1):
        for m in START_VALUES:
            env: Dict[str, int] = {}
            if isinstance(loop.lo, str) and isinstance(loop.hi, str):
                env[loop.lo], env[loop.hi] = m, m + t - 1
            elif isinstance(loop.lo, str):
                env[loop.lo] = loop.hi - t + 1
            else:
                env[loop.hi] = loop.lo + t - 1
            if env not in envs:
                envs.append(env)
    return envs


def verify_program(program: LoopProgram, output: OutputProgram, config: Dict[str, Any]) -> Optional[float]:
    """
    Check that ``output`` implements ``program`` for several gate bindings.

    Unknown ranges are checked for every trip count of ``verify.unknown_trips``
    and several lower bounds; bound values that put a source index outside
    its array are skipped.

    Returns:
        float: the largest deviation seen, or ``None`` when every check was skipped

    Raises:
        VerificationError: On the first mismatch beyond ``verify.tolerance``
    """
    seed = get_config_value(config, "verify.seed", 2023)
    count = get_config_value(config, "verify.bindings", 8)
    tol = get_config_value(config, "verify.tolerance", 1e-7)
    states = get_config_value(config, "verify.states", 8)
    max_qubits = get_config_value(config, "verify.max_qubits", 14)
    trips = get_config_value(config, "verify.unknown_trips", [2, 12])

    worst: Optional[float] = None
    for env in bound_environments(program, trips):
        for k in range(count):
            bindings = GateBindings(seed + k, program.gate_defs)
            try:
                expected = unroll_concrete(program, env, bindings)
            except ValidationError as e:
                logger.debug(f"Skipping bounds {env}: {e}")
                break
            actual = execute_output(output, env, bindings)
            qubits = set(expected.qubits) | set(actual.qubits)
            if len(qubits) > max_qubits:
                logger.warning(
                    f"Skipping verification for bounds {env}: {len(qubits)} qubits exceed the limit of {max_qubits}"
                )
                break
            dev = deviation(expected, actual, AUTO, states, seed + k, sorted(qubits))
            worst = dev if worst is None else max(worst, dev)
            if dev > tol:
                raise VerificationError(
                    f"Output differs from source (bounds {env or 'as declared'}, binding seed {seed + k}): "
                    f"deviation {dev:.3g} > {tol:g}",
                    dev,
                )
    if worst is None:
        logger.warning("No verification check could be run")
    else:
        logger.info(f"Verified output, largest deviation {worst:.3g}")
    return worst
