"""
Tests for the simulator, gate bindings and program interpreters.
"""

import numpy as np
import pytest

from algebra.gates import STANDARD_GATES
from frontend.output import IntLit, NamedGate, OutQubit, OutputProgram, ParallelStmt, SqStmt
from frontend.parser import parse
from pipeline.compile import UNKNOWN_HI, UNKNOWN_LO, compile_source, override_range
from utils.errors import ValidationError, VerificationError
from utils.misc import update_config_value
from verifier.bindings import GateBindings, random_unitary
from verifier.interpreter import bound_environments, execute_output, unroll_concrete, verify_program
from verifier.simulator import SimCircuit, deviation, equivalent

H, X, Z = (STANDARD_GATES[name].matrix for name in "HXZ")

GATE_ARRAYS = """qubit q[4];
defgate D[3] = diagonal;
defgate A[3] = antidiagonal;
defgate U[3] = unknown;
for i in 0 to 2 { SQ(D[i]) q[i]; }
"""


def circuit(*ops):
    c = SimCircuit()
    for op in ops:
        if isinstance(op[0], str):
            c.cz(op[1], op[2])
        else:
            c.sq(op[1], op[0])
    return c


def test_equivalence_up_to_phase():
    a = ("q", 0)
    assert equivalent(circuit((H, a), (Z, a), (H, a)), circuit((X, a)))
    assert equivalent(circuit((1j * X, a)), circuit((X, a)))
    assert not equivalent(circuit((Z, a)), circuit((X, a)))


def test_cz_differs_from_cz_with_z():
    a, b = ("q", 0), ("q", 1)
    plain = circuit(("cz", a, b))
    assert not equivalent(plain, circuit(("cz", a, b), (Z, b)))


def test_state_mode_agrees_with_unitary_mode():
    a, b, c = ("q", 0), ("q", 1), ("r", 0)
    first = circuit((H, a), ("cz", a, b), (X, c), ("cz", b, c))
    second = circuit((X, c), (H, a), ("cz", b, c), ("cz", a, b))
    assert deviation(first, second, "unitary") < 1e-9
    assert deviation(first, second, "states", states=4, seed=3) < 1e-9
    with pytest.raises(ValueError, match="Unknown simulation mode"):
        deviation(first, second, "exact")


def test_cz_needs_two_qubits():
    with pytest.raises(ValueError):
        SimCircuit().cz(("q", 0), ("q", 0))


def test_random_unitary():
    u = random_unitary(np.random.default_rng(5))
    np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)


def test_bindings_follow_hints_and_seed():
    program = parse(GATE_ARRAYS)
    first = GateBindings(7, program.gate_defs)
    second = GateBindings(7, program.gate_defs)
    d = first.element("D", 2)
    second.element("U", 0)
    np.testing.assert_allclose(second.element("D", 2), d)
    assert d[0, 1] == 0 and d[1, 0] == 0
    a = first.element("A", 1)
    assert a[0, 0] == 0 and a[1, 1] == 0
    assert not np.allclose(GateBindings(8, program.gate_defs).element("U", 0), second.element("U", 0))
    with pytest.raises(IndexError):
        first.element("U", 3)
    with pytest.raises(KeyError):
        first.element("V", 0)


def test_unroll_concrete(corpus):
    program = corpus("fig3.qlp")
    c = unroll_concrete(program, {}, GateBindings(0, program.gate_defs))
    assert len(c) == 21
    assert c.qubits == [("q", k) for k in range(8)]


def test_bound_environments(corpus):
    assert bound_environments(corpus("fig3.qlp"), [2, 12]) == [{}]
    envs = bound_environments(corpus("fig2.qlp"), [2, 3])
    assert {"a": 0, "b": 1} in envs
    assert {"a": 3, "b": 5} in envs
    assert all(env["b"] - env["a"] + 1 in (2, 3) for env in envs)


def test_parallel_block_acting_twice_is_rejected():
    h = SqStmt(NamedGate("H"), OutQubit("q", IntLit(0)))
    program = OutputProgram({"q": 2}, [], [], [ParallelStmt([h, h])])
    with pytest.raises(VerificationError, match="acts twice"):
        execute_output(program, {}, GateBindings(0, {}))


def test_out_of_range_output_is_rejected():
    program = OutputProgram({"q": 2}, [], [], [SqStmt(NamedGate("H"), OutQubit("q", IntLit(2)))])
    with pytest.raises(VerificationError, match="outside its array"):
        execute_output(program, {}, GateBindings(0, {}))


def test_corrupted_output_is_caught(corpus_path, config):
    with open(corpus_path("fig3.qlp"), "r", encoding="utf-8") as f:
        result = compile_source(f.read(), config)
    assert verify_program(result.source, result.program, config) <= 1e-7
    result.program.body.append(SqStmt(NamedGate("X"), OutQubit("q", IntLit(0))))
    with pytest.raises(VerificationError) as info:
        verify_program(result.source, result.program, config)
    assert info.value.deviation > 1e-7


SLOPE_GATES = """qubit q[16];
defgate G[8] = unknown;
for i in 0 to 5 { SQ(G[i]) q[i]; CZ q[i], q[i+1]; }
"""


def test_gate_index_past_its_array_is_a_validation_error():
    program = override_range(parse(SLOPE_GATES), "unknown")
    env = {UNKNOWN_LO: 6, UNKNOWN_HI: 8}
    with pytest.raises(ValidationError, match=r"Gate index 8 out of bounds for G\[8\]"):
        unroll_concrete(program, env, GateBindings(0, program.gate_defs))


def test_unknown_range_skips_bounds_past_a_gate_array(config):
    update_config_value(config, "verify.bindings", 2)
    result = compile_source(SLOPE_GATES, config, "unknown")
    assert verify_program(result.source, result.program, config) <= 1e-7
