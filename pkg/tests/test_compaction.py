"""
Tests for loop-body compaction.
"""

import numpy as np
from hypothesis import given, settings, strategies as st

from algebra.aliasing import IterRange, UNBOUNDED, in_loop_alias
from algebra.gates import STANDARD_GATES, named_gate
from conftest import circuit_of, cz, q, same_circuit, sq
from frontend.ast import CzOp, QubitRef, SqOp
import transforms.compaction as compaction
from transforms.compaction import (
    LEFT,
    RIGHT,
    compact_bidirectional,
    compact_fixpoint,
    compact_marked,
    compact_once,
    is_fixpoint,
)

GATES = [STANDARD_GATES[name] for name in ("H", "X", "Y", "Z", "S", "T", "TDG")] + [
    named_gate("RZP", [0.7]),
    named_gate("RX", [0.4]),
]

RANGE = IterRange(0, 3)
LOOP_REFS = [q(1, 0), q(1, 1), q(0, 2), q(2, 0), q(1, 0, "r"), q(0, 1, "r")]
LOOP_PAIRS = [
    (a, b) for a in LOOP_REFS for b in LOOP_REFS
    if a != b and not in_loop_alias(a, b, RANGE)
]
CONCRETE_REFS = [QubitRef("q", 0, k) for k in range(4)]


def concrete_bodies():
    sq_ops = st.builds(SqOp, st.sampled_from(GATES), st.sampled_from(CONCRETE_REFS))
    pairs = [(a, b) for a in CONCRETE_REFS for b in CONCRETE_REFS if a != b]
    cz_ops = st.sampled_from(pairs).map(lambda p: CzOp(*p))
    return st.lists(st.one_of(sq_ops, cz_ops), max_size=14)


def loop_bodies():
    sq_ops = st.builds(SqOp, st.sampled_from(GATES), st.sampled_from(LOOP_REFS))
    cz_ops = st.sampled_from(LOOP_PAIRS).map(lambda p: CzOp(*p))
    return st.lists(st.one_of(sq_ops, cz_ops), max_size=12)


def test_gates_through_cz_collapse():
    a, b = q(0, 0), q(0, 1)
    body = [
        sq("Z", a), sq("X", b), cz(a, b),
        sq("H", b), sq("Z", b), sq("H", b),
    ]
    assert compact_fixpoint(body) == [cz(a, b)]


def test_cz_pairs_cancel_and_third_revives():
    pair = cz(q(1, 0), q(1, 1))
    assert compact_fixpoint([pair, pair]) == []
    assert compact_fixpoint([pair, pair, pair]) == [pair]


def test_swapped_operands_cancel():
    assert compact_fixpoint([cz(q(1, 0), q(1, 1)), cz(q(1, 1), q(1, 0))]) == []


def test_gate_between_blocks_cancellation():
    pair = cz(q(1, 0), q(1, 1))
    body = [pair, sq("H", q(1, 1)), pair]
    assert compact_fixpoint(body) == body


def test_possible_alias_blocks_merge():
    body = [sq("H", q(0, 1)), cz(q(1, 0), q(1, 1)), sq("H", q(0, 1))]
    assert len(compact_fixpoint(body, UNBOUNDED)) == 3
    # no iteration of 2..6 puts the CZ on q[1]
    assert compact_fixpoint(body, IterRange(2, 6)) == [cz(q(1, 0), q(1, 1))]


def test_antidiagonal_leaves_z_on_partner():
    a, b = q(0, 0), q(0, 1)
    body = [sq("X", a), cz(a, b), sq("X", a)]
    assert compact_once(body) == [cz(a, b), SqOp(STANDARD_GATES["Z"], b)]
    assert compact_once(body, RIGHT) == [SqOp(STANDARD_GATES["Z"], b), cz(a, b)]


def test_directions_agree_on_simple_merge():
    body = [sq("H", q(1, 0)), sq("Z", q(1, 1)), sq("H", q(1, 0))]
    left = compact_once(body, LEFT)
    right = compact_once(body, RIGHT)
    assert len(left) == len(right) == 1
    assert left[0].target == q(1, 1)


def test_merged_gates_lose_marks():
    body = [sq("H", q(1, 0)), sq("T", q(1, 1)), sq("T", q(1, 0))]
    new_body, marks = compact_marked(body, [True, True, False])
    assert len(new_body) == 2
    assert dict(zip((str(x.target) for x in new_body), marks)) == {"q[i]": False, "q[i+1]": True}


def test_instructions_are_renumbered():
    body = compact_fixpoint([sq("H", q(0, 0)), sq("H", q(0, 1)), sq("H", q(0, 0))])
    assert body == [sq("H", q(0, 1))]
    assert [x.source_index for x in body] == [0]


@settings(max_examples=150, deadline=None)
@given(concrete_bodies())
def test_concrete_compaction_preserves_circuit(body):
    for compacted in (compact_fixpoint(body), compact_fixpoint(body, direction=RIGHT),
                      compact_bidirectional(body)):
        assert len(compacted) <= len(body)
        assert same_circuit(circuit_of(body), circuit_of(compacted))


@settings(max_examples=100, deadline=None)
@given(loop_bodies())
def test_loop_compaction_preserves_every_iteration(body):
    compacted = compact_bidirectional(body, RANGE)
    assert len(compacted) <= len(body)
    for i in range(RANGE.lo, RANGE.hi + 1):
        assert same_circuit(circuit_of(body, i), circuit_of(compacted, i))


def test_fixpoint_is_stable():
    a, b = q(0, 0), q(0, 1)
    body = [sq("H", a), cz(a, b), sq("T", b), sq("X", a), sq("S", a), cz(a, b)]
    once = compact_fixpoint(body)
    assert compact_once(once) == once
    assert compact_fixpoint(once) == once


def random_body(rng, qubits=6, max_len=12):
    refs = [QubitRef("q", 0, k) for k in range(qubits)]
    body = []
    for _ in range(rng.integers(0, max_len + 1)):
        if rng.random() < 0.4:
            a, b = rng.choice(qubits, size=2, replace=False)
            body.append(CzOp(refs[a], refs[b]))
        else:
            body.append(SqOp(GATES[rng.integers(len(GATES))], refs[rng.integers(qubits)]))
    return body


def test_three_passes_reach_a_fixpoint():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        body = random_body(rng)
        for direction in (LEFT, RIGHT):
            compacted = compact_fixpoint(body, direction=direction)
            assert is_fixpoint(compacted, direction=direction)
            assert compact_once(compacted, direction) == compacted


def test_unfinished_compaction_is_reported(monkeypatch):
    warnings = []
    monkeypatch.setattr(compaction, "FIXPOINT_PASSES", 1)
    monkeypatch.setattr(compaction.logger, "warning", warnings.append)
    a, b = q(0, 0), q(0, 1)
    body = [sq("Z", a), sq("X", b), cz(a, b), sq("H", b), sq("Z", b), sq("H", b)]
    once = compact_fixpoint(body)
    assert once == compact_once(body)
    assert len(warnings) == 1
    assert "not a fixpoint after 1 passes" in warnings[0]
