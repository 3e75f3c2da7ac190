"""
Tests for the single-qubit gate algebra and CZ variant rules.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from algebra.gates import (
    CzVariant,
    GateClass,
    GateRef,
    IDENTITY,
    STANDARD_CZ,
    STANDARD_GATES,
    SymbolicGate,
    Z_GATE,
    classify,
    conjugate_through_cz,
    cz_variant_matrix,
    embed,
    is_identity,
    known,
    merge,
    named_gate,
    rz,
    rz_plus,
    variant_to_standard,
)

H = STANDARD_GATES["H"]
X = STANDARD_GATES["X"]

variants = st.builds(CzVariant, st.integers(0, 1), st.integers(0, 1))
angles = st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False)
sides = st.sampled_from(["a", "b"])


@pytest.mark.parametrize(
    "name, expected",
    [
        ("Z", GateClass.DIAGONAL),
        ("T", GateClass.DIAGONAL),
        ("SDG", GateClass.DIAGONAL),
        ("X", GateClass.ANTIDIAGONAL),
        ("Y", GateClass.ANTIDIAGONAL),
        ("H", GateClass.GENERAL),
    ],
)
def test_classify_standard(name, expected):
    assert classify(STANDARD_GATES[name]) == expected


def test_classify_parametric():
    assert classify(named_gate("RZ", [0.3])) == GateClass.DIAGONAL
    assert classify(named_gate("RZP", [0.3])) == GateClass.ANTIDIAGONAL
    assert classify(named_gate("RX", [0.3])) == GateClass.GENERAL


def test_named_gate_errors():
    with pytest.raises(ValueError, match="takes 1 parameter"):
        named_gate("RZ", [])
    with pytest.raises(ValueError, match="no parameters"):
        named_gate("H", [1.0])
    with pytest.raises(ValueError, match="Unknown gate"):
        named_gate("FOO")


def test_merge_known_products_get_standard_labels():
    assert merge(H, merge(Z_GATE, H)) == X
    assert str(merge(H, merge(Z_GATE, H))) == "X"
    assert merge(Z_GATE, Z_GATE) == IDENTITY
    assert is_identity(merge(H, H))


def test_merge_is_application_order():
    s = STANDARD_GATES["S"]
    product = merge(H, s)
    assert np.allclose(product.matrix, s.matrix @ H.matrix)


def test_is_identity_up_to_phase():
    assert is_identity(known(1j * np.eye(2)))
    assert not is_identity(Z_GATE)


def test_symbolic_merge_keeps_hint_by_group_law():
    u = SymbolicGate((GateRef("U", 1, 0, GateClass.DIAGONAL),), GateClass.DIAGONAL)
    assert classify(merge(u, X)) == GateClass.ANTIDIAGONAL
    assert classify(merge(u, Z_GATE)) == GateClass.DIAGONAL
    assert classify(merge(u, H)) == GateClass.GENERAL


def test_symbolic_merge_folds_known_neighbours():
    u = SymbolicGate((GateRef("U", 1, 0),), GateClass.GENERAL)
    product = merge(merge(u, H), H)
    assert isinstance(product, SymbolicGate)
    assert product.factors == (GateRef("U", 1, 0),)


def test_conjugate_general_raises():
    with pytest.raises(ValueError):
        conjugate_through_cz(H, "a", STANDARD_CZ)


def test_conjugate_diagonal_keeps_variant():
    assert conjugate_through_cz(Z_GATE, "b", CzVariant(0, 1)) == (Z_GATE, CzVariant(0, 1))


def test_conjugate_antidiagonal_toggles_side_bit():
    assert conjugate_through_cz(X, "a", STANDARD_CZ) == (X, CzVariant(0, 1))
    assert conjugate_through_cz(X, "b", CzVariant(0, 1)) == (X, CzVariant(0, 0))


@given(variants, sides, angles)
def test_exchange_identity(variant, side, alpha):
    """Gate before the CZ equals the gate after the conjugated CZ."""
    for g in (known(rz(alpha)), known(rz_plus(alpha))):
        moved, after = conjugate_through_cz(g, side, variant)
        lhs = cz_variant_matrix(variant) @ embed(g.matrix, side)
        rhs = embed(moved.matrix, side) @ cz_variant_matrix(after)
        assert np.allclose(lhs, rhs)


@given(variants)
def test_variant_to_standard_reconstructs_matrix(variant):
    sides_, phase = variant_to_standard(variant)
    m = cz_variant_matrix(STANDARD_CZ)
    for side in sides_:
        m = embed(Z_GATE.matrix, side) @ m
    assert np.allclose(phase * m, cz_variant_matrix(variant))


def test_standard_variant_needs_no_correction():
    assert variant_to_standard(STANDARD_CZ) == ([], 1)
