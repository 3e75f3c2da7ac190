"""
Tests for the aliasing analysis, checked against brute-force enumeration.
"""

from hypothesis import given, strategies as st

from algebra.aliasing import (
    AliasKind,
    IterRange,
    UNBOUNDED,
    across_loop_alias,
    ext_gcd,
    in_loop_alias,
    shifted_alias,
)
from algebra.indexing import LinearRef

slopes = st.integers(-3, 3)
intercepts = st.integers(-6, 6)
refs = st.builds(LinearRef, st.just("q"), slopes, intercepts)


@st.composite
def ranges(draw):
    lo = draw(st.integers(-4, 6))
    return IterRange(lo, lo + draw(st.integers(0, 8)))


def brute_in_loop(r1, r2, iters):
    return [i for i in range(iters.lo, iters.hi + 1) if r1.at(i) == r2.at(i)]


def brute_min_delta(r1, r2, iters):
    deltas = [
        d
        for i in range(iters.lo, iters.hi + 1)
        for d in range(1, iters.hi - i + 1)
        if r1.at(i) == r2.at(i + d)
    ]
    return min(deltas) if deltas else None


@given(st.integers(-50, 50), st.integers(-50, 50))
def test_ext_gcd(a, b):
    g, x, y = ext_gcd(a, b)
    assert g >= 0
    assert a * x + b * y == g
    if a or b:
        assert a % g == 0 and b % g == 0


@given(refs, refs, ranges())
def test_in_loop_matches_enumeration(r1, r2, iters):
    hits = brute_in_loop(r1, r2, iters)
    answer = in_loop_alias(r1, r2, iters)
    assert bool(answer) == bool(hits)
    if answer:
        assert answer.kind == AliasKind.IN_LOOP
        assert answer.witness in hits


@given(refs, refs, ranges())
def test_across_loop_finds_minimal_distance(r1, r2, iters):
    expected = brute_min_delta(r1, r2, iters)
    answer = across_loop_alias(r1, r2, iters)
    if expected is None:
        assert not answer
        return
    assert answer.kind == AliasKind.ACROSS_LOOP
    assert answer.delta == expected
    i = answer.witness
    assert iters.contains(i) and iters.contains(i + answer.delta)
    assert r1.at(i) == r2.at(i + answer.delta)


@given(refs, st.integers(0, 3), refs, st.integers(0, 3), ranges())
def test_shifted_alias_matches_enumeration(r1, p1, r2, p2, iters):
    hits = [
        x
        for x in range(iters.lo + max(p1, p2), iters.hi + min(p1, p2) + 1)
        if r1.at(x - p1) == r2.at(x - p2)
    ]
    answer = shifted_alias(r1, p1, r2, p2, iters)
    assert bool(answer) == bool(hits)
    if answer:
        assert answer.witness in hits


def test_different_arrays_never_alias():
    a, b = LinearRef("q", 1, 0), LinearRef("r", 1, 0)
    assert not in_loop_alias(a, b)
    assert not across_loop_alias(a, b)


def test_strided_pair_unbounded():
    # 3i at one iteration meets 2i one iteration later when i = 2
    answer = across_loop_alias(LinearRef("q", 3, 0), LinearRef("q", 2, 0), UNBOUNDED)
    assert answer.delta == 1
    assert answer.witness == 2


def test_strided_pair_bounded_range_pushes_distance():
    answer = across_loop_alias(LinearRef("q", 3, 0), LinearRef("q", 2, 0), IterRange(4, 10))
    assert answer.delta == 2
    assert answer.witness == 4


def test_constant_reference_needs_two_iterations():
    ref = LinearRef("q", 0, 3)
    assert across_loop_alias(ref, ref, IterRange(0, 1)).delta == 1
    assert not across_loop_alias(ref, ref, IterRange(5, 5))


def test_empty_range():
    ref = LinearRef("q", 1, 0)
    assert not in_loop_alias(ref, ref, IterRange(3, 2))
    assert IterRange(3, 2).trips == 0
    assert IterRange(0, 9).trips == 10
    assert UNBOUNDED.trips is None
