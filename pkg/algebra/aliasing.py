"""
Qubit aliasing analysis.
Decides whether two linear references ``k1*i+b1`` and ``k2*i+b2`` can name the
same element, within one iteration or across iterations, with exact integer
arithmetic (linear Diophantine equations solved by the extended Euclidean
algorithm).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from algebra.indexing import LinearRef


@dataclass(frozen=True)
class IterRange:
    """Closed range of the loop variable; ``lo``/``hi`` of ``None`` means unbounded."""

    lo: Optional[int] = None
    hi: Optional[int] = None

    @property
    def is_known(self) -> bool:
        return self.lo is not None and self.hi is not None

    @property
    def is_empty(self) -> bool:
        return self.is_known and self.lo > self.hi

    def contains(self, i: int) -> bool:
        if self.lo is not None and i < self.lo:
            return False
        if self.hi is not None and i > self.hi:
            return False
        return True

    def narrow(self, lo_delta: int, hi_delta: int) -> "IterRange":
        """Range ``[lo + lo_delta, hi + hi_delta]``; unbounded stays unbounded."""
        if not self.is_known:
            return self
        return IterRange(self.lo + lo_delta, self.hi + hi_delta)

    @property
    def trips(self) -> Optional[int]:
        if not self.is_known:
            return None
        return max(0, self.hi - self.lo + 1)


UNBOUNDED = IterRange()


class AliasKind(Enum):
    NONE = "none"
    IN_LOOP = "in-loop"
    ACROSS_LOOP = "across-loop"


@dataclass(frozen=True)
class AliasAnswer:
    """
    Result of an aliasing query.

    ``witness`` is an iteration at which the alias happens; for across-loop
    answers the first reference is taken at ``witness`` and the second at
    ``witness + delta``.
    """

    kind: AliasKind
    witness: Optional[int] = None
    delta: Optional[int] = None

    def __bool__(self) -> bool:
        return self.kind != AliasKind.NONE


NO_ALIAS = AliasAnswer(AliasKind.NONE)


def ext_gcd(a: int, b: int):
    """
    Extended Euclidean algorithm.

    Returns:
        tuple: (g, x, y) with ``a*x + b*y == g`` and ``g >= 0``
    """
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def in_loop_alias(r1: LinearRef, r2: LinearRef, iters: IterRange = UNBOUNDED) -> AliasAnswer:
    """
    Whether ``r1`` and ``r2`` name the same element at one iteration.

    Args:
        r1: First reference
        r2: Second reference
        iters: Range of the loop variable

    Returns:
        AliasAnswer: ``IN_LOOP`` with a witness iteration, or ``NO_ALIAS``
    """
    if r1.array != r2.array or iters.is_empty:
        return NO_ALIAS
    k1, b1, k2, b2 = r1.slope, r1.intercept, r2.slope, r2.intercept
    if k1 == k2:
        if b1 != b2:
            return NO_ALIAS
        return AliasAnswer(AliasKind.IN_LOOP, iters.lo if iters.lo is not None else 0)
    num, den = b2 - b1, k1 - k2
    if num % den != 0:
        return NO_ALIAS
    i = num // den
    if not iters.contains(i):
        return NO_ALIAS
    return AliasAnswer(AliasKind.IN_LOOP, i)


def across_loop_alias(r1: LinearRef, r2: LinearRef, iters: IterRange = UNBOUNDED) -> AliasAnswer:
    """
    Smallest ``delta >= 1`` such that ``r1`` at ``i`` and ``r2`` at ``i + delta`` alias.

    Both iterations must lie in ``iters``. Solves ``k1*i + b1 = k2*(i+delta) + b2``.

    Args:
        r1: Reference evaluated at the earlier iteration
        r2: Reference evaluated at the later iteration
        iters: Range of the loop variable

    Returns:
        AliasAnswer: ``ACROSS_LOOP`` with the minimal delta and a witness, or ``NO_ALIAS``
    """
    if r1.array != r2.array or iters.is_empty:
        return NO_ALIAS
    k1, b1, k2, b2 = r1.slope, r1.intercept, r2.slope, r2.intercept
    # A*i + B*delta = C
    a, b, c = k1 - k2, -k2, b2 - b1
    lo, hi = iters.lo, iters.hi
    base = lo if lo is not None else 0

    if a == 0 and b == 0:
        # same fixed element every iteration
        if c != 0:
            return NO_ALIAS
        if iters.is_known and hi - lo < 1:
            return NO_ALIAS
        return AliasAnswer(AliasKind.ACROSS_LOOP, base, 1)

    if b == 0:
        if c % a != 0:
            return NO_ALIAS
        i = c // a
        if not iters.contains(i) or (hi is not None and i + 1 > hi):
            return NO_ALIAS
        return AliasAnswer(AliasKind.ACROSS_LOOP, i, 1)

    if a == 0:
        if c % b != 0:
            return NO_ALIAS
        delta = c // b
        if delta < 1 or (iters.is_known and hi - lo < delta):
            return NO_ALIAS
        return AliasAnswer(AliasKind.ACROSS_LOOP, base, delta)

    g, x0, y0 = ext_gcd(a, b)
    if c % g != 0:
        return NO_ALIAS
    i0, d0 = x0 * (c // g), y0 * (c // g)
    # i = i0 + (b/g)*s, delta = d0 - (a/g)*s, i + delta = i0 + d0 - (k1/g)*s
    step_i, step_d = b // g, -(a // g)
    constraints = [(step_d, 1 - d0)]
    if lo is not None:
        constraints.append((step_i, lo - i0))
    if hi is not None:
        # g divides both k2 and k1 - k2
        constraints.append((k1 // g, i0 + d0 - hi))

    # each constraint reads coef * s >= rhs
    s_lo, s_hi = None, None
    for coef, rhs in constraints:
        if coef > 0:
            bound = _ceil_div(rhs, coef)
            s_lo = bound if s_lo is None else max(s_lo, bound)
        elif coef < 0:
            bound = rhs // coef
            s_hi = bound if s_hi is None else min(s_hi, bound)
        elif rhs > 0:
            return NO_ALIAS

    if s_lo is not None and s_hi is not None and s_lo > s_hi:
        return NO_ALIAS
    # delta grows with s when step_d > 0, so take the smallest admissible s
    s = s_lo if step_d > 0 else s_hi
    if s is None:
        return NO_ALIAS
    i, delta = i0 + step_i * s, d0 + step_d * s
    return AliasAnswer(AliasKind.ACROSS_LOOP, i, delta)


def shifted_alias(r1: LinearRef, p1: int, r2: LinearRef, p2: int,
                  iters: IterRange = UNBOUNDED) -> AliasAnswer:
    """
    Whether ``r1`` from stage ``p1`` and ``r2`` from stage ``p2`` collide in one kernel iteration.

    In kernel iteration ``x`` an instruction of stage ``p`` belongs to source
    iteration ``x - p``. Only kernel iterations where both instances exist are
    considered: ``[lo + max(p1, p2), hi + min(p1, p2)]``.

    Returns:
        AliasAnswer: ``IN_LOOP`` with a witness kernel iteration, or ``NO_ALIAS``
    """
    window = iters.narrow(max(p1, p2), min(p1, p2))
    return in_loop_alias(r1.shift(-p1), r2.shift(-p2), window)
