"""
Modulo scheduler.
Contains the reservation table with quantum resource conflicts, SCC-based list
scheduling, the initiation-interval search, inversion repair and the second
legalisation round.

The instruction ``c`` of the loop body is placed at tick ``t = p*II + q``:
stage ``p``, slot ``q``. In kernel iteration ``x`` it works on source
iteration ``x - p``.
"""

from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from algebra.aliasing import IterRange, UNBOUNDED, shifted_alias
from algebra.gates import Z_GATE, is_identity, merge
from frontend.ast import Instruction, QubitRef, SqOp
from logging_config import get_logger
from scheduling import qdg
from scheduling.graph import has_positive_cycle, longest_paths, tarjan
from utils.errors import SchedulingError

logger = get_logger()


class Conflict(IntEnum):
    """Resource conflict classes, ordered by severity."""

    NONE = 0
    FALSE = 1
    TRUE = 2


@dataclass(frozen=True)
class InsertedZ:
    """
    Z gate owed to an antidiagonal gate that was scheduled across a CZ.

    The antidiagonal instance of iteration ``j`` meets the CZ instance of
    iteration ``j + offset``; the Z acts on ``target``, the CZ's other operand
    written in the CZ's own iteration, at the CZ's tick.
    """

    cz: int
    anti: int
    offset: int
    target: QubitRef
    tick: int


@dataclass
class ModuloSchedule:
    body: List[Instruction]
    ii: int
    ticks: List[int]
    iters: IterRange = UNBOUNDED
    inserted_z: List[InsertedZ] = field(default_factory=list)
    retries: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.body)

    def stage(self, c: int) -> int:
        return self.ticks[c] // self.ii

    def slot(self, c: int) -> int:
        return self.ticks[c] % self.ii

    def z_stage(self, z: InsertedZ) -> int:
        """Stage at which the antidiagonal partner of ``z`` is issued, seen from the CZ's kernel iteration."""
        return self.stage(z.cz) + z.offset

    @property
    def stages(self) -> List[int]:
        real = [self.stage(c) for c in range(self.length)]
        return real + [self.z_stage(z) for z in self.inserted_z]

    @property
    def max_stage(self) -> int:
        return max(self.stages, default=0)

    @property
    def min_stage(self) -> int:
        return min(self.stages, default=0)

    @property
    def span(self) -> int:
        """Kernel iterations lost to filling and draining the pipeline."""
        return self.max_stage - self.min_stage

    def absolute_order(self, c: int, k: int) -> int:
        """Position in the original execution of instruction ``c`` issued in kernel iteration ``k``."""
        return (k - self.stage(c)) * self.length + c

    def tick_ops(self, slot: int, present: Callable[[int], bool] = lambda stage: True) -> List[Instruction]:
        """
        Instructions issued in one kernel slot, written in the kernel variable.

        ``present(stage)`` tells whether the source iteration ``x - stage``
        exists; an inserted Z needs both its CZ and its antidiagonal partner.
        Gates meeting on the same qubit are merged in their original order.
        """
        entries = []
        for c in range(self.length):
            p = self.stage(c)
            if self.slot(c) == slot and present(p):
                entries.append(((-p, c, 0, 0), self.body[c].shift(-p)))
        for z in self.inserted_z:
            p = self.stage(z.cz)
            if self.slot(z.cz) == slot and present(p) and present(self.z_stage(z)):
                entries.append(((-p, z.cz, 1, z.anti), SqOp(Z_GATE, z.target.shift(-p))))
        entries.sort(key=lambda e: e[0])
        return merge_same_target(instr for _, instr in entries)

    def kernel_ticks(self) -> List[List[Instruction]]:
        return [self.tick_ops(q) for q in range(self.ii)]

    def kernel_range(self) -> IterRange:
        """Kernel iterations in which every instance exists."""
        return self.iters.narrow(self.max_stage, self.min_stage)


def merge_same_target(ops: Iterable[Instruction]) -> List[Instruction]:
    """Fold single-qubit gates on an identical target into the first one, dropping identities."""
    out: List[Instruction] = []
    first: Dict[QubitRef, int] = {}
    for op in ops:
        if isinstance(op, SqOp) and op.target in first:
            k = first[op.target]
            out[k] = replace(out[k], gate=merge(out[k].gate, op.gate))
            continue
        if isinstance(op, SqOp):
            first[op.target] = len(out)
        out.append(op)
    return [op for op in out if not (isinstance(op, SqOp) and is_identity(op.gate))]


def classify_operands(placed: QubitRef, placed_stage: int, candidate: QubitRef, candidate_stage: int,
                      iters: IterRange = UNBOUNDED) -> Conflict:
    """
    Conflict between two operands sharing a slot.

    Equal non-zero slopes collide in every kernel iteration but a change of
    stage separates them: a false conflict. Two fixed qubits, or slopes with
    ``(k2 - k1) | k2``, collide at every stage: a true conflict. Other slope
    pairs collide periodically and are treated as false conflicts.
    """
    if not shifted_alias(placed, placed_stage, candidate, candidate_stage, iters):
        return Conflict.NONE
    k1, k2 = placed.slope, candidate.slope
    if k1 == k2:
        return Conflict.TRUE if k1 == 0 else Conflict.FALSE
    return Conflict.TRUE if k2 % (k2 - k1) == 0 else Conflict.FALSE


class ReservationTable:
    """Modulo reservation table: for each slot, the instructions placed there and their ticks."""

    def __init__(self, ii: int, iters: IterRange = UNBOUNDED):
        self.ii = ii
        self.iters = iters
        self.slots: List[List[Tuple[int, Instruction, int]]] = [[] for _ in range(ii)]

    @property
    def operand_count(self) -> int:
        return sum(len(instr.qubits) for slot in self.slots for _, instr, _ in slot)

    def pair_conflict(self, placed: Instruction, placed_tick: int, candidate: Instruction,
                      tick: int) -> Conflict:
        p1, p2 = placed_tick // self.ii, tick // self.ii
        worst = Conflict.NONE
        for r1 in placed.qubits:
            for r2 in candidate.qubits:
                worst = max(worst, classify_operands(r1, p1, r2, p2, self.iters))
        if worst == Conflict.FALSE and isinstance(placed, SqOp) and isinstance(candidate, SqOp):
            if placed.target.slope == candidate.target.slope:
                # merged when the kernel is emitted
                return Conflict.NONE
        return worst

    def conflict(self, unit: Sequence[Tuple[int, Instruction, int]], base: int) -> Conflict:
        """Worst conflict of a group of ``(index, instruction, offset)`` placed at ``base``."""
        worst = Conflict.NONE
        trial: List[Tuple[Instruction, int]] = []
        for _, instr, offset in unit:
            tick = base + offset
            for _, placed, placed_tick in self.slots[tick % self.ii]:
                worst = max(worst, self.pair_conflict(placed, placed_tick, instr, tick))
            for placed, placed_tick in trial:
                if placed_tick % self.ii == tick % self.ii:
                    worst = max(worst, self.pair_conflict(placed, placed_tick, instr, tick))
            if worst == Conflict.TRUE:
                return worst
            trial.append((instr, tick))
        return worst

    def add(self, index: int, instr: Instruction, tick: int):
        self.slots[tick % self.ii].append((index, instr, tick))

    def render(self) -> str:
        """Text dump: one line per slot with ``[p=stage] instruction`` entries."""
        lines = [f"II = {self.ii}"]
        for q, slot in enumerate(self.slots):
            cells = "  ".join(f"[p={tick // self.ii}] #{index} {instr}" for index, instr, tick in sorted(slot, key=lambda e: (e[2], e[0])))
            lines.append(f"q={q}: {cells}")
        return "\n".join(lines) + "\n"


def reservation_table(schedule: ModuloSchedule) -> ReservationTable:
    """Table of a finished schedule, for inspection."""
    table = ReservationTable(schedule.ii, schedule.iters)
    for c, instr in enumerate(schedule.body):
        table.add(c, instr, schedule.ticks[c])
    return table


def feasibility_check(graph: qdg.Qdg, ii: int) -> bool:
    """True when the dependence constraints admit a schedule at ``ii`` (no positive cycle)."""
    dist = longest_paths(len(graph.nodes), [(e.src, e.dst, e.weight(ii)) for e in graph.edges])
    return not has_positive_cycle(dist)


def _internal_offsets(members: Sequence[int], dist) -> Dict[int, int]:
    """Relative ticks inside one component that satisfy all longest-path constraints."""
    offsets: Dict[int, int] = {}
    for v in sorted(members):
        if not offsets:
            offsets[v] = 0
            continue
        offsets[v] = int(max(offsets[u] + dist[u, v] for u in offsets))
    low = min(offsets.values())
    return {v: t - low for v, t in offsets.items()}


def place_with_retry(table: ReservationTable, unit: Sequence[Tuple[int, Instruction, int]],
                     earliest: int) -> Optional[Tuple[int, int, int]]:
    """
    Insert a group of instructions at the first conflict-free tick from ``earliest``.

    False conflicts move on to the next tick. The first true conflict starts
    a countdown of ``II - 1`` further retries. Placement gives up after
    ``|A| * |B| * II`` retries, counting the group's operands as ``A`` and the
    operands already in the table plus the group's own as ``B``.

    Returns:
        tuple: (base tick, retries, retry bound), or ``None`` on failure
    """
    ii = table.ii
    a_ops = sum(len(instr.qubits) for _, instr, _ in unit)
    bound = a_ops * (table.operand_count + a_ops) * ii
    remaining = None
    retries = 0
    base = earliest
    while True:
        found = table.conflict(unit, base)
        if found == Conflict.NONE:
            for index, instr, offset in unit:
                table.add(index, instr, base + offset)
            return base, retries, bound
        if found == Conflict.TRUE and remaining is None:
            remaining = ii - 1
        if remaining is not None:
            if remaining == 0:
                logger.debug(f"Giving up on #{unit[0][0]} at II={ii}: true conflict persists")
                return None
            remaining -= 1
        retries += 1
        if retries > bound:
            logger.debug(f"Giving up on #{unit[0][0]} at II={ii}: {retries} retries")
            return None
        base += 1


def schedule_sccs(graph: qdg.Qdg, ii: int) -> Optional[ModuloSchedule]:
    """
    Schedule the graph at a fixed initiation interval.

    Strongly connected components are laid out internally from longest-path
    distances and then placed as units by list scheduling over the condensed
    DAG, highest components first, ties going to the lowest source index.

    Returns:
        ModuloSchedule: normalised so that the lowest stage is 0, or ``None``
        when the constraints or the resources cannot be met
    """
    n = len(graph.nodes)
    dist = longest_paths(n, [(e.src, e.dst, e.weight(ii)) for e in graph.edges])
    if has_positive_cycle(dist):
        return None

    components = list(tarjan(range(n), graph.successors))
    comp_of = {v: k for k, comp in enumerate(components) for v in comp}
    offsets: Dict[int, int] = {}
    for comp in components:
        offsets.update(_internal_offsets(comp, dist))

    succ = {k: set() for k in range(len(components))}
    preds = {k: set() for k in range(len(components))}
    for e in graph.edges:
        a, b = comp_of[e.src], comp_of[e.dst]
        if a != b:
            succ[a].add(b)
            preds[b].add(a)
    height: Dict[int, int] = {}
    # sinks come first out of tarjan
    for k in range(len(components)):
        height[k] = 1 + max((height[s] for s in succ[k]), default=0)

    table = ReservationTable(ii, graph.iters)
    ticks: List[Optional[int]] = [None] * n
    retries = []
    placed = set()
    while len(placed) < len(components):
        ready = [k for k in range(len(components)) if k not in placed and preds[k] <= placed]
        k = max(ready, key=lambda c: (height[c], -min(components[c])))
        members = sorted(components[k])
        earliest = 0
        for e in graph.edges:
            if e.dst in members and comp_of[e.src] != k:
                earliest = max(earliest, ticks[e.src] + e.weight(ii) - offsets[e.dst])
        unit = [(v, graph.nodes[v], offsets[v]) for v in members]
        result = place_with_retry(table, unit, earliest)
        if result is None:
            return None
        base, tries, bound = result
        retries.append((tries, bound))
        for v in members:
            ticks[v] = base + offsets[v]
        placed.add(k)

    shift = (min(ticks, default=0) // ii) * ii
    schedule = ModuloSchedule(
        body=list(graph.nodes),
        ii=ii,
        ticks=[t - shift for t in ticks],
        iters=graph.iters,
        retries=retries,
    )
    if violations(schedule, graph):
        return None
    return schedule


def violations(schedule: ModuloSchedule, graph: qdg.Qdg) -> List[qdg.QdgEdge]:
    """Edges whose ``t_dst + II*dif - t_src >= min`` constraint does not hold."""
    t, ii = schedule.ticks, schedule.ii
    return [e for e in graph.edges if t[e.dst] + ii * e.dif - t[e.src] < e.min]


def search_ii(graph: qdg.Qdg, max_ii: Optional[int] = None) -> ModuloSchedule:
    """
    Smallest initiation interval with a complete schedule.

    Binary search over ``[1, max_ii]`` (default: body length), then a direct
    check that ``II - 1`` fails; a success there means the frontier was not
    monotone and an ascending scan from 1 decides.

    Raises:
        SchedulingError: If no interval up to the limit can be scheduled
    """
    n = len(graph.nodes)
    if n == 0:
        return ModuloSchedule([], 1, [], graph.iters)
    top = max_ii if max_ii else n
    attempts: Dict[int, Optional[ModuloSchedule]] = {}

    def attempt(ii: int) -> Optional[ModuloSchedule]:
        if ii not in attempts:
            attempts[ii] = schedule_sccs(graph, ii)
            logger.debug(f"II={ii}: {'scheduled' if attempts[ii] else 'failed'}")
        return attempts[ii]

    if attempt(top) is None:
        raise SchedulingError(f"No modulo schedule with II <= {top}", top)

    lo, hi = 1, top
    while lo < hi:
        mid = (lo + hi) // 2
        if attempt(mid) is not None:
            hi = mid
        else:
            lo = mid + 1
    ii = hi
    if ii > 1 and attempt(ii - 1) is not None:
        logger.warning(f"Scheduling success is not monotone around II={ii}; scanning from 1")
        ii = next(k for k in range(1, ii) if attempt(k) is not None)

    schedule = attempts[ii]
    logger.info(f"Scheduled {n} instructions at II={ii} over {schedule.max_stage + 1} stage(s)")
    return schedule


def fix_inversions(schedule: ModuloSchedule, graph: qdg.Qdg) -> ModuloSchedule:
    """
    Owe a Z gate for every freed antidiagonal/CZ pair whose order the schedule inverted.

    The antidiagonal instance of iteration ``j`` and the CZ instance of
    iteration ``j + d`` run in the original order ``c_a < d*L + c_c`` and in
    the schedule ``t_a < d*II + t_c``; the pair is inverted when the two
    comparisons disagree. For slope-0 operands every ``d`` meets, and only
    distances within the schedule's reach can be inverted.
    """
    ii, length = schedule.ii, schedule.length
    reach = max(schedule.ticks, default=0) // ii + 2
    iters = schedule.iters
    inserted = []
    for pair in graph.commuting:
        anti, cz = schedule.body[pair.anti], schedule.body[pair.cz]
        shared = cz.a if pair.side == "a" else cz.b
        target = anti.target
        if target.slope != 0:
            diff = target.intercept - shared.intercept
            if diff % target.slope:
                continue
            offsets = [diff // target.slope]
        else:
            offsets = range(-reach, reach + 1)
        t_a, t_c = schedule.ticks[pair.anti], schedule.ticks[pair.cz]
        for d in offsets:
            if iters.is_known and abs(d) > iters.hi - iters.lo:
                continue
            scheduled_first = t_a < d * ii + t_c
            original_first = pair.anti < d * length + pair.cz
            if scheduled_first != original_first:
                inserted.append(InsertedZ(pair.cz, pair.anti, d, cz.other(pair.side), t_c))
    if inserted:
        logger.info(f"Inserted {len(inserted)} Z correction(s) for inverted antidiagonal/CZ pairs")
    return replace(schedule, inserted_z=inserted)


def kernel_body(schedule: ModuloSchedule) -> Tuple[List[Instruction], IterRange]:
    """Round-1 kernel flattened tick by tick, with the range of its loop variable."""
    ops = [op for tick in schedule.kernel_ticks() for op in tick]
    body = [replace(op, source_index=k) for k, op in enumerate(ops)]
    return body, schedule.kernel_range()


def reschedule_legalize(schedule: ModuloSchedule, max_ii: Optional[int] = None) -> Tuple[ModuloSchedule, qdg.Qdg]:
    """
    Schedule the round-1 kernel again with its Z gates as real instructions.

    Antidiagonal gates no longer commute with CZs, so the result needs no
    further correction.

    Returns:
        tuple: (round-2 schedule, round-2 graph)
    """
    body, iters = kernel_body(schedule)
    graph = qdg.build(body, iters, free_antidiagonals=False)
    legal = search_ii(graph, max_ii)
    logger.info(f"Legalisation round: II {schedule.ii} -> {legal.ii}")
    return legal, graph
