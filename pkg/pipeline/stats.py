"""
Depth statistics.
Contains the per-run record written by ``--stats``.

Depths are counted in ticks: every gate takes one tick and a parallel block
takes one tick.
"""

from dataclasses import asdict, dataclass
from typing import Optional


@dataclass
class StatsRecord:
    """
    ``asap``: ASAP depth of one (compacted) loop body. ``c_asap``: the same for
    the body unrolled ``C`` times. ``pre_depth``/``kernel_depth``/``post_depth``:
    ticks of the emitted prologue, kernel and epilogue. ``iters``: trips of the
    source loop. ``kernel_asap_total`` and ``unroll_total``: depth of the two
    baselines. ``qsp_iters``: trips of the emitted kernel loop.
    ``qsp_total``: ``pre_depth + kernel_depth * qsp_iters + post_depth``.
    """

    asap: int = 0
    c_asap: int = 0
    pre_depth: int = 0
    kernel_depth: int = 0
    post_depth: int = 0
    iters: Optional[int] = 0
    kernel_asap_total: Optional[int] = 0
    unroll_total: Optional[int] = 0
    qsp_iters: Optional[int] = 0
    qsp_total: Optional[int] = 0
    fallback: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def totals(record: StatsRecord) -> StatsRecord:
    """Fill ``qsp_total`` from the other fields; unknown trip counts leave it empty."""
    if record.qsp_iters is None:
        record.qsp_total = None
    else:
        record.qsp_total = record.pre_depth + record.kernel_depth * record.qsp_iters + record.post_depth
    return record
