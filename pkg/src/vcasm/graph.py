"""Assembly-graph vertices shared by the labeling, merging and error-correction jobs.

Every adjacency item is written from its owner's point of view as an
outgoing edge: ``Link(target, side, target_side)`` says "this vertex read in
orientation ``side`` is followed by ``target`` read in orientation
``target_side``".  An in-edge ``u -> v <X:Y>`` is stored at ``v`` as
``Link(u, ~Y, ~X)``.  A vertex therefore has two sides; it is unambiguous
when it has exactly one link per side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .codec import CONTIG_BIT, NULL_ID, _rc_unchecked, contig_fields


class VertexType(Enum):
    ONE = "<1>"
    ONE_ONE = "<1-1>"
    MANY = "<m-n>"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class ContigRef:
    """What a k-mer remembers about a contig hanging off one of its links."""

    contig_id: int
    length: int
    coverage: int
    far_end: int  # k-mer at the contig's other end, or NULL_ID
    far_side: int  # orientation of far_end when walking through the contig


@dataclass(frozen=True, slots=True, order=True)
class Link:
    target: int
    side: int
    target_side: int
    coverage: int = 0
    contig: ContigRef | None = field(default=None, compare=False)

    def reversed_from(self, owner: int) -> tuple[int, int, int]:
        """The ``(target, side, target_side)`` key the target stores for this same edge."""
        return owner, self.target_side ^ 1, self.side ^ 1


@dataclass(slots=True)
class AsmNode:
    """A k-mer or contig vertex in the assembly graph.

    ``seq`` is the sequence read in orientation L (the canonical k-mer, or
    the contig as stored).  ``coverage`` is only meaningful for contigs.
    """

    id: int
    seq: str
    links: list[Link] = field(default_factory=list)
    coverage: int = 0
    circular: bool = False

    @property
    def is_contig(self) -> bool:
        return bool(self.id & CONTIG_BIT)

    @property
    def vtype(self) -> VertexType:
        return link_type(self.id, self.links)

    def oriented(self, side: int) -> str:
        return self.seq if side == 0 else _rc_unchecked(self.seq)

    def side_links(self, side: int) -> list[Link]:
        return [ln for ln in self.links if ln.side == side]

    @property
    def in_neighbor(self) -> tuple[int, int, int]:
        """(id, neighbor-side label, edge coverage) of the contig's in-neighbor, NULL if none."""
        for ln in self.links:
            if ln.side == 1:
                return ln.target, ln.target_side ^ 1, ln.coverage
        return NULL_ID, 0, 0

    @property
    def out_neighbor(self) -> tuple[int, int, int]:
        for ln in self.links:
            if ln.side == 0:
                return ln.target, ln.target_side, ln.coverage
        return NULL_ID, 0, 0

    def header_name(self) -> str:
        if self.is_contig:
            worker, seq_no = contig_fields(self.id)
            return f"contig_{worker}_{seq_no}"
        return f"kmer_{self.id}"


def link_type(vid: int, links: list[Link]) -> VertexType:
    n = len(links)
    if n <= 1:
        return VertexType.ONE
    if n == 2 and links[0].side != links[1].side and all(ln.target != vid for ln in links):
        return VertexType.ONE_ONE
    return VertexType.MANY
