"""Contig merging: stitch each labeled group of unambiguous vertices into one contig vertex."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

from .codec import NULL_ID, _rc_unchecked, make_contig_id, mix64
from .engine import mini_map_reduce
from .graph import AsmNode, Link
from .labeling import LabelingResult

logger = logging.getLogger(__name__)

# contig IDs are numbered per virtual partition of the label space, so the
# numbering does not depend on how many workers actually ran the job
ID_PARTITIONS = 256


class CorruptLabelError(RuntimeError):
    pass


@dataclass
class ContigEnd:
    """One external link of a stitched contig and the member it came from."""

    link: Link  # from the contig's point of view
    member: int
    member_side: int


@dataclass
class MergedContig:
    label: int
    node: AsmNode
    members: list[int]
    ends: list[ContigEnd] = field(default_factory=list)
    dropped: bool = False

    @property
    def length(self) -> int:
        return len(self.node.seq)


@dataclass
class OrderedGroup:
    vertices: list[AsmNode]
    sides: list[int]  # orientation each vertex is read in along the walk
    circular: bool
    edge_coverages: list[int]


def group_by_label(labeled: LabelingResult | Iterable[tuple[int, AsmNode]], *, workers: int = 1
                   ) -> dict[int, list[AsmNode]]:
    if isinstance(labeled, LabelingResult):
        pairs = [(s.label, s.node) for s in labeled.states if s.label is not None]
    else:
        pairs = list(labeled)
    grouped = mini_map_reduce(
        pairs,
        lambda pair: [pair],
        lambda label, nodes: [(label, nodes)],
        workers=workers,
        sort_values=False,
    )
    return {label: sorted(nodes, key=lambda n: n.id) for label, nodes in grouped}


def order_chain(group: list[AsmNode]) -> OrderedGroup:
    """Walk a group from one end (or from its minimum-ID vertex if it is a cycle)."""
    by_id = {n.id: n for n in group}
    if len(by_id) != len(group):
        raise CorruptLabelError("group contains a vertex twice")

    def internal(ln: Link) -> bool:
        return ln.target in by_id

    start = side = None
    for node in sorted(group, key=lambda n: n.id):
        inner = [ln for ln in node.links if internal(ln)]
        if len(inner) < 2:
            start = node
            side = inner[0].side if inner else 0
            break
    circular = start is None
    if circular:
        start = min(group, key=lambda n: n.id)
        side = 0

    order = [start]
    sides = [side]
    covs: list[int] = []
    seen = {start.id}
    cur = start
    while True:
        nxt = [ln for ln in cur.links if ln.side == side and internal(ln)]
        if not nxt:
            break
        if len(nxt) > 1:
            raise CorruptLabelError(f"vertex {cur.id:#x} branches inside its group")
        ln = nxt[0]
        if ln.target in seen:
            if circular and ln.target == start.id and ln.target_side == sides[0]:
                covs.append(ln.coverage)
                break
            raise CorruptLabelError(f"group walk revisits {ln.target:#x}")
        cur = by_id[ln.target]
        side = ln.target_side
        seen.add(cur.id)
        order.append(cur)
        sides.append(side)
        covs.append(ln.coverage)
    if len(order) != len(group):
        raise CorruptLabelError(f"group of {len(group)} is not one simple path ({len(order)} reached)")
    return OrderedGroup(order, sides, circular, covs)


def stitch(ordered: OrderedGroup, k: int) -> tuple[str, int]:
    """Return ``(sequence, coverage)`` for an ordered group."""
    parts = [ordered.vertices[0].oriented(ordered.sides[0])]
    for node, side in zip(ordered.vertices[1:], ordered.sides[1:]):
        parts.append(node.oriented(side)[k - 1:])
    seq = "".join(parts)
    if ordered.circular:
        # drop the wrap-around overlap with the start vertex
        seq = seq[: len(seq) - (k - 1)] if len(seq) > k - 1 else seq

    covs = list(ordered.edge_coverages)
    covs.extend(n.coverage for n in ordered.vertices if n.is_contig)
    if not covs:
        # a lone k-mer has no merged edge; fall back to its incident edges
        covs = [ln.coverage for ln in ordered.vertices[0].links]
    return seq, min(covs) if covs else 0


def _external_ends(ordered: OrderedGroup) -> list[ContigEnd]:
    if ordered.circular:
        return []
    members = {n.id for n in ordered.vertices}
    ends = []
    first, last = ordered.vertices[0], ordered.vertices[-1]
    for node, walk_side in ((first, ordered.sides[0]), (last, ordered.sides[-1])):
        for ln in node.links:
            if ln.target in members:
                continue
            contig_side = 0 if ln.side == walk_side else 1
            ends.append(ContigEnd(Link(ln.target, contig_side, ln.target_side, ln.coverage),
                                  node.id, ln.side))
        if first is last:
            break
    return ends


def build_contig(label: int, group: list[AsmNode], k: int, tip_length: int) -> MergedContig:
    ordered = order_chain(group)
    if len(group) == 1 and group[0].is_contig:
        # an untouched contig keeps its identity
        node = group[0]
        ends = [ContigEnd(ln, node.id, ln.side) for ln in node.links]
        merged = MergedContig(label, node, [node.id], ends)
    else:
        seq, cov = stitch(ordered, k)
        ends = _external_ends(ordered)
        if not ends and not ordered.circular:
            rc = _rc_unchecked(seq)
            if rc < seq:
                seq = rc
        node = AsmNode(NULL_ID, seq, [e.link for e in ends], cov, ordered.circular)
        merged = MergedContig(label, node, [n.id for n in ordered.vertices], ends)
    sides_used = {e.link.side for e in merged.ends}
    dangling = len(sides_used) < 2
    if not merged.node.circular and dangling and merged.length <= tip_length:
        merged.dropped = True
    return merged


def assign_contig_ids(contigs: list[MergedContig], round_no: int) -> None:
    """Give fresh contigs IDs that depend only on their labels."""
    fresh = sorted((c for c in contigs if c.node.id == NULL_ID), key=lambda c: c.label)
    counters: dict[int, int] = {}
    for c in fresh:
        part = mix64(c.label) % ID_PARTITIONS
        seq_no = counters.get(part, 0) + 1
        counters[part] = seq_no
        c.node.id = make_contig_id((round_no << 8) | part, seq_no)


def merge_contigs(
    labeled: LabelingResult,
    k: int,
    tip_length: int = 80,
    *,
    round_no: int = 1,
    workers: int = 1,
) -> list[MergedContig]:
    """Group labeled vertices, stitch every group and number the new contigs."""
    groups = group_by_label(labeled, workers=workers)
    contigs = mini_map_reduce(
        list(groups.items()),
        lambda item: [item],
        lambda label, groups_: [build_contig(label, groups_[0], k, tip_length)],
        workers=workers,
        sort_values=False,
    )
    assign_contig_ids(contigs, round_no)
    logger.info(
        "round %d: %d contigs stitched, %d dropped as tips",
        round_no, len(contigs), sum(c.dropped for c in contigs),
    )
    return contigs
