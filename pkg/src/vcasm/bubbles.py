"""Bubble filtering: prune low-coverage contigs running parallel to a near-identical one."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

from rapidfuzz.distance import Levenshtein

from .codec import _rc_unchecked
from .engine import JobResult, Vertex, mini_map_reduce, run_job
from .graph import AsmNode, VertexType

logger = logging.getLogger(__name__)

DEFAULT_EDIT_DISTANCE = 5


@dataclass(frozen=True, slots=True)
class BubbleKey:
    nb1: int
    nb2: int

    def __post_init__(self):
        if not self.nb1 < self.nb2:
            raise ValueError("bubble key endpoints must be ordered nb1 < nb2")


@dataclass(frozen=True)
class KeyedContig:
    key: BubbleKey
    contig: AsmNode
    forward: bool  # True when the contig reads nb1 -> nb2


@dataclass
class BubbleResult:
    kmers: list[AsmNode]
    contigs: list[AsmNode]
    pruned: list[AsmNode]
    job: JobResult | None = None


def edit_distance(a: str, b: str, cutoff: int | None = None) -> int:
    """Unit-cost Levenshtein distance; with ``cutoff``, values above it come back as cutoff + 1."""
    return Levenshtein.distance(a, b, score_cutoff=cutoff)


def key_contigs(contigs: Iterable[AsmNode], ambiguous: set[int]) -> tuple[list[KeyedContig], list[AsmNode]]:
    """Split contigs into those bridging two distinct ambiguous vertices and the rest."""
    keyed, passed = [], []
    for c in contigs:
        in_nb = c.in_neighbor[0]
        out_nb = c.out_neighbor[0]
        if len(c.links) != 2 or in_nb == out_nb or in_nb not in ambiguous or out_nb not in ambiguous:
            passed.append(c)
            continue
        nb1, nb2 = min(in_nb, out_nb), max(in_nb, out_nb)
        keyed.append(KeyedContig(BubbleKey(nb1, nb2), c, in_nb == nb1))
    return keyed, passed


def filter_group(group: list[KeyedContig], threshold: int = DEFAULT_EDIT_DISTANCE) -> tuple[list[KeyedContig], list[KeyedContig]]:
    """Return ``(survivors, pruned)`` for contigs sharing one bubble key."""
    order = sorted(group, key=lambda kc: (-kc.contig.coverage, kc.contig.id))
    pruned = [False] * len(order)
    for i, ci in enumerate(order):
        if pruned[i]:
            continue
        for j in range(i + 1, len(order)):
            if pruned[j]:
                continue
            cj = order[j]
            other = cj.contig.seq if ci.forward == cj.forward else _rc_unchecked(cj.contig.seq)
            if edit_distance(ci.contig.seq, other, threshold) >= threshold:
                continue
            if ci.contig.coverage < cj.contig.coverage:
                pruned[i] = True
                break
            if cj.contig.coverage < ci.contig.coverage:
                pruned[j] = True
    survivors = [kc for kc, p in zip(order, pruned) if not p]
    gone = [kc for kc, p in zip(order, pruned) if p]
    return survivors, gone


def _notice_compute(vertex: Vertex, messages: list, ctx) -> None:
    vertex.active = False
    node, doomed = vertex.value
    if doomed:
        for ln in node.links:
            ctx.send(ln.target, (node.id,))
        return
    if messages:
        gone = {payload[0] for _, payload in messages}
        node.links = [ln for ln in node.links if ln.target not in gone]


def filter_bubbles(
    kmers: Iterable[AsmNode],
    contigs: Iterable[AsmNode],
    threshold: int = DEFAULT_EDIT_DISTANCE,
    *,
    workers: int = 1,
) -> BubbleResult:
    """Group contigs by their ambiguous endpoints, prune near-duplicate arms, notify endpoints."""
    kmers = list(kmers)
    contigs = list(contigs)
    ambiguous = {n.id for n in kmers if n.vtype is VertexType.MANY}
    keyed, _ = key_contigs(contigs, ambiguous)

    pruned = mini_map_reduce(
        keyed,
        lambda kc: [((kc.key.nb1, kc.key.nb2), kc)],
        lambda key, group: filter_group(group, threshold)[1],
        workers=workers,
        sort_values=False,
    )
    doomed = {kc.contig.id for kc in pruned}
    if not doomed:
        return BubbleResult(kmers, contigs, [])

    vertices = [Vertex(n.id, (n, False)) for n in kmers]
    vertices += [Vertex(c.id, (c, c.id in doomed)) for c in contigs]
    job = run_job(vertices, _notice_compute, workers=workers, name="bubble-notices")
    kept_contigs = [c for c in contigs if c.id not in doomed]
    logger.info("bubble filter: %d of %d keyed contigs pruned", len(doomed), len(keyed))
    return BubbleResult(kmers, kept_contigs, [kc.contig for kc in pruned], job)
