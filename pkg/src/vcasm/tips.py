"""Tip removal: attach contig info to ambiguous k-mers, then delete short dangling paths.

After merging, the only k-mers left are the ones that were ambiguous; the
contigs hang between them.  ``attach_contig_info`` rewrites each k-mer link
that led into a merged path so that it targets the contig instead and
carries a :class:`ContigRef` (length, coverage, the k-mer at the far end).
``remove_tips`` then runs on the k-mers alone and treats a contig link as a
single long edge to the far-end k-mer.
"""

from __future__ import annotations

import logging
from functools import partial
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .codec import NULL_ID
from .engine import SUM, JobResult, Vertex, run_job
from .graph import AsmNode, ContigRef, Link, VertexType, link_type
from .merging import MergedContig

logger = logging.getLogger(__name__)

_ATTACH, _DROP = 0, 1
_REQ, _DEL = 0, 1


class StaleReferenceError(RuntimeError):
    pass


def _contig_ref(contig: AsmNode, walk_side: int) -> ContigRef:
    far = next((ln for ln in contig.links if ln.side == walk_side), None)
    far_end, far_side = (far.target, far.target_side) if far else (NULL_ID, 0)
    return ContigRef(contig.id, len(contig.seq), contig.coverage, far_end, far_side)


def _attach_compute(table: dict[int, AsmNode], vertex: Vertex, messages: list, ctx) -> None:
    value = vertex.value
    vertex.active = False
    if isinstance(value, MergedContig):
        if ctx.superstep == 0:
            kind = _DROP if value.dropped else _ATTACH
            for end in value.ends:
                ln = end.link
                # the key under which the neighbor stores its edge to the end member
                key = (end.member, ln.target_side ^ 1, end.member_side ^ 1)
                ctx.send(ln.target, (kind, key, value.node.id, ln.side ^ 1))
        return
    node: AsmNode = value
    by_key = {(ln.target, ln.side, ln.target_side): i for i, ln in enumerate(node.links)}
    links: list[Link | None] = list(node.links)
    for _, (kind, key, cid, contig_side) in messages:
        i = by_key.get(key)
        if i is None or links[i] is None:
            raise StaleReferenceError(f"{node.id:#x} has no link {key} for contig {cid:#x}")
        old = links[i]
        if kind == _DROP:
            links[i] = None
        else:
            ref = _contig_ref(table[cid], contig_side)
            links[i] = Link(cid, old.side, contig_side, old.coverage, ref)
    node.links = sorted(ln for ln in links if ln is not None)


def attach_contig_info(
    kmers: Iterable[AsmNode], contigs: Iterable[MergedContig], *, workers: int = 1
) -> tuple[list[AsmNode], list[AsmNode]]:
    """Point k-mer links at merged contigs; drop links into contigs dropped as tips.

    Returns ``(kmers, surviving contig nodes)``.
    """
    contigs = list(contigs)
    # read-only lookup of contig records, standing in for the info each contig ships
    table = {c.node.id: c.node for c in contigs}
    vertices = [Vertex(n.id, n) for n in kmers] + [Vertex(c.node.id, c) for c in contigs]
    job = run_job(vertices, partial(_attach_compute, table), workers=workers, name="attach-contigs")
    kmer_out, contig_out = [], []
    for v in job.vertices:
        if isinstance(v.value, MergedContig):
            if not v.value.dropped:
                contig_out.append(v.value.node)
        else:
            kmer_out.append(v.value)
    return kmer_out, contig_out


# -- tip removal ------------------------------------------------------------

@dataclass(slots=True)
class _Hop:
    """A link as seen by the tip job: where it leads and what it adds."""

    link: Link
    dest: int
    via: int  # contig ID on the edge, 0 if none
    extra: int  # bases the embedded contig adds beyond the k-1 overlap
    stub: bool  # contig with nothing beyond it


def _hop(ln: Link, k: int) -> _Hop:
    ref = ln.contig
    if ref is None:
        return _Hop(ln, ln.target, 0, 0, False)
    return _Hop(ln, ref.far_end, ln.target, ref.length - (k - 1), ref.far_end == NULL_ID)


@dataclass(slots=True)
class TipState:
    node: AsmNode
    vtype: VertexType = VertexType.ONE
    deleted: bool = False
    dirty: bool = True
    back: dict = field(default_factory=dict)
    killed: set = field(default_factory=set)
    events: list = field(default_factory=list)


@dataclass
class TipEvent:
    """One deletion decision: the vertex that decided, the wave origin and the tip length."""

    decider: int
    origin: int
    length: int


@dataclass
class TipResult:
    kmers: list[AsmNode]
    deleted: list[int]
    killed_contigs: set[int]
    events: list[TipEvent]
    job: JobResult


def _find_incoming(node: AsmNode, sender: int, via: int) -> int | None:
    for i, ln in enumerate(node.links):
        if (via and ln.target == via) or (not via and ln.target == sender and ln.contig is None):
            return i
    return None


def _tip_compute(k: int, threshold: int):
    def delete_self(st: TipState, hops: list[_Hop]) -> None:
        st.deleted = True
        st.killed.update(h.via for h in hops if h.stub)

    def compute(vertex: Vertex, messages: list, ctx) -> None:
        st: TipState = vertex.value
        vertex.active = False
        if st.deleted:
            return
        node = st.node
        hops = [_hop(ln, k) for ln in node.links]

        phase_start = ctx.superstep == 0 or (not messages and ctx.aggregated("sent") == 0)
        if st.dirty and phase_start:
            st.dirty = False
            st.back.clear()
            st.vtype = link_type(node.id, node.links)
            _start_phase(st, hops, ctx)
            vertex.active = st.dirty
            return

        sent = 0
        for sender, payload in messages:
            if st.deleted:
                break
            if payload[0] == _REQ:
                sent += _on_request(st, hops, sender, payload, ctx)
            else:
                sent += _on_delete(st, hops, sender, payload, ctx)
        if sent:
            ctx.aggregate("sent", sent)
        vertex.active = st.dirty

    def _start_phase(st: TipState, hops: list[_Hop], ctx) -> None:
        node = st.node
        stubs = [h for h in hops if h.stub]
        real = [h for h in hops if not h.stub]
        if not hops:
            if k <= threshold:
                st.events.append(TipEvent(node.id, node.id, k))
                delete_self(st, hops)
            return
        if st.vtype is VertexType.MANY:
            # a dangling contig on a branching vertex is a tip on its own
            short = [h for h in stubs if h.extra + k - 1 <= threshold]
            if short:
                for h in short:
                    st.events.append(TipEvent(node.id, h.via, h.extra + k - 1))
                    st.killed.add(h.via)
                drop = {id(h.link) for h in short}
                node.links = [ln for ln in node.links if id(ln) not in drop]
                st.dirty = True
            return
        if not real:
            total = k + sum(h.extra for h in stubs)
            if total <= threshold:
                st.events.append(TipEvent(node.id, node.id, total))
                delete_self(st, hops)
            return
        if len(real) == 1:
            h = real[0]
            length = k + sum(s.extra for s in stubs) + h.extra
            ctx.send(h.dest, (_REQ, node.id, length, h.via))
            ctx.aggregate("sent", 1)
        # two real links: a relay, woken by messages

    def _on_request(st: TipState, hops, sender, payload, ctx) -> int:
        _, origin, length, via = payload
        node = st.node
        i = _find_incoming(node, sender, via)
        if i is None:
            raise StaleReferenceError(f"{node.id:#x} got a tip request over an unknown edge")
        real = [h for h in hops if not h.stub]
        if st.vtype is VertexType.MANY:
            if length <= threshold:
                st.events.append(TipEvent(node.id, origin, length))
                if via:
                    st.killed.add(via)
                del node.links[i]
                st.dirty = True
                ctx.send(sender, (_DEL, origin, via))
                return 1
            return 0
        if len(real) == 2:
            out = real[1] if real[0].link is node.links[i] else real[0]
            st.back[origin] = (sender, via)
            ctx.send(out.dest, (_REQ, origin, length + 1 + out.extra, out.via))
            return 1
        # the request crossed the whole path and reached the other dead end
        total = length + 1 + sum(h.extra for h in hops if h.stub)
        if total <= threshold:
            st.events.append(TipEvent(node.id, origin, total))
            delete_self(st, hops)
            if via:
                st.killed.add(via)
            ctx.send(sender, (_DEL, origin, via))
            return 1
        return 0

    def _on_delete(st: TipState, hops, sender, payload, ctx) -> int:
        _, origin, via = payload
        if origin == st.node.id:
            delete_self(st, hops)
            return 0
        back = st.back.get(origin)
        if back is None:
            logger.debug("ignoring unmatched delete at %#x", st.node.id)
            return 0
        delete_self(st, hops)
        target, back_via = back
        if back_via:
            st.killed.add(back_via)
        ctx.send(target, (_DEL, origin, back_via))
        return 1

    return compute


def remove_tips(
    kmers: Iterable[AsmNode],
    k: int,
    tip_length: int = 80,
    *,
    workers: int = 1,
    max_supersteps: int | None = 100_000,
    trace: TextIO | None = None,
) -> TipResult:
    """Delete dangling paths whose sequence length is at most ``tip_length``."""
    vertices = [Vertex(n.id, TipState(n)) for n in kmers]
    job = run_job(
        vertices,
        _tip_compute(k, tip_length),
        workers=workers,
        aggregators={"sent": SUM},
        max_supersteps=max_supersteps,
        trace=trace,
        name="tips",
    )
    kept, deleted, killed, events = [], [], set(), []
    for v in job.vertices:
        st: TipState = v.value
        killed |= st.killed
        events.extend(st.events)
        if st.deleted:
            deleted.append(v.id)
        else:
            kept.append(st.node)
    logger.info("tip removal: %d k-mers and %d contigs deleted", len(deleted), len(killed))
    return TipResult(kept, deleted, killed, events, job)
