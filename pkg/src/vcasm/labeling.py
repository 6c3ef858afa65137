"""Contig labeling: give every unambiguous vertex the label of its maximal unambiguous path.

The job runs on the engine in three stages:

* supersteps 0-1 mark contig ends.  Ambiguous vertices broadcast their ID
  and retire; an unambiguous vertex that hears from an ambiguous neighbor,
  or has a dead side, replaces that side with its own end marker.
* bidirectional list ranking: each round a vertex asks both current
  predecessors for their predecessor on the far side, doubling the hop
  distance, until both entries are end markers.  Label = smaller end.
* simplified Shiloach-Vishkin: tree hooking plus shortcutting until no
  parent pointer changes; label = smallest vertex ID in the component.
  Used for every vertex with ``strategy="sv"``, and as a fallback for the
  cycles list ranking cannot finish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .codec import end_marker, is_end_marker, strip_end_marker
from .engine import SUM, JobResult, Vertex, run_job
from .graph import AsmNode, VertexType

LR, SV = "lr", "sv"

# message kinds
_AMB, _REQ, _RESP, _SVD, _ASK, _ANS, _HOOK = range(7)

# phases of one simplified S-V round
_P_SEND, _P_GATHER, _P_HOOK, _P_ROOT, _P_ANSWER = range(5)


@dataclass(slots=True)
class LabelState:
    node: AsmNode
    vtype: VertexType
    label: int | None = None
    is_end: bool = False
    pair: list[int] = field(default_factory=list)
    mode: str = ""
    # list-ranking bookkeeping
    prev_pending: int = -1
    rounds: int = 0
    n_total: int = 0
    # simplified S-V bookkeeping
    sv_start: int = -1
    D: int = 0
    nbrs: list[int] = field(default_factory=list)
    nbr_min: int = 0
    changed: bool = False
    sv_rounds: int = 0

    @property
    def ambiguous(self) -> bool:
        return self.vtype is VertexType.MANY


@dataclass
class LabelingResult:
    states: list[LabelState]
    job: JobResult
    strategy: str
    fallback_vertices: int = 0

    @property
    def supersteps(self) -> int:
        return self.job.supersteps

    @property
    def messages(self) -> int:
        return self.job.total_messages

    @property
    def lr_rounds(self) -> int:
        """Doubling rounds run by list ranking (request waves sent)."""
        return max((s.rounds for s in self.states), default=0)

    @property
    def sv_rounds(self) -> int:
        """Complete hook-and-shortcut rounds, the last of which changed nothing."""
        return max((s.sv_rounds - 1 for s in self.states if s.sv_rounds), default=0)

    def labels(self) -> dict[int, int]:
        return {s.node.id: s.label for s in self.states if s.label is not None}

    def groups(self) -> dict[int, list[AsmNode]]:
        out: dict[int, list[AsmNode]] = {}
        for s in self.states:
            if s.label is not None:
                out.setdefault(s.label, []).append(s.node)
        return out

    def ambiguous(self) -> list[AsmNode]:
        return [s.node for s in self.states if s.ambiguous]


def _init_pair(st: LabelState, amb: set[int]) -> None:
    node = st.node
    own = end_marker(node.id)
    pair = [own, own]
    for ln in node.links:
        if ln.target not in amb:
            pair[ln.side] = ln.target
    st.pair = pair
    st.is_end = own in pair
    st.nbrs = sorted({ln.target for ln in node.links if ln.target not in amb})


def _pending(pair: list[int]) -> int:
    return sum(1 for p in pair if not is_end_marker(p))


def _finish_lr(st: LabelState, vertex: Vertex, ctx) -> None:
    st.label = min(strip_end_marker(st.pair[0]), strip_end_marker(st.pair[1]))
    st.mode = "done"
    vertex.active = False


def _start_sv(st: LabelState, superstep: int) -> None:
    st.mode = SV
    st.sv_start = superstep
    st.D = st.node.id


def _compute(vertex: Vertex, messages: list, ctx) -> None:
    st: LabelState = vertex.value
    step = ctx.superstep

    if step == 0:
        ctx.aggregate("n", 1)
        if st.ambiguous:
            for ln in st.node.links:
                ctx.send(ln.target, (_AMB,))
            vertex.active = False
        return
    if st.ambiguous or st.mode == "done":
        vertex.active = False
        return

    if step == 1:
        st.n_total = ctx.aggregated("n")
        _init_pair(st, {sender for sender, _ in messages})
        if st.mode == "ends":
            vertex.active = False
            return
        if st.mode == SV:
            _start_sv(st, step)
        else:
            st.mode = LR
            messages = []

    if st.mode == LR:
        _lr_step(st, vertex, messages, ctx)
        if st.mode != SV:
            return
        messages = []
    if st.mode == SV:
        _sv_step(st, vertex, messages, ctx)


def _lr_step(st: LabelState, vertex: Vertex, messages: list, ctx) -> None:
    step = ctx.superstep
    if step % 2 == 1:
        # responses to last round's requests, then new requests
        pair = st.pair
        for sender, payload in messages:
            if payload[0] != _RESP:
                continue
            if pair[0] == sender:
                pair[0] = payload[1]
            elif pair[1] == sender:
                pair[1] = payload[1]
            else:
                raise AssertionError(f"unexpected list-ranking response at {st.node.id:#x}")
        pending = _pending(pair)
        ctx.aggregate("pending", pending)
        if not pending:
            _finish_lr(st, vertex, ctx)
            return
        st.rounds += 1
        for p in pair:
            if not is_end_marker(p):
                ctx.send(p, (_REQ,))
        return

    # even superstep: answer requests, or hand over to S-V when stuck
    pending = ctx.aggregated("pending")
    stalled = st.prev_pending >= 0 and pending >= st.prev_pending
    overdue = st.rounds > math.ceil(math.log2(max(st.n_total, 2))) + 2
    st.prev_pending = pending
    if pending and (stalled or overdue):
        _start_sv(st, step)
        return
    for sender, payload in messages:
        if payload[0] != _REQ:
            continue
        pair = st.pair
        if pair[0] == sender:
            ctx.send(sender, (_RESP, pair[1]))
        elif pair[1] == sender:
            ctx.send(sender, (_RESP, pair[0]))
        else:
            raise AssertionError(f"list-ranking request from non-predecessor at {st.node.id:#x}")


def _sv_step(st: LabelState, vertex: Vertex, messages: list, ctx) -> None:
    phase = (ctx.superstep - st.sv_start) % 5
    if phase == _P_SEND:
        if st.sv_rounds:
            # shortcut answers arrive at the start of the next round
            for _, payload in messages:
                if payload[0] == _ANS and payload[1] != st.D:
                    st.D = payload[1]
                    st.changed = True
            ctx.aggregate("sv_changed", int(st.changed))
        st.changed = False
        st.sv_rounds += 1
        for nb in st.nbrs:
            ctx.send(nb, (_SVD, st.D))
        ctx.send(st.D, (_ASK,))
    elif phase == _P_GATHER:
        if st.sv_rounds > 1 and not ctx.aggregated("sv_changed"):
            st.label = st.D
            st.mode = "done"
            vertex.active = False
            return
        st.nbr_min = st.D
        for sender, payload in messages:
            if payload[0] == _SVD:
                if payload[1] < st.nbr_min:
                    st.nbr_min = payload[1]
            elif payload[0] == _ASK:
                ctx.send(sender, (_ANS, st.D))
    elif phase == _P_HOOK:
        parent_of_parent = next(p[1] for _, p in messages if p[0] == _ANS)
        if parent_of_parent == st.D and st.nbr_min < st.D:
            ctx.send(st.D, (_HOOK, st.nbr_min))
    elif phase == _P_ROOT:
        hooks = [p[1] for _, p in messages if p[0] == _HOOK]
        if hooks and min(hooks) < st.D:
            st.D = min(hooks)
            st.changed = True
        ctx.send(st.D, (_ASK,))
    else:
        for sender, payload in messages:
            if payload[0] == _ASK:
                ctx.send(sender, (_ANS, st.D))


def _initial_states(nodes: Iterable[AsmNode], mode: str) -> list[Vertex]:
    out = []
    for node in nodes:
        st = LabelState(node, node.vtype, mode=mode)
        out.append(Vertex(node.id, st))
    return out


def label_contigs(
    nodes: Iterable[AsmNode],
    strategy: str = LR,
    *,
    workers: int = 1,
    max_supersteps: int | None = 10_000,
    trace: TextIO | None = None,
) -> LabelingResult:
    """Label unambiguous vertices by contig; ambiguous vertices keep ``label=None``."""
    if strategy not in (LR, SV):
        raise ValueError(f"unknown labeling strategy {strategy!r}")
    vertices = _initial_states(nodes, SV if strategy == SV else "")
    job = run_job(
        vertices,
        _compute,
        workers=workers,
        aggregators={"n": SUM, "pending": SUM, "sv_changed": SUM},
        max_supersteps=max_supersteps,
        trace=trace,
        name=f"label-{strategy}",
    )
    states = [v.value for v in job.vertices]
    fallback = sum(1 for s in states if s.sv_start >= 0) if strategy == LR else 0
    return LabelingResult(states, job, strategy, fallback)


def mark_contig_ends(nodes: Iterable[AsmNode], *, workers: int = 1) -> dict[int, LabelState]:
    """Run only the two end-marking supersteps; returns the state of every vertex."""
    vertices = _initial_states(nodes, "ends")
    job = run_job(vertices, _compute, workers=workers, aggregators={"n": SUM}, name="mark-ends")
    return {v.id: v.value for v in job.vertices}


def bidirectional_list_ranking(nodes: Iterable[AsmNode], **kwargs) -> LabelingResult:
    return label_contigs(nodes, LR, **kwargs)


def simplified_sv(nodes: Iterable[AsmNode], **kwargs) -> LabelingResult:
    return label_contigs(nodes, SV, **kwargs)


def connected_components_sv(
    edges: Iterable[tuple[int, int]], vertices: Iterable[int] = (), *, workers: int = 1
) -> dict[int, int]:
    """Simplified S-V on a plain undirected graph; maps each vertex to its component minimum."""
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    states = []
    for vid, nbrs in adj.items():
        st = LabelState(AsmNode(vid, ""), VertexType.ONE_ONE, mode=SV, nbrs=sorted(nbrs - {vid}))
        _start_sv(st, 0)
        states.append(Vertex(vid, st))

    def compute(vertex, messages, ctx):
        st = vertex.value
        if st.mode == "done":
            vertex.active = False
            return
        _sv_step(st, vertex, messages, ctx)

    job = run_job(states, compute, workers=workers, aggregators={"sv_changed": SUM}, name="sv")
    return {v.id: v.value.label for v in job.vertices}
