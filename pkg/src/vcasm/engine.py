"""In-process bulk-synchronous vertex-centric engine.

Vertices are hash-partitioned over ``workers`` logical workers.  Each
superstep runs ``compute`` on every active vertex and every vertex with mail;
messages and aggregator contributions become visible one superstep later.
Inboxes are sorted by ``(sender, payload)`` so results do not depend on the
worker count.

Two loading extensions sit next to :func:`run_job`: :func:`convert_job` feeds
one job's output into the next in memory, and :func:`mini_map_reduce` builds
vertices from arbitrary records by key.
"""

from __future__ import annotations

import logging
import zlib
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence, TextIO

from .codec import MASK64, NULL_ID, mix64

logger = logging.getLogger(__name__)

DEFAULT_MAX_SUPERSTEPS = 10_000


class EngineError(RuntimeError):
    pass


class RoutingError(EngineError):
    pass


class DuplicateVertexError(EngineError):
    pass


class NonTerminationError(EngineError):
    def __init__(self, message: str, partial: "JobResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(slots=True)
class Vertex:
    id: int
    value: Any
    active: bool = True


@dataclass(frozen=True)
class Aggregator:
    merge: Callable[[Any, Any], Any]
    initial: Any = 0


SUM = Aggregator(lambda a, b: a + b, 0)
MAX = Aggregator(max, 0)


@dataclass
class JobResult:
    vertices: list[Vertex]
    supersteps: int
    message_counts: list[int] = field(default_factory=list)
    active_counts: list[int] = field(default_factory=list)
    aggregates: dict[str, Any] = field(default_factory=dict)

    @property
    def total_messages(self) -> int:
        return sum(self.message_counts)

    def values(self) -> dict[int, Any]:
        return {v.id: v.value for v in self.vertices}


def partition_of(key: Hashable, workers: int) -> int:
    if workers == 1:
        return 0
    return _stable_hash(key) % workers


def _stable_hash(key: Hashable) -> int:
    # Python's hash() of str is salted per process, so it cannot drive partitioning
    if isinstance(key, int):
        return mix64(key & MASK64)
    if isinstance(key, str):
        key = key.encode()
    if isinstance(key, bytes):
        return mix64(zlib.crc32(key))
    if isinstance(key, tuple):
        h = 0
        for part in key:
            h = mix64(h ^ _stable_hash(part))
        return h
    raise TypeError(f"cannot partition key of type {type(key).__name__}")


class Context:
    """Per-worker handle passed to ``compute``."""

    __slots__ = ("superstep", "_outbox", "_partial", "_snapshot", "_aggregators", "_vertex")

    def __init__(self, superstep: int, snapshot: dict[str, Any], aggregators: dict[str, Aggregator]):
        self.superstep = superstep
        self._outbox: list[tuple[int, int, tuple]] = []
        self._partial: dict[str, Any] = {}
        self._snapshot = snapshot
        self._aggregators = aggregators
        self._vertex: Vertex | None = None

    def send(self, target: int, payload: tuple) -> None:
        self._outbox.append((target, self._vertex.id, payload))

    def vote_to_halt(self) -> None:
        self._vertex.active = False

    def aggregate(self, name: str, value: Any) -> None:
        agg = self._aggregators[name]
        if name in self._partial:
            self._partial[name] = agg.merge(self._partial[name], value)
        else:
            self._partial[name] = value

    def aggregated(self, name: str) -> Any:
        """Value merged from contributions made in the previous superstep."""
        return self._snapshot[name]


Compute = Callable[[Vertex, list, Context], None]


def _split(vertices: Iterable[Vertex], workers: int) -> list[dict[int, Vertex]]:
    parts: list[dict[int, Vertex]] = [{} for _ in range(workers)]
    for v in vertices:
        part = parts[partition_of(v.id, workers)]
        if v.id in part:
            raise DuplicateVertexError(f"duplicate vertex id {v.id:#x}")
        part[v.id] = v
    return parts


def _map_workers(fn, items, pool):
    if pool is None:
        return [fn(item) for item in items]
    return list(pool.map(fn, items))


def run_job(
    vertices: Iterable[Vertex],
    compute: Compute,
    *,
    workers: int = 1,
    aggregators: dict[str, Aggregator] | None = None,
    max_supersteps: int | None = DEFAULT_MAX_SUPERSTEPS,
    on_missing: str = "raise",
    trace: TextIO | None = None,
    name: str = "job",
) -> JobResult:
    """Run ``compute`` in supersteps until no vertex is active and no message is pending.

    ``on_missing`` selects what happens to messages for unknown vertex IDs:
    ``"raise"`` aborts with :class:`RoutingError`, ``"drop"`` logs a warning.
    Messages to the NULL sentinel are always discarded.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if on_missing not in ("raise", "drop"):
        raise ValueError(f"unknown on_missing policy {on_missing!r}")
    aggregators = dict(aggregators or {})
    parts = _split(vertices, workers)
    inboxes: list[dict[int, list]] = [{} for _ in range(workers)]
    snapshot = {n: a.initial for n, a in aggregators.items()}
    message_counts: list[int] = []
    active_counts: list[int] = []
    superstep = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def step(w: int) -> Context:
        ctx = Context(superstep, snapshot, aggregators)
        part = parts[w]
        inbox = inboxes[w]
        # deterministic visiting order within a worker
        ids = sorted(set(inbox).union(vid for vid, v in part.items() if v.active))
        for vid in ids:
            vertex = part[vid]
            msgs = inbox.get(vid)
            if msgs:
                msgs.sort()
                vertex.active = True
            else:
                msgs = []
            ctx._vertex = vertex
            compute(vertex, msgs, ctx)
        return ctx

    try:
        while True:
            n_active = sum(
                sum(1 for v in part.values() if v.active) for part in parts
            )
            pending = any(inboxes)
            if not n_active and not pending:
                break
            if max_supersteps is not None and superstep >= max_supersteps:
                partial = JobResult(_collect(parts), superstep, message_counts, active_counts, snapshot)
                raise NonTerminationError(
                    f"{name}: no termination after {max_supersteps} supersteps", partial
                )
            contexts = _map_workers(step, range(workers), pool)

            new_snapshot = {n: a.initial for n, a in aggregators.items()}
            for ctx in contexts:
                for n, val in ctx._partial.items():
                    new_snapshot[n] = aggregators[n].merge(new_snapshot[n], val)
            snapshot = new_snapshot

            inboxes = [{} for _ in range(workers)]
            sent = 0
            for ctx in contexts:
                for target, sender, payload in ctx._outbox:
                    sent += 1
                    if target == NULL_ID:
                        continue
                    w = partition_of(target, workers)
                    if target not in parts[w]:
                        if on_missing == "raise":
                            raise RoutingError(
                                f"{name}: message from {sender:#x} to unknown vertex {target:#x}"
                            )
                        logger.warning("%s: dropping message to unknown vertex %#x", name, target)
                        continue
                    box = inboxes[w].get(target)
                    if box is None:
                        inboxes[w][target] = [(sender, payload)]
                    else:
                        box.append((sender, payload))
            message_counts.append(sent)
            active_counts.append(n_active)
            if trace is not None:
                trace.write(f"{name}\t{superstep}\tactive={n_active}\tmessages={sent}\n")
            superstep += 1
    finally:
        if pool is not None:
            pool.shutdown()

    return JobResult(_collect(parts), superstep, message_counts, active_counts, snapshot)


def _collect(parts: list[dict[int, Vertex]]) -> list[Vertex]:
    out = [v for part in parts for v in part.values()]
    out.sort(key=lambda v: v.id)
    return out


def convert_job(
    result: JobResult | Iterable[Vertex],
    convert: Callable[[Vertex], Iterable[Vertex]],
    *,
    workers: int = 1,
) -> list[Vertex]:
    """Turn the final vertices of one job into the input vertices of the next.

    Every produced vertex is reshuffled to the worker owning its ID; the output
    is sorted by ID so it is independent of ``workers``.
    """
    source = result.vertices if isinstance(result, JobResult) else list(result)
    by_worker: list[list[Vertex]] = [[] for _ in range(workers)]
    for v in source:
        for out in convert(v):
            by_worker[partition_of(out.id, workers)].append(out)
    merged: dict[int, Vertex] = {}
    for chunk in by_worker:
        for v in chunk:
            if v.id in merged:
                raise DuplicateVertexError(f"convert produced duplicate vertex id {v.id:#x}")
            merged[v.id] = v
    return [merged[i] for i in sorted(merged)]


def mini_map_reduce(
    records: Sequence[Any],
    map_fn: Callable[[Any], Iterable[tuple[Hashable, Any]]],
    reduce_fn: Callable[[Hashable, list], Iterable[Any]],
    *,
    workers: int = 1,
    combine: Callable[[Any, Any], Any] | None = None,
    sort_values: bool = True,
) -> list[Any]:
    """Map records to ``(key, value)`` pairs, shuffle by key hash, group, and reduce.

    ``combine`` optionally merges values with equal keys inside a worker
    before the shuffle.  Reduce outputs are returned in key order.
    """
    n = len(records)
    chunks = [records[(n * w) // workers:(n * (w + 1)) // workers] for w in range(workers)]

    def map_chunk(chunk):
        buckets: list[dict] = [defaultdict(list) if combine is None else {} for _ in range(workers)]
        for rec in chunk:
            for key, value in map_fn(rec):
                bucket = buckets[partition_of(key, workers)]
                if combine is None:
                    bucket[key].append(value)
                elif key in bucket:
                    bucket[key] = combine(bucket[key], value)
                else:
                    bucket[key] = value
        return buckets

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        mapped = _map_workers(map_chunk, chunks, pool)

        def reduce_worker(w: int):
            groups: dict[Hashable, list] = defaultdict(list)
            for buckets in mapped:
                for key, vals in buckets[w].items():
                    if combine is None:
                        groups[key].extend(vals)
                    else:
                        groups[key].append(vals)
            out = []
            for key in sorted(groups):
                vals = groups[key]
                if sort_values:
                    vals.sort()
                for item in reduce_fn(key, vals):
                    out.append((key, item))
            return out

        reduced = _map_workers(reduce_worker, range(workers), pool)
    finally:
        if pool is not None:
            pool.shutdown()
    flat = [pair for chunk in reduced for pair in chunk]
    flat.sort(key=lambda kv: kv[0])
    return [item for _, item in flat]
