"""De Bruijn graph construction from reads via two map-reduce phases.

Phase one counts (k+1)-mers and keeps those seen more than ``theta`` times.
Phase two turns every surviving (k+1)-mer into an edge between its prefix
and suffix k-mers and stores it in a 32-bit neighbor bitmap on both
endpoints.

Bitmap slot layout: ``polarity * 8 + direction * 4 + nucleotide`` with
polarity LL=0, LH=1, HL=2, HH=3, direction in=0 / out=1 and A=0 .. T=3.
An out-slot's nucleotide is appended to the (oriented) vertex suffix, an
in-slot's nucleotide is prepended to its prefix.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator, Sequence

from .codec import (
    H,
    L,
    NULL_ID,
    Polarity,
    _check_k,
    decode_kmer,
    rc_id,
)
from .engine import mini_map_reduce
from .graph import AsmNode, Link

_CODE = {"A": 0, "C": 1, "G": 2, "T": 3}

NULL_ITEM = 0b10000000
IN, OUT = 0, 1


class InvalidReadError(ValueError):
    pass


@dataclass(frozen=True, slots=True, order=True)
class K1Mer:
    id: int
    count: int


@dataclass(frozen=True, slots=True)
class KmerVertex:
    """A k-mer vertex in compact form: 32-bit neighbor bitmap plus one coverage per set bit."""

    id: int
    bitmap: int
    coverages: tuple[int, ...]

    def __post_init__(self):
        if bin(self.bitmap).count("1") != len(self.coverages):
            raise ValueError("coverage count does not match bitmap popcount")

    def slots(self) -> Iterator[tuple[int, int]]:
        """Yield ``(slot, coverage)`` in ascending slot order."""
        i = 0
        bits = self.bitmap
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1, self.coverages[i]
            i += 1
            bits ^= low

    def links(self, k: int) -> list[Link]:
        # a self-loop whose two slots decode to the same link is listed once
        out = {}
        for slot, cov in self.slots():
            ln = slot_link(self.id, slot, k, cov)
            out.setdefault((ln.target, ln.side, ln.target_side), ln)
        return sorted(out.values())

    def adj_items(self) -> list[tuple[int, int]]:
        return [(slot_to_item(slot), cov) for slot, cov in self.slots()]


def slot_index(polarity: int, direction: int, nucleotide: int) -> int:
    return (polarity << 3) | (direction << 2) | nucleotide


def slot_to_item(slot: int) -> int:
    """8-bit adjacency item ``000 XX Y ZZ`` (Y=1 marks an in-neighbor)."""
    polarity, direction, nt = slot >> 3, (slot >> 2) & 1, slot & 3
    return (nt << 3) | ((1 - direction) << 2) | polarity


def item_to_slot(item: int) -> int:
    if item & 0b11100000:
        raise ValueError(f"adjacency item {item:#010b} has no slot")
    nt, y, polarity = (item >> 3) & 3, (item >> 2) & 1, item & 3
    return slot_index(polarity, 1 - y, nt)


def _orient(kid: int, label: int, k: int) -> int:
    return kid if label == L else rc_id(kid, k)


def slot_link(vid: int, slot: int, k: int, coverage: int = 0) -> Link:
    """Decode one bitmap slot of vertex ``vid`` into a :class:`Link`."""
    pol = slot >> 3
    direction = (slot >> 2) & 1
    nt = slot & 3
    src, dst = pol >> 1, pol & 1
    mask = (1 << (2 * k)) - 1
    if direction == OUT:
        seq = ((_orient(vid, src, k) << 2) | nt) & mask
        return Link(_orient(seq, dst, k), src, dst, coverage)
    seq = (nt << (2 * (k - 1))) | (_orient(vid, dst, k) >> 2)
    return Link(_orient(seq, src, k), dst ^ 1, src ^ 1, coverage)


def decode_neighbor(vid: int, item: int, k: int) -> int:
    """Neighbor ID encoded by an 8-bit adjacency item of vertex ``vid``."""
    if item == NULL_ITEM:
        return NULL_ID
    return slot_link(vid, item_to_slot(item), k).target


def decode_slot(vid: int, slot: int, k: int) -> int:
    return slot_link(vid, slot, k).target


def extract_k1mers(read: str, k: int) -> list[str]:
    """Sliding (k+1)-windows over every N-free segment of ``read``."""
    _check_k(k)
    if read.strip("ACGTN") or any(ch not in "ACGTN" for ch in read):
        raise InvalidReadError(f"read contains characters outside ACGTN: {read[:40]!r}")
    out = []
    for seg in read.split("N"):
        out.extend(seg[i:i + k + 1] for i in range(len(seg) - k))
    return out


def k1mer_ids(read: str, k: int, canonical: bool = True) -> Iterator[int]:
    """Encoded (k+1)-mers of ``read``; with ``canonical`` each is replaced by min(w, rc(w))."""
    m = k + 1
    mask = (1 << (2 * m)) - 1
    top = 2 * (m - 1)
    fwd = rev = 0
    run = 0
    for ch in read:
        c = _CODE.get(ch)
        if c is None:
            if ch != "N":
                raise InvalidReadError(f"invalid character {ch!r} in read")
            run = 0
            fwd = rev = 0
            continue
        fwd = ((fwd << 2) | c) & mask
        rev = (rev >> 2) | ((3 - c) << top)
        run += 1
        if run >= m:
            yield min(fwd, rev) if canonical else fwd


def count_and_filter(
    reads: Sequence[str],
    k: int,
    theta: int = 0,
    *,
    workers: int = 1,
    canonical: bool = True,
) -> list[K1Mer]:
    """Count (k+1)-mers over all reads and keep those with count > theta."""
    _check_k(k)

    def map_read(read):
        for kid in k1mer_ids(read, k, canonical):
            yield kid, 1

    def reduce_counts(key, counts):
        total = sum(counts)
        if total > theta:
            yield K1Mer(key, total)

    return mini_map_reduce(
        reads, map_read, reduce_counts, workers=workers, combine=int.__add__
    )


def edge_slots(k1: int, k: int, canonical: bool = True) -> list[tuple[int, int]]:
    """``(vertex_id, slot)`` entries contributed by one (k+1)-mer edge.

    The edge is written with its smaller endpoint as source so that both
    Property-1-equivalent forms land in the same slot.  A self-loop sets
    both its out-slot and its in-slot on the same vertex.
    """
    mask = (1 << (2 * k)) - 1
    prefix, suffix = k1 >> 2, k1 & mask
    if canonical:
        rp, rs = rc_id(prefix, k), rc_id(suffix, k)
        u, x = (prefix, L) if prefix <= rp else (rp, H)
        v, y = (suffix, L) if suffix <= rs else (rs, H)
        pol = Polarity.of(x, y)
        if u > v or (u == v and pol.reverse() < pol):
            u, v, pol = v, u, pol.reverse()
    else:
        u, v, pol = prefix, suffix, Polarity.LL
    src_seq = _orient(u, pol.src, k)
    dst_seq = _orient(v, pol.dst, k)
    out_slot = slot_index(pol, OUT, dst_seq & 3)
    in_slot = slot_index(pol, IN, src_seq >> (2 * (k - 1)))
    return [(u, out_slot), (v, in_slot)]


def _merge_partial(a: dict, b: dict) -> dict:
    for slot, cov in b.items():
        a[slot] = a.get(slot, 0) + cov
    return a


def build_vertices(
    k1mers: Sequence[K1Mer], k: int, *, workers: int = 1, canonical: bool = True
) -> list[KmerVertex]:
    """Turn counted (k+1)-mers into k-mer vertices with bitmaps and edge coverages."""
    _check_k(k)

    def map_edge(rec: K1Mer):
        for vid, slot in edge_slots(rec.id, k, canonical):
            yield vid, {slot: rec.count}

    def reduce_vertex(vid, partials):
        merged: dict[int, int] = {}
        for part in partials:
            _merge_partial(merged, part)
        bitmap = 0
        for slot in merged:
            bitmap |= 1 << slot
        yield KmerVertex(vid, bitmap, tuple(merged[s] for s in sorted(merged)))

    return mini_map_reduce(
        k1mers, map_edge, reduce_vertex, workers=workers,
        combine=_merge_partial, sort_values=False,
    )


def build_dbg(
    reads: Sequence[str], k: int, theta: int = 0, *, workers: int = 1, canonical: bool = True
) -> list[KmerVertex]:
    k1 = count_and_filter(reads, k, theta, workers=workers, canonical=canonical)
    return build_vertices(k1, k, workers=workers, canonical=canonical)


def to_asm_node(vertex: KmerVertex, k: int) -> AsmNode:
    return AsmNode(vertex.id, decode_kmer(vertex.id, k), vertex.links(k))


# -- binary dump -----------------------------------------------------------

def encode_varint(n: int) -> bytes:
    if n < 0:
        raise ValueError("varint must be non-negative")
    out = bytearray()
    while True:
        byte = n & 0x7F
        n >>= 7
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varint(data: bytes, pos: int = 0) -> tuple[int, int]:
    """Return ``(value, next_pos)``."""
    value = shift = 0
    while True:
        if pos >= len(data):
            raise ValueError("truncated varint")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


def dump_graph(vertices: Iterable[KmerVertex], fh: BinaryIO) -> None:
    """Write ``<u64 id><u32 bitmap><varint coverage>*`` per vertex, little-endian."""
    for v in vertices:
        fh.write(struct.pack("<QI", v.id, v.bitmap))
        for cov in v.coverages:
            fh.write(encode_varint(cov))


def load_graph(data: bytes) -> list[KmerVertex]:
    out = []
    pos = 0
    while pos < len(data):
        if pos + 12 > len(data):
            raise ValueError("truncated vertex record")
        vid, bitmap = struct.unpack_from("<QI", data, pos)
        pos += 12
        covs = []
        for _ in range(bin(bitmap).count("1")):
            cov, pos = decode_varint(data, pos)
            covs.append(cov)
        out.append(KmerVertex(vid, bitmap, tuple(covs)))
    return out
