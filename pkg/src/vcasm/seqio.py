"""FASTQ input and FASTA output."""

from __future__ import annotations

from typing import Iterable, Iterator, TextIO

from .codec import contig_fields
from .graph import AsmNode

FASTA_WIDTH = 80


class FastqError(ValueError):
    pass


def iter_fastq(stream: Iterable[str]) -> Iterator[str]:
    """Yield uppercased read sequences from 4-line FASTQ records."""
    record: list[str] = []
    start = 0
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not record:
            if not line.strip():
                continue
            start = lineno
        record.append(line)
        if len(record) < 4:
            continue
        header, seq, plus, qual = record
        record = []
        if not header.startswith("@"):
            raise FastqError(f"line {start}: record header must start with '@'")
        if not plus.startswith("+"):
            raise FastqError(f"line {start + 2}: expected '+' separator")
        if len(qual) != len(seq):
            raise FastqError(f"line {start + 3}: quality length differs from sequence length")
        yield seq.strip().upper()
    if record:
        raise FastqError(f"line {start}: truncated record")


def parse_fastq(stream: Iterable[str]) -> list[str]:
    return list(iter_fastq(stream))


def write_fastq(reads: Iterable[tuple[str, str]], stream: TextIO, quality: str = "I") -> None:
    for name, seq in reads:
        stream.write(f"@{name}\n{seq}\n+\n{quality * len(seq)}\n")


def _sort_key(node: AsmNode):
    return (-len(node.seq), contig_fields(node.id))


def write_fasta(contigs: Iterable[AsmNode], stream: TextIO, width: int = FASTA_WIDTH) -> None:
    """Write contigs sorted by length (longest first), then ID."""
    for node in sorted(contigs, key=_sort_key):
        circular = "true" if node.circular else "false"
        stream.write(f">{node.header_name()} len={len(node.seq)} cov={node.coverage} circular={circular}\n")
        seq = node.seq
        for i in range(0, len(seq), width):
            stream.write(seq[i:i + width] + "\n")


def read_fasta(stream: Iterable[str]) -> list[tuple[str, str]]:
    """Return ``(header, sequence)`` pairs; the header excludes the leading '>'."""
    out: list[tuple[str, list[str]]] = []
    for raw in stream:
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            out.append((line[1:], []))
        elif not out:
            raise ValueError("sequence data before the first FASTA header")
        else:
            out[-1][1].append(line.upper())
    return [(h, "".join(parts)) for h, parts in out]
