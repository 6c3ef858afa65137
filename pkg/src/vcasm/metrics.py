"""Assembly quality metrics: counts, N50 and exact-match genome fraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .codec import _rc_unchecked

LONG_CONTIG = 500


def n50(lengths: Iterable[int]) -> int:
    """Length of the contig holding the middle base of the longest-first concatenation.

    For an even total ``T`` the middle base is position ``ceil(T/2)`` (1-based).
    """
    ordered = sorted((x for x in lengths if x > 0), reverse=True)
    total = sum(ordered)
    if not total:
        return 0
    middle = (total + 1) // 2
    seen = 0
    for length in ordered:
        seen += length
        if seen >= middle:
            return length
    raise AssertionError("unreachable")


def genome_fraction(contigs: Sequence[str], reference: str) -> float:
    """Fraction of reference positions covered by an exact occurrence of a contig or its rc."""
    if not reference:
        return 0.0
    n = len(reference)
    # difference array over covered intervals
    delta = [0] * (n + 1)
    for seq in contigs:
        if not seq or len(seq) > n:
            continue
        for probe in {seq, _rc_unchecked(seq)}:
            pos = reference.find(probe)
            while pos != -1:
                delta[pos] += 1
                delta[pos + len(probe)] -= 1
                pos = reference.find(probe, pos + 1)
    covered = run = 0
    for i in range(n):
        run += delta[i]
        if run > 0:
            covered += 1
    return covered / n


@dataclass
class AssemblyReport:
    contigs: int = 0
    contigs_500: int = 0
    total_length: int = 0
    n50: int = 0
    largest: int = 0
    n50_round1: int = 0
    genome_fraction: float | None = None
    stages: dict[str, dict[str, int]] = field(default_factory=dict)

    def record_stage(self, name: str, supersteps: int, messages: int) -> None:
        entry = self.stages.setdefault(name, {"supersteps": 0, "messages": 0})
        entry["supersteps"] += supersteps
        entry["messages"] += messages

    def lines(self) -> list[str]:
        out = [
            f"contigs\t{self.contigs}",
            f"contigs_ge_{LONG_CONTIG}\t{self.contigs_500}",
            f"total_length\t{self.total_length}",
            f"n50\t{self.n50}",
            f"n50_round1\t{self.n50_round1}",
            f"largest\t{self.largest}",
        ]
        if self.genome_fraction is not None:
            out.append(f"genome_fraction\t{self.genome_fraction:.6f}")
        for name in sorted(self.stages):
            st = self.stages[name]
            out.append(f"{name}.supersteps\t{st['supersteps']}")
            out.append(f"{name}.messages\t{st['messages']}")
        return out

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def compute_metrics(contigs: Iterable[str], reference: str | None = None) -> AssemblyReport:
    seqs = [s for s in contigs]
    lengths = [len(s) for s in seqs]
    report = AssemblyReport(
        contigs=len(seqs),
        contigs_500=sum(1 for x in lengths if x >= LONG_CONTIG),
        total_length=sum(lengths),
        n50=n50(lengths),
        largest=max(lengths, default=0),
    )
    if reference is not None:
        report.genome_fraction = genome_fraction(seqs, reference)
    return report
