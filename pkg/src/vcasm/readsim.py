"""Seeded read simulator: uniform read placement, random strand, substitution errors."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .codec import _rc_unchecked, validate_sequence

BASES = "ACGT"
_OTHER = {b: [x for x in BASES if x != b] for b in BASES}


class SimConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    reference_length: int = 20_000
    read_min: int = 100
    read_max: int = 100
    depth: float = 30.0
    error_rate: float = 0.0
    seed: int = 0
    unique_k: int = 31

    def validate(self, reference_length: int | None = None) -> None:
        if not 0 <= self.error_rate < 1:
            raise SimConfigError("error rate must be in [0, 1)")
        if not 1 <= self.read_min <= self.read_max:
            raise SimConfigError("need 1 <= read_min <= read_max")
        if self.depth <= 0:
            raise SimConfigError("depth must be positive")
        n = self.reference_length if reference_length is None else reference_length
        if n < self.read_min:
            raise SimConfigError(f"reference of {n} bp is shorter than the minimum read length")


@dataclass(frozen=True)
class SimRead:
    name: str
    seq: str
    start: int
    length: int
    reverse: bool


def has_unique_kmers(seq: str, k: int) -> bool:
    """True when no k-mer occurs twice across both strands."""
    seen = set()
    for i in range(len(seq) - k + 1):
        w = seq[i:i + k]
        c = min(w, _rc_unchecked(w))
        if c in seen:
            return False
        seen.add(c)
    return True


def random_reference(length: int, rng: random.Random, unique_k: int | None = 31, attempts: int = 100) -> str:
    for _ in range(attempts):
        seq = "".join(rng.choices(BASES, k=length))
        if unique_k is None or has_unique_kmers(seq, unique_k):
            return seq
    raise SimConfigError(f"could not draw a {length} bp reference with unique {unique_k}-mers")


def mutate(seq: str, rate: float, rng: random.Random) -> str:
    if rate <= 0:
        return seq
    out = list(seq)
    for i, base in enumerate(out):
        if rng.random() < rate:
            out[i] = rng.choice(_OTHER[base])
    return "".join(out)


def simulate(config: SimConfig, reference: str | None = None) -> tuple[str, list[SimRead]]:
    """Return ``(reference, reads)``; identical config and seed give identical output."""
    rng = random.Random(config.seed)
    if reference is None:
        config.validate()
        reference = random_reference(config.reference_length, rng, config.unique_k)
    else:
        validate_sequence(reference)
        config.validate(len(reference))
    n = len(reference)
    target = config.depth * n
    reads: list[SimRead] = []
    total = 0
    while total < target:
        length = rng.randint(config.read_min, min(config.read_max, n))
        start = rng.randint(0, n - length)
        reverse = rng.random() < 0.5
        frag = reference[start:start + length]
        if reverse:
            frag = _rc_unchecked(frag)
        frag = mutate(frag, config.error_rate, rng)
        strand = "-" if reverse else "+"
        reads.append(SimRead(f"r{len(reads)}_{start}{strand}", frag, start, length, reverse))
        total += length
    return reference, reads
