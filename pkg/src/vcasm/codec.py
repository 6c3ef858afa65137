"""Bit-level encoding of nucleotides, k-mer IDs, contig IDs and orientation labels.

A k-mer ID holds the 2-bit codes of its sequence in the low ``2k`` bits, first
nucleotide most significant, with all higher bits zero.  Bit 63 separates
k-mer IDs (0) from contig IDs and the NULL sentinel (1).  Bit 62 is the
contig-end marker used while labeling contigs.
"""

from __future__ import annotations

from enum import IntEnum

MAX_K = 31

NULL_ID = 1 << 63
END_BIT = 1 << 62
CONTIG_BIT = 1 << 63
MASK64 = (1 << 64) - 1

_CODE = {"A": 0, "C": 1, "G": 2, "T": 3}
_BASES = "ACGT"
_COMPLEMENT = str.maketrans("ACGT", "TGCA")

# contig worker field is capped one bit short of 31 so bit 62 stays clear
MAX_CONTIG_WORKER = (1 << 30) - 1


class CodecError(ValueError):
    """Base class for encoding errors."""


class InvalidSequenceError(CodecError):
    pass


class InvalidKError(CodecError):
    pass


class NotAKmerError(CodecError):
    pass


class InvalidIdError(CodecError):
    pass


class Orientation(IntEnum):
    """Label of a k-mer occurrence: L if it matched its canonical form, H if reverse-complemented."""

    L = 0
    H = 1

    def complement(self) -> "Orientation":
        return Orientation(self ^ 1)

    def __str__(self) -> str:
        return self.name


L = Orientation.L
H = Orientation.H


class Polarity(IntEnum):
    """Edge polarity ``<src:dst>``; the value is ``2*src + dst``."""

    LL = 0
    LH = 1
    HL = 2
    HH = 3

    @classmethod
    def of(cls, src: int, dst: int) -> "Polarity":
        return cls((src << 1) | dst)

    @property
    def src(self) -> Orientation:
        return Orientation(self >> 1)

    @property
    def dst(self) -> Orientation:
        return Orientation(self & 1)

    def reverse(self) -> "Polarity":
        """Polarity of the same edge written from the other endpoint: <X:Y> -> <~Y:~X>."""
        return Polarity.of(self.dst ^ 1, self.src ^ 1)


def _check_k(k: int) -> None:
    if not isinstance(k, int) or not 1 <= k <= MAX_K:
        raise InvalidKError(f"k must be in 1..{MAX_K}, got {k!r}")


def encode_kmer(seq: str, k: int | None = None) -> int:
    """Encode an ACGT string of length ``k`` into its right-aligned 2-bit integer ID."""
    if k is None:
        k = len(seq)
    _check_k(k)
    if len(seq) != k:
        raise InvalidKError(f"sequence length {len(seq)} does not match k={k}")
    value = 0
    try:
        for ch in seq:
            value = (value << 2) | _CODE[ch]
    except KeyError as exc:
        raise InvalidSequenceError(f"invalid nucleotide {exc.args[0]!r} in {seq!r}") from None
    return value


def decode_kmer(kid: int, k: int) -> str:
    _check_k(k)
    if kid < 0 or kid >> (2 * k):
        raise NotAKmerError(f"{kid:#x} is not a {k}-mer ID")
    out = []
    for shift in range(2 * (k - 1), -1, -2):
        out.append(_BASES[(kid >> shift) & 3])
    return "".join(out)


def validate_sequence(seq: str) -> None:
    if seq.strip("ACGT"):
        bad = next(ch for ch in seq if ch not in _CODE)
        raise InvalidSequenceError(f"invalid nucleotide {bad!r} in sequence")


def complement_code(code: int) -> int:
    return ~code & 3


def reverse_complement(seq: str) -> str:
    validate_sequence(seq)
    return seq.translate(_COMPLEMENT)[::-1]


def _rc_unchecked(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]


def _rev_byte(b: int) -> int:
    return ((b & 3) << 6) | (((b >> 2) & 3) << 4) | (((b >> 4) & 3) << 2) | (b >> 6)


# complement and reverse the four 2-bit codes of one byte
_RC_BYTE = [_rev_byte(~b & 0xFF) for b in range(256)]


def rc_id(kid: int, k: int) -> int:
    """Reverse complement computed directly on an encoded k-mer (k <= 32)."""
    out = 0
    for _ in range(8):
        out = (out << 8) | _RC_BYTE[kid & 0xFF]
        kid >>= 8
    return out >> (64 - 2 * k)


def canonicalize(seq: str) -> tuple[str, Orientation]:
    """Return the lexicographically smaller of ``seq`` and its reverse complement with its label.

    Palindromes are labeled L.
    """
    rc = reverse_complement(seq)
    if seq <= rc:
        return seq, L
    return rc, H


def canonical_id(kid: int, k: int) -> tuple[int, Orientation]:
    # 2-bit codes preserve lexicographic order, so integer comparison suffices
    rc = rc_id(kid, k)
    if kid <= rc:
        return kid, L
    return rc, H


def make_contig_id(worker: int, seq_no: int) -> int:
    if not 0 <= worker <= MAX_CONTIG_WORKER:
        raise InvalidIdError(f"worker index {worker} out of range")
    if not 0 <= seq_no < (1 << 32):
        raise InvalidIdError(f"sequence number {seq_no} out of range")
    if worker == 0 and seq_no == 0:
        raise InvalidIdError("(worker=0, seq_no=0) is reserved so contig IDs never equal NULL")
    return CONTIG_BIT | (worker << 32) | seq_no


def contig_fields(cid: int) -> tuple[int, int]:
    """Split a contig ID into ``(worker, seq_no)``."""
    if not is_contig_id(cid):
        raise InvalidIdError(f"{cid:#x} is not a contig ID")
    return (cid >> 32) & ((1 << 31) - 1), cid & 0xFFFFFFFF


def is_contig_id(vid: int) -> bool:
    return bool(vid & CONTIG_BIT) and vid != NULL_ID and not vid & END_BIT


def is_kmer_id(vid: int) -> bool:
    return 0 <= vid < END_BIT


def flip_end_marker(kid: int) -> int:
    """Toggle the contig-end marker bit of a k-mer ID."""
    if kid < 0 or kid > MASK64 or kid & CONTIG_BIT:
        raise NotAKmerError(f"{kid:#x} is not a k-mer ID")
    return kid ^ END_BIT


def end_marker(vid: int) -> int:
    """Contig-end marker for any vertex (k-mer or contig); see :func:`flip_end_marker`."""
    if vid == NULL_ID or vid & END_BIT:
        raise InvalidIdError(f"cannot mark {vid:#x} as a contig end")
    return vid | END_BIT


def is_end_marker(vid: int) -> bool:
    return bool(vid & END_BIT)


def strip_end_marker(vid: int) -> int:
    return vid & ~END_BIT


def classify_id(vid: int, k: int | None = None) -> str:
    """Classify a 64-bit value as ``kmer``, ``flipped-kmer``, ``contig``, ``null`` or ``invalid``.

    With ``k`` given, k-mer IDs with bits set above ``2k`` are invalid.
    """
    if vid < 0 or vid > MASK64:
        return "invalid"
    if vid == NULL_ID:
        return "null"
    if vid & CONTIG_BIT:
        return "invalid" if vid & END_BIT else "contig"
    body = vid & ~END_BIT
    if k is not None and body >> (2 * k):
        return "invalid"
    return "flipped-kmer" if vid & END_BIT else "kmer"


def pack_sequence(seq: str) -> bytes:
    """Pack a nucleotide string into 2-bit codes, first base in the high bits of byte 0."""
    validate_sequence(seq)
    out = bytearray((len(seq) + 3) // 4)
    for i, ch in enumerate(seq):
        out[i >> 2] |= _CODE[ch] << (6 - 2 * (i & 3))
    return bytes(out)


def unpack_sequence(data: bytes, length: int) -> str:
    if length > 4 * len(data):
        raise CodecError(f"{len(data)} bytes cannot hold {length} bases")
    return "".join(_BASES[(data[i >> 2] >> (6 - 2 * (i & 3))) & 3] for i in range(length))


def sequence_bits(seq: str) -> str:
    """Space-separated 2-bit codes, e.g. ``"TG"`` -> ``"11 10"``."""
    validate_sequence(seq)
    return " ".join(format(_CODE[ch], "02b") for ch in seq)


def mix64(x: int) -> int:
    """splitmix64 finalizer; used for hash partitioning."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)
