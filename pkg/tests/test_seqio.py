import io

import pytest
from hypothesis import given, strategies as st

from vcasm.codec import make_contig_id
from vcasm.graph import AsmNode
from vcasm.seqio import FastqError, parse_fastq, read_fasta, write_fasta, write_fastq


@pytest.mark.parametrize("text,reads", [
    ("@r1\nACGT\n+\n!!!!\n", ["ACGT"]),
    ("", []),
    ("@r1\nacgt\n+\nIIII\n\n\n", ["ACGT"]),
    ("@a\nAC\n+a\nII\n@b\nGGN\n+\nIII\n", ["AC", "GGN"]),
])
def test_parse_fastq(text, reads):
    assert parse_fastq(io.StringIO(text)) == reads


@pytest.mark.parametrize("text,line", [
    ("r1\nACGT\n+\n!!!!\n", 1),
    ("@r1\nACGT\n-\n!!!!\n", 3),
    ("@r1\nACGT\n+\n!!!\n", 4),
    ("@r1\nACGT\n+\nIIII\n@r2\nAC\n", 5),
])
def test_malformed_fastq_reports_line(text, line):
    with pytest.raises(FastqError, match=f"line {line}:"):
        parse_fastq(io.StringIO(text))


@given(st.lists(st.text(alphabet="acgtACGT", min_size=1, max_size=50), max_size=20))
def test_fastq_roundtrip(seqs):
    buf = io.StringIO()
    write_fastq(((f"r{i}", s) for i, s in enumerate(seqs)), buf)
    assert parse_fastq(io.StringIO(buf.getvalue())) == [s.upper() for s in seqs]


def node(seq_no, seq, cov=3, circular=False):
    return AsmNode(make_contig_id(2, seq_no), seq, [], cov, circular)


def test_fasta_single_contig():
    buf = io.StringIO()
    write_fasta([node(1, "TGCCGTAC", 98)], buf)
    assert buf.getvalue() == ">contig_2_1 len=8 cov=98 circular=false\nTGCCGTAC\n"


def test_fasta_empty_and_wrapping():
    buf = io.StringIO()
    write_fasta([], buf)
    assert buf.getvalue() == ""
    write_fasta([node(1, "A" * 100, circular=True)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].endswith("circular=true")
    assert [len(x) for x in lines[1:]] == [80, 20]


def test_fasta_order_and_roundtrip():
    contigs = [node(3, "ACG"), node(1, "ACGTA"), node(2, "TTT")]
    buf = io.StringIO()
    write_fasta(contigs, buf)
    records = read_fasta(io.StringIO(buf.getvalue()))
    assert [h.split()[0] for h, _ in records] == ["contig_2_1", "contig_2_2", "contig_2_3"]
    assert [s for _, s in records] == ["ACGTA", "TTT", "ACG"]


def test_fasta_rejects_headerless_data():
    with pytest.raises(ValueError):
        read_fasta(io.StringIO("ACGT\n"))
