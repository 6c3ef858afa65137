import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from vcasm.codec import NULL_ID, contig_fields, encode_kmer, is_contig_id
from vcasm.dbg import build_dbg, to_asm_node
from vcasm.graph import AsmNode, Link
from vcasm.labeling import label_contigs
from vcasm.merging import CorruptLabelError, merge_contigs, order_chain, stitch

from oracles import dbg as oracle_dbg, normalize, orient, rc, unambiguous_paths
from test_labeling import BRANCH_READS, random_reads


def kmer_nodes(reads, k, canonical=True):
    return [to_asm_node(v, k) for v in build_dbg(reads, k, canonical=canonical)]


def merged(reads, k, tip_length=0, strategy="lr", workers=1):
    return merge_contigs(label_contigs(kmer_nodes(reads, k), strategy, workers=workers), k,
                         tip_length, workers=workers)


def test_branch_path_contig_sequence_and_coverage():
    contigs = merged(BRANCH_READS, 4)
    (path,) = [c for c in contigs if encode_kmer("GGCA") in c.members]
    assert path.node.seq in ("TGCCGTAC", rc("TGCCGTAC"))
    assert path.node.coverage == 98
    assert len(path.members) == 5
    assert {e.link.target for e in path.ends} == {encode_kmer("CTGC"), encode_kmer("TACA")}
    assert is_contig_id(path.node.id)


def test_stitch_orients_each_member():
    # AC (L) -> CT read as H of AG -> TT read as H of AA
    nodes = [
        AsmNode(1, "AC", [Link(2, 0, 1, 4)]),
        AsmNode(2, "AG", [Link(1, 0, 1, 4), Link(3, 1, 1, 6)]),
        AsmNode(3, "AA", [Link(2, 0, 0, 6)]),
    ]
    ordered = order_chain(nodes)
    assert [n.id for n in ordered.vertices] == [1, 2, 3]
    assert stitch(ordered, 2) == ("ACTT", 4)


def test_cycle_drops_wrap_overlap():
    seq, k = "AAACCGATGGT", 5
    (c,) = merged([seq + seq[:k]], k)
    assert c.node.circular
    assert len(c.node.seq) == len(seq)
    assert normalize(c.node.seq, True) == normalize(seq, True)


def test_isolated_contig_is_canonical():
    (c,) = merged(["TTTGCAGG"], 5)
    assert c.node.seq == min("TTTGCAGG", rc("TTTGCAGG"))
    assert c.node.links == []


def test_lone_kmer_coverage_and_id():
    nodes = [AsmNode(9, "ACG", [Link(4, 0, 0, 7), Link(5, 0, 1, 3)])]
    ordered = order_chain(nodes)
    assert stitch(ordered, 3) == ("ACG", 3)


def test_branching_group_is_rejected():
    nodes = [AsmNode(1, "AA", [Link(2, 0, 0), Link(3, 0, 0)]), AsmNode(2, "AC", []), AsmNode(3, "AG", [])]
    with pytest.raises(CorruptLabelError):
        order_chain(nodes)


@pytest.mark.parametrize("tip_length,dropped", [
    (0, []),
    (4, ["ACAG", "CAGC", "GTAA", "TGCA"]),
    (8, ["AACTG", "ACAG", "CAGC", "GTAA", "TGCA"]),
])
def test_dangling_short_contigs_dropped(tip_length, dropped):
    contigs = merged(BRANCH_READS, 4, tip_length)
    assert sorted(c.node.seq for c in contigs if c.dropped) == dropped
    # the main path has a neighbor on both sides, so it survives any threshold
    assert not any(c.dropped for c in contigs if c.length == 8)


def oracle_contigs(reads, k):
    adj = oracle_dbg(reads, k)
    out = Counter()
    for path, circular in unambiguous_paths(adj):
        seq = orient(*path[0])
        covs = []
        for (u, su), (v, sv) in zip(path, path[1:]):
            seq += orient(v, sv)[k - 1:]
            covs.append(adj[u][(su, v, sv)])
        if circular:
            (u, su), (v, sv) = path[-1], path[0]
            covs.append(adj[u][(su, v, sv)])
            seq = seq[: len(seq) - (k - 1)]
        if len(path) == 1 and not covs:
            covs = list(adj[path[0][0]].values())
        out[(normalize(seq, circular), min(covs) if covs else 0)] += 1
    return out


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([5, 7, 9]), st.sampled_from(["lr", "sv"]), st.integers(1, 3))
def test_contigs_match_path_oracle(seed, k, strategy, workers):
    reads = random_reads(seed)
    contigs = merged(reads, k, strategy=strategy, workers=workers)
    ours = Counter((normalize(c.node.seq, c.node.circular), c.node.coverage) for c in contigs)
    assert ours == oracle_contigs(reads, k)
    for c in contigs:
        n = len(c.members)
        assert c.length == (n if c.node.circular else n + k - 1)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_contig_ids_unique_and_worker_independent(seed):
    reads = random_reads(seed)
    runs = [merged(reads, 7, workers=w) for w in (1, 2, 4)]
    ids = [sorted((c.node.id, c.node.seq) for c in run) for run in runs]
    assert ids[0] == ids[1] == ids[2]
    flat = [cid for cid, _ in ids[0]]
    assert len(set(flat)) == len(flat)
    assert all(contig_fields(cid)[1] >= 1 for cid in flat)
    assert NULL_ID not in flat
