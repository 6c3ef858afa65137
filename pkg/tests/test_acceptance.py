"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import io
import itertools
import math
import random
import time
from collections import Counter

import pytest

from vcasm.bubbles import edit_distance, key_contigs
from vcasm.codec import (
    canonicalize,
    decode_kmer,
    encode_kmer,
    pack_sequence,
    reverse_complement,
    sequence_bits,
)
from vcasm.dbg import build_dbg, to_asm_node
from vcasm.graph import VertexType
from vcasm.labeling import label_contigs
from vcasm.merging import merge_contigs
from vcasm.metrics import compute_metrics, n50
from vcasm.pipeline import PipelineConfig, assemble
from vcasm.readsim import SimConfig, simulate
from vcasm.seqio import write_fasta
from vcasm.tips import TipEvent, attach_contig_info, remove_tips
from vcasm.bubbles import filter_bubbles

from oracles import brute_force_contigs, normalize, random_genome, rc, tiling_reads
from test_dbg import TOY_READS
from test_labeling import chain, random_reads

STRAND1 = "ATTGCAAGTC"


def verdict(number: int, title: str, checks: dict[str, bool], started: float) -> None:
    failed = [name for name, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    detail = f" failed: {', '.join(failed)}" if failed else ""
    print(f"\n[{status}] criterion {number}: {title} ({time.perf_counter() - started:.1f}s){detail}")
    assert not failed, detail


def test_criterion_1_codec_exhaustive():
    t0 = time.perf_counter()
    bad = 0
    for k in range(1, 9):
        for letters in itertools.product("ACGT", repeat=k):
            s = "".join(letters)
            if decode_kmer(encode_kmer(s), k) != s:
                bad += 1
    rng = random.Random(31)
    for _ in range(100_000):
        s = "".join(rng.choices("ACGT", k=31))
        if decode_kmer(encode_kmer(s), 31) != s:
            bad += 1
    elapsed = time.perf_counter() - t0
    verdict(1, "k-mer codec round-trip", {"zero failures": bad == 0, "under 5 s": elapsed < 5}, t0)


def test_criterion_2_worked_examples():
    t0 = time.perf_counter()
    res = assemble(TOY_READS, PipelineConfig(k=2, coverage_threshold=0))
    got = [c.seq for c in res.contigs]
    checks = {
        "GGCA = 164": encode_kmer("GGCA") == 164,
        "TGCCGTAC bitmap": sequence_bits("TGCCGTAC") == "11 10 01 01 10 11 00 01"
        and pack_sequence("TGCCGTAC") == bytes([0b11100101, 0b10110001]),
        "rc(AAGT) = ACTT": reverse_complement("AAGT") == "ACTT",
        "canonical(GT) = AC": canonicalize("GT")[0] == "AC",
        "toy reads give strand 1": len(got) == 1 and got[0] in (STRAND1, rc(STRAND1)),
    }
    verdict(2, "worked examples", checks, t0)


def test_criterion_8_n50():
    t0 = time.perf_counter()
    rng = random.Random(8)
    stable = bounded = True
    for _ in range(1000):
        lengths = [rng.randint(1, 5000) for _ in range(rng.randint(1, 60))]
        shuffled = lengths[:]
        rng.shuffle(shuffled)
        stable &= n50(lengths) == n50(shuffled)
        bounded &= n50(lengths) <= max(lengths)
    checks = {
        "[5,4,3,2,1] -> 4": compute_metrics(["A" * x for x in (5, 4, 3, 2, 1)]).n50 == 4,
        "shuffle invariant": stable,
        "at most the largest": bounded,
    }
    verdict(8, "N50", checks, t0)


def toy_kmers():
    return [to_asm_node(v, 2) for v in build_dbg(TOY_READS, 2, canonical=False)]


def test_criterion_9_toy_graph_traces():
    t0 = time.perf_counter()
    tips = remove_tips(toy_kmers(), 2, 2)
    expected_tip = [TipEvent(encode_kmer("TG"), encode_kmer("GA"), 2)]

    nodes = toy_kmers()
    labeled = label_contigs(nodes)
    kmers, contigs = attach_contig_info(labeled.ambiguous(), merge_contigs(labeled, 2, 0))
    bubbles = filter_bubbles(kmers, contigs, 5)
    pruned = [min(c.seq, rc(c.seq)) for c in bubbles.pruned]
    arms = {min(c.seq, rc(c.seq)): c.coverage for c in contigs}
    survivors = {min(c.seq, rc(c.seq)) for c in bubbles.contigs}
    checks = {
        "one tip deletion TG->GA": tips.events == expected_tip
        and [decode_kmer(v, 2) for v in tips.deleted] == ["GA"],
        "one bubble arm pruned (CTA)": pruned == ["CTA"],
        "higher-coverage arm CAA survives": "CAA" in survivors and arms["CAA"] > arms["CTA"],
    }
    verdict(9, "toy graph tip and bubble traces", checks, t0)


def test_criterion_3_path_oracle():
    # the brute-force enumerator does no error correction, so neither does the pipeline here
    t0 = time.perf_counter()
    cfg = PipelineConfig(tip_length=0, bubble_edit_distance=0)
    mismatched = []
    for seed in range(50):
        rng = random.Random(seed)
        genome = random_genome(rng, rng.randint(1000, 5000), repeats=rng.randint(0, 4), repeat_len=60)
        reads = tiling_reads(genome, 100, 20)
        ours = Counter(normalize(c.seq, c.circular) for c in assemble(reads, cfg).contigs)
        if ours != brute_force_contigs(reads, cfg.k):
            mismatched.append(seed)
    elapsed = time.perf_counter() - t0
    verdict(3, "contigs equal maximal unambiguous paths on 50 references",
            {f"exact multiset (bad seeds {mismatched})": not mismatched, "under 60 s": elapsed < 60}, t0)


def partition(nodes, strategy):
    return {frozenset(n.id for n in g) for g in label_contigs(nodes, strategy).groups().values()}


def test_criterion_4_lr_sv_agree():
    t0 = time.perf_counter()
    disagree, sizes, cycles = [], [], 0
    for seed in range(20):
        k = (5, 7, 9, 11)[seed % 4]
        nodes = [to_asm_node(v, k) for v in build_dbg(random_reads(seed, circular=2), k)]
        sizes.append(len(nodes))
        lr, sv = partition(nodes, "lr"), partition(nodes, "sv")
        by_id = {n.id: n for n in nodes}
        # a group whose members all have two internal links is a cycle
        cycles += sum(all(len([ln for ln in by_id[v].links if ln.target in g]) == 2 for v in g)
                      for g in lr if len(g) > 2)
        if lr != sv:
            disagree.append(seed)
    elapsed = time.perf_counter() - t0
    checks = {
        f"identical partitions (bad seeds {disagree})": not disagree,
        "at most 2000 vertices": max(sizes) <= 2000,
        "cycles present": cycles >= 20,
        "under 30 s": elapsed < 30,
    }
    verdict(4, "list ranking and S-V labelings agree", checks, t0)


def test_criterion_5_superstep_bounds():
    t0 = time.perf_counter()
    checks = {}
    for length in (8, 64, 512, 4096):
        ids = list(range(1, length + 1))
        random.Random(length).shuffle(ids)
        nodes = chain(ids)
        lr, sv = label_contigs(nodes, "lr"), label_contigs(nodes, "sv")
        lg = math.ceil(math.log2(length))
        volume = 4 * ((length - 1) + length)
        checks[f"l={length} LR {lr.supersteps} <= {2 * lg + 4}"] = lr.supersteps <= 2 * lg + 4
        checks[f"l={length} SV {sv.supersteps} <= {8 * (lg + 2)}"] = sv.supersteps <= 8 * (lg + 2)
        checks[f"l={length} LR < SV"] = lr.supersteps < sv.supersteps
        checks[f"l={length} messages"] = max(lr.job.message_counts + sv.job.message_counts) <= volume
        print(f"  chain {length}: LR {lr.supersteps} supersteps, SV {sv.supersteps} supersteps")
    verdict(5, "superstep and message bounds on chains", checks, t0)


SIM = SimConfig(reference_length=20_000, depth=30, error_rate=0.005, seed=6)


def run_sim(workers, labeler="lr"):
    reference, reads = simulate(SIM)
    cfg = PipelineConfig(coverage_threshold=1, workers=workers, labeler=labeler)
    t0 = time.perf_counter()
    res = assemble([r.seq for r in reads], cfg, reference=reference)
    return reference, res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def sim_run():
    return run_sim(1)


def dangling(node) -> bool:
    return not node.circular and len({ln.side for ln in node.links}) < 2


def test_criterion_6_error_correction(sim_run):
    t0 = time.perf_counter()
    reference, res, elapsed = sim_run
    ends = (reference[:80], reference[-80:])

    def at_reference_end(seq):
        return any(e.startswith(s) or e.endswith(s) for e in ends for s in (seq, rc(seq)))

    short_dangling = [c for c in res.contigs if dangling(c) and len(c.seq) <= 80
                      and not at_reference_end(c.seq)]

    bubbles = res.bubbles[0]
    ambiguous = {n.id for n in bubbles.kmers if n.vtype is VertexType.MANY}
    keyed, _ = key_contigs(bubbles.contigs, ambiguous)
    groups: dict = {}
    for kc in keyed:
        groups.setdefault(kc.key, []).append(kc)
    leftover = 0
    for group in groups.values():
        for a, b in itertools.combinations(group, 2):
            other = b.contig.seq if a.forward == b.forward else rc(b.contig.seq)
            close = edit_distance(a.contig.seq, other, 5) < 5
            leftover += close and a.contig.coverage != b.contig.coverage
    false_arms = [c for c in bubbles.pruned if c.seq in reference or rc(c.seq) in reference]

    rep = res.report
    print(f"  contigs {rep.contigs}, N50 round 1 {rep.n50_round1}, N50 {rep.n50}, "
          f"genome fraction {rep.genome_fraction:.4f}, arms pruned {len(bubbles.pruned)}")
    checks = {
        "(a) no short dangling paths": not short_dangling,
        "(b) no near-duplicate low-coverage arm left": leftover == 0 and bool(bubbles.pruned),
        "(b) pruned arms are all erroneous": not false_arms,
        "(c) N50 does not drop in round 2": rep.n50 >= rep.n50_round1,
        "(c) genome fraction >= 95%": rep.genome_fraction >= 0.95,
        "under 2 min": elapsed < 120,
    }
    verdict(6, "tip and bubble correction on a simulated genome", checks, t0 - elapsed)


def fasta_bytes(contigs) -> str:
    buf = io.StringIO()
    write_fasta(contigs, buf)
    return buf.getvalue()


def test_criterion_7_worker_determinism(sim_run):
    t0 = time.perf_counter()
    _, base, _ = sim_run
    expected = (fasta_bytes(base.contigs), base.report.to_text())
    checks = {}
    for workers in (2, 4, 8):
        _, res, _ = run_sim(workers)
        checks[f"workers={workers} FASTA"] = fasta_bytes(res.contigs) == expected[0]
        checks[f"workers={workers} report"] = res.report.to_text() == expected[1]
    verdict(7, "byte-identical output for 1, 2, 4 and 8 workers", checks, t0)
