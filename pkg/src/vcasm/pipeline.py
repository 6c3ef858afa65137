"""End-to-end assembly driver: build, then rounds of label/merge with error correction between."""

from __future__ import annotations

import logging
from contextlib import ExitStack
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from .bubbles import DEFAULT_EDIT_DISTANCE, BubbleResult, filter_bubbles
from .codec import MAX_K
from .dbg import build_dbg, to_asm_node
from .engine import JobResult, Vertex, convert_job
from .graph import AsmNode
from .labeling import LR, SV, label_contigs
from .merging import merge_contigs
from .metrics import AssemblyReport, compute_metrics, n50
from .seqio import parse_fastq, read_fasta, write_fasta
from .tips import TipResult, attach_contig_info, remove_tips

logger = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    k: int = 31
    coverage_threshold: int = 0
    tip_length: int = 80
    bubble_edit_distance: int = DEFAULT_EDIT_DISTANCE
    labeler: str = LR
    workers: int = 1
    extra_rounds: int = 1
    seed: int = 0
    canonical: bool = True
    reads_path: Path | None = None
    out_path: Path | None = None
    reference_path: Path | None = None
    report_path: Path | None = None
    trace_path: Path | None = None

    def validate(self) -> None:
        if not 1 <= self.k <= MAX_K:
            raise ConfigError(f"k must be in 1..{MAX_K}")
        for name in ("coverage_threshold", "tip_length", "bubble_edit_distance", "extra_rounds"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.labeler not in (LR, SV):
            raise ConfigError(f"labeler must be {LR!r} or {SV!r}")


@dataclass
class AssemblyResult:
    contigs: list[AsmNode]
    report: AssemblyReport
    round1_contigs: list[AsmNode] = field(default_factory=list)
    bubbles: list[BubbleResult] = field(default_factory=list)
    tips: list[TipResult] = field(default_factory=list)
    # graph handed to the last label/merge pass: surviving k-mers and contigs
    corrected_graph: list[AsmNode] = field(default_factory=list)


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(f"stage {self.name} failed: {exc}") from exc
        return False


def _record(report: AssemblyReport, name: str, job: JobResult | None) -> None:
    if job is not None:
        report.record_stage(name, job.supersteps, job.total_messages)


def assemble(
    reads: Sequence[str],
    config: PipelineConfig,
    reference: str | None = None,
    trace: TextIO | None = None,
) -> AssemblyResult:
    """Run the whole workflow in memory."""
    config.validate()
    k, w = config.k, config.workers
    report = AssemblyReport()

    with _Stage("build"):
        vertices = build_dbg(reads, k, config.coverage_threshold, workers=w, canonical=config.canonical)
        nodes = [v.value for v in convert_job(
            [Vertex(v.id, v) for v in vertices],
            lambda v: [Vertex(v.id, to_asm_node(v.value, k))],
            workers=w,
        )]
    logger.info("graph built: %d k-mer vertices from %d reads", len(nodes), len(reads))

    result = AssemblyResult([], report)
    passes = config.extra_rounds + 1
    contigs: list[AsmNode] = []
    for rnd in range(1, passes + 1):
        result.corrected_graph = nodes
        with _Stage(f"label[{rnd}]"):
            labeled = label_contigs(nodes, config.labeler, workers=w, trace=trace)
        _record(report, "label", labeled.job)
        with _Stage(f"merge[{rnd}]"):
            merged = merge_contigs(labeled, k, config.tip_length, round_no=rnd, workers=w)
            kmers, contigs = attach_contig_info(labeled.ambiguous(), merged, workers=w)
        if rnd == 1:
            result.round1_contigs = list(contigs)
            report.n50_round1 = n50(len(c.seq) for c in contigs)
        if rnd == passes:
            break
        with _Stage(f"bubble[{rnd}]"):
            bubbles = filter_bubbles(kmers, contigs, config.bubble_edit_distance, workers=w)
        _record(report, "bubble", bubbles.job)
        with _Stage(f"tips[{rnd}]"):
            tips = remove_tips(bubbles.kmers, k, config.tip_length, workers=w, trace=trace)
        _record(report, "tips", tips.job)
        result.bubbles.append(bubbles)
        result.tips.append(tips)
        contigs = [c for c in bubbles.contigs if c.id not in tips.killed_contigs]
        nodes = tips.kmers + contigs

    final = compute_metrics([c.seq for c in contigs], reference)
    final.n50_round1 = report.n50_round1
    final.stages = report.stages
    result.contigs = contigs
    result.report = final
    return result


def run_pipeline(config: PipelineConfig) -> AssemblyResult:
    """File-based entry point: FASTQ in, FASTA and report out."""
    config.validate()
    if config.reads_path is None:
        raise ConfigError("no reads path given")
    with open(config.reads_path) as fh:
        reads = parse_fastq(fh)
    reference = None
    if config.reference_path is not None:
        with open(config.reference_path) as fh:
            reference = "".join(seq for _, seq in read_fasta(fh))
    with ExitStack() as stack:
        trace = None
        if config.trace_path is not None:
            trace = stack.enter_context(open(config.trace_path, "w"))
        result = assemble(reads, config, reference, trace)
    if config.out_path is not None:
        with open(config.out_path, "w") as fh:
            write_fasta(result.contigs, fh)
    if config.report_path is not None:
        with open(config.report_path, "w") as fh:
            fh.write(result.report.to_text())
    return result
