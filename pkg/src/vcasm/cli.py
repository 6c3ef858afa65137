"""Command line: ``vcasm assemble`` and ``vcasm simulate``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .labeling import LR, SV
from .pipeline import ConfigError, PipelineConfig, PipelineError, run_pipeline
from .readsim import SimConfig, SimConfigError, simulate
from .seqio import FastqError, read_fasta, write_fastq

log = logging.getLogger("vcasm")


def _add_assemble(sub) -> None:
    p = sub.add_parser("assemble", help="assemble FASTQ reads into contigs")
    p.add_argument("--reads", type=Path, required=True, help="input FASTQ")
    p.add_argument("--out", type=Path, required=True, help="output FASTA")
    p.add_argument("--k", type=int, default=31)
    p.add_argument("--min-coverage", type=int, default=0,
                   help="keep (k+1)-mers seen more than this many times")
    p.add_argument("--tip-length", type=int, default=80)
    p.add_argument("--edit-distance", type=int, default=5)
    p.add_argument("--labeler", choices=(LR, SV), default=LR)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--rounds", type=int, default=1, help="extra label/merge rounds after the first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-canonical", action="store_true",
                   help="treat reads as single-stranded (no reverse-complement merging)")
    p.add_argument("--reference", type=Path, help="reference FASTA for genome fraction")
    p.add_argument("--report", type=Path, help="write the metrics report here instead of stdout")
    p.add_argument("--trace", type=Path, help="per-superstep job trace")


def _add_simulate(sub) -> None:
    p = sub.add_parser("simulate", help="simulate reads from a random or given reference")
    p.add_argument("--out", type=Path, required=True, help="output FASTQ")
    p.add_argument("--reference-out", type=Path, help="write the reference as FASTA")
    p.add_argument("--reference", type=Path, help="use this FASTA reference instead of a random one")
    p.add_argument("--length", type=int, default=20_000, help="random reference length")
    p.add_argument("--read-min", type=int, default=100)
    p.add_argument("--read-max", type=int, default=100)
    p.add_argument("--depth", type=float, default=30.0)
    p.add_argument("--error-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vcasm", description="vertex-centric de Bruijn graph assembler")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_assemble(sub)
    _add_simulate(sub)
    return parser


def _cmd_assemble(args) -> int:
    config = PipelineConfig(
        k=args.k,
        coverage_threshold=args.min_coverage,
        tip_length=args.tip_length,
        bubble_edit_distance=args.edit_distance,
        labeler=args.labeler,
        workers=args.workers,
        extra_rounds=args.rounds,
        seed=args.seed,
        canonical=not args.no_canonical,
        reads_path=args.reads,
        out_path=args.out,
        reference_path=args.reference,
        report_path=args.report,
        trace_path=args.trace,
    )
    result = run_pipeline(config)
    if args.report is None:
        sys.stdout.write(result.report.to_text())
    return 0


def _cmd_simulate(args) -> int:
    config = SimConfig(
        reference_length=args.length,
        read_min=args.read_min,
        read_max=args.read_max,
        depth=args.depth,
        error_rate=args.error_rate,
        seed=args.seed,
    )
    reference = None
    if args.reference is not None:
        with open(args.reference) as fh:
            reference = "".join(seq for _, seq in read_fasta(fh))
    reference, reads = simulate(config, reference)
    with open(args.out, "w") as fh:
        write_fastq(((r.name, r.seq) for r in reads), fh)
    if args.reference_out is not None:
        with open(args.reference_out, "w") as fh:
            fh.write(">reference\n")
            for i in range(0, len(reference), 80):
                fh.write(reference[i:i + 80] + "\n")
    log.info("wrote %d reads", len(reads))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "assemble":
            return _cmd_assemble(args)
        return _cmd_simulate(args)
    except (ConfigError, SimConfigError, PipelineError, FastqError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
