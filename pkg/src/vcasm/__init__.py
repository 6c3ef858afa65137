"""Vertex-centric de Bruijn graph assembler."""

from .codec import decode_kmer, encode_kmer, rc_id, reverse_complement
from .metrics import AssemblyReport, compute_metrics, n50
from .pipeline import AssemblyResult, PipelineConfig, assemble, run_pipeline
from .readsim import SimConfig, simulate

__all__ = [
    "AssemblyReport",
    "AssemblyResult",
    "PipelineConfig",
    "SimConfig",
    "assemble",
    "compute_metrics",
    "decode_kmer",
    "encode_kmer",
    "n50",
    "rc_id",
    "reverse_complement",
    "run_pipeline",
    "simulate",
]
