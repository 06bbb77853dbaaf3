"""Exact uniform sampling of simple graphs with power-law degree sequences."""

from .degree_model import DegreeSequence, DegreeSequenceError, compute_stats, sample_powerlaw_sequence
from .multigraph import Multigraph
from .pipeline import AttemptsExhausted, RunConfig, RunStats, generate, parallel_generate

__all__ = [
    "AttemptsExhausted",
    "DegreeSequence",
    "DegreeSequenceError",
    "Multigraph",
    "RunConfig",
    "RunStats",
    "compute_stats",
    "generate",
    "parallel_generate",
    "sample_powerlaw_sequence",
]
__version__ = "0.1.0"
