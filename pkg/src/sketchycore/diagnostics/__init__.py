"""Metrics, bound evaluation and empirical checks."""

from .checks import (
    CoverageRecord,
    IdentityRecord,
    InequalityRecord,
    MomentRecord,
    RateRecord,
    check_lemma1,
    check_lemma3,
    check_lemma4,
    check_lemma5,
    check_lemma7,
    lemma4_bound,
    theorem_coverage,
)
from .metrics import (
    IncoherenceStats,
    SpectrumSummary,
    approx_error,
    incoherence,
    incoherence_stats,
    psnr,
    scree_curve,
)
from .theory import TheoryReport, evaluate_bounds, theory_constants

__all__ = [
    "CoverageRecord",
    "IdentityRecord",
    "IncoherenceStats",
    "InequalityRecord",
    "MomentRecord",
    "RateRecord",
    "SpectrumSummary",
    "TheoryReport",
    "approx_error",
    "check_lemma1",
    "check_lemma3",
    "check_lemma4",
    "check_lemma5",
    "check_lemma7",
    "evaluate_bounds",
    "incoherence",
    "incoherence_stats",
    "lemma4_bound",
    "psnr",
    "scree_curve",
    "theorem_coverage",
    "theory_constants",
]
