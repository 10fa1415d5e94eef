"""Coverage vectors, cumulative metrics, MC/DC pairing and signatures."""

from .cumulative import (
    CoverageDelta,
    CumulativeCoverage,
    Metrics,
    coverage_key,
    signature,
    signature_of_key,
    trace_outcomes,
)
from .vector import CoverageVector, cond_flipped, dec_flipped, mcdc_pair, record

__all__ = [
    "CoverageDelta",
    "CoverageVector",
    "CumulativeCoverage",
    "Metrics",
    "cond_flipped",
    "coverage_key",
    "dec_flipped",
    "mcdc_pair",
    "record",
    "signature",
    "signature_of_key",
    "trace_outcomes",
]
