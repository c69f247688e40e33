"""Python access to the qpg C++ core."""

from fractions import Fraction

from ._qpg import (
    ConfigError,
    Policy,
    PostProcessing,
    RawVqcPolicy,
    RestrictedSoftmaxPolicy,
    accuracy_bound,
    count_balanced_partitionings,
    extracted_information,
    globality_histogram,
    param_counts,
    prepare_probabilities,
    resolved_config,
    train,
)
from ._qpg import globality as _globality


def globality(postfn: PostProcessing) -> Fraction:
    """Exact average extracted information of a post-processing function."""
    num, den = _globality(postfn)
    return Fraction(num, den)


__all__ = [
    "ConfigError",
    "Policy",
    "PostProcessing",
    "RawVqcPolicy",
    "RestrictedSoftmaxPolicy",
    "accuracy_bound",
    "count_balanced_partitionings",
    "extracted_information",
    "globality",
    "globality_histogram",
    "param_counts",
    "prepare_probabilities",
    "resolved_config",
    "train",
]
