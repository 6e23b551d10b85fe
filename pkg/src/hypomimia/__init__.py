"""Hypomimia screening analysis from facial action unit recordings."""

__version__ = "0.1.0"

from .features import FEATURE_NAMES, FeatureTable, active_au_variance, extract_features
from .ingest import Cohort, Expression, load_cohort, parse_au_csv
from .numcore import RandomStream, midranks, sample_variance, symmetric_eigen

__all__ = [
    "FEATURE_NAMES", "Cohort", "Expression", "FeatureTable", "RandomStream",
    "active_au_variance", "extract_features", "load_cohort", "midranks", "parse_au_csv",
    "sample_variance", "symmetric_eigen",
]
