"""Constants for classifier ensemble training and persistence."""


class EnsembleConstants:
    """Centralized constants for seeded forest ensembles."""

    # Forest recipe
    SPLIT_CRITERIA = ('gini',)
    MAX_FEATURES = 'sqrt'
    LEAF_PRIOR_POSITIVE = 1.0
    LEAF_PRIOR_TOTAL = 2.0

    # Binarization of predicted probabilities
    THRESHOLD_MODES = ('roc_youden', 'fixed_half')
    FALLBACK_THRESHOLD = 0.5

    # Tie between positive and negative ensemble votes resolves to the positive class
    MAJORITY_CUTOFF = 0.5

    # JSON model dump
    MODEL_FORMAT = 'crowdcertain-ensemble'
    MODEL_VERSION = 1
