"""Constants for the comparison aggregators."""


class BaselineConstants:
    """Centralized constants for baseline aggregation methods."""

    METHODS = ('mv', 'gold_mv', 'sheng', 'tao', 'wawa', 'zbs', 'kos', 'mace', 'mmsr', 'glad', 'dawid_skene')

    # CLI spelling -> internal name
    FLAG_TO_METHOD = {
        'mv': 'mv',
        'gold-mv': 'gold_mv',
        'sheng': 'sheng',
        'tao': 'tao',
        'wawa': 'wawa',
        'zbs': 'zbs',
        'kos': 'kos',
        'mace': 'mace',
        'mmsr': 'mmsr',
        'glad': 'glad',
        'dawid-skene': 'dawid_skene',
    }

    # Strict > 0.5 everywhere: ties resolve to the negative label
    DECISION_CUTOFF = 0.5

    TAO_FOLDS = 10
    MMSR_EPS = 1e-4
    MACE_PSEUDO_COUNT = 0.01
    MACE_JITTER = 0.05
    GLAD_GRADIENT_STEPS = 25
    GLAD_MIN_STEP = 1e-8
    DS_PSEUDO_COUNT = 1.0
