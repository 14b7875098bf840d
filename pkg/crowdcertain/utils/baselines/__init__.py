from .core import BaselineRunner
from .constants import BaselineConstants
from .em_models import dawid_skene, glad, glad_gradient, glad_objective, glad_posterior, mace
from .kos import kos
from .mmsr import mmsr, rank_one_completion
from .tao import similarity, tao
from .voting import (
    baseline_aggregate,
    crowd_confidence,
    draw_gold_indices,
    gold_majority_vote,
    majority_vote,
    mv,
    sheng,
    wawa,
    weighted_majority,
    zero_based_skill,
)

__all__ = [
    'BaselineRunner',
    'BaselineConstants',
    'baseline_aggregate',
    'crowd_confidence',
    'dawid_skene',
    'draw_gold_indices',
    'glad',
    'glad_gradient',
    'glad_objective',
    'glad_posterior',
    'gold_majority_vote',
    'kos',
    'mace',
    'majority_vote',
    'mmsr',
    'mv',
    'rank_one_completion',
    'sheng',
    'similarity',
    'tao',
    'wawa',
    'weighted_majority',
    'zero_based_skill',
]
