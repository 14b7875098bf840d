"""Uncertainty-weighted truth inference for crowdsourced labels, with comparison baselines and a benchmark harness."""

__version__ = '1.0.0'
