"""Relay beamforming sum-rate optimization for a two-flow AF relay system.

Library layout mirrors the processing chain: `model` holds the channel and
rate closed forms, `reformulation` lifts the problem to a product of two
Rayleigh quotients, `algorithms` provides the solvers, `upper_bound` the
benchmark bound, and `harness` the Monte Carlo sweep CLI.
"""

from .algorithms import PiaConfig, asa, lss, max_sinr2, max_snr1, pia
from .model import (
    ChannelSet,
    RatePair,
    SystemParams,
    pure_amplification,
    relay_power,
    sample_channels,
    scale_to_power,
    sinr2,
    snr1,
    sum_rate,
)
from .reformulation import QuadraticForms, Solution, build_forms, kkt_residual, lift, objective_G
from .upper_bound import BoundBreakdown, SearchConfig, r_ub, subrate1, subrate2

__version__ = "0.1.0"

__all__ = [
    "SystemParams",
    "ChannelSet",
    "RatePair",
    "sample_channels",
    "snr1",
    "sinr2",
    "relay_power",
    "scale_to_power",
    "sum_rate",
    "pure_amplification",
    "QuadraticForms",
    "Solution",
    "build_forms",
    "lift",
    "objective_G",
    "kkt_residual",
    "PiaConfig",
    "max_snr1",
    "max_sinr2",
    "asa",
    "pia",
    "lss",
    "BoundBreakdown",
    "SearchConfig",
    "subrate1",
    "subrate2",
    "r_ub",
    "__version__",
]
