"""Two-slot coordinated direct/relay (CDR) system model.

One relayed uplink user (UE1 -> relay -> BS) and one direct downlink user
(BS -> UE2) share the medium. In slot 1 UE1 and the BS transmit
simultaneously; the M-antenna relay receives the superposition and UE2
overhears. In slot 2 the relay forwards W @ y_R; the BS cancels its own
slot-1 signal before decoding, and UE2 combines its two observations with a
zero-forcing receiver that nulls the cross-flow interference.

All noise components have unit variance, so powers are expressed relative
to the noise floor. Rates carry the 1/2 pre-log of the two-slot protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

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
]


@dataclass(frozen=True)
class SystemParams:
    """Scenario constants: relay antennas M and linear-scale power budgets."""

    antennas: int
    node_power: float
    relay_power: float

    def __post_init__(self):
        if self.antennas < 1:
            raise ValueError("antennas must be >= 1")
        if self.node_power <= 0 or self.relay_power <= 0:
            raise ValueError("powers must be positive")


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all channel coefficients for the two slots.

    h_r1, h_rb are to-relay column vectors; h_br, h_2r are from-relay row
    vectors; h_21 (UE1 -> UE2 overhearing) and h_2b (BS -> UE2 direct) are
    scalars. All entries are i.i.d. CN(0, 1).
    """

    h_r1: np.ndarray
    h_rb: np.ndarray
    h_br: np.ndarray
    h_2r: np.ndarray
    h_21: complex
    h_2b: complex

    @property
    def antennas(self) -> int:
        return self.h_r1.shape[0]


@dataclass(frozen=True)
class RatePair:
    """Per-flow rates in bits/s/Hz and their sum."""

    r1: float
    r2: float
    sum: float
    degenerate: bool = field(default=False, compare=False)


def _cn01(rng: np.random.Generator, size) -> np.ndarray:
    """i.i.d. CN(0,1): real/imag parts N(0, 1/2) each."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def sample_channels(params: SystemParams, rng: np.random.Generator) -> ChannelSet:
    """Draw one channel realization. Same generator state gives identical output.

    Draw order is fixed (h_r1, h_rb, h_br, h_2r, h_21, h_2b) and part of the
    reproducibility contract.
    """
    m = params.antennas
    return ChannelSet(
        h_r1=_cn01(rng, m),
        h_rb=_cn01(rng, m),
        h_br=_cn01(rng, m),
        h_2r=_cn01(rng, m),
        h_21=complex(_cn01(rng, ())),
        h_2b=complex(_cn01(rng, ())),
    )


def snr1(cs: ChannelSet, W: np.ndarray, P: float) -> float:
    """SNR for decoding the relayed UE's signal at the BS.

    After self-interference cancellation the BS sees
    y = sqrt(P) h_br W h_r1 x1 + h_br W n_R + n_B, so

        SNR1 = P |h_br W h_r1|^2 / (h_br W W^H h_br^H + 1).
    """
    v = cs.h_br @ W
    num = P * abs(v @ cs.h_r1) ** 2
    den = float(np.real(np.vdot(v, v))) + 1.0
    return num / den


def sinr2(cs: ChannelSet, W: np.ndarray, P: float) -> float:
    """Post-ZF SINR for the direct UE, combining both slots.

        SINR2 = P |h_2b (h_2r W h_r1) - h_21 (h_2r W h_rb)|^2
                / (|h_21|^2 (h_2r W W^H h_2r^H + 1) + |h_2r W h_r1|^2)

    Returns +inf when the denominator is exactly zero (h_21 = 0 and
    h_2r W h_r1 = 0, a probability-zero event); callers detect that
    degenerate case via math.isinf.
    """
    v = cs.h_2r @ W
    cross = v @ cs.h_r1
    num = P * abs(cs.h_2b * cross - cs.h_21 * (v @ cs.h_rb)) ** 2
    den = abs(cs.h_21) ** 2 * (float(np.real(np.vdot(v, v))) + 1.0) + abs(cross) ** 2
    if den == 0.0:
        return math.inf
    return num / den


def relay_power(cs: ChannelSet, W: np.ndarray, P: float) -> float:
    """Average relay transmit power E||W y_R||^2 for beamformer W.

        P (h_rb^H W^H W h_rb + h_r1^H W^H W h_r1) + ||W||_F^2
    """
    return float(
        P * (np.linalg.norm(W @ cs.h_rb) ** 2 + np.linalg.norm(W @ cs.h_r1) ** 2)
        + np.linalg.norm(W, "fro") ** 2
    )


def scale_to_power(cs: ChannelSet, W: np.ndarray, P: float, P_R: float) -> np.ndarray:
    """Rescale W by the positive real factor that makes relay_power equal P_R."""
    used = relay_power(cs, W, P)
    if used == 0.0:
        raise ValueError("zero beamformer")
    return math.sqrt(P_R / used) * W


def sum_rate(cs: ChannelSet, W: np.ndarray, P: float) -> RatePair:
    """Per-flow rates r_i = 1/2 log2(1 + SNR/SINR) and their sum."""
    s1 = snr1(cs, W, P)
    s2 = sinr2(cs, W, P)
    r1 = 0.5 * math.log2(1.0 + s1)
    r2 = 0.5 * math.log2(1.0 + s2) if math.isfinite(s2) else math.inf
    return RatePair(r1=r1, r2=r2, sum=r1 + r2, degenerate=math.isinf(s2))


def pure_amplification(cs: ChannelSet, P: float, P_R: float) -> np.ndarray:
    """Scaled-identity relaying: no spatial processing, full power budget.

    W = sqrt(P_R / (P ||h_rb||^2 + P ||h_r1||^2 + M)) * I
    """
    m = cs.antennas
    denom = P * (np.linalg.norm(cs.h_rb) ** 2 + np.linalg.norm(cs.h_r1) ** 2) + m
    return math.sqrt(P_R / denom) * np.eye(m, dtype=complex)
