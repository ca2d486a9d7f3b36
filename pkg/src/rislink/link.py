"""Instantaneous signal and SNR models for both operating modes of the surface.

Reflector mode: the surface sits between source and destination; each tile
applies a phase shift to the product channel ``h_i * g_i`` and the received
signal is the phased sum times the data symbol plus noise.  Transmitter
mode: a feeder illuminates the surface with an unmodulated carrier and the
tile phases both co-phase the ``g_i`` channel and add a message phase,
producing a virtual PSK constellation at the destination.

The SNR knob throughout is the dimensionless ratio ``es_over_n0``; absolute
symbol energy and noise density never appear separately in results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from rislink.fading import FadingRealization

__all__ = [
    "ModulationSpec",
    "RisConfig",
    "SnrSample",
    "composite_channel",
    "instantaneous_snr_reflector",
    "mean_snr_reflector",
    "optimal_phases_reflector",
    "optimal_phases_transmitter",
    "quantize_phases",
    "received_signal_reflector",
    "received_signal_transmitter",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModulationSpec:
    """Constellation family, order and average symbol energy."""

    family: str
    m: int
    symbol_energy: float = 1.0

    def __post_init__(self):
        if self.family not in ("psk", "qam"):
            raise ValueError(f"family must be 'psk' or 'qam', got {self.family!r}")
        if self.m < 2:
            raise ValueError(f"constellation order must be >= 2, got {self.m}")
        if self.family == "qam":
            side = math.isqrt(self.m)
            if side * side != self.m or self.m < 4:
                raise ValueError(f"qam order must be a perfect square >= 4, got {self.m}")
        if not self.symbol_energy > 0.0:
            raise ValueError(f"symbol_energy must be positive, got {self.symbol_energy}")

    def constellation(self) -> np.ndarray:
        """Symbol table with average energy exactly ``symbol_energy``."""
        if self.family == "psk":
            k = np.arange(self.m)
            return np.sqrt(self.symbol_energy) * np.exp(2j * np.pi * k / self.m)
        side = math.isqrt(self.m)
        levels = 2.0 * np.arange(side) - (side - 1)
        re, im = np.meshgrid(levels, levels)
        pts = (re + 1j * im).ravel()
        # mean square of the +/-1, +/-3, ... grid is 2 (side^2 - 1) / 3 per point
        delta = math.sqrt(3.0 * self.symbol_energy / (2.0 * (self.m - 1)))
        return delta * pts


@dataclass(frozen=True)
class RisConfig:
    """Tile count, operating mode and phase-control policy of the surface.

    ``phase_policy`` is one of ``"optimal"``, ``"quantized"`` (with
    ``quantizer_bits`` set) or ``"explicit"`` (with ``explicit_phases`` of
    length ``n``).
    """

    n: int
    mode: str
    phase_policy: str = "optimal"
    quantizer_bits: int | None = None
    explicit_phases: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"tile count must be >= 1, got {self.n}")
        if self.mode not in ("reflector", "transmitter"):
            raise ValueError(f"mode must be 'reflector' or 'transmitter', got {self.mode!r}")
        if self.phase_policy not in ("optimal", "quantized", "explicit"):
            raise ValueError(f"unknown phase policy {self.phase_policy!r}")
        if self.phase_policy == "quantized":
            if self.quantizer_bits is None or self.quantizer_bits < 1:
                raise ValueError("quantized policy needs quantizer_bits >= 1")
        if self.phase_policy == "explicit":
            if self.explicit_phases is None or len(self.explicit_phases) != self.n:
                raise ValueError("explicit policy needs a phase vector of length n")

    def phases_for(self, ch: FadingRealization, m: int = 1, m_ary: int = 2) -> np.ndarray:
        """Tile phase vector for one channel realization under this policy."""
        if ch.n != self.n:
            raise ValueError(f"realization has {ch.n} tiles, config expects {self.n}")
        if self.phase_policy == "explicit":
            return np.asarray(self.explicit_phases, dtype=float)
        if self.mode == "reflector":
            phases = optimal_phases_reflector(ch)
        else:
            phases = optimal_phases_transmitter(ch, m, m_ary)
        if self.phase_policy == "quantized":
            phases = quantize_phases(phases, self.quantizer_bits)
        return phases


@dataclass(frozen=True)
class SnrSample:
    """Instantaneous SNR produced by one channel realization."""

    gamma: float
    es_over_n0: float

    def __post_init__(self):
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")


def optimal_phases_reflector(ch: FadingRealization) -> np.ndarray:
    """SNR-maximizing tile phases: cancel both hop phases on every tile."""
    return ch.theta + ch.psi


def composite_channel(ch: FadingRealization, phases: np.ndarray) -> complex:
    """Phased composite channel sum(h_i * exp(j phi_i) * g_i)."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (ch.n,):
        raise ValueError(f"phase vector must have length {ch.n}, got shape {phases.shape}")
    return complex(np.sum(ch.h * np.exp(1j * phases) * ch.g))


def instantaneous_snr_reflector(ch: FadingRealization, phases: np.ndarray,
                                es_over_n0: float) -> SnrSample:
    """Instantaneous SNR of the phased reflector link.

    gamma = |sum(alpha_i beta_i exp(j (phi_i - theta_i - psi_i)))|^2 * es_over_n0,
    which reaches (sum alpha_i beta_i)^2 * es_over_n0 under optimal phases.
    """
    gain = abs(composite_channel(ch, phases))
    return SnrSample(gamma=gain * gain * es_over_n0, es_over_n0=es_over_n0)


def mean_snr_reflector(n: int, es_over_n0: float) -> float:
    """Average SNR of the optimally phased reflector link.

    Equals (n^2 pi^2 + n (16 - pi^2)) / 16 times ``es_over_n0``; grows as
    n^2 for large tile counts.
    """
    if n < 1:
        raise ValueError(f"tile count must be >= 1, got {n}")
    pi2 = math.pi ** 2
    return (n * n * pi2 + n * (16.0 - pi2)) * es_over_n0 / 16.0


def received_signal_reflector(ch: FadingRealization, phases: np.ndarray,
                              symbol: complex, noise: complex) -> complex:
    """Received sample r = sum(h_i exp(j phi_i) g_i) x + n."""
    return composite_channel(ch, phases) * symbol + noise


def optimal_phases_transmitter(ch: FadingRealization, m: int, m_ary: int) -> np.ndarray:
    """Tile phases that co-phase the g channel and encode message ``m``.

    ``m`` is 1-based; message ``m`` adds the PSK information phase
    2 pi (m - 1) / m_ary on top of the channel-cancelling psi_i.
    """
    if not 1 <= m <= m_ary:
        raise ValueError(f"message index must be in [1, {m_ary}], got {m}")
    return ch.psi + TWO_PI * (m - 1) / m_ary


def received_signal_transmitter(ch: FadingRealization, m: int, spec: ModulationSpec,
                                noise: complex) -> complex:
    """Received sample when the surface itself transmits message ``m``.

    Only the g hop is faded (the feeder is assumed close enough to the
    surface to be fading-free), so r = sqrt(Es) * sum(beta_i) * exp(j w_m) + n
    with w_m the PSK information phase.  The constellation family must be
    PSK; the surface cannot synthesize amplitude levels.
    """
    if spec.family != "psk":
        raise ValueError("transmitter mode carries information in phases only; family must be 'psk'")
    if not 1 <= m <= spec.m:
        raise ValueError(f"message index must be in [1, {spec.m}], got {m}")
    w_m = TWO_PI * (m - 1) / spec.m
    amplitude = math.sqrt(spec.symbol_energy) * ch.beta_sum
    return amplitude * complex(math.cos(w_m), math.sin(w_m)) + noise


def quantize_phases(phases: np.ndarray, bits: int) -> np.ndarray:
    """Snap each phase to the nearest of 2**bits uniform levels on [0, 2 pi).

    Exact mid-points between two levels round toward the lower level.
    """
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    levels = 2 ** bits
    step = TWO_PI / levels
    wrapped = np.mod(np.asarray(phases, dtype=float), TWO_PI)
    k = np.ceil(wrapped / step - 0.5).astype(int) % levels
    return k * step
