"""Rayleigh fading for the dual-hop tile link and its Gaussian statistics.

Each tile ``i`` sees two unit-variance complex Gaussian coefficients: ``h_i``
on the source-to-surface hop and ``g_i`` on the surface-to-destination hop.
Path loss is deliberately excluded from these coefficients; it is carried by
the configured mean SNR instead.

Phase convention: ``h_i = alpha_i * exp(-j theta_i)`` and
``g_i = beta_i * exp(-j psi_i)``, so the SNR-maximizing tile phase is
literally ``theta_i + psi_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rislink.numerics import sample_standard_complex_gaussian

__all__ = ["CltParameters", "FadingRealization", "clt_parameters", "draw_realization"]


@dataclass(frozen=True)
class FadingRealization:
    """One joint draw of the per-tile channel coefficients."""

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if self.h.shape != self.g.shape or self.h.ndim != 1 or self.h.size < 1:
            raise ValueError("h and g must be equal-length 1-d arrays with at least one tile")

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def alpha(self) -> np.ndarray:
        """Amplitudes of the first hop, |h_i|."""
        return np.abs(self.h)

    @property
    def beta(self) -> np.ndarray:
        """Amplitudes of the second hop, |g_i|."""
        return np.abs(self.g)

    @property
    def theta(self) -> np.ndarray:
        """First-hop phases under the negative-exponent convention."""
        return -np.angle(self.h)

    @property
    def psi(self) -> np.ndarray:
        """Second-hop phases under the negative-exponent convention."""
        return -np.angle(self.g)

    @property
    def cophased_gain(self) -> float:
        """Composite channel amplitude after perfect co-phasing, sum of alpha_i * beta_i."""
        return float(np.sum(self.alpha * self.beta))

    @property
    def beta_sum(self) -> float:
        """Second-hop amplitude sum, the channel gain in transmitter mode."""
        return float(np.sum(self.beta))


def draw_realization(stream: np.random.Generator, n: int) -> FadingRealization:
    """Draw ``n`` tile pairs of independent unit-variance complex Gaussians.

    Consumes exactly 4n standard normals from ``stream``: first the h
    vector, then the g vector.
    """
    if n < 1:
        raise ValueError(f"tile count must be >= 1, got {n}")
    h = sample_standard_complex_gaussian(stream, n)
    g = sample_standard_complex_gaussian(stream, n)
    return FadingRealization(h=h, g=g)


# Gaussian statistics of the aggregate channel gain.  In reflector mode the
# gain is the sum of N products of two independent Rayleigh amplitudes
# (mean pi/4, variance 1 - pi^2/16 each); in transmitter mode it is the sum
# of N Rayleigh amplitudes (mean sqrt(pi)/2, variance (4 - pi)/4 each).
# The Gaussian model is trusted for n >= CLT_TRUST_THRESHOLD tiles;
# closed forms still evaluate below it but should be treated as approximate.
CLT_TRUST_THRESHOLD = 32


@dataclass(frozen=True)
class CltParameters:
    """Mean and variance of the Gaussian model of the aggregate channel gain."""

    mean: float
    variance: float
    mode: str

    @property
    def trusted_from(self) -> int:
        return CLT_TRUST_THRESHOLD


def clt_parameters(n: int, mode: str) -> CltParameters:
    """Gaussian parameters of the aggregate gain for ``n`` tiles.

    ``mode="reflector"`` describes sum(alpha_i * beta_i); ``mode="transmitter"``
    describes sum(beta_i).
    """
    if n < 1:
        raise ValueError(f"tile count must be >= 1, got {n}")
    if mode == "reflector":
        return CltParameters(mean=n * math.pi / 4.0,
                             variance=n * (1.0 - math.pi ** 2 / 16.0),
                             mode=mode)
    if mode == "transmitter":
        return CltParameters(mean=n * math.sqrt(math.pi) / 2.0,
                             variance=n * (4.0 - math.pi) / 4.0,
                             mode=mode)
    raise ValueError(f"mode must be 'reflector' or 'transmitter', got {mode!r}")
