"""Deterministic link-budget models over a ground plane.

Implements the classical two-ray ground-reflection model and its variants
when the ground hosts reflecting tiles with controllable phases, plus the
free-space and relay/backscatter ("product channel") baselines, and a
log-log slope fit used to verify path-loss exponents.

All powers are in watts and all distances in meters.  The received
amplitude of a ray of length ``r`` carries the free-space factor
``(wavelength / 4 pi) / r`` and the phase ``exp(-j 2 pi r / wavelength)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DEFAULT_BANDWIDTH_HZ",
    "SPEED_OF_LIGHT",
    "PowerResult",
    "Tile",
    "TileSet",
    "TwoRayGeometry",
    "fit_pathloss_exponent",
    "los_power",
    "narrowband_ok",
    "relay_power",
    "ris_ground_power",
    "two_ray_power",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Signal bandwidth assumed by the narrowband check below.
DEFAULT_BANDWIDTH_HZ = 10e6


@dataclass(frozen=True)
class TwoRayGeometry:
    """Transmitter and receiver above a flat reflecting ground.

    ``h_t`` and ``h_r`` are the antenna heights, ``d`` the horizontal
    separation and ``wavelength`` the carrier wavelength, all in meters.
    The reflection point is placed by the image method (equivalent to
    Snell's law for a flat plane), which gives the reflected path length
    in closed form.
    """

    h_t: float
    h_r: float
    d: float
    wavelength: float

    def __post_init__(self):
        for name in ("h_t", "h_r", "d", "wavelength"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def los_distance(self) -> float:
        """Direct transmitter-receiver distance."""
        return math.hypot(self.d, self.h_t - self.h_r)

    @property
    def ground_point(self) -> float:
        """Horizontal offset of the specular reflection point from the transmitter."""
        return self.d * self.h_t / (self.h_t + self.h_r)

    @property
    def r1(self) -> float:
        """Transmitter to reflection point distance."""
        return math.hypot(self.ground_point, self.h_t)

    @property
    def r2(self) -> float:
        """Reflection point to receiver distance."""
        return math.hypot(self.d - self.ground_point, self.h_r)

    @property
    def reflected_distance(self) -> float:
        """Total ground-bounce path length, r1 + r2 (image method)."""
        return math.hypot(self.d, self.h_t + self.h_r)

    @property
    def delay(self) -> float:
        """Excess delay of the reflected ray relative to the direct ray, seconds."""
        return (self.reflected_distance - self.los_distance) / SPEED_OF_LIGHT

    @property
    def phase_difference(self) -> float:
        """Phase lag of the reflected ray relative to the direct ray, radians."""
        return 2.0 * math.pi * (self.reflected_distance - self.los_distance) / self.wavelength


@dataclass(frozen=True)
class Tile:
    """One reflecting tile: bounce path length and complex reflection coefficient."""

    path_length: float
    reflection: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not self.path_length > 0.0:
            raise ValueError(f"path_length must be positive, got {self.path_length}")
        if abs(self.reflection) > 1.0 + 1e-12:
            raise ValueError(f"|reflection| must be <= 1, got {abs(self.reflection)}")


@dataclass(frozen=True)
class TileSet:
    """Tiles covering the ground plane between transmitter and receiver.

    An empty tile set models bare propagation with no controllable
    reflection at all (only the direct ray survives in the exact model).
    """

    tiles: tuple[Tile, ...]

    def __post_init__(self):
        object.__setattr__(self, "tiles", tuple(self.tiles))

    @classmethod
    def specular(cls, geometry: TwoRayGeometry, n: int,
                 reflection: complex = 1.0 + 0.0j) -> "TileSet":
        """All ``n`` tiles share the specular bounce path of ``geometry``.

        This is the far-field default; per-tile path lengths can be given
        explicitly through the main constructor instead.
        """
        if n < 0:
            raise ValueError(f"tile count must be nonnegative, got {n}")
        tile = Tile(path_length=geometry.reflected_distance, reflection=reflection)
        return cls(tiles=(tile,) * n)

    @property
    def n(self) -> int:
        return len(self.tiles)

    def validate_against(self, geometry: TwoRayGeometry) -> None:
        for t in self.tiles:
            if t.path_length < geometry.los_distance * (1.0 - 1e-12):
                raise ValueError(
                    f"tile path length {t.path_length} is shorter than the "
                    f"direct distance {geometry.los_distance}")


@dataclass(frozen=True)
class PowerResult:
    """Received power together with the gain over free-space LOS at the same range."""

    p_r: float
    p_t: float
    gain_db_vs_los: float


def _friis(p_t: float, wavelength: float, distance: float) -> float:
    return p_t * (wavelength / (4.0 * math.pi * distance)) ** 2


def los_power(p_t: float, geometry: TwoRayGeometry) -> PowerResult:
    """Free-space line-of-sight received power, decaying as d**-2.

    Uses the horizontal separation ``d`` as the range (far-field reading of
    the geometry, where the direct distance and ``d`` coincide).
    """
    if not p_t >= 0.0:
        raise ValueError(f"p_t must be nonnegative, got {p_t}")
    return PowerResult(p_r=_friis(p_t, geometry.wavelength, geometry.d),
                       p_t=p_t, gain_db_vs_los=0.0)


def two_ray_power(p_t: float, geometry: TwoRayGeometry, reflection: complex = -1.0 + 0.0j) -> PowerResult:
    """Two-ray received power: direct ray plus one ground bounce.

    The ground reflection coefficient defaults to -1 (perfect specular
    reflection at grazing incidence), which produces the classical d**-4
    decay once the two path lengths nearly coincide.
    """
    if abs(reflection) > 1.0 + 1e-12:
        raise ValueError(f"|reflection| must be <= 1, got {abs(reflection)}")
    lam = geometry.wavelength
    amp = (1.0 / geometry.los_distance
           + reflection * cmath.exp(-1j * geometry.phase_difference) / geometry.reflected_distance)
    p_r = p_t * (lam / (4.0 * math.pi)) ** 2 * abs(amp) ** 2
    return PowerResult(p_r=p_r, p_t=p_t, gain_db_vs_los=_gain_db(p_r, p_t, geometry))


def ris_ground_power(p_t: float, geometry: TwoRayGeometry, tiles: TileSet,
                     mode: str = "optimal") -> PowerResult:
    """Received power when the ground hosts phase-controllable tiles.

    ``mode="explicit"`` evaluates the exact multi-ray sum with each tile's
    own path length and reflection coefficient.  ``mode="optimal"`` applies
    the far-field co-phasing result: every tile contributes a fully aligned
    unit-amplitude ray at range ``d``, so the amplitude grows as (n + 1)
    and the power as (n + 1)**2 relative to free space.
    """
    if mode not in ("optimal", "explicit"):
        raise ValueError(f"mode must be 'optimal' or 'explicit', got {mode!r}")
    tiles.validate_against(geometry)
    lam = geometry.wavelength
    if mode == "optimal":
        p_r = (tiles.n + 1) ** 2 * _friis(p_t, lam, geometry.d)
    else:
        amp = 1.0 / geometry.los_distance
        for t in tiles.tiles:
            dphi = 2.0 * math.pi * (t.path_length - geometry.los_distance) / lam
            amp += t.reflection * cmath.exp(-1j * dphi) / t.path_length
        p_r = p_t * (lam / (4.0 * math.pi)) ** 2 * abs(amp) ** 2
    return PowerResult(p_r=p_r, p_t=p_t, gain_db_vs_los=_gain_db(p_r, p_t, geometry))


def relay_power(p_t: float, r1: float, r2: float, wavelength: float) -> PowerResult:
    """Product-channel received power of relay or backscatter links.

    Two cascaded free-space hops with a unit-gain node in between, so the
    power decays as (r1 * r2)**-2.  Only ratios and slopes of this model
    are meaningful; the absolute constant is the cascade convention.
    """
    if not (r1 > 0.0 and r2 > 0.0):
        raise ValueError(f"hop distances must be positive, got r1={r1}, r2={r2}")
    p_r = p_t * (wavelength / (4.0 * math.pi)) ** 4 / (r1 * r1 * r2 * r2)
    return PowerResult(p_r=p_r, p_t=p_t, gain_db_vs_los=math.nan)


def narrowband_ok(geometry: TwoRayGeometry,
                  bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ) -> bool:
    """Whether the two-ray delay spread is negligible at the given bandwidth.

    The amplitude models here treat the transmitted waveform as identical
    on both rays; that holds when the excess delay times the signal
    bandwidth stays well below one, checked as delay * bandwidth < 0.01.
    """
    return geometry.delay * bandwidth_hz < 0.01


def fit_pathloss_exponent(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(p_r) against log(d).

    Returns the fitted path-loss exponent (e.g. -2 for free space, -4 for
    the two-ray far field).  Requires at least three points with positive
    distances and powers and non-degenerate distance spread.
    """
    if len(points) < 3:
        raise ValueError(f"need at least 3 points, got {len(points)}")
    d = np.array([p[0] for p in points], dtype=float)
    pr = np.array([p[1] for p in points], dtype=float)
    if not (np.all(d > 0.0) and np.all(pr > 0.0)):
        raise ValueError("all distances and powers must be positive")
    logd = np.log(d)
    if np.ptp(logd) == 0.0:
        raise ValueError("distances are all equal; slope is undefined")
    slope, _ = np.polyfit(logd, np.log(pr), 1)
    return float(slope)


def _gain_db(p_r: float, p_t: float, geometry: TwoRayGeometry) -> float:
    ref = _friis(p_t, geometry.wavelength, geometry.d)
    if p_r == 0.0:
        return -math.inf
    return 10.0 * math.log10(p_r / ref)
