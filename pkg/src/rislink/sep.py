"""Average symbol error probability via moment generating functions.

For both operating modes the instantaneous SNR is ``gamma = rho * G^2``
where ``G`` is the aggregate channel gain and ``rho = es_over_n0``.  Under
the Gaussian model of ``G`` (see :mod:`rislink.fading`), ``gamma`` is a
scaled non-central chi-square variable with one degree of freedom, whose
MGF has the closed form

    M(s) = (1 - s c2)^(-1/2) * exp(s c1 / (1 - s c2))

with ``c1 = rho * mean(G)^2`` and ``c2 = 2 rho * var(G)``.  Average SEPs
follow from Craig-form integrals of the MGF over a finite angle range; the
integrands vanish toward the lower endpoint (the MGF argument runs to
-infinity there), so no endpoint singularity handling is required.

The closed forms inherit the Gaussian model's accuracy: they are reliable
for large tile counts and increasingly optimistic below a few tens of
tiles, which is exactly what the Monte Carlo engine is there to expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import scipy.special

from rislink.numerics import integrate

__all__ = [
    "SEP_FLOOR",
    "SEP_REL_TOL",
    "SQRT_DECAY_WINDOW",
    "MgfSpec",
    "SepPoint",
    "awgn_bpsk_sep",
    "mgf",
    "regime_flag",
    "required_snr_db",
    "sep_bpsk_reflector",
    "sep_bpsk_ub",
    "sep_exact",
    "sep_high_snr_approx_reflector",
    "sep_mpsk",
    "sep_mpsk_ub",
    "sep_mqam",
    "sep_mqam_ub",
    "sep_transmitter",
    "sep_waterfall_approx",
]

PI = math.pi

# Quadrature relative tolerance for all SEP integrals: several digits beyond
# any tolerance asserted elsewhere in the package.
SEP_REL_TOL = 1e-10

# Reported SEP values below this are flagged as "below floor"; they are
# numerically fine but physically meaningless at link level.
SEP_FLOOR = 1e-12

# Linear SNR window over which the exact binary SEP exhibits its terminal
# rho^(-1/2) decay.  The exponent saturates once n * rho is large, but the
# prefactor keeps an extra rho-dependence of size kappa = 4 pi^2 /
# ((16 - pi^2)^2 rho) regardless of n; the slope is within 0.05 of -1/2
# only once kappa <~ 0.05, i.e. rho >~ 20 in linear units.
SQRT_DECAY_WINDOW = (20.0, 200.0)


@dataclass(frozen=True)
class MgfSpec:
    """Operating mode, tile count and mean branch SNR defining one MGF."""

    mode: str
    n: int
    es_over_n0: float

    def __post_init__(self):
        if self.mode not in ("reflector", "transmitter"):
            raise ValueError(f"mode must be 'reflector' or 'transmitter', got {self.mode!r}")
        if self.n < 1:
            raise ValueError(f"tile count must be >= 1, got {self.n}")
        if not self.es_over_n0 > 0.0:
            raise ValueError(f"es_over_n0 must be positive, got {self.es_over_n0}")

    def coefficients(self) -> tuple[float, float]:
        """(c1, c2) of the non-central chi-square MGF for this link."""
        n, rho = self.n, self.es_over_n0
        if self.mode == "reflector":
            c1 = n * n * PI * PI * rho / 16.0
            c2 = n * (16.0 - PI * PI) * rho / 8.0
        else:
            c1 = n * n * PI * rho / 4.0
            c2 = n * (4.0 - PI) * rho / 2.0
        return c1, c2


@dataclass(frozen=True)
class SepPoint:
    """One point of an SEP curve with the method that produced it."""

    snr_db: float
    pe: float
    method: str

    def __post_init__(self):
        if self.method not in ("exact", "upper_bound", "waterfall", "high_snr", "monte_carlo"):
            raise ValueError(f"unknown method tag {self.method!r}")
        if self.method in ("exact", "upper_bound", "monte_carlo") and not 0.0 <= self.pe <= 1.0:
            raise ValueError(f"pe must be a probability, got {self.pe}")


def mgf(spec: MgfSpec, s: float) -> float:
    """MGF of the instantaneous SNR, E[exp(s gamma)].

    Defined for all s <= 0 (where the value lies in (0, 1]) and for
    positive s strictly below the pole 1/c2.  Written so that arbitrarily
    large negative arguments, including -inf, evaluate cleanly to the
    limiting value 0.
    """
    c1, c2 = spec.coefficients()
    if s <= 0.0:
        u = -s * c2  # in [0, inf]
        if u == 0.0:
            return 1.0
        frac = 1.0 / (1.0 + 1.0 / u)  # u / (1 + u), stable as u -> inf
        return (1.0 + u) ** -0.5 * math.exp(-(c1 / c2) * frac)
    denom = 1.0 - s * c2
    if denom <= 0.0:
        raise ValueError(f"s={s} is at or beyond the MGF pole 1/c2={1.0 / c2}")
    exponent = s * c1 / denom
    if exponent > 700.0:
        raise ValueError(f"MGF overflows for s={s} this close to the pole")
    return denom ** -0.5 * math.exp(exponent)


def _craig_integral(spec: MgfSpec, arg_scale: float, upper: float) -> float:
    """(1/pi) * integral of M(-arg_scale / sin^2 eta) over (0, upper)."""

    def integrand(eta: float) -> float:
        s2 = math.sin(eta) ** 2
        if s2 == 0.0:
            return 0.0
        return mgf(spec, -arg_scale / s2)

    return integrate(integrand, 0.0, upper, rel_tol=SEP_REL_TOL).value / PI


def sep_mpsk(spec: MgfSpec, m: int) -> float:
    """Exact average SEP of M-ary PSK over the modeled fading link.

    Craig form: (1/pi) * int_0^((M-1)pi/M) M(-sin^2(pi/M)/sin^2 eta) d eta.
    """
    if m < 2:
        raise ValueError(f"constellation order must be >= 2, got {m}")
    g = math.sin(PI / m) ** 2
    return _craig_integral(spec, g, (m - 1) * PI / m)


def sep_bpsk_reflector(n: int, es_over_n0: float) -> float:
    """Exact average SEP of binary PSK with the surface acting as reflector."""
    return sep_mpsk(MgfSpec("reflector", n, es_over_n0), 2)


def sep_bpsk_ub(n: int, es_over_n0: float) -> float:
    """Closed-form upper bound on the reflector BPSK SEP.

    Freezes the Craig integrand at its maximum (eta = pi/2), giving
    0.5 * M(-1).
    """
    return 0.5 * mgf(MgfSpec("reflector", n, es_over_n0), -1.0)


def sep_mpsk_ub(spec: MgfSpec, m: int) -> float:
    """Endpoint upper bound of the M-PSK Craig integral: ((M-1)/M) * M(-sin^2(pi/M))."""
    if m < 2:
        raise ValueError(f"constellation order must be >= 2, got {m}")
    return (m - 1) / m * mgf(spec, -math.sin(PI / m) ** 2)


def sep_mqam(spec: MgfSpec, m: int) -> float:
    """Exact average SEP of square M-QAM over the modeled fading link.

    Two Craig-form integrals with argument -3 / (2 (M - 1) sin^2 eta) and
    upper limits pi/2 and pi/4.
    """
    side = math.isqrt(m)
    if side * side != m or m < 4:
        raise ValueError(f"qam order must be a perfect square >= 4, got {m}")
    a = 3.0 / (2.0 * (m - 1))
    c = 1.0 - 1.0 / math.sqrt(m)
    t1 = _craig_integral(spec, a, PI / 2)
    t2 = _craig_integral(spec, a, PI / 4)
    return 4.0 * c * t1 - 4.0 * c * c * t2


def sep_mqam_ub(spec: MgfSpec, m: int) -> float:
    """Endpoint upper bound of the M-QAM SEP (integrands frozen at pi/2 and pi/4)."""
    side = math.isqrt(m)
    if side * side != m or m < 4:
        raise ValueError(f"qam order must be a perfect square >= 4, got {m}")
    a = 3.0 / (2.0 * (m - 1))
    c = 1.0 - 1.0 / math.sqrt(m)
    return 2.0 * c * mgf(spec, -a) - c * c * mgf(spec, -2.0 * a)


def sep_transmitter(n: int, es_over_n0: float, m: int = 2) -> float:
    """Exact average SEP when the surface transmits M-ary PSK itself."""
    if n < 1:
        raise ValueError(f"tile count must be >= 1, got {n}")
    if m < 2:
        raise ValueError(f"constellation order must be >= 2, got {m}")
    return sep_mpsk(MgfSpec("transmitter", n, es_over_n0), m)


def sep_waterfall_approx(mode: str, n: int, es_over_n0: float, m: int = 2) -> float:
    """Bare exponential factor governing the steep low-SNR (waterfall) region.

    Returns exp(-c * n^2 * rho) with the mode- and constellation-specific
    constant; the omitted proportionality prefactor makes this useful only
    for ratio and SNR-gap reasoning, never as an absolute error value.
    Supported: reflector binary, reflector square M-QAM, transmitter M-PSK.
    The regime of validity is n * rho well below 10 in linear units; use
    :func:`regime_flag` to label operating points.
    """
    if n < 1:
        raise ValueError(f"tile count must be >= 1, got {n}")
    rho = es_over_n0
    if mode == "reflector":
        if m == 2:
            return math.exp(-n * n * PI * PI * rho / 16.0)
        side = math.isqrt(m)
        if side * side != m or m < 4:
            raise ValueError("reflector waterfall form exists only for binary PSK "
                             f"and square QAM, got m={m}")
        return math.exp(-3.0 * n * n * PI * PI * rho / (32.0 * (m - 1)))
    if mode == "transmitter":
        if m < 2:
            raise ValueError(f"constellation order must be >= 2, got {m}")
        return math.exp(-math.sin(PI / m) ** 2 * n * n * PI * rho / 4.0)
    raise ValueError(f"mode must be 'reflector' or 'transmitter', got {mode!r}")


def sep_high_snr_approx_reflector(n: int, es_over_n0: float) -> float:
    """Proportional form of the slowly-decaying high-SNR tail (reflector binary).

    (n (16 - pi^2) rho / 8)^(-1/2) * exp(-n pi^2 / (2 (16 - pi^2))): the
    error floor region decays only with the square root of the SNR but
    exponentially in the tile count.  Valid once n * rho is large; see
    ``SQRT_DECAY_WINDOW`` for where the -1/2 log-log slope is fully
    developed.
    """
    if n < 1:
        raise ValueError(f"tile count must be >= 1, got {n}")
    pi2 = PI * PI
    scale = n * (16.0 - pi2) * es_over_n0 / 8.0
    return scale ** -0.5 * math.exp(-n * pi2 / (2.0 * (16.0 - pi2)))


def awgn_bpsk_sep(es_over_n0: float) -> float:
    """BPSK SEP over a fading-free unit-gain AWGN channel, Q(sqrt(2 rho)).

    Reference curve for judging how much the co-phased surface beats plain
    line-of-sight signaling.
    """
    return 0.5 * scipy.special.erfc(math.sqrt(es_over_n0))


def regime_flag(n: int, es_over_n0: float) -> str:
    """Label the operating point by the product n * es_over_n0.

    "waterfall" below 1, "high_snr" above 10, "transition" in between
    (where neither closed-form approximation is clearly valid; the exact
    integrals remain correct everywhere).
    """
    x = n * es_over_n0
    if x < 1.0:
        return "waterfall"
    if x > 10.0:
        return "high_snr"
    return "transition"


def sep_exact(mode: str, n: int, m: int, family: str, es_over_n0: float) -> float:
    """Dispatch to the exact SEP for a (mode, constellation) combination."""
    if mode == "reflector":
        spec = MgfSpec("reflector", n, es_over_n0)
        if family == "psk":
            return sep_mpsk(spec, m)
        if family == "qam":
            return sep_mqam(spec, m)
        raise ValueError(f"family must be 'psk' or 'qam', got {family!r}")
    if mode == "transmitter":
        if family != "psk":
            raise ValueError("transmitter mode is PSK only")
        return sep_transmitter(n, es_over_n0, m)
    raise ValueError(f"mode must be 'reflector' or 'transmitter', got {mode!r}")


def required_snr_db(curve_fn: Callable[[float], float], target_pe: float,
                    bracket: tuple[float, float], tol_db: float = 0.01) -> float:
    """SNR in dB at which a strictly decreasing SEP curve crosses ``target_pe``.

    ``curve_fn`` maps SNR in dB to an error probability.  Bisection runs
    until the bracket is narrower than ``tol_db``.
    """
    lo, hi = bracket
    if not lo < hi:
        raise ValueError(f"bracket must satisfy lo < hi, got {bracket}")
    pe_lo, pe_hi = curve_fn(lo), curve_fn(hi)
    if not pe_hi < target_pe < pe_lo:
        raise ValueError(
            f"target {target_pe} outside curve range [{pe_hi}, {pe_lo}] on bracket {bracket}")
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if curve_fn(mid) > target_pe:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
