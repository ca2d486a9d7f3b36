"""Shared numeric substrate: quadrature, random substreams, binomial intervals.

Everything here is deterministic given its inputs.  Random sampling is built
on counter-based Philox substreams so that substream ``i`` of a master seed
always produces the same values, no matter how work is scheduled across
processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.integrate
import scipy.stats

__all__ = [
    "ABS_FLOOR",
    "ConfidenceInterval",
    "QuadratureError",
    "QuadratureResult",
    "binomial_ci",
    "integrate",
    "sample_standard_complex_gaussian",
    "substream",
]

# Absolute error floor for quadrature; relative tolerance governs everything
# above this magnitude.
ABS_FLOOR = 1e-300

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class QuadratureResult:
    """Outcome of a definite integral: value, error estimate, work done."""

    value: float
    est_error: float
    evaluations: int


class QuadratureError(RuntimeError):
    """Quadrature did not converge; ``best`` carries the last estimate."""

    def __init__(self, message: str, best: QuadratureResult):
        super().__init__(message)
        self.best = best


def integrate(f: Callable[[float], float], a: float, b: float,
              rel_tol: float = 1e-10) -> QuadratureResult:
    """Integrate ``f`` over the finite interval [a, b].

    Uses the adaptive Gauss-Kronrod scheme of QUADPACK (21-point nested
    rule with interval subdivision).  The result satisfies
    ``|value - true| <= max(rel_tol * |value|, ABS_FLOOR)`` whenever the
    routine converges; non-convergence raises :class:`QuadratureError`
    carrying the best estimate obtained.

    Deterministic: identical inputs always produce identical output.
    """
    if not a < b:
        raise ValueError(f"integration interval requires a < b, got [{a}, {b}]")
    if not rel_tol > 0.0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    out = scipy.integrate.quad(f, a, b, epsabs=ABS_FLOOR, epsrel=rel_tol,
                               limit=200, full_output=True)
    value, est_error, info = out[0], out[1], out[2]
    result = QuadratureResult(value=value, est_error=est_error,
                              evaluations=int(info["neval"]))
    if len(out) > 3:
        # QUADPACK reports trouble via an extra message element.
        raise QuadratureError(str(out[3]), best=result)
    return result


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Return generator ``index`` of the family keyed by ``master_seed``.

    Philox is a counter-based generator: placing the substream index in the
    top word of the 256-bit counter partitions the counter space into
    disjoint blocks of 2**192 draws.  The mapping (master_seed, index) ->
    sample sequence is therefore bit-stable across runs, platforms and any
    parallel execution order.
    """
    if index < 0:
        raise ValueError(f"substream index must be nonnegative, got {index}")
    bitgen = np.random.Philox(key=master_seed, counter=[0, 0, 0, index])
    return np.random.Generator(bitgen)


def sample_standard_complex_gaussian(stream: np.random.Generator, size=None):
    """Draw circularly-symmetric complex Gaussian samples with unit variance.

    Real and imaginary parts are independent N(0, 1/2), so E[|z|^2] = 1 and
    |z| is Rayleigh distributed.  ``size=None`` returns a scalar; otherwise
    an array of the requested shape.  Each sample consumes exactly two
    standard normal draws (real part first).
    """
    if size is None:
        re, im = stream.standard_normal(2)
        return complex(re, im) * _SQRT_HALF
    shape = (size,) if isinstance(size, int) else tuple(size)
    count = 1
    for dim in shape:
        count *= dim
    # flat draw viewed as (re, im) pairs: same sample stream as an explicit
    # trailing axis of two, without the temporaries of a complex combine
    z = stream.standard_normal(2 * count).view(np.complex128)
    z *= _SQRT_HALF
    return z.reshape(shape)


@dataclass(frozen=True)
class ConfidenceInterval:
    """Two-sided confidence interval for a probability."""

    low: float
    high: float
    level: float


def binomial_ci(errors: int, trials: int, level: float = 0.95) -> ConfidenceInterval:
    """Wilson score interval for a binomial proportion.

    Chosen over the normal approximation because it behaves sensibly at
    zero observed errors, which is the common case deep in an error-rate
    sweep.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= errors <= trials:
        raise ValueError(f"errors must be in [0, trials], got {errors}/{trials}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    z = float(scipy.stats.norm.ppf(0.5 + level / 2.0))
    n = float(trials)
    phat = errors / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom
    # At the boundaries the score interval is exactly one-sided; computing
    # it that way avoids float cancellation residue at the closed end.
    low = 0.0 if errors == 0 else max(0.0, center - half)
    high = 1.0 if errors == trials else min(1.0, center + half)
    return ConfidenceInterval(low=low, high=high, level=level)
