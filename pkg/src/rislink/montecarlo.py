"""Deterministic, parallelizable Monte Carlo SEP estimation.

This is the brute-force oracle against which every closed form in
:mod:`rislink.sep` is validated.  Each trial draws a fresh fading
realization (quasi-static flat fading), applies optimal tile phases, sends
one uniformly chosen symbol through the exact signal model, adds complex
Gaussian noise scaled to the configured ``es_over_n0``, and performs
coherent maximum-likelihood detection against the known channel gain.

Reproducibility contract: trial ``i`` always consumes Philox substream
``i // batch`` of the master seed, and a point's estimate is a pure fold of
per-batch error counts in batch order.  Results are therefore bit-identical
across runs, worker counts and sweep compositions.

Per-batch draw order (fixed, part of the contract):

* reflector: h (batch x n), g (batch x n), symbol indices, noise
* transmitter: g (batch x n), symbol indices, noise
* awgn reference: symbol indices, noise
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from rislink.link import ModulationSpec
from rislink.numerics import ConfidenceInterval, binomial_ci, sample_standard_complex_gaussian, substream
from rislink.sep import SepPoint, sep_exact

__all__ = [
    "SepEstimate",
    "SweepPoint",
    "SweepResult",
    "TrialPlan",
    "simulate_awgn_bpsk_sep",
    "simulate_reflector_sep",
    "simulate_transmitter_sep",
    "sweep",
]

CI_LEVEL = 0.95

# Exploratory early stop: a point may stop once it has seen this many errors
# and at least this many trials.  Off by default; acceptance-grade runs keep
# the full trial count.
EARLY_STOP_MIN_ERRORS = 200
EARLY_STOP_MIN_TRIALS = 100_000


@dataclass(frozen=True)
class TrialPlan:
    """Master seed, trial count and trials-per-substream batch size."""

    master_seed: int
    trials: int
    batch: int = 10_000

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")

    def substream_of(self, trial: int) -> int:
        return trial // self.batch

    def batches(self) -> list[tuple[int, int]]:
        """(substream index, trial count) pairs covering the plan in order."""
        out = []
        done = 0
        index = 0
        while done < self.trials:
            count = min(self.batch, self.trials - done)
            out.append((index, count))
            done += count
            index += 1
        return out


@dataclass(frozen=True)
class SepEstimate:
    """Simulated SEP at one operating point with its confidence interval."""

    mode: str
    n: int
    m: int
    snr_db: float
    trials: int
    errors: int
    pe_hat: float
    ci: ConfidenceInterval


@dataclass(frozen=True)
class SweepPoint:
    estimate: SepEstimate
    analytic: SepPoint


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]


def _count_symbol_errors(gain: np.ndarray, sym: np.ndarray, noise: np.ndarray,
                         points: np.ndarray, noise_scale: float) -> int:
    """Coherent ML detection: count trials whose nearest point is not the sent one.

    ``gain`` is the known real channel amplitude per trial, ``points`` the
    constellation table.  The received sample is gain * points[sym] +
    noise_scale * noise.
    """
    r = gain * points[sym] + noise_scale * noise
    dist = np.abs(r[:, None] - gain[:, None] * points[None, :])
    return int(np.count_nonzero(np.argmin(dist, axis=1) != sym))


def _noise_scale(es: float, es_over_n0: float) -> float:
    # Noise is drawn CN(0,1) and scaled so the per-trial SNR equals
    # gain^2 * es_over_n0; an infinite es_over_n0 is the noiseless sentinel.
    if math.isinf(es_over_n0):
        return 0.0
    if not es_over_n0 > 0.0:
        raise ValueError(f"es_over_n0 must be positive, got {es_over_n0}")
    return math.sqrt(es / es_over_n0)


def _run_batch(task) -> int:
    kind, master_seed, index, count, n, points, es, es_over_n0 = task
    stream = substream(master_seed, index)
    if kind == "reflector":
        h = sample_standard_complex_gaussian(stream, (count, n))
        g = sample_standard_complex_gaussian(stream, (count, n))
        gain = np.sum(np.abs(h) * np.abs(g), axis=1)
    elif kind == "transmitter":
        g = sample_standard_complex_gaussian(stream, (count, n))
        gain = np.sum(np.abs(g), axis=1)
    elif kind == "awgn":
        gain = np.ones(count)
    else:
        raise ValueError(f"unknown simulation kind {kind!r}")
    sym = stream.integers(0, len(points), size=count)
    noise = sample_standard_complex_gaussian(stream, count)
    return _count_symbol_errors(gain, sym, noise, points, _noise_scale(es, es_over_n0))


def _execute(tasks: list, workers: int, early_stop: bool) -> tuple[int, int]:
    """Fold batch error counts in batch order; returns (errors, trials)."""
    errors = 0
    trials = 0
    if early_stop or workers <= 1:
        for task in tasks:
            errors += _run_batch(task)
            trials += task[3]
            if early_stop and errors >= EARLY_STOP_MIN_ERRORS and trials >= EARLY_STOP_MIN_TRIALS:
                break
        return errors, trials
    chunk = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for task, count in zip(tasks, pool.map(_run_batch, tasks, chunksize=chunk)):
            errors += count
            trials += task[3]
    return errors, trials


def _estimate(kind: str, plan: TrialPlan, n: int, points: np.ndarray, es: float,
              m: int, es_over_n0: float, workers: int, early_stop: bool,
              snr_db: float | None = None) -> SepEstimate:
    tasks = [(kind, plan.master_seed, index, count, n, points, es, es_over_n0)
             for index, count in plan.batches()]
    errors, trials = _execute(tasks, workers, early_stop)
    if snr_db is None:
        snr_db = 10.0 * math.log10(es_over_n0) if not math.isinf(es_over_n0) else math.inf
    return SepEstimate(mode=kind, n=n, m=m, snr_db=snr_db,
                       trials=trials, errors=errors, pe_hat=errors / trials,
                       ci=binomial_ci(errors, trials, CI_LEVEL))


def simulate_reflector_sep(plan: TrialPlan, n: int, spec: ModulationSpec,
                           es_over_n0: float, workers: int = 1,
                           early_stop: bool = False, snr_db: float | None = None) -> SepEstimate:
    """Simulated SEP of the optimally phased reflector link.

    Per trial: draw the 2n channel coefficients, co-phase the tiles (after
    which the composite gain is the real amplitude sum), send one uniform
    symbol of ``spec`` and detect coherently.
    """
    if n < 1:
        raise ValueError(f"tile count must be >= 1, got {n}")
    return _estimate("reflector", plan, n, spec.constellation(), spec.symbol_energy,
                     spec.m, es_over_n0, workers, early_stop, snr_db)


def simulate_transmitter_sep(plan: TrialPlan, n: int, m: int, es_over_n0: float,
                             workers: int = 1, early_stop: bool = False,
                             snr_db: float | None = None) -> SepEstimate:
    """Simulated SEP when the surface transmits M-ary PSK itself.

    Only the surface-to-destination channel is drawn; the received
    constellation is PSK scaled by the per-trial amplitude sum.
    """
    if n < 1:
        raise ValueError(f"tile count must be >= 1, got {n}")
    points = ModulationSpec("psk", m).constellation()
    return _estimate("transmitter", plan, n, points, 1.0, m, es_over_n0, workers,
                     early_stop, snr_db)


def simulate_awgn_bpsk_sep(plan: TrialPlan, es_over_n0: float, workers: int = 1) -> SepEstimate:
    """Simulated BPSK SEP over a unit-gain AWGN channel.

    The fading-free reference curve Q(sqrt(2 rho)); exercises the same
    counting and interval machinery as the fading modes, which makes it the
    natural calibration target for the estimator itself.
    """
    points = ModulationSpec("psk", 2).constellation()
    return _estimate("awgn", plan, 1, points, 1.0, 2, es_over_n0, workers, False)


def sweep(grid: Sequence[float], configs: Iterable[tuple], plan: TrialPlan,
          workers: int = 1, family: str = "psk") -> SweepResult:
    """Cross-product SEP sweep with matched analytic values.

    ``grid`` is a list of SNR points in dB; ``configs`` holds (n, m, mode)
    tuples.  Every point is simulated with the same plan and therefore the
    same substreams, so single points reproduce in isolation and config
    order is irrelevant.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("SNR grid must not be empty")
    points = []
    for config in configs:
        n, m, mode = config
        if mode == "transmitter" and family != "psk":
            raise ValueError("transmitter mode is PSK only")
        for snr_db in grid:
            rho = 10.0 ** (snr_db / 10.0)
            if mode == "reflector":
                est = simulate_reflector_sep(plan, n, ModulationSpec(family, m), rho,
                                             workers=workers, snr_db=snr_db)
            elif mode == "transmitter":
                est = simulate_transmitter_sep(plan, n, m, rho, workers=workers,
                                               snr_db=snr_db)
            else:
                raise ValueError(f"mode must be 'reflector' or 'transmitter', got {mode!r}")
            analytic = SepPoint(snr_db=snr_db, pe=sep_exact(mode, n, m, family, rho),
                                method="exact")
            points.append(SweepPoint(estimate=est, analytic=analytic))
    return SweepResult(points=tuple(points))
