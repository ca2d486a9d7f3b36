"""Link-level simulation and analysis toolkit for RIS-assisted wireless links.

The package models a reconfigurable intelligent surface (RIS) in two roles:

* as a smart reflector between a single-antenna source and destination over
  dual-hop Rayleigh fading, with optimal per-tile co-phasing, and
* as a low-complexity transmitter that encodes PSK symbols onto the phases
  of the reflected carrier.

It provides deterministic path-loss models (two-ray ground reflection,
single and multi-tile reflecting surfaces, relay/backscatter product
channel), closed-form and quadrature-based average symbol error probability
(SEP) machinery built on moment generating functions, and a reproducible
Monte Carlo engine that cross-validates every closed-form result.
"""

from rislink.fading import CltParameters, FadingRealization, clt_parameters, draw_realization
from rislink.link import (
    ModulationSpec,
    RisConfig,
    SnrSample,
    instantaneous_snr_reflector,
    mean_snr_reflector,
    optimal_phases_reflector,
    optimal_phases_transmitter,
    quantize_phases,
    received_signal_reflector,
    received_signal_transmitter,
)
from rislink.montecarlo import SepEstimate, SweepResult, TrialPlan, simulate_awgn_bpsk_sep, simulate_reflector_sep, simulate_transmitter_sep, sweep
from rislink.numerics import ConfidenceInterval, QuadratureError, QuadratureResult, binomial_ci, integrate, sample_standard_complex_gaussian, substream
from rislink.pathloss import PowerResult, Tile, TileSet, TwoRayGeometry, fit_pathloss_exponent, los_power, relay_power, ris_ground_power, two_ray_power
from rislink.sep import (
    MgfSpec,
    SepPoint,
    mgf,
    regime_flag,
    required_snr_db,
    sep_bpsk_reflector,
    sep_bpsk_ub,
    sep_exact,
    sep_high_snr_approx_reflector,
    sep_mpsk,
    sep_mpsk_ub,
    sep_mqam,
    sep_mqam_ub,
    sep_transmitter,
    sep_waterfall_approx,
)

__version__ = "0.1.0"
