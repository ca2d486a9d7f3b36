import cmath
import math

import numpy as np
import pytest

from rislink.fading import FadingRealization, draw_realization
from rislink.link import (
    ModulationSpec,
    RisConfig,
    composite_channel,
    instantaneous_snr_reflector,
    mean_snr_reflector,
    optimal_phases_reflector,
    optimal_phases_transmitter,
    quantize_phases,
    received_signal_reflector,
    received_signal_transmitter,
)
from rislink.numerics import sample_standard_complex_gaussian, substream

from oracles import phased_sum_squared_expansion

PI = math.pi


def realization(seed, n):
    return draw_realization(substream(seed, 0), n)


class TestOptimalPhasesReflector:
    def test_aligned_channels_need_no_phase(self):
        ch = FadingRealization(h=np.array([1.0 + 0j, 2.0 + 0j]),
                               g=np.array([0.5 + 0j, 1.5 + 0j]))
        np.testing.assert_allclose(optimal_phases_reflector(ch), [0.0, 0.0], atol=1e-15)

    def test_single_tile_sum_of_phases(self):
        ch = FadingRealization(h=np.array([cmath.exp(-1j * PI / 3)]),
                               g=np.array([cmath.exp(-1j * PI / 6)]))
        assert optimal_phases_reflector(ch)[0] == pytest.approx(PI / 2, abs=1e-12)

    def test_composite_becomes_real_amplitude_sum(self):
        for seed in range(20):
            ch = realization(seed, 16)
            comp = composite_channel(ch, optimal_phases_reflector(ch))
            assert abs(comp.imag) < 1e-10
            assert comp.real == pytest.approx(ch.cophased_gain, abs=1e-10)
            assert comp.real >= 0.0


class TestInstantaneousSnr:
    def test_optimal_phase_snr_is_squared_gain(self):
        ch = realization(1, 12)
        snr = instantaneous_snr_reflector(ch, optimal_phases_reflector(ch), 2.0)
        assert snr.gamma == pytest.approx(ch.cophased_gain**2 * 2.0, rel=1e-12)

    def test_antipodal_misalignment_is_invisible(self):
        # every tile off by exactly pi flips the sign of the sum only
        alpha = np.array([0.4, 1.1, 0.9])
        beta = np.array([0.8, 0.3, 1.2])
        theta = np.array([0.3, 1.0, 2.2])
        ch = FadingRealization(h=alpha * np.exp(-1j * theta),
                               g=beta * np.exp(-1j * (PI - theta)))
        snr = instantaneous_snr_reflector(ch, np.zeros(3), 1.0)
        assert snr.gamma == pytest.approx(float(np.sum(alpha * beta)) ** 2, rel=1e-12)

    def test_random_phases_never_beat_optimal(self):
        rng = np.random.default_rng(5)
        for seed in range(1000):
            ch = realization(seed, 8)
            best = instantaneous_snr_reflector(ch, optimal_phases_reflector(ch), 1.0)
            other = instantaneous_snr_reflector(ch, rng.uniform(0, 2 * PI, 8), 1.0)
            assert other.gamma <= best.gamma * (1 + 1e-12)

    def test_phase_vector_length_checked(self):
        ch = realization(3, 4)
        with pytest.raises(ValueError):
            instantaneous_snr_reflector(ch, np.zeros(5), 1.0)

    def test_negative_gamma_impossible(self):
        from rislink.link import SnrSample
        with pytest.raises(ValueError):
            SnrSample(gamma=-1.0, es_over_n0=1.0)


class TestMagnitudeIdentity:
    def test_expansion_matches_direct(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(2, 10))
            z = rng.uniform(0.0, 2.0, n)
            xi = rng.uniform(0.0, 2 * PI, n)
            direct = abs(np.sum(z * np.exp(1j * xi))) ** 2
            assert direct == pytest.approx(phased_sum_squared_expansion(z, xi), abs=1e-10)


class TestMeanSnr:
    def test_single_tile_unity(self):
        assert mean_snr_reflector(1, 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_sixteen_tiles_closed_form(self):
        assert mean_snr_reflector(16, 1.0) == pytest.approx(15 * PI**2 + 16, rel=1e-12)
        assert mean_snr_reflector(16, 1.0) == pytest.approx(164.044, abs=1e-3)

    def test_sixteen_tiles_against_monte_carlo(self):
        stream = substream(161, 0)
        total, n = 1_000_000, 16
        gamma_sum = 0.0
        for _ in range(10):
            h = sample_standard_complex_gaussian(stream, (total // 10, n))
            g = sample_standard_complex_gaussian(stream, (total // 10, n))
            gamma_sum += float(np.sum(np.sum(np.abs(h) * np.abs(g), axis=1) ** 2))
        assert gamma_sum / total == pytest.approx(mean_snr_reflector(n, 1.0), rel=0.01)

    def test_quadratic_growth(self):
        ratio = mean_snr_reflector(1024, 1.0) / mean_snr_reflector(512, 1.0)
        assert ratio == pytest.approx(4.0, rel=0.004)


class TestReceivedSignalReflector:
    def test_noiseless_aligned(self):
        ch = realization(2, 10)
        r = received_signal_reflector(ch, optimal_phases_reflector(ch), 1.0 + 0j, 0.0 + 0j)
        assert r.imag == pytest.approx(0.0, abs=1e-10)
        assert r.real == pytest.approx(ch.cophased_gain, rel=1e-10)

    def test_single_tile_reduction(self):
        ch = realization(4, 1)
        x, n = 0.7 - 0.2j, 0.05 + 0.03j
        assert received_signal_reflector(ch, np.zeros(1), x, n) == pytest.approx(
            ch.h[0] * ch.g[0] * x + n, rel=1e-15)

    def test_matrix_form_matches_summation(self):
        ch = realization(6, 8)
        phases = np.linspace(0.1, 2.0, 8)
        x, noise = 0.3 + 0.4j, -0.01 + 0.02j
        phi = np.diag(np.exp(1j * phases))
        matrix_form = ch.g @ phi @ ch.h * x + noise
        summed = received_signal_reflector(ch, phases, x, noise)
        assert summed == pytest.approx(matrix_form, abs=1e-12)


class TestTransmitterMode:
    def test_first_message_is_pure_cophase(self):
        ch = realization(7, 6)
        np.testing.assert_allclose(optimal_phases_transmitter(ch, 1, 4), ch.psi, atol=0)

    def test_binary_second_message_adds_pi(self):
        ch = realization(8, 6)
        np.testing.assert_allclose(optimal_phases_transmitter(ch, 2, 2), ch.psi + PI, atol=0)

    def test_message_index_validated(self):
        ch = realization(9, 4)
        with pytest.raises(ValueError):
            optimal_phases_transmitter(ch, 0, 4)
        with pytest.raises(ValueError):
            optimal_phases_transmitter(ch, 5, 4)

    def test_phased_sum_matches_closed_form(self):
        spec = ModulationSpec("psk", 8, symbol_energy=4.0)
        for seed in range(10):
            ch = realization(seed, 12)
            for m in (1, 3, 8):
                phases = optimal_phases_transmitter(ch, m, spec.m)
                direct = math.sqrt(spec.symbol_energy) * np.sum(ch.g * np.exp(1j * phases))
                closed = received_signal_transmitter(ch, m, spec, 0.0 + 0j)
                assert closed == pytest.approx(direct, abs=1e-10)

    def test_noiseless_first_message_real_positive(self):
        ch = realization(11, 16)
        spec = ModulationSpec("psk", 4)
        r = received_signal_transmitter(ch, 1, spec, 0.0 + 0j)
        assert r.imag == pytest.approx(0.0, abs=1e-12)
        assert r.real == pytest.approx(ch.beta_sum, rel=1e-12)

    def test_snr_is_scaled_squared_amplitude_sum(self):
        ch = realization(12, 16)
        spec = ModulationSpec("psk", 4, symbol_energy=2.0)
        r = received_signal_transmitter(ch, 3, spec, 0.0 + 0j)
        n0 = 0.25
        assert abs(r) ** 2 / n0 == pytest.approx(
            spec.symbol_energy * ch.beta_sum**2 / n0, rel=1e-12)

    def test_magnitude_independent_of_message(self):
        ch = realization(13, 16)
        spec = ModulationSpec("psk", 8)
        mags = [abs(received_signal_transmitter(ch, m, spec, 0.0 + 0j))
                for m in range(1, 9)]
        assert max(mags) - min(mags) < 1e-12

    def test_messages_form_psk_ring(self):
        ch = realization(14, 16)
        spec = ModulationSpec("psk", 8)
        pts = np.array([received_signal_transmitter(ch, m, spec, 0.0 + 0j)
                        for m in range(1, 9)])
        radius = math.sqrt(spec.symbol_energy) * ch.beta_sum
        np.testing.assert_allclose(np.abs(pts), radius, rtol=1e-12)
        spacing = np.diff(np.unwrap(np.angle(pts)))
        np.testing.assert_allclose(spacing, 2 * PI / 8, atol=1e-12)

    def test_qam_rejected(self):
        ch = realization(15, 4)
        with pytest.raises(ValueError):
            received_signal_transmitter(ch, 1, ModulationSpec("qam", 16), 0j)


class TestQuantizePhases:
    def test_one_bit_levels(self):
        out = quantize_phases(np.array([0.1, 3.0, 4.0, 6.2]), 1)
        assert set(np.round(out, 12)) <= {0.0, round(PI, 12)}

    def test_grid_points_fixed(self):
        grid = np.arange(8) * (2 * PI / 8)
        np.testing.assert_allclose(quantize_phases(grid, 3), grid, atol=1e-15)

    def test_ties_round_down(self):
        step = 2 * PI / 4
        out = quantize_phases(np.array([1.5 * step, 2.5 * step]), 2)
        np.testing.assert_allclose(out, [1 * step, 2 * step], atol=1e-15)

    def test_quantized_snr_never_beats_optimal(self):
        for seed in range(1000):
            ch = realization(seed, 8)
            best = instantaneous_snr_reflector(ch, optimal_phases_reflector(ch), 1.0)
            rough = instantaneous_snr_reflector(
                ch, quantize_phases(optimal_phases_reflector(ch), 2), 1.0)
            assert rough.gamma <= best.gamma * (1 + 1e-12)

    def test_bits_validated(self):
        with pytest.raises(ValueError):
            quantize_phases(np.zeros(3), 0)


class TestModulationSpec:
    @pytest.mark.parametrize("family,m", [("psk", 2), ("psk", 8), ("qam", 4),
                                          ("qam", 16), ("qam", 64)])
    def test_average_energy(self, family, m):
        spec = ModulationSpec(family, m, symbol_energy=3.0)
        points = spec.constellation()
        assert len(points) == m
        assert np.mean(np.abs(points) ** 2) == pytest.approx(3.0, rel=1e-12)

    def test_invalid_orders(self):
        with pytest.raises(ValueError):
            ModulationSpec("psk", 1)
        with pytest.raises(ValueError):
            ModulationSpec("qam", 8)
        with pytest.raises(ValueError):
            ModulationSpec("qam", 2)
        with pytest.raises(ValueError):
            ModulationSpec("fsk", 2)


class TestRisConfig:
    def test_optimal_policy(self):
        ch = realization(30, 6)
        cfg = RisConfig(n=6, mode="reflector")
        np.testing.assert_allclose(cfg.phases_for(ch), optimal_phases_reflector(ch))

    def test_quantized_policy(self):
        ch = realization(31, 6)
        cfg = RisConfig(n=6, mode="reflector", phase_policy="quantized", quantizer_bits=2)
        np.testing.assert_allclose(cfg.phases_for(ch),
                                   quantize_phases(optimal_phases_reflector(ch), 2))

    def test_explicit_policy(self):
        phases = np.linspace(0, 1, 6)
        cfg = RisConfig(n=6, mode="reflector", phase_policy="explicit",
                        explicit_phases=phases)
        np.testing.assert_allclose(cfg.phases_for(realization(32, 6)), phases)

    def test_validation(self):
        with pytest.raises(ValueError):
            RisConfig(n=0, mode="reflector")
        with pytest.raises(ValueError):
            RisConfig(n=4, mode="reflector", phase_policy="quantized")
        with pytest.raises(ValueError):
            RisConfig(n=4, mode="reflector", phase_policy="explicit",
                      explicit_phases=np.zeros(3))
        with pytest.raises(ValueError):
            RisConfig(n=4, mode="repeater")
