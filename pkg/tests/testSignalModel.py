import math

import numpy as np
import pytest

from services.coreMath import RngHandle
from services.periodogram import direct_transform, oversampled_transform, q_rule
from services.signalModel import (
    AlternativeParams,
    SparseSpectrum,
    amplitude_from_r,
    complexify,
    equispaced_support,
    make_alternative,
    mean_spectrum,
    min_separation,
    nearest_grid_index,
    off_peak_maximum,
    peak_deviation,
    sample_support,
    spectrum_from_record,
    spectrum_to_record,
    synthesize,
    theoretical_separation,
)
from services.statsErrors import DomainError, SamplerExhaustedError


SEED = 20150907

# Configuración de las simulaciones de referencia
P, N, S, R = 1_000_000, 1000, 20, 0.3


def _spectrum(p, support, amplitudes):
    return SparseSpectrum(p, np.array(support), np.array(amplitudes, dtype=complex))


def _random_phase_spectrum(p, support, amplitude, seed):
    phases = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, size=len(support))
    return SparseSpectrum(p, support, amplitude * np.exp(1j * phases))


class TestSeparation:

    @pytest.mark.parametrize("p, support, expected", [
        (100, (1, 26, 51, 76), 0.25),
        (100, (1, 2), 0.01),
        (10, (7,), 1.0),
    ])
    def test_min_separation(self, p, support, expected):
        spectrum = _spectrum(p, support, np.ones(len(support)))
        assert min_separation(spectrum) == pytest.approx(expected)

    def test_min_separation_rejects_empty(self):
        with pytest.raises(DomainError):
            min_separation(SparseSpectrum.null(10))

    def test_theoretical_separation(self):
        assert theoretical_separation(1000) == pytest.approx(math.log(1000) ** 2 / 1000)
        assert theoretical_separation(1000) == pytest.approx(0.0477, abs=1e-4)

    def test_equispaced_support(self):
        support = equispaced_support(P, S)
        assert support[0] == 1 and support.size == S
        assert min_separation(_spectrum(P, support, np.ones(S))) == pytest.approx(0.05)
        with pytest.raises(DomainError):
            equispaced_support(100, 4, offset=30)


class TestSampleSupport:

    def test_respects_separation_and_range(self):
        support = sample_support(P, S, 0.005, RngHandle(SEED, 0, "support"))
        assert support.size == S
        assert np.all(np.diff(support) > 0)
        assert support[0] >= 1 and support[-1] <= P
        assert min_separation(_spectrum(P, support, np.ones(S))) >= 0.005

    def test_deterministic(self):
        handle = RngHandle(SEED, 4, "support")
        assert np.array_equal(sample_support(P, S, 0.0, handle), sample_support(P, S, 0.0, handle))

    def test_infeasible_separation(self):
        with pytest.raises(DomainError):
            sample_support(100, 10, 0.1, RngHandle(SEED))

    def test_exhausted_sampler(self):
        with pytest.raises(SamplerExhaustedError):
            sample_support(P, S, theoretical_separation(N), RngHandle(SEED), max_attempts=5)

    def test_gaps_reach_theoretical_separation(self):
        for k in range(20):
            support = sample_support(P, S, theoretical_separation(N), RngHandle(SEED, k, "gaps"), method="gaps")
            assert support.size == S
            assert np.all(np.diff(support) > 0)
            assert support[0] >= 1 and support[-1] <= P
            assert min_separation(_spectrum(P, support, np.ones(S))) >= theoretical_separation(N)

    def test_gaps_uniform_over_separated_pairs(self):
        # p = 12, separación 4/12: 30 pares admisibles
        counts = {}
        for k in range(6000):
            pair = tuple(sample_support(12, 2, 4 / 12, RngHandle(SEED, k, "gaps-law"), method="gaps"))
            counts[pair] = counts.get(pair, 0) + 1
        assert len(counts) == 30
        assert all(min((b - a), 12 - (b - a)) >= 4 for a, b in counts)
        assert 140 <= min(counts.values()) and max(counts.values()) <= 260

    def test_gaps_single_atom_and_unknown_method(self):
        assert sample_support(50, 1, 0.5, RngHandle(SEED), method="gaps").size == 1
        with pytest.raises(DomainError):
            sample_support(50, 2, 0.1, RngHandle(SEED), method="poisson")


class TestAlternative:

    def test_amplitude(self):
        assert amplitude_from_r(R, P, N) == pytest.approx(64.379, abs=1e-3)

    def test_make_alternative_common_modulus(self):
        params = AlternativeParams(p=P, N=N, s=S, r=R, min_sep=0.0)
        spectrum = make_alternative(params, RngHandle(SEED, 0, "alt"))
        assert spectrum.s == S
        assert np.abs(spectrum.amplitudes) == pytest.approx(np.full(S, 64.379), abs=1e-3)

    def test_default_separation_at_reference_scale(self):
        params = AlternativeParams(p=P, N=N, s=S, r=R)
        assert params.resolved_support_method == "gaps"
        spectrum = make_alternative(params, RngHandle(SEED, 0, "alt"))
        assert spectrum.s == S
        assert min_separation(spectrum) >= theoretical_separation(N)
        assert AlternativeParams(p=P, N=N, s=S, r=R, min_sep=0.0).resolved_support_method == "rejection"
        with pytest.raises(DomainError):
            AlternativeParams(p=P, N=N, s=S, r=R, support_method="poisson")

    def test_fixed_phase(self):
        params = AlternativeParams(p=1000, N=100, s=3, r=1.0, min_sep=0.0, phase_mode="fixed", fixed_phase=0.5)
        spectrum = make_alternative(params, RngHandle(SEED))
        assert np.angle(spectrum.amplitudes) == pytest.approx(np.full(3, 0.5))

    @pytest.mark.parametrize("s, r", [(0, 0.3), (5, 0.0)])
    def test_degenerate_parameters_give_null(self, s, r):
        params = AlternativeParams(p=1000, N=100, s=s, r=r)
        assert params.is_null
        assert make_alternative(params, RngHandle(SEED)).is_null

    def test_from_exponents(self):
        params = AlternativeParams.from_exponents(P, gamma=0.5, alpha=1.0 - math.log(20) / math.log(P), r=R)
        assert (params.N, params.s) == (N, S)
        assert params.separation == pytest.approx(theoretical_separation(N))

    def test_rejects_unknown_phase_mode(self):
        with pytest.raises(DomainError):
            AlternativeParams(p=10, N=10, s=1, r=1.0, phase_mode="random")


class TestSynthesize:

    def test_null_noise_power(self):
        y = synthesize(SparseSpectrum.null(N), 100_000, 1.0, RngHandle(SEED, 0, "null"))
        assert np.mean(np.abs(y.samples) ** 2) == pytest.approx(1.0, abs=0.02)

    def test_noiseless_matches_definition(self):
        spectrum = _spectrum(97, (3, 40), (1 + 2j, -0.5j))
        y = synthesize(spectrum, 12, 0.0)
        j = np.arange(12)
        expected = sum(
            beta * np.exp(-2j * np.pi * j * (tau - 1) / 97)
            for tau, beta in zip(spectrum.support, spectrum.amplitudes)
        ) / math.sqrt(97)
        assert y.samples == pytest.approx(expected, abs=1e-12)

    def test_noise_requires_rng(self):
        with pytest.raises(DomainError):
            synthesize(SparseSpectrum.null(10), 10, 1.0)


class TestMeanSpectrum:

    def test_on_grid_atom(self):
        beta = 2.0 - 1.0j
        theta = mean_spectrum(_spectrum(64, (5,), (beta,)), 64, 64)
        expected = np.zeros(64, dtype=complex)
        expected[4] = beta
        assert theta == pytest.approx(expected, abs=1e-10)

    def test_matches_transform_of_noiseless_series(self):
        spectrum = _spectrum(97, (3, 40, 77), (1.0, 2j, -1 + 1j))
        y = synthesize(spectrum, 30, 0.0)
        assert mean_spectrum(spectrum, 30, 50) == pytest.approx(direct_transform(y.samples, 50), abs=1e-9)

    def test_noisy_average_matches_mean(self):
        spectrum = _spectrum(997, (11, 400, 812), (3.0, -2j, 1.5 + 1.5j))
        draws = 200
        average = sum(
            oversampled_transform(synthesize(spectrum, 64, 1.0, RngHandle(SEED, k, "mean-consistency")), 256).v
            for k in range(draws)
        ) / draws
        deviation = average - mean_spectrum(spectrum, 64, 256)
        # Cada parte de v_m tiene varianza 1/2 con σ = 1
        standard_error = math.sqrt(0.5 / draws)
        assert np.abs(deviation.real).max() <= 5 * standard_error
        assert np.abs(deviation.imag).max() <= 5 * standard_error

    def test_linear_in_atoms(self):
        spectrum = _random_phase_spectrum(1000, equispaced_support(1000, 5, offset=7), 3.0, SEED)
        total = sum(mean_spectrum(spectrum.atom(i), 100, 700) for i in range(spectrum.s))
        assert mean_spectrum(spectrum, 100, 700) == pytest.approx(total, abs=1e-10)

    def test_half_bin_leakage(self):
        amplitude = 1.0
        spectrum = _spectrum(2 * N, (2,), (amplitude * math.sqrt(2.0),))
        theta = mean_spectrum(spectrum, N, N)
        assert np.abs(theta).max() <= (2.0 / math.pi) * amplitude * 1.05

    def test_empty_spectrum(self):
        assert np.array_equal(mean_spectrum(SparseSpectrum.null(10), 10, 20), np.zeros(20))

    def test_nearest_grid_index(self):
        assert nearest_grid_index(1, 10, 20) == 1
        assert nearest_grid_index(3, 10, 20) == 5
        assert nearest_grid_index(10, 10, 4) == 1


class TestSpikiness:
    """Picos y valles del espectro medio en la configuración de referencia (σ = 0)"""

    @pytest.fixture(scope="class")
    def spectrum(self):
        return _random_phase_spectrum(P, equispaced_support(P, S), amplitude_from_r(R, P, N), SEED)

    def test_peaks_near_ideal(self, spectrum):
        q = q_rule(N, "theory")
        assert np.all(peak_deviation(spectrum, N, q) <= 0.1 * math.sqrt(R * math.log(P)))

    def test_off_peak_small(self, spectrum):
        q = q_rule(N, "theory")
        assert off_peak_maximum(spectrum, N, q) <= 0.5 * math.sqrt(R * math.log(P))


class TestComplexify:

    def test_known_values(self):
        y = complexify([1, 2, 3, 4])
        assert np.array_equal(y.samples, np.array([1 + 3j, 2 + 4j]))
        assert np.array_equal(complexify(np.zeros(6)).samples, np.zeros(3))

    def test_rejects_odd_length(self):
        with pytest.raises(DomainError):
            complexify([1, 2, 3, 4, 5])


def test_spectrum_record():
    spectrum = _spectrum(50, (2, 9), (1 - 1j, 0.25j))
    restored = spectrum_from_record(spectrum_to_record(spectrum))
    assert restored.p == 50
    assert np.array_equal(restored.support, spectrum.support)
    assert np.array_equal(restored.amplitudes, spectrum.amplitudes)
    with pytest.raises(DomainError):
        spectrum_from_record({"p": 50})
