import numpy as np
import pytest

from src.wpdiff.domain.model import InvalidSpec, PacketSpec1D, PotentialSpec
from src.wpdiff.domain.peaks import count_peaks
from src.wpdiff.physics.asymptotic1d import (
    blur_ratio,
    in_regime,
    pattern,
    pattern_amplitude,
    predict_peak_spacing,
    psi_in_asymptotic,
    psi_refl_asymptotic,
)

PACKET = PacketSpec1D(sigma=0.5, q0=0.4, x0=-60.0, mass=40.0)
WELL = PotentialSpec(kind="square", v0=-1.0, w=1.0)
T = 1.2e7


class TestPattern:
    def setup_method(self):
        self.x = np.linspace(-1.0e5, -100.0, 2000)

    def test_exact_pattern_is_modulus_of_the_two_terms(self):
        direct = np.abs(psi_in_asymptotic(PACKET, self.x, T) + psi_refl_asymptotic(PACKET, WELL, self.x, T))
        np.testing.assert_allclose(pattern_amplitude(PACKET, self.x, T, long_time=False), direct, rtol=1e-9)

    def test_long_time_form_close_to_exact(self):
        exact = pattern_amplitude(PACKET, self.x, T, long_time=False)
        approx = pattern_amplitude(PACKET, self.x, T, long_time=True)
        assert np.max(np.abs(exact - approx)) < 1e-3 * np.max(exact)

    def test_factors(self):
        p = pattern(PACKET, np.array([-1000.0]), T)
        assert p.amplitude_prefactor == pytest.approx(2 * np.sqrt(2 * 40.0 * np.pi / T))
        assert p.sin_arg_real[0] == pytest.approx(40.0 * 1000.0 * 60.0 / T)

    def test_peaks_follow_predicted_spacing(self):
        x = np.arange(-1.2e5, -1000.0, 100.0)
        report = count_peaks(pattern_amplitude(PACKET, x, T), dx=100.0, origin=x[0])
        predicted = predict_peak_spacing(PACKET, T)
        assert predicted == pytest.approx(np.pi * T / (40.0 * 60.0))
        assert report.count >= 5
        assert np.median(report.spacings) == pytest.approx(predicted, rel=0.02)

    def test_requires_positive_time(self):
        with pytest.raises(ValueError):
            psi_in_asymptotic(PACKET, self.x, 0.0)
        with pytest.raises(ValueError):
            pattern_amplitude(PACKET, self.x, -1.0)


class TestRegimeAndRatios:
    def test_in_regime(self):
        flags = in_regime(PACKET, WELL, np.array([-1.0e4, -100.0, 5.0]), T)
        assert flags.tolist() == [True, False, False]
        assert not np.any(in_regime(PACKET, WELL, np.array([-1.0e4]), 1.0))

    def test_spacing_undefined_at_origin(self):
        with pytest.raises(InvalidSpec):
            predict_peak_spacing(PacketSpec1D(sigma=0.5, q0=0.4, x0=0.0, mass=40.0), T)

    def test_blur_ratio_matches_narrowness(self):
        packet = PacketSpec1D(sigma=0.5, q0=1.0, x0=-10.0, mass=1.0)
        assert blur_ratio(packet, WELL) == pytest.approx(np.sinh(0.25))
        wide = PacketSpec1D(sigma=2.0, q0=1.0, x0=-10.0, mass=1.0)
        assert blur_ratio(wide, WELL) > 1.0
