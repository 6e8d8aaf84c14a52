"""
Tests for the emission spectrum and its ZPL/PSB decomposition.
"""

import logging
import math

import numpy as np
import pytest

from qephonon.exceptions import (
    NegativeSpectrumError,
    QEPhononValidationError,
    TimeWindowError,
    UnsupportedDimensionalityError,
)
from qephonon.lineshape import (
    NEGATIVE_FAIL,
    SPECTRUM_CSV_HEADER,
    _clip_negative,
    area_ratio,
    direct_spectrum,
    emission_spectrum,
    instrument_convolve,
    sideband_asymmetry,
    spectrum_rows,
    spectrum_to_dict,
    time_grid,
    zpl_psb_decompose,
)
from qephonon.models.bath import BathTemperature, SpectralDensity
from qephonon.models.run_config import get_preset
from qephonon.models.spectrum import AreaRatio, LineshapeParams, SpectrumCurve


T4 = BathTemperature(4.0)


@pytest.fixture
def lorentzian_params():
    """Uncoupled emitter: the spectrum is a Lorentzian of FWHM W"""
    return LineshapeParams(omega_X_tilde=100.0, A=1.0, W=1.0, sd=SpectralDensity(0.0, 2.0, 3), T=T4)


@pytest.fixture
def a3d_params():
    return get_preset("A3D").lineshape_params(4.0)


def window_grid(p: LineshapeParams, half_span: float = 15.0, n: int = 3001) -> np.ndarray:
    return np.linspace(p.omega_X_tilde - half_span, p.omega_X_tilde + half_span, n)


class TestUncoupledLineshape:
    """Tests for the alpha = 0 limit."""

    def test_lorentzian_peak_and_half_width(self, lorentzian_params):
        """Test peak 2A/W and half maximum at W/2 detuning."""
        curve = emission_spectrum(lorentzian_params, [99.5, 100.0, 100.5])
        assert curve.values[1] == pytest.approx(2.0, rel=1e-4)
        assert curve.values[0] / curve.values[1] == pytest.approx(0.5, abs=1e-4)
        assert curve.values[2] / curve.values[1] == pytest.approx(0.5, abs=1e-4)

    def test_lorentzian_is_symmetric(self, lorentzian_params):
        """Test that red and blue halves carry equal weight."""
        curve = emission_spectrum(lorentzian_params, window_grid(lorentzian_params, 10.0, 2001))
        _, _, red_fraction = sideband_asymmetry(curve, 100.0)
        assert red_fraction == pytest.approx(0.5, abs=1e-3)

    def test_uncoupled_3d_has_no_sideband(self, lorentzian_params):
        """Test that the PSB vanishes without coupling."""
        zpl, psb = zpl_psb_decompose(lorentzian_params, window_grid(lorentzian_params, 5.0, 501))
        assert np.all(psb.values == 0)
        ratio = area_ratio(zpl, psb)
        assert math.isinf(ratio.ratio)
        assert ratio.psb_fraction == 0.0


class TestCoupledLineshape:
    """Tests for the phonon-dressed spectrum of a 3D bath emitter."""

    def test_peak_at_zero_phonon_line(self, a3d_params):
        """Test that the ZPL sits at the polaron-shifted energy."""
        grid = window_grid(a3d_params)
        curve = emission_spectrum(a3d_params, grid)
        assert curve.peak_omega == pytest.approx(a3d_params.omega_X_tilde, abs=0.02)
        assert np.all(curve.values >= 0)

    def test_total_area_is_pi_a(self, a3d_params):
        """Test that the integrated spectrum is pi A up to truncated tails."""
        curve = emission_spectrum(a3d_params, window_grid(a3d_params, 40.0, 8001))
        assert curve.area == pytest.approx(math.pi * a3d_params.A, rel=0.02)

    @pytest.mark.parametrize("preset,expected_ratio,expected_fraction", [
        ("A3D", 0.79, 0.559),
        ("B3D", 0.90, 0.53),
    ])
    def test_area_ratio(self, preset, expected_ratio, expected_fraction):
        """Test the ZPL/PSB area split of both emitters at 4 K."""
        p = get_preset(preset).lineshape_params(4.0)
        zpl, psb = zpl_psb_decompose(p, window_grid(p))
        ratio = area_ratio(zpl, psb)
        assert ratio.ratio == pytest.approx(expected_ratio, abs=0.03)
        assert ratio.psb_fraction == pytest.approx(expected_fraction, abs=0.02)

    def test_sideband_grows_with_temperature(self, a3d_params):
        """Test that a warmer bath moves weight from the ZPL to the PSB."""
        warm = LineshapeParams(
            a3d_params.omega_X_tilde, a3d_params.A, a3d_params.W, a3d_params.sd, BathTemperature(20.0)
        )
        grid = window_grid(a3d_params)
        cold_fraction = area_ratio(*zpl_psb_decompose(a3d_params, grid)).psb_fraction
        warm_fraction = area_ratio(*zpl_psb_decompose(warm, grid)).psb_fraction
        assert warm_fraction > cold_fraction

    def test_low_temperature_sideband_is_red(self, a3d_params):
        """Test that phonon emission dominates at 4 K."""
        curve = emission_spectrum(a3d_params, window_grid(a3d_params))
        red, blue, red_fraction = sideband_asymmetry(curve, a3d_params.omega_X_tilde)
        assert red > blue
        assert red_fraction > 0.5

    def test_fft_matches_direct_quadrature(self, a3d_params):
        """Test the FFT path against per-frequency adaptive quadrature."""
        omegas = a3d_params.omega_X_tilde + np.array([-1.0, 0.0, 0.5])
        fft_values = emission_spectrum(a3d_params, omegas).values
        direct = direct_spectrum(a3d_params, omegas)
        np.testing.assert_allclose(fft_values, direct, rtol=1e-3)

    def test_decompose_2d_raises(self):
        """Test that the 2D bath has no finite zero-phonon weight."""
        p = get_preset("A2D").lineshape_params(4.0)
        with pytest.raises(UnsupportedDimensionalityError):
            zpl_psb_decompose(p, window_grid(p, 5.0, 101))

    def test_2d_spectrum_is_finite(self):
        """Test that the 2D total spectrum is still defined."""
        p = get_preset("A2D").lineshape_params(4.0)
        curve = emission_spectrum(p, window_grid(p, 15.0, 1501))
        assert np.all(np.isfinite(curve.values))
        assert curve.values.max() > 0


class TestGridsAndWindows:
    """Tests for grid validation and the time window."""

    @pytest.mark.parametrize("grid", [[100.0], [100.0, 99.0], [1.0, float("nan")]])
    def test_invalid_grid_raises(self, lorentzian_params, grid):
        """Test that grids must be finite, increasing and have two points."""
        with pytest.raises(QEPhononValidationError):
            emission_spectrum(lorentzian_params, grid)

    def test_short_window_raises(self, lorentzian_params):
        """Test that an undecayed envelope is reported."""
        with pytest.raises(TimeWindowError):
            emission_spectrum(lorentzian_params, [99.0, 100.0, 101.0], max_window_ps=10.0)

    def test_time_grid_is_power_of_two(self, a3d_params):
        """Test the FFT sizing."""
        tg = time_grid(a3d_params, window_grid(a3d_params))
        assert tg.n & (tg.n - 1) == 0
        assert tg.n_fft & (tg.n_fft - 1) == 0
        assert tg.n_fft >= 4 * tg.n
        assert math.exp(-0.5 * a3d_params.W * tg.window) < 1e-8

    def test_area_ratio_needs_shared_grid(self):
        """Test that curves on different grids are rejected."""
        a = SpectrumCurve(np.array([0.0, 1.0]), np.array([1.0, 1.0]))
        b = SpectrumCurve(np.array([0.0, 2.0]), np.array([1.0, 1.0]))
        with pytest.raises(QEPhononValidationError):
            area_ratio(a, b)

    def test_area_ratio_sentinel(self):
        """Test the inf ratio when the sideband carries no weight."""
        ratio = AreaRatio(zpl_area=1.0, psb_area=0.0)
        assert math.isinf(ratio.ratio)
        assert ratio.to_dict()["ratio"] is None


class TestNegativeClipping:
    """Tests for the tolerance on transform ringing."""

    def test_tail_ringing_is_clipped(self, caplog):
        """Test that negativity at the 1e-6 level is clipped with a warning."""
        values = np.array([0.0, 1.0, 0.5, -1e-6])
        with caplog.at_level(logging.WARNING, logger="qephonon.lineshape"):
            clipped = _clip_negative(values, "total")
        np.testing.assert_array_equal(clipped, [0.0, 1.0, 0.5, 0.0])
        assert "Clipping negative total spectrum values" in caplog.text

    def test_quiet_clip_logs_at_debug(self, caplog):
        """Test that fit evaluations clip without warnings."""
        with caplog.at_level(logging.WARNING, logger="qephonon.lineshape"):
            _clip_negative(np.array([1.0, -1e-6]), "total", warn=False)
        assert caplog.text == ""

    def test_broken_transform_raises(self):
        """Test that negativity above NEGATIVE_FAIL is an error."""
        with pytest.raises(NegativeSpectrumError) as exc_info:
            _clip_negative(np.array([1.0, -10 * NEGATIVE_FAIL]), "psb")
        assert exc_info.value.get_context("min_relative") == pytest.approx(10 * NEGATIVE_FAIL)

    def test_no_positive_weight_raises(self):
        with pytest.raises(NegativeSpectrumError):
            _clip_negative(np.zeros(4), "zpl")

    def test_coupled_spectra_stay_within_tolerance(self, a3d_params):
        """Test that the decomposition never trips the failure bound on a wide window."""
        zpl, psb = zpl_psb_decompose(a3d_params, window_grid(a3d_params, 40.0, 8001))
        assert np.all(zpl.values >= 0)
        assert np.all(psb.values >= 0)


class TestPostProcessing:
    """Tests for instrument response and export helpers."""

    def test_convolution_keeps_area(self, lorentzian_params):
        """Test that a Gaussian response preserves the integrated weight."""
        curve = emission_spectrum(lorentzian_params, window_grid(lorentzian_params, 20.0, 4001))
        smoothed = instrument_convolve(curve, 0.5)
        assert smoothed.area == pytest.approx(curve.area, rel=1e-3)
        assert smoothed.values.max() < curve.values.max()

    def test_convolution_disabled(self, lorentzian_params):
        """Test that a missing FWHM leaves the curve alone."""
        curve = emission_spectrum(lorentzian_params, [99.0, 100.0, 101.0])
        assert instrument_convolve(curve, None) is curve

    def test_negative_fwhm_raises(self, lorentzian_params):
        """Test that the FWHM must be non-negative."""
        curve = emission_spectrum(lorentzian_params, [99.0, 100.0, 101.0])
        with pytest.raises(QEPhononValidationError):
            instrument_convolve(curve, -1.0)

    def test_rows_and_dict(self, a3d_params):
        """Test CSV rows and the JSON payload."""
        curve = emission_spectrum(a3d_params, window_grid(a3d_params, 5.0, 11))
        rows = spectrum_rows(curve)
        assert len(rows) == 11
        assert len(rows[0]) == len(SPECTRUM_CSV_HEADER)
        assert rows[0][1] > rows[-1][1]  # higher frequency is shorter wavelength
        payload = spectrum_to_dict(curve, a3d_params)
        assert payload["label"] == "total"
        assert payload["params"]["z"] == 3
        assert payload["params"]["temperature_k"] == 4.0
