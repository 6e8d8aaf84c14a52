"""
Tests for spectrum ingestion, preprocessing, fitting and derived quantities.

Fits here use broad lines on small grids; the noisy round trip of the
reference emitter lives in the integration suite.
"""

import json
import math
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from qephonon.exceptions import (
    FitWindowError,
    QEPhononValidationError,
    SpectrumDataError,
    SpectrumFormatError,
)
from qephonon.fitting import (
    ALPHA_BOUNDS,
    DEFAULT_ALPHA,
    MIN_WIDTH,
    OMEGA_C_BOUNDS,
    TABLE_HEADER,
    initial_guess,
    load_spectrum,
    preprocess,
    report_derived,
    synthesize_measured,
    table_row,
    _near_bounds,
)
from qephonon.fitting import fit as fit_lineshape
from qephonon.lineshape import emission_spectrum
from qephonon.models.bath import UNITS, BathTemperature, MaterialParams, SpectralDensity
from qephonon.models.run_config import get_preset
from qephonon.models.spectrum import (
    FIT_PARAMETER_NAMES,
    BaselineMode,
    FitConfig,
    FitDomain,
    FitResult,
    FitSeries,
    LineshapeParams,
    MeasuredSpectrum,
    WeightMode,
)
from tests.fixtures.spectra import synthetic_a2d, write_spectrum_csv


def result_from_preset(name: str, temperature_k: float = 4.0) -> FitResult:
    preset = get_preset(name)
    return FitResult(
        values={
            "omega_X_tilde": preset.omega_X_tilde,
            "A": preset.A,
            "W": preset.W,
            "alpha": preset.alpha,
            "omega_c": preset.omega_c,
        },
        sigmas={},
        z=preset.z,
        temperature_k=temperature_k,
        residual_norm=0.0,
        converged=True,
        message="",
        nfev=0,
        label=name,
    )


class TestLoadSpectrum:
    """Tests for the two-column spectrum reader."""

    def setup_method(self):
        self.temp_dir = Path(tempfile.mkdtemp())

    def teardown_method(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_comments_header_and_sorting(self):
        """Test that comments and the header are skipped and rows sorted."""
        path = write_spectrum_csv(
            self.temp_dir / "s.csv",
            [(806.0, 3.0), (805.0, 2.0), (807.0, 1.0)],
            comments=["exported by spectrometer"],
        )
        spectrum = load_spectrum(path)
        np.testing.assert_array_equal(spectrum.wavelengths_nm, [805.0, 806.0, 807.0])
        np.testing.assert_array_equal(spectrum.counts, [2.0, 3.0, 1.0])
        assert spectrum.metadata.source == str(path)

    def test_headerless_file(self):
        """Test that a header is optional."""
        path = write_spectrum_csv(self.temp_dir / "s.csv", [(805.0, 2.0), (806.0, 3.0)], header=None)
        assert len(load_spectrum(path)) == 2

    def test_identical_duplicates_are_dropped(self):
        """Test that exact duplicate rows collapse."""
        path = write_spectrum_csv(
            self.temp_dir / "s.csv", [(805.0, 2.0), (805.0, 2.0), (806.0, 3.0)]
        )
        assert len(load_spectrum(path)) == 2

    def test_conflicting_duplicates_raise(self):
        """Test that one wavelength with two counts is rejected."""
        path = write_spectrum_csv(
            self.temp_dir / "s.csv", [(805.0, 2.0), (805.0, 5.0), (806.0, 3.0)]
        )
        with pytest.raises(SpectrumDataError):
            load_spectrum(path)

    def test_unparseable_row_raises(self):
        """Test that a bad data row reports its line."""
        path = self.temp_dir / "s.csv"
        path.write_text("wavelength_nm,counts\n805.0,2.0\n806.0,abc\n", encoding="utf-8")
        with pytest.raises(SpectrumFormatError) as exc_info:
            load_spectrum(path)
        assert exc_info.value.context["line_number"] == 3

    def test_too_few_rows_raise(self):
        """Test that one sample is not a spectrum."""
        path = write_spectrum_csv(self.temp_dir / "s.csv", [(805.0, 2.0)])
        with pytest.raises(SpectrumDataError):
            load_spectrum(path)

    def test_non_finite_count_raises(self):
        """Test that NaN counts are rejected."""
        path = write_spectrum_csv(self.temp_dir / "s.csv", [(805.0, 2.0), (806.0, float("nan"))])
        with pytest.raises(SpectrumDataError):
            load_spectrum(path)

    def test_unsupported_format_raises(self):
        """Test that only CSV is accepted."""
        path = write_spectrum_csv(self.temp_dir / "s.csv", [(805.0, 2.0), (806.0, 3.0)])
        with pytest.raises(SpectrumFormatError):
            load_spectrum(path, format="spe")

    def test_metadata_sidecar(self):
        """Test that a JSON sidecar fills the acquisition metadata."""
        path = write_spectrum_csv(self.temp_dir / "s.csv", [(805.0, 2.0), (806.0, 3.0)])
        (self.temp_dir / "s.json").write_text(
            json.dumps({"temperature_k": 4.0, "emitter_label": "A"}), encoding="utf-8"
        )
        metadata = load_spectrum(path).metadata
        assert metadata.temperature_k == 4.0
        assert metadata.emitter_label == "A"

    def test_bad_sidecar_raises(self):
        """Test that a broken sidecar is a format error."""
        path = write_spectrum_csv(self.temp_dir / "s.csv", [(805.0, 2.0), (806.0, 3.0)])
        (self.temp_dir / "s.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(SpectrumFormatError):
            load_spectrum(path)


class TestPreprocess:
    """Tests for windowing, baselines and the frequency conversion."""

    def test_synthetic_round_trip_without_baseline(self):
        """Test that preprocess inverts the detector mapping of synthesize_measured."""
        spectrum = synthetic_a2d()
        series = preprocess(spectrum, FitConfig(baseline=BaselineMode.NONE))
        expected = emission_spectrum(get_preset("A2D").lineshape_params(4.0), series.omega).values
        np.testing.assert_allclose(series.intensity, expected, rtol=1e-9, atol=1e-9 * expected.max())
        assert np.all(np.diff(series.omega) > 0)
        assert series.label == "A2D"

    def test_constant_baseline_removes_background(self):
        """Test that a flat background is estimated from the lowest decile."""
        spectrum = synthetic_a2d(background=50.0)
        series = preprocess(spectrum, FitConfig(baseline=BaselineMode.CONSTANT))
        # lowest decile still holds some sideband tail
        assert 50.0 <= series.baseline[0] < 70.0
        assert np.all(series.baseline == series.baseline[0])

    def test_fixed_baseline_value(self):
        """Test that a configured baseline value wins over the estimate."""
        series = preprocess(synthetic_a2d(), FitConfig(baseline_value=3.0))
        assert np.all(series.baseline == 3.0)

    def test_wavelength_domain_keeps_counts(self):
        """Test that the wavelength domain skips the Jacobian."""
        spectrum = synthetic_a2d()
        series = preprocess(spectrum, FitConfig(baseline=BaselineMode.NONE, domain=FitDomain.WAVELENGTH))
        np.testing.assert_allclose(np.sort(series.intensity), np.sort(spectrum.counts))

    def test_poisson_weights_are_normalized(self):
        """Test that Poisson weights peak at one."""
        series = preprocess(synthetic_a2d(), FitConfig(weights=WeightMode.POISSON))
        assert series.weights.max() == pytest.approx(1.0)
        assert np.all(series.weights > 0)

    def test_window_outside_data_raises(self):
        """Test that a window missing the data is rejected."""
        with pytest.raises(FitWindowError):
            preprocess(synthetic_a2d(), FitConfig(window_nm=(700.0, 710.0)))

    def test_window_with_too_few_samples_raises(self):
        """Test the minimum sample count."""
        with pytest.raises(FitWindowError):
            preprocess(synthetic_a2d(), FitConfig(window_nm=(805.0, 805.2)))

    def test_window_limits_samples(self):
        """Test that the window keeps only samples inside it."""
        series = preprocess(synthetic_a2d(), FitConfig(window_nm=(802.99, 809.01)))
        assert len(series) == 301


class TestFitConfig:
    """Tests for fit settings validation."""

    @pytest.mark.parametrize("kwargs", [
        {"z": 4},
        {"multi_start": 0},
        {"ftol": 0.0},
        {"initial_guess": {"gamma": 1.0}},
    ])
    def test_invalid_settings_raise(self, kwargs):
        """Test rejected fit settings."""
        with pytest.raises(QEPhononValidationError):
            FitConfig(**kwargs)

    def test_string_modes_are_coerced(self):
        """Test that run files may pass modes as strings."""
        cfg = FitConfig(baseline="linear", weights="poisson", domain="wavelength")
        assert cfg.baseline is BaselineMode.LINEAR
        assert cfg.weights is WeightMode.POISSON
        assert cfg.domain is FitDomain.WAVELENGTH


class TestInitialGuess:
    """Tests for the starting point of the least-squares fit."""

    @pytest.fixture
    def lorentzian_series(self):
        omega = np.linspace(90.0, 110.0, 2001)
        intensity = 0.5 / (0.25 + (omega - 100.0) ** 2)
        return FitSeries(omega, intensity, np.ones_like(omega), np.zeros_like(omega))

    def test_peak_and_width(self, lorentzian_series):
        """Test peak position, FWHM and area-based amplitude."""
        y = lorentzian_series.intensity / lorentzian_series.intensity.max()
        x0 = initial_guess(lorentzian_series, y, FitConfig(), 1.0)
        assert x0[0] == pytest.approx(100.0)
        assert x0[2] == pytest.approx(1.0, abs=0.02)
        assert x0[1] == pytest.approx(0.5, rel=0.05)
        assert x0[3] == DEFAULT_ALPHA

    def test_overrides_win(self, lorentzian_series):
        """Test that configured guesses replace the estimate, A in raw units."""
        y = lorentzian_series.intensity
        x0 = initial_guess(lorentzian_series, y, FitConfig(initial_guess={"alpha": 0.1, "A": 10.0}), 2.0)
        assert x0[3] == 0.1
        assert x0[1] == 5.0

    def test_fit_needs_samples(self):
        """Test that fewer than five samples cannot fix five parameters."""
        omega = np.linspace(99.0, 101.0, 4)
        series = FitSeries(omega, np.ones(4), np.ones(4), np.zeros(4))
        with pytest.raises(FitWindowError):
            fit_lineshape(series, FitConfig())

    def test_fit_needs_signal(self):
        """Test that an all-zero window is rejected."""
        omega = np.linspace(99.0, 101.0, 20)
        series = FitSeries(omega, np.zeros(20), np.ones(20), np.zeros(20))
        with pytest.raises(FitWindowError):
            fit_lineshape(series, FitConfig())


def series_from(p: LineshapeParams, half_span: float = 12.0, n: int = 241) -> FitSeries:
    """Noiseless model intensities on a small grid around the line"""
    omega = np.linspace(p.omega_X_tilde - half_span, p.omega_X_tilde + half_span, n)
    intensity = emission_spectrum(p, omega).values
    return FitSeries(omega, intensity, np.ones_like(omega), np.zeros_like(omega), label="synthetic")


@pytest.fixture
def coupled_params():
    """Broad 3D emitter; short time window keeps each model evaluation cheap"""
    return LineshapeParams(
        omega_X_tilde=1000.0, A=2.0, W=2.0, sd=SpectralDensity(0.4, 1.6, 3), T=BathTemperature(4.0)
    )


class TestFit:
    """Tests for the least-squares fit on noiseless model spectra."""

    def test_noiseless_round_trip(self, coupled_params):
        """Test that all five parameters are recovered."""
        result = fit_lineshape(series_from(coupled_params), FitConfig(z=3, multi_start=2))

        truth = dict(zip(FIT_PARAMETER_NAMES, coupled_params.as_vector()))
        for name in FIT_PARAMETER_NAMES:
            assert result.values[name] == pytest.approx(truth[name], rel=1e-3), name
        assert result.converged
        assert result.at_bounds == []
        assert result.unidentifiable == []
        assert all(np.isfinite(result.sigmas[name]) for name in FIT_PARAMETER_NAMES)

    def test_count_scale_only_moves_amplitude(self, coupled_params):
        """Test that scaling the counts scales A and leaves the rest unchanged."""
        series = series_from(coupled_params)
        scaled = FitSeries(series.omega, 250.0 * series.intensity, series.weights, series.baseline)
        cfg = FitConfig(z=3, multi_start=1)

        base = fit_lineshape(series, cfg)
        result = fit_lineshape(scaled, cfg)

        assert result.values["A"] == pytest.approx(250.0 * base.values["A"], rel=1e-6)
        for name in ("omega_X_tilde", "W", "alpha", "omega_c"):
            assert result.values[name] == pytest.approx(base.values[name], rel=1e-6), name

    def test_sample_order_is_irrelevant(self, coupled_params, tmp_path):
        """Test that a shuffled export gives the same fit after loading."""
        wavelengths = np.linspace(
            float(UNITS.omega_to_wavelength_nm(coupled_params.omega_X_tilde + 10.0)),
            float(UNITS.omega_to_wavelength_nm(coupled_params.omega_X_tilde - 10.0)),
            201,
        )
        measured = synthesize_measured(coupled_params, wavelengths)
        rows = list(zip(measured.wavelengths_nm, measured.counts))
        order = np.random.default_rng(5).permutation(len(rows))
        ordered_path = write_spectrum_csv(tmp_path / "ordered.csv", rows)
        shuffled_path = write_spectrum_csv(tmp_path / "shuffled.csv", [rows[i] for i in order])
        cfg = FitConfig(z=3, baseline=BaselineMode.NONE, multi_start=1)

        ordered = fit_lineshape(preprocess(load_spectrum(ordered_path), cfg), cfg)
        result = fit_lineshape(preprocess(load_spectrum(shuffled_path), cfg), cfg)

        for name in FIT_PARAMETER_NAMES:
            assert result.values[name] == pytest.approx(ordered.values[name], rel=1e-9), name

    def test_uncoupled_line_reports_unidentifiable_bath(self):
        """Test that a pure Lorentzian flags alpha and omega_c and drops their sigmas."""
        p = LineshapeParams(1000.0, 1.0, 2.0, SpectralDensity(0.0, 2.0, 3), BathTemperature(4.0))

        result = fit_lineshape(series_from(p), FitConfig(z=3, multi_start=1))

        assert result.values["W"] == pytest.approx(2.0, rel=0.02)
        assert result.values["omega_X_tilde"] == pytest.approx(1000.0, abs=0.01)
        assert result.unidentifiable == ["alpha", "omega_c"]
        assert math.isnan(result.sigmas["alpha"])
        assert math.isnan(result.sigmas["omega_c"])
        assert np.isfinite(result.sigmas["W"])
        assert set(result.at_bounds) <= {"alpha", "omega_c"}

    def test_residual_trace_follows_accepted_iterates(self, coupled_params):
        """Test that the recorded costs start at the initial guess and only decrease."""
        series = series_from(coupled_params)
        result = fit_lineshape(series, FitConfig(z=3, multi_start=1))

        trace = np.array(result.residual_trace)
        assert trace.size >= 2
        assert np.all(np.diff(trace) <= 0)
        assert trace[0] > trace[-1]
        final_cost = 0.5 * (result.residual_norm / np.max(series.intensity)) ** 2
        assert trace[-1] == pytest.approx(final_cost, rel=1e-6, abs=1e-24)


class TestBoundFlags:
    """Tests for the distance-to-bound check behind at_bounds."""

    def test_parameter_a_hair_inside_is_flagged(self):
        """Test a cutoff stopped just above its lower bound."""
        lower = np.array([990.0, 1e-12, MIN_WIDTH, ALPHA_BOUNDS[0], OMEGA_C_BOUNDS[0]])
        upper = np.array([1010.0, np.inf, 20.0, ALPHA_BOUNDS[1], OMEGA_C_BOUNDS[1]])
        x = np.array([1000.0, 1.0, 0.5, 1.6e-8, 0.05000013])

        near_lower, near_upper = _near_bounds(x, lower, upper)

        assert list(near_lower) == [False, False, False, True, True]
        assert not near_upper.any()

    def test_upper_bound_and_unbounded_amplitude(self):
        """Test the upper side and that an infinite bound never flags."""
        lower = np.array([990.0, 1e-12, MIN_WIDTH, 0.0, 0.05])
        upper = np.array([1010.0, np.inf, 20.0, 5.0, 20.0])
        x = np.array([1009.9995, 1e6, 10.0, 4.0, 19.9999])

        near_lower, near_upper = _near_bounds(x, lower, upper)

        assert list(near_upper) == [True, False, False, False, True]
        assert not near_lower.any()


class TestDerived:
    """Tests for S, R, B and the table row of a fitted emitter."""

    def test_2d_report_has_no_zero_phonon_weight(self):
        """Test that B and the areas are omitted for a 2D bath."""
        derived = report_derived(result_from_preset("A2D"), MaterialParams.wse2())
        assert derived.huang_rhys == pytest.approx(0.8446, abs=1e-3)
        assert derived.radius_nm == pytest.approx(1.98, abs=0.01)
        assert derived.franck_condon is None
        assert derived.areas is None

    def test_3d_report_has_areas(self):
        """Test B and the ZPL/PSB split for a 3D bath."""
        derived = report_derived(result_from_preset("A3D"), MaterialParams.wse2())
        assert derived.franck_condon == pytest.approx(0.66, abs=0.01)
        assert derived.areas.ratio == pytest.approx(0.79, abs=0.03)
        payload = derived.to_dict()
        assert payload["B"] == derived.franck_condon
        assert payload["areas"]["psb_fraction"] > 0.5

    def test_emitter_b_3d_row(self):
        """Test R, S, B and the area split of emitter B in a 3D bath."""
        derived = report_derived(result_from_preset("B3D"), MaterialParams.wse2())
        assert derived.radius_nm == pytest.approx(5.74, rel=0.02)
        assert derived.huang_rhys == pytest.approx(0.39, rel=0.02)
        assert derived.franck_condon == pytest.approx(0.68, rel=0.02)
        assert derived.areas.ratio == pytest.approx(0.90, abs=0.03)
        assert derived.areas.psb_fraction == pytest.approx(0.53, abs=0.01)

    def test_quantum_dot_reference_row(self):
        """Test the weakly coupled InAs bath on a generic line."""
        sd = get_preset("InAs").spectral_density
        result = FitResult(
            values={"omega_X_tilde": 2000.0, "A": 1.0, "W": 0.5, "alpha": sd.alpha, "omega_c": sd.omega_c},
            sigmas={},
            z=3,
            temperature_k=4.0,
            residual_norm=0.0,
            converged=True,
            message="",
            nfev=0,
            label="InAs",
        )
        derived = report_derived(result, MaterialParams.wse2())
        assert derived.radius_nm == pytest.approx(2.889, rel=0.01)
        assert derived.huang_rhys == pytest.approx(0.073, rel=0.02)
        assert derived.franck_condon == pytest.approx(0.953, abs=0.005)
        assert derived.areas.psb_fraction < 0.15

    def test_table_row(self):
        """Test the summary table layout."""
        result = result_from_preset("A3D")
        derived = report_derived(result, MaterialParams.wse2())
        row = table_row(result, derived)
        assert len(row) == len(TABLE_HEADER)
        assert row[0] == "A3D"
        assert row[1] == "3D"
        assert row[-1] == derived.franck_condon

    def test_table_row_2d_leaves_b_blank(self):
        """Test that B is blank for a 2D fit."""
        result = result_from_preset("B2D")
        row = table_row(result, report_derived(result, MaterialParams.wse2()))
        assert row[1] == "2D"
        assert row[-1] == ""


class TestSynthesize:
    """Tests for synthetic detector counts."""

    def test_background_and_noise(self):
        """Test that background is additive and noise is reproducible by seed."""
        p = get_preset("A2D").lineshape_params(4.0)
        wavelengths = np.linspace(801.0, 811.0, 101)
        clean = synthesize_measured(p, wavelengths)
        shifted = synthesize_measured(p, wavelengths, background=10.0)
        np.testing.assert_allclose(shifted.counts - clean.counts, 10.0)
        a = synthesize_measured(p, wavelengths, noise=0.05, seed=3)
        b = synthesize_measured(p, wavelengths, noise=0.05, seed=3)
        np.testing.assert_array_equal(a.counts, b.counts)
        assert isinstance(a, MeasuredSpectrum)
        assert a.metadata.temperature_k == 4.0
