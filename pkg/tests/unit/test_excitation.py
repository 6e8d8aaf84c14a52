"""
Tests for pulsed excitation: Rabi sweeps, detuned maps and scan assembly.
"""

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from qephonon.bath import polaron_shift
from qephonon.excitation import (
    DriveHamiltonian,
    PhononAssistedFactory,
    assemble,
    count_local_maxima,
    exciton_population,
    first_maximum,
    phonon_assisted_map,
    phonon_assisted_sequence,
    plateau_region,
    pulse_envelope,
    rabi_sweep,
    refine_argmax,
    resonant_sequence,
    scaling_transform,
    swing_up_inputs,
    super_map,
    super_sequence,
    with_bath_shift,
)
from qephonon.exceptions import PulseError, QEPhononValidationError
from qephonon.models.bath import BathTemperature
from qephonon.models.excitation import (
    EngineSettings,
    GaussianPulse,
    PointResult,
    PulseSequence,
    ScanAxis,
    ScanResult,
)
from qephonon.models.run_config import PRESETS


T4 = BathTemperature(4.0)
ENGINE = EngineSettings(dt=0.05, memory_ps=3.0, svd_tol=1e-7, max_bond=64)


def closed_population(seq: PulseSequence) -> float:
    return exciton_population(seq, None, T4, ENGINE).population


class TestPulses:
    """Tests for pulse shapes and sequence validation."""

    def test_envelope_peak(self):
        """Test Omega(0) = Theta / (sqrt(pi) t_p)."""
        pulse = GaussianPulse(theta=math.pi, t_p=3.0)
        assert pulse_envelope(pulse, 0.0) == pytest.approx(math.sqrt(math.pi) / 3.0, rel=1e-12)

    def test_envelope_area(self):
        """Test that the envelope integrates to the pulse area."""
        pulse = GaussianPulse(theta=2.0, t_p=1.5)
        t = np.linspace(-15.0, 15.0, 20001)
        assert trapezoid(pulse_envelope(pulse, t), t) == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize("kwargs", [
        {"theta": 1.0, "t_p": 0.0},
        {"theta": -1.0, "t_p": 1.0},
        {"theta": 1.0, "t_p": 1.0, "delta": float("inf")},
    ])
    def test_invalid_pulse_raises(self, kwargs):
        """Test rejected pulse parameters."""
        with pytest.raises(PulseError):
            GaussianPulse(**kwargs)

    def test_sequence_length_limits(self):
        """Test that sequences hold one or two pulses."""
        pulse = GaussianPulse(1.0, 1.0)
        with pytest.raises(PulseError):
            PulseSequence(())
        with pytest.raises(PulseError):
            PulseSequence((pulse, pulse, pulse))

    def test_window_follows_longest_pulse(self):
        """Test the [-3 t_p, 3 t_p] propagation window."""
        seq = PulseSequence((GaussianPulse(1.0, 1.0, -5.0), GaussianPulse(1.0, 2.0, -9.0)))
        assert seq.window == (-6.0, 6.0)
        assert seq.readout_time == 6.0

    def test_drive_is_hermitian(self):
        """Test the rotating-frame drive Hamiltonian."""
        seq = PulseSequence((GaussianPulse(3.0, 1.0, -5.0), GaussianPulse(2.0, 1.0, -9.0)), polaron_shift=0.3)
        h = DriveHamiltonian(seq).batch(np.linspace(-3.0, 3.0, 7))
        np.testing.assert_allclose(h, np.conj(np.swapaxes(h, 1, 2)), atol=1e-15)
        assert np.all(h[:, 0, 0] == 0) and np.all(h[:, 1, 1] == 0)

    def test_bath_shift_is_applied(self):
        """Test that the coupled bath's polaron shift enters the phases."""
        sd = PRESETS["InAs"].spectral_density
        seq = with_bath_shift(resonant_sequence(math.pi, 3.0), sd)
        assert seq.polaron_shift == pytest.approx(polaron_shift(sd))
        assert with_bath_shift(seq, None).polaron_shift == 0.0


class TestResonantExcitation:
    """Tests for the closed-system Rabi oscillation."""

    def test_pi_pulse_inverts(self):
        """Test full inversion by a pi pulse."""
        readout = exciton_population(resonant_sequence(math.pi, 3.0), None, T4, ENGINE)
        assert readout.population == pytest.approx(1.0, abs=1e-6)
        assert readout.method == "closed"
        assert readout.evaluation_time == pytest.approx(9.0)

    def test_half_pi_pulse(self):
        """Test the equal superposition after pi/2."""
        assert closed_population(resonant_sequence(math.pi / 2, 3.0)) == pytest.approx(0.5, abs=1e-4)

    def test_two_pi_pulse_returns(self):
        """Test that a 2 pi pulse returns to the ground state."""
        assert closed_population(resonant_sequence(2 * math.pi, 3.0)) == pytest.approx(0.0, abs=1e-6)

    def test_dark_sequence(self):
        """Test that zero-area pulses are not propagated."""
        readout = exciton_population(resonant_sequence(0.0, 3.0), PRESETS["InAs"].spectral_density, T4, ENGINE)
        assert readout.method == "dark"
        assert readout.population == 0.0

    def test_scaling_transform_is_invariant(self):
        """Test that t_p / C with C delta leaves P_X unchanged without a bath."""
        seq = PulseSequence((GaussianPulse(theta=3 * math.pi, t_p=2.0, delta=2.0),))
        scaled = scaling_transform(seq, 3.0)
        assert scaled.pulses[0].t_p == pytest.approx(2.0 / 3.0)
        assert scaled.pulses[0].delta == pytest.approx(6.0)
        fine = EngineSettings(dt=0.01, memory_ps=3.0, svd_tol=1e-7, max_bond=64)
        original = exciton_population(seq, None, T4, fine).population
        transformed = exciton_population(scaled, None, T4, fine).population
        assert transformed == pytest.approx(original, abs=1e-7)

    def test_scaling_factor_must_be_positive(self):
        """Test that C <= 0 is rejected."""
        with pytest.raises(PulseError):
            scaling_transform(resonant_sequence(math.pi, 1.0), 0.0)

    def test_rabi_sweep_first_maximum(self):
        """Test the first maximum of a bath-free Rabi curve."""
        thetas = np.linspace(0.5, 2.5, 5) * math.pi
        curves = rabi_sweep(None, T4, [3.0], thetas, ENGINE)
        assert len(curves) == 1
        curve = curves[0]
        assert curve.first_max_value == pytest.approx(1.0, abs=1e-6)
        assert curve.first_max_theta == pytest.approx(math.pi)
        assert curve.local_maxima == 1
        assert curve.to_dict()["first_maximum"]["theta_pi"] == pytest.approx(1.0)

    def test_rabi_sweep_per_duration_engine(self):
        """Test that the engine may depend on the pulse duration."""
        seen = []

        def engine_for(t_p):
            seen.append(t_p)
            return ENGINE

        rabi_sweep(None, T4, [1.0, 3.0], [math.pi], engine_for)
        assert seen == [1.0, 3.0]


class TestCoupledExcitation:
    """Tests for a short propagation through the tensor-network engine."""

    def test_phonons_reduce_inversion(self):
        """Test that the bath damps a resonant pi pulse."""
        engine = EngineSettings(dt=0.1, memory_ps=1.0, svd_tol=1e-7, max_bond=16)
        readout = exciton_population(
            resonant_sequence(math.pi, 1.0), PRESETS["InAs"].spectral_density, T4, engine
        )
        assert readout.method == "tempo"
        assert 0.8 < readout.population < 1.0


class TestCurveAnalysis:
    """Tests for maxima detection on sampled curves."""

    def test_first_maximum(self):
        """Test the first interior maximum."""
        assert first_maximum([0.0, 1.0, 2.0, 3.0], [0.1, 0.5, 0.3, 0.8]) == (0.5, 1.0)

    def test_first_maximum_of_rising_curve(self):
        """Test that a monotone curve reports its last point."""
        assert first_maximum([0.0, 1.0, 2.0], [0.1, 0.2, 0.3]) == (0.3, 2.0)

    def test_count_local_maxima(self):
        """Test peak counting with a prominence floor."""
        assert count_local_maxima([0.0, 1.0, 0.0, 1.0, 0.0]) == 2
        assert count_local_maxima([0.0, 1.0, 0.9995, 0.9998, 0.0]) == 1


class TestScanAssembly:
    """Tests for grid assembly, plateaus and refinement."""

    @pytest.fixture
    def axes(self):
        return ScanAxis("delta", (0.0, 1.0, 2.0), "rad/ps"), ScanAxis("theta", (1.0, 2.0, 3.0), "rad")

    def test_assemble_places_by_index(self, axes):
        """Test that arrival order does not matter."""
        rows, cols = axes
        results = [PointResult(row=i, col=j, population=0.1 * i + 0.01 * j) for i in range(3) for j in range(3)]
        scan = assemble(rows, cols, list(reversed(results)), label="grid")
        assert scan.values[2, 1] == pytest.approx(0.21)
        assert scan.argmax.row_index == 2 and scan.argmax.col_index == 2
        assert scan.all_converged

    def test_assemble_missing_point_raises(self, axes):
        """Test that a hole in the grid is an error."""
        rows, cols = axes
        results = [PointResult(row=0, col=0, population=0.5)]
        with pytest.raises(PulseError):
            assemble(rows, cols, results)

    def test_plateau_region(self, axes):
        """Test the cells at or above a level."""
        rows, cols = axes
        values = np.array([[0.1, 0.2, 0.3], [0.4, 0.99, 0.2], [0.1, 0.98, 0.1]])
        scan = ScanResult(rows, cols, values, np.ones((3, 3), dtype=bool))
        assert plateau_region(scan, 0.98) == [(1.0, 2.0), (2.0, 2.0)]

    def test_refine_argmax(self, axes):
        """Test the refined grid around the coarse maximum."""
        rows, cols = axes
        values = np.full((3, 3), 0.1)
        values[1, 1] = 0.9
        scan = ScanResult(rows, cols, values, np.ones((3, 3), dtype=bool), label="pa", metadata={"kind": "x"})
        submitted = []

        def fake_runner(tasks):
            submitted.extend(tasks)
            return [PointResult(t.row, t.col, 0.5) for t in tasks]

        refined = refine_argmax(scan, PhononAssistedFactory(3.0), None, T4, ENGINE, n=5, runner=fake_runner)
        np.testing.assert_allclose(refined.rows.array, np.linspace(0.0, 2.0, 5))
        np.testing.assert_allclose(refined.cols.array, np.linspace(1.0, 3.0, 5))
        assert refined.label == "pa-refined"
        assert refined.metadata["refined_from"]["value"] == 0.9
        assert refined.metadata["kind"] == "x"
        assert len(submitted) == 25

    def test_scan_result_shape_checked(self, axes):
        """Test that values must match the axes."""
        rows, cols = axes
        with pytest.raises(QEPhononValidationError):
            ScanResult(rows, cols, np.zeros((2, 3)), np.ones((2, 3), dtype=bool))


class TestDetunedSchemes:
    """Tests for phonon-assisted and swing-up sequences."""

    def test_phonon_assisted_needs_blue_detuning(self):
        """Test that negative detuning is rejected."""
        with pytest.raises(PulseError):
            phonon_assisted_sequence(-1.0, math.pi)
        with pytest.raises(PulseError):
            phonon_assisted_map(None, T4, [-1.0, 1.0], [math.pi], ENGINE)

    def test_super_needs_red_detuning(self):
        """Test that non-negative detunings are rejected."""
        pulse1 = GaussianPulse.from_pi_units(11.0, 3.0, -5.0)
        with pytest.raises(PulseError):
            super_sequence(pulse1, 0.0, math.pi)
        with pytest.raises(PulseError):
            super_map(None, T4, pulse1, [-10.0, 1.0], [math.pi], ENGINE)

    def test_phonon_assisted_map_metadata(self):
        """Test a tiny bath-free detuned map."""
        scan = phonon_assisted_map(None, T4, [0.5, 1.0], [math.pi], ENGINE, t_p=2.0)
        assert scan.values.shape == (2, 1)
        assert scan.metadata == {"kind": "phonon-assisted", "t_p_ps": 2.0}
        assert np.all((scan.values >= 0) & (scan.values <= 1))

    def test_swing_up_inputs(self):
        """Test the swing-up layouts."""
        layout, sd, pulse1 = swing_up_inputs("InAs")
        assert sd == PRESETS["InAs"].spectral_density
        assert pulse1.theta_pi == pytest.approx(11.0)
        assert pulse1.delta == -5.0 and pulse1.t_p == 3.0
        assert layout.delta2_range == (-40.0, -6.0)
        scaled, sd_free, pulse_free = swing_up_inputs("free-scaled")
        assert sd_free is None
        assert pulse_free.t_p == 1.0 and pulse_free.delta == -15.0

    def test_unknown_layout_raises(self):
        """Test that only known layouts are accepted."""
        with pytest.raises(PulseError):
            swing_up_inputs("A3D")
