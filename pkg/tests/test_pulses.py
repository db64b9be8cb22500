import numpy as np
import pytest

from msgate import PulseSpec, SplineGaussianPulse, SquarePulse, TruncGaussianPulse, make_pulse
from msgate.pulses import spline_gaussian

TAU = 200e-6


def test_square_amplitude():
    p = SquarePulse(omega0=2.0, tau=TAU)
    assert p.amplitude(0.0) == 2.0
    assert p.amplitude(TAU) == 2.0
    assert p.amplitude(-1e-9) == 0.0
    assert p.amplitude(TAU + 1e-9) == 0.0


def test_gaussian_peak_and_edges():
    p = TruncGaussianPulse(omega0=1.0, tau=TAU, z=25e-6)
    assert p.amplitude(TAU / 2) == pytest.approx(1.0)
    # (t - tau/2)^2 / (2 z^2) = 8 at the window edges
    assert p.amplitude(0.0) == pytest.approx(np.exp(-8.0), rel=1e-12)
    assert p.amplitude(TAU) == pytest.approx(np.exp(-8.0), rel=1e-12)
    assert p.amplitude(-1e-9) == 0.0
    assert p.amplitude(TAU + 1e-9) == 0.0


def test_spline_matches_gaussian_at_knots():
    s = spline_gaussian(omega0=1.0, tau=TAU, z=26.5e-6, n_knots=13)
    g = TruncGaussianPulse(omega0=1.0, tau=TAU, z=26.5e-6)
    np.testing.assert_allclose(s.amplitude(s.knot_times), g.amplitude(s.knot_times), atol=1e-12)
    # endpoints are non-zero truncations of the underlying Gaussian
    assert s.amplitude(0.0) > 0.0
    assert s.amplitude(TAU) > 0.0


def test_spline_dense_deviation_bound():
    ts = np.linspace(0.0, TAU, 10_000)
    g = TruncGaussianPulse(omega0=1.0, tau=TAU, z=26.5e-6)
    dev13 = np.abs(spline_gaussian(1.0, TAU, 26.5e-6, 13).amplitude(ts) - g.amplitude(ts)).max()
    assert dev13 <= 0.01
    dev101 = np.abs(spline_gaussian(1.0, TAU, 26.5e-6, 101).amplitude(ts) - g.amplitude(ts)).max()
    assert dev101 < dev13


def test_symmetry_about_midpoint():
    offsets = np.linspace(0.0, TAU / 2, 300)
    for pulse in (
        SquarePulse(omega0=1.0, tau=TAU),
        TruncGaussianPulse(omega0=1.0, tau=TAU, z=25e-6),
        spline_gaussian(1.0, TAU, 25e-6, 13),
    ):
        left = pulse.amplitude(TAU / 2 - offsets)
        right = pulse.amplitude(TAU / 2 + offsets)
        np.testing.assert_allclose(left, right, atol=1e-12)


def test_monotone_ramp_for_gaussian_variants():
    half = np.linspace(0.0, TAU / 2, 2000)
    for pulse in (
        TruncGaussianPulse(omega0=1.0, tau=TAU, z=25e-6),
        spline_gaussian(1.0, TAU, 25e-6, 13),
        spline_gaussian(1.0, TAU, 26.5e-6, 13),
    ):
        amp = pulse.amplitude(half)
        assert np.all(np.diff(amp) > -1e-12)


def test_omega0_homogeneity():
    ts = np.linspace(0.0, TAU, 101)
    for make in (
        lambda o: SquarePulse(omega0=o, tau=TAU),
        lambda o: TruncGaussianPulse(omega0=o, tau=TAU, z=25e-6),
        lambda o: spline_gaussian(o, TAU, 25e-6, 13),
    ):
        base = make(1.0).amplitude(ts)
        scaled = make(3.7).amplitude(ts)
        np.testing.assert_allclose(scaled, 3.7 * base, rtol=1e-12, atol=1e-15)


def test_nonnegative_everywhere():
    ts = np.linspace(-10e-6, TAU + 10e-6, 5000)
    for pulse in (
        SquarePulse(omega0=1.0, tau=TAU),
        TruncGaussianPulse(omega0=1.0, tau=TAU, z=12e-6),
        spline_gaussian(1.0, TAU, 12e-6, 13),
    ):
        assert np.all(pulse.amplitude(ts) >= 0.0)


def test_make_pulse_and_rescale():
    p = make_pulse(PulseSpec(type="spline_gaussian", omega0_hz=1e5, tau_s=TAU, z_s=25e-6, n_knots=13))
    assert isinstance(p, SplineGaussianPulse)
    assert p.omega0 == pytest.approx(2 * np.pi * 1e5)
    p2 = p.with_omega0(2.0 * p.omega0)
    assert p2.amplitude(TAU / 2) == pytest.approx(2.0 * p.amplitude(TAU / 2), rel=1e-12)


def test_waveform_csv_rows():
    p = TruncGaussianPulse(omega0=2 * np.pi * 1e5, tau=TAU, z=25e-6)
    rows = p.to_csv_rows(n_samples=11)
    assert len(rows) == 11
    t_us, omega_hz = rows[5]
    assert t_us == pytest.approx(100.0)
    assert omega_hz == pytest.approx(1e5)


def test_validation():
    with pytest.raises(ValueError):
        SquarePulse(omega0=-1.0, tau=TAU)
    with pytest.raises(ValueError):
        TruncGaussianPulse(omega0=1.0, tau=TAU, z=0.0)
    with pytest.raises(ValueError):
        spline_gaussian(1.0, TAU, 25e-6, n_knots=3)
