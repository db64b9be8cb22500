"""Carrier Rabi-rate envelopes Omega(t) for the three pulse families.

All shapes vanish outside the gate window [0, tau] and are non-negative
inside it. ``omega0`` is the peak angular Rabi rate in rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PulseSpec, hz_to_angular
from .numerics import NaturalCubicSpline


@dataclass(frozen=True)
class PulseShape:
    """Base envelope; subclasses implement the in-window profile."""

    omega0: float  # rad/s
    tau: float  # s

    def __post_init__(self):
        if self.omega0 < 0:
            raise ValueError("omega0 must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    def _profile(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def amplitude(self, t):
        """Omega(t) in rad/s; zero outside [0, tau]."""
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.tau)
        out = np.zeros(t.shape)
        if np.any(inside):
            out[inside] = self._profile(t[inside])
        if out.ndim == 0 or t.ndim == 0:
            return float(np.where(inside, out, 0.0))
        return out

    def with_omega0(self, omega0: float) -> "PulseShape":
        """Same shape rescaled to a new peak Rabi rate."""
        raise NotImplementedError

    def to_csv_rows(self, n_samples: int = 201):
        """Waveform samples as rows (t_us, omega_over_2pi_hz)."""
        ts = np.linspace(0.0, self.tau, n_samples)
        om = self.amplitude(ts)
        return [[t * 1e6, o / (2.0 * np.pi)] for t, o in zip(ts, om)]


@dataclass(frozen=True)
class SquarePulse(PulseShape):
    """Constant Rabi rate over the whole gate window."""

    variant = "square"

    def _profile(self, t):
        return np.full(t.shape, self.omega0)

    def with_omega0(self, omega0):
        return SquarePulse(omega0=omega0, tau=self.tau)


@dataclass(frozen=True)
class TruncGaussianPulse(PulseShape):
    """Gaussian of width z centred on tau/2, truncated to [0, tau]."""

    z: float = 25e-6  # s

    variant = "trunc_gaussian"

    def __post_init__(self):
        super().__post_init__()
        if self.z <= 0:
            raise ValueError("z must be positive")

    def _profile(self, t):
        return self.omega0 * np.exp(-((t - self.tau / 2.0) ** 2) / (2.0 * self.z**2))

    def with_omega0(self, omega0):
        return TruncGaussianPulse(omega0=omega0, tau=self.tau, z=self.z)


@dataclass(frozen=True)
class SplineGaussianPulse(PulseShape):
    """Squared natural cubic spline through square-root-of-Gaussian knots.

    The hardware this models shapes each beam with a spline through
    sqrt-Gaussian amplitude samples; the two-photon Rabi rate is the
    square of that spline, so it matches the truncated Gaussian exactly
    at every knot and is non-negative by construction. Knot times are
    equally spaced across [0, tau] with non-zero endpoint values.
    """

    z: float = 25e-6  # s, width of the squared (two-photon) Gaussian
    n_knots: int = 13

    variant = "spline_gaussian"

    def __post_init__(self):
        super().__post_init__()
        if self.z <= 0:
            raise ValueError("z must be positive")
        if self.n_knots < 4:
            raise ValueError("need at least 4 knots")
        knot_t = np.linspace(0.0, self.tau, self.n_knots)
        # sqrt of the target Gaussian: width z*sqrt(2) in amplitude
        knot_y = np.sqrt(self.omega0) * np.exp(
            -((knot_t - self.tau / 2.0) ** 2) / (4.0 * self.z**2)
        )
        object.__setattr__(self, "_spline", NaturalCubicSpline(knot_t, knot_y))

    @property
    def knot_times(self) -> np.ndarray:
        return self._spline.x

    def _profile(self, t):
        return self._spline(t) ** 2

    def with_omega0(self, omega0):
        return SplineGaussianPulse(omega0=omega0, tau=self.tau, z=self.z, n_knots=self.n_knots)


def spline_gaussian(omega0: float, tau: float, z: float, n_knots: int = 13) -> SplineGaussianPulse:
    """Spline approximation to the truncated Gaussian (see SplineGaussianPulse)."""
    return SplineGaussianPulse(omega0=omega0, tau=tau, z=z, n_knots=n_knots)


def make_pulse(spec: PulseSpec) -> PulseShape:
    """PulseShape from config-file units (Hz, s)."""
    omega0 = hz_to_angular(spec.omega0_hz)
    if spec.type == "square":
        return SquarePulse(omega0=omega0, tau=spec.tau_s)
    if spec.type == "trunc_gaussian":
        return TruncGaussianPulse(omega0=omega0, tau=spec.tau_s, z=spec.z_s)
    if spec.type == "spline_gaussian":
        return SplineGaussianPulse(omega0=omega0, tau=spec.tau_s, z=spec.z_s, n_knots=spec.n_knots)
    raise ValueError(f"unknown pulse type {spec.type!r}")
