"""Phase-space trajectories and entangling phases of the driven modes.

For a drive envelope Omega(t) and a constant sideband detuning delta,
the coherent displacement of a mode and its accumulated geometric phase
are

    alpha(tau) = i * integral_0^tau Omega(t) exp(-i delta t) dt
    B(tau)     = - integral_0^tau Im( dalpha/dt * conj(alpha) ) dt
               = integral over t2 < t1 of Omega(t1) Omega(t2) sin(delta (t1 - t2))

alpha is (up to the factor i) the finite-window Fourier transform of the
envelope evaluated at delta; B is the enclosed phase-space area, odd in
delta and quadratic in the Rabi rate. Both are evaluated with composite
Gauss-Legendre quadrature on uniform panels; panel doubling verifies the
requested relative accuracy.

The total gate rotation angle is theta = sum_k eta1_k eta2_k B_k(tau)
over all driven modes, and its derivative with respect to the carrier
detuning is the quantity the balanced designs drive to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .config import TWO_PI
from .modes import GateCoupling
from .pulses import PulseShape, SquarePulse

GL_ORDER = 8
DEFAULT_PANELS = 512
RESONANCE_GUARD = TWO_PI * 100.0  # rad/s; sideband drives closer than this are rejected
FD_STEP = TWO_PI * 10.0  # rad/s; detuning-derivative stencil step


class QuadratureError(RuntimeError):
    """Panel doubling failed to reach the requested relative accuracy."""


class ResonanceError(ValueError):
    """A shifted sideband detuning sits on top of a motional mode."""


@dataclass(frozen=True)
class DetuningContext:
    """Carrier detuning of the blue tone plus a symmetric frequency error.

    ``domega`` models a common shift of both tones, equivalent to all
    mode frequencies moving by -domega: every sideband detuning becomes
    delta_k' = (delta_c - nu_k) + domega.
    """

    delta_c: float  # rad/s
    domega: float = 0.0  # rad/s

    def sideband_detunings(self, freqs: np.ndarray) -> np.ndarray:
        return self.delta_c - np.asarray(freqs) + self.domega


@dataclass(frozen=True)
class Trajectory:
    """End-of-gate displacement and phase for each mode."""

    detunings: np.ndarray  # rad/s, the shifted per-mode detunings used
    alphas: np.ndarray  # complex, dimensionless
    phases: np.ndarray  # B_k(tau), real


@dataclass(frozen=True)
class PhaseResult:
    theta: float  # rad
    dtheta_ddelta_c: float  # rad * s
    d2theta_ddelta_c2: float | None = None  # rad * s^2


def square_alpha_closed_form(omega0: float, tau: float, delta: float) -> complex:
    """alpha(tau) of the square pulse: Omega0 (1 - exp(-i delta tau)) / delta."""
    x = delta * tau
    if abs(x) < 1e-6:
        return omega0 * tau * (1j + x / 2.0 - 1j * x * x / 6.0)
    return omega0 * (1.0 - np.exp(-1j * x)) / delta


def square_phase_closed_form(omega0: float, tau: float, delta: float) -> float:
    """B(tau) of the square pulse: Omega0^2 (delta tau - sin delta tau) / delta^2."""
    x = delta * tau
    if abs(x) < 1e-3:
        return omega0**2 * tau**2 * x * (1.0 / 6.0 - x * x / 120.0)
    return omega0**2 * (x - np.sin(x)) / delta**2


class TrajectoryEngine:
    """Precomputed quadrature grids for one pulse shape.

    The envelope is sampled once per panel count; evaluating alpha/B for
    a new detuning then only needs complex exponentials. The inner
    (within-panel) part of the B double integral contracts to a fixed
    GL_ORDER x GL_ORDER matrix independent of the detuning, so batch
    evaluation over many detunings costs O(n_detunings * panels).
    """

    def __init__(self, pulse: PulseShape, panels: int = DEFAULT_PANELS, quad_rel: float = 1e-10):
        if panels < 1:
            raise ValueError("need at least one panel")
        self.pulse = pulse
        self.panels = int(panels)
        self.quad_rel = float(quad_rel)
        nodes, weights = leggauss(GL_ORDER)
        self._nodes = nodes
        self._weights = weights
        self._grids: dict[int, tuple] = {}

    def _grid(self, panels: int):
        cached = self._grids.get(panels)
        if cached is not None:
            return cached
        tau = self.pulse.tau
        h = tau / panels
        starts = h * np.arange(panels)
        off_out = h * (self._nodes + 1.0) / 2.0  # (GL_ORDER,)
        # inner GL nodes of the sub-interval [panel start, outer node]
        off_in = off_out[:, None] * (self._nodes[None, :] + 1.0) / 2.0
        omega_out = self.pulse.amplitude(starts[:, None] + off_out[None, :])
        omega_in = self.pulse.amplitude(
            starts[:, None, None] + off_in[None, :, :]
        )  # (panels, i, j)
        w1 = (h / 2.0) * self._weights[None, :] * omega_out  # outer quadrature weights
        w2 = w1 * (off_out[None, :] / 2.0)
        # within-panel double-integral kernel, summed over panels
        q = np.einsum("pi,j,pij->ij", w2, self._weights, omega_in)
        grid = (starts, off_out, off_in, w1, q)
        self._grids[panels] = grid
        return grid

    def alpha_and_phase_many(self, deltas, panels: int | None = None, chunk: int = 2048):
        """alpha(tau) and B(tau) for an array of detunings (rad/s)."""
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        starts, off_out, off_in, w1, q = self._grid(panels or self.panels)
        alphas = np.empty(deltas.shape, dtype=complex)
        phases = np.empty(deltas.shape, dtype=float)
        for lo in range(0, deltas.size, chunk):
            d = deltas[lo : lo + chunk, None]
            e_start = np.exp(-1j * d * starts[None, :])  # (m, panels)
            e_out = np.exp(-1j * d * off_out[None, :])  # (m, order)
            seg = np.einsum("pi,mi->mp", w1, e_out) * e_start  # per-panel integrals
            running = np.cumsum(seg, axis=1)
            alphas[lo : lo + chunk] = 1j * running[:, -1]
            before = running - seg  # exclusive prefix: integral up to the panel start
            cross = np.einsum("mp,mp->m", seg.conj(), before).imag
            e_in = np.exp(-1j * deltas[lo : lo + chunk, None, None] * off_in[None, :, :])
            within = np.einsum("mi,mij,ij->m", e_out.conj(), e_in, q).imag
            phases[lo : lo + chunk] = cross + within
        return alphas, phases

    def alpha_many(self, deltas, panels: int | None = None, chunk: int = 2048):
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        starts, off_out, _, w1, _ = self._grid(panels or self.panels)
        out = np.empty(deltas.shape, dtype=complex)
        for lo in range(0, deltas.size, chunk):
            d = deltas[lo : lo + chunk, None]
            e_start = np.exp(-1j * d * starts[None, :])
            e_out = np.exp(-1j * d * off_out[None, :])
            seg = np.einsum("pi,mi->mp", w1, e_out) * e_start
            out[lo : lo + chunk] = 1j * seg.sum(axis=1)
        return out

    def _refined(self, delta: float, want_alpha: bool):
        """Panel-doubling loop for a single detuning."""
        scale_a = self.pulse.omega0 * self.pulse.tau
        scale_b = (self.pulse.omega0 * self.pulse.tau) ** 2
        panels = self.panels
        prev_a, prev_b = self.alpha_and_phase_many([delta], panels=panels)
        for _ in range(5):
            panels *= 2
            cur_a, cur_b = self.alpha_and_phase_many([delta], panels=panels)
            ok_a = abs(cur_a[0] - prev_a[0]) <= self.quad_rel * (abs(cur_a[0]) + 1e-14 * scale_a)
            ok_b = abs(cur_b[0] - prev_b[0]) <= self.quad_rel * (abs(cur_b[0]) + 1e-14 * scale_b)
            if (ok_a or not want_alpha) and (ok_b or want_alpha):
                return complex(cur_a[0]) if want_alpha else float(cur_b[0])
            prev_a, prev_b = cur_a, cur_b
        raise QuadratureError(
            f"quadrature did not converge to {self.quad_rel:g} for delta={delta:g} rad/s"
        )

    def alpha(self, delta: float) -> complex:
        """alpha(tau) for one detuning, accuracy verified by panel doubling.

        The square pulse uses its closed form (the quadrature path is
        checked against it in the test suite instead).
        """
        if isinstance(self.pulse, SquarePulse):
            return square_alpha_closed_form(self.pulse.omega0, self.pulse.tau, delta)
        return self._refined(delta, want_alpha=True)

    def entangling_phase(self, delta: float) -> float:
        """B(tau) for one detuning, accuracy verified by panel doubling."""
        return self._refined(delta, want_alpha=False)

    def trajectory_path(self, delta: float, n_samples: int) -> np.ndarray:
        """alpha(t) sampled at n_samples uniform times across [0, tau].

        Diagnostic resolution: each partial integral re-runs the panel
        quadrature on [0, t], so the endpoint matches ``alpha``.
        """
        if n_samples < 2:
            raise ValueError("need at least two samples")
        tau = self.pulse.tau
        times = np.linspace(0.0, tau, int(n_samples))
        out = np.empty(times.size, dtype=complex)
        out[0] = 0.0
        nodes, weights = self._nodes, self._weights
        for s, t in enumerate(times[1:], start=1):
            panels = max(1, int(np.ceil(self.panels * t / tau)))
            h = t / panels
            starts = h * np.arange(panels)
            off = h * (nodes + 1.0) / 2.0
            pts = starts[:, None] + off[None, :]
            om = self.pulse.amplitude(pts)
            out[s] = 1j * np.sum((h / 2.0) * weights[None, :] * om * np.exp(-1j * delta * pts))
        return out


@lru_cache(maxsize=128)
def engine_for(pulse: PulseShape, panels: int = DEFAULT_PANELS, quad_rel: float = 1e-10):
    """Shared engine cache; pulses are frozen dataclasses, hence hashable."""
    return TrajectoryEngine(pulse, panels=panels, quad_rel=quad_rel)


def mode_trajectory(
    coupling: GateCoupling,
    pulse: PulseShape,
    ctx: DetuningContext,
    panels: int = DEFAULT_PANELS,
) -> Trajectory:
    """End-of-gate alpha_k and B_k for every mode of the coupling."""
    deltas = ctx.sideband_detunings(coupling.freqs)
    alphas, phases = engine_for(pulse, panels).alpha_and_phase_many(deltas)
    return Trajectory(detunings=deltas, alphas=alphas, phases=phases)


def check_resonance(deltas: np.ndarray, guard: float = RESONANCE_GUARD) -> None:
    bad = np.flatnonzero(np.abs(deltas) < guard)
    if bad.size:
        raise ResonanceError(
            f"sideband detuning within {guard / TWO_PI:.0f} Hz of modes {bad.tolist()}"
        )


def rotation_angle(
    coupling: GateCoupling,
    pulse: PulseShape,
    ctx: DetuningContext,
    panels: int = DEFAULT_PANELS,
) -> float:
    """theta = sum_k eta1_k eta2_k B_k(tau)."""
    deltas = ctx.sideband_detunings(coupling.freqs)
    _, phases = engine_for(pulse, panels).alpha_and_phase_many(deltas)
    return float(coupling.eta_products @ phases)


def phase_and_derivative(
    coupling: GateCoupling,
    pulse: PulseShape,
    ctx: DetuningContext,
    second: bool = False,
    panels: int = DEFAULT_PANELS,
    fd_step: float = FD_STEP,
) -> PhaseResult:
    """Rotation angle and its carrier-detuning derivative(s).

    The derivative uses a symmetric central difference, evaluated in one
    batched quadrature call; ``second`` adds the 3-point second
    difference. Raises ResonanceError if any shifted detuning comes
    within the guard band of a mode.
    """
    deltas = ctx.sideband_detunings(coupling.freqs)
    check_resonance(deltas)
    stacked = np.concatenate([deltas, deltas + fd_step, deltas - fd_step])
    _, phases = engine_for(pulse, panels).alpha_and_phase_many(stacked)
    n = coupling.n_modes
    products = coupling.eta_products
    theta0 = float(products @ phases[:n])
    theta_plus = float(products @ phases[n : 2 * n])
    theta_minus = float(products @ phases[2 * n :])
    dtheta = (theta_plus - theta_minus) / (2.0 * fd_step)
    d2theta = None
    if second:
        d2theta = (theta_plus - 2.0 * theta0 + theta_minus) / fd_step**2
    return PhaseResult(theta=theta0, dtheta_ddelta_c=dtheta, d2theta_ddelta_c2=d2theta)
