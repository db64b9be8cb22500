"""Balanced gate design: pick the carrier detuning that makes the
rotation angle stationary, then calibrate the peak Rabi rate.

Between two modes whose eta products have opposite signs, the detuning
derivative of the rotation angle changes sign, so a root exists where
frequency errors that inflate one mode's contribution are cancelled to
first order by the other's. Because a symmetric shift of both laser
tones enters every sideband detuning exactly like a carrier-detuning
offset, d theta / d delta_c = 0 is the same statement as first-order
insensitivity to common motional frequency error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .chain import IonChain, build_chain
from .config import TWO_PI, SystemConfig, angular_to_hz, hz_to_angular
from .errors import (
    ErrorBreakdown,
    displacement_error,
    error_breakdown,
    exact_fidelity,
    rotation_error,
    spin_eigensystem,
)
from .modes import GateCoupling, build_coupling
from .numerics import brent, golden_section_min
from .pulses import PulseShape, make_pulse
from .trajectory import (
    DEFAULT_PANELS,
    RESONANCE_GUARD,
    DetuningContext,
    Trajectory,
    check_resonance,
    engine_for,
    mode_trajectory,
    phase_and_derivative,
)

THETA_TARGET = math.pi / 2.0


class BracketError(ValueError):
    """No sign change of d theta / d delta_c across the candidate bracket."""


@dataclass(frozen=True)
class GateDesign:
    """A calibrated, balanced gate: coupling, pulse and carrier detuning."""

    coupling: GateCoupling
    pulse: PulseShape
    delta_c: float  # rad/s, blue-tone detuning from the carrier
    theta: float  # rad, achieved rotation angle (pi/2 after calibration)
    target_modes: tuple[str, int, int]
    diagnostics: dict = field(default_factory=dict)
    chain: IonChain | None = None

    @property
    def delta0(self) -> float:
        """Detuning above the lowest mode of the targeted direction, rad/s."""
        direction = self.target_modes[0]
        lowest = min(
            f for f, d in zip(self.coupling.freqs, self.coupling.directions) if d == direction
        )
        return self.delta_c - lowest

    def record(self) -> dict:
        """Serializable summary (frequencies in Hz)."""
        return {
            "delta_c_hz": angular_to_hz(self.delta_c),
            "delta0_hz": angular_to_hz(self.delta0),
            "omega0_hz": angular_to_hz(self.pulse.omega0),
            "theta": self.theta,
            "pulse_type": self.pulse.variant,
            "tau_s": self.pulse.tau,
            "z_s": getattr(self.pulse, "z", None),
            "target_modes": list(self.target_modes),
            "target_pair": list(self.coupling.pair),
            "even_flip": self.coupling.even_flip,
            "diagnostics": self.diagnostics,
        }

    def record_json(self) -> str:
        return json.dumps(self.record(), indent=2, sort_keys=True)


def midpoint_guess(nu_k1: float, nu_k2: float) -> float:
    """Arithmetic mean of two mode frequencies: the zeroth-order balance point."""
    if nu_k1 > nu_k2:
        raise ValueError("expected nu_k1 <= nu_k2")
    return 0.5 * (nu_k1 + nu_k2)


def _bracket_margin(pulse: PulseShape, gap: float) -> float:
    """Initial distance to keep from each mode while root hunting.

    2/z keeps the displacement suppression factor exp(-(delta z)^2)
    small for Gaussian envelopes; capped so the bracket stays non-empty
    for closely spaced modes.
    """
    z = getattr(pulse, "z", None)
    margin = max(2.0 / z if z else 0.0, TWO_PI * 2e3)
    return min(margin, 0.25 * gap)


def _margin_floor(pulse: PulseShape, gap: float) -> float:
    """Smallest admissible margin when widening the bracket.

    The enclosed-area B(delta) of a Gaussian envelope peaks near
    |delta| = 0.92/z; inside that turnover a mode's own term produces a
    spurious stationary point of theta right next to the mode, so the
    margins never shrink past 1.2/z.
    """
    z = getattr(pulse, "z", None)
    return max(1.2 / z if z else 1e-3 * gap, TWO_PI * 400.0)


def solve_balance(
    coupling: GateCoupling,
    pulse: PulseShape,
    k1: int,
    k2: int,
    direction: str = "radial_b",
    root_tol: float = TWO_PI * 1.0,
    panels: int = DEFAULT_PANELS,
) -> float:
    """Carrier detuning between modes k1 < k2 where d theta/d delta_c = 0.

    The root is independent of the trial Rabi rate (theta scales as
    omega0^2 uniformly). If the derivative does not change sign at the
    initial margin, the bracket is widened toward the modes a few times
    before giving up; the error reports both endpoint derivatives.
    """
    i1 = coupling.flat_index(direction, k1)
    i2 = coupling.flat_index(direction, k2)
    nu1, nu2 = coupling.freqs[i1], coupling.freqs[i2]
    if nu1 >= nu2:
        raise ValueError("k1 must be the lower-frequency mode")
    gap = nu2 - nu1

    def dtheta(delta_c: float) -> float:
        res = phase_and_derivative(
            coupling, pulse, DetuningContext(delta_c), panels=panels
        )
        return res.dtheta_ddelta_c

    margin_lo = margin_hi = _bracket_margin(pulse, gap)
    floor = _margin_floor(pulse, gap)
    last = None
    for _ in range(16):
        a, b = nu1 + margin_lo, nu2 - margin_hi
        fa, fb = dtheta(a), dtheta(b)
        last = (a, fa, b, fb)
        if np.sign(fa) != np.sign(fb):
            root = brent(dtheta, a, b, xtol=root_tol)
            if not (nu1 < root < nu2):
                raise BracketError("balance root escaped the inter-mode interval")
            return float(root)
        # widen toward the modes; the root may hug the weakly coupled one
        shrunk = False
        if margin_hi * 0.5 >= floor:
            margin_hi *= 0.5
            shrunk = True
        if margin_lo * 0.5 >= floor:
            margin_lo *= 0.5
            shrunk = True
        if not shrunk:
            break
    a, fa, b, fb = last
    raise BracketError(
        "d theta/d delta_c does not change sign between modes "
        f"{k1} and {k2} of {direction}: f({angular_to_hz(a):.6g} Hz) = {fa:.6g}, "
        f"f({angular_to_hz(b):.6g} Hz) = {fb:.6g}"
    )


def calibrate_omega0(
    coupling: GateCoupling,
    pulse: PulseShape,
    delta_c: float,
    panels: int = DEFAULT_PANELS,
) -> tuple[PulseShape, float]:
    """Rescale the peak Rabi rate so |theta| = pi/2, exactly in one step.

    theta is quadratic in omega0, so
    omega0 -> omega0 sqrt((pi/2)/|theta_trial|). Returns the rescaled
    pulse and the achieved (signed) theta.
    """
    ctx = DetuningContext(delta_c)
    traj = mode_trajectory(coupling, pulse, ctx, panels=panels)
    theta_trial = float(coupling.eta_products @ traj.phases)
    if theta_trial == 0.0:
        raise ValueError("trial rotation angle is zero; cannot calibrate omega0")
    calibrated = pulse.with_omega0(pulse.omega0 * math.sqrt(THETA_TARGET / abs(theta_trial)))
    traj2 = mode_trajectory(coupling, calibrated, ctx, panels=panels)
    theta = float(coupling.eta_products @ traj2.phases)
    if abs(abs(theta) - THETA_TARGET) > 1e-9:
        raise RuntimeError(f"calibration failed: |theta| = {abs(theta):.12f}")
    return calibrated, theta


def design_gate(
    config: SystemConfig,
    target_modes: tuple[int, int] = (0, 1),
    direction: str = "radial_b",
    delta0_override: float | None = None,
) -> GateDesign:
    """Full design chain: modes, balance solve, Rabi-rate calibration.

    Targets the lowest two modes of the chosen radial direction by
    default. ``delta0_override`` (rad/s above that direction's lowest
    mode) skips the balance solve and produces an unbalanced reference
    design at a fixed detuning. The achieved rotation angle is always
    normalised to +pi/2; when the calibrated angle comes out negative
    the differential-phase flip on the second ion is toggled, which
    flips theta exactly and leaves the displacement error untouched.
    """
    chain = build_chain(config)
    coupling = build_coupling(config, chain)
    pulse = make_pulse(config.pulse)
    panels = DEFAULT_PANELS
    k1, k2 = target_modes

    bracket_note = None
    if delta0_override is None:
        delta_c = solve_balance(
            coupling,
            pulse,
            k1,
            k2,
            direction=direction,
            root_tol=hz_to_angular(config.tol.root_hz),
            panels=panels,
        )
        nu1 = coupling.freqs[coupling.flat_index(direction, k1)]
        nu2 = coupling.freqs[coupling.flat_index(direction, k2)]
        bracket_note = [angular_to_hz(nu1), angular_to_hz(nu2)]
    else:
        lowest = min(
            f for f, d in zip(coupling.freqs, coupling.directions) if d == direction
        )
        delta_c = lowest + delta0_override

    pulse, theta = calibrate_omega0(coupling, pulse, delta_c, panels=panels)
    if theta < 0.0:
        coupling = coupling.flipped()
        theta = -theta

    res = phase_and_derivative(
        coupling, pulse, DetuningContext(delta_c), second=True, panels=panels
    )
    breakdown = error_breakdown(
        coupling, mode_trajectory(coupling, pulse, DetuningContext(delta_c), panels=panels)
    )
    diagnostics = {
        "dtheta_ddelta_c": res.dtheta_ddelta_c,
        "d2theta_ddelta_c2": res.d2theta_ddelta_c2,
        "bracket_hz": bracket_note,
        "balanced": delta0_override is None,
        "eps_d": breakdown.eps_d,
        "eps_r": breakdown.eps_r,
        "eps_s": breakdown.eps_s,
        "fidelity": breakdown.fidelity,
    }
    return GateDesign(
        coupling=coupling,
        pulse=pulse,
        delta_c=float(delta_c),
        theta=float(theta),
        target_modes=(direction, k1, k2),
        diagnostics=diagnostics,
        chain=chain,
    )


def evaluate_with_error(
    design: GateDesign, domega: float, with_rho: bool = True, panels: int = DEFAULT_PANELS
) -> ErrorBreakdown:
    """Error breakdown of a fixed design under a symmetric frequency error.

    Raises ResonanceError when the shifted drive lands on a mode; sweep
    drivers that must emit flagged rows use ``evaluate_lenient``.
    """
    ctx = DetuningContext(design.delta_c, domega)
    check_resonance(ctx.sideband_detunings(design.coupling.freqs))
    traj = mode_trajectory(design.coupling, design.pulse, ctx, panels=panels)
    return error_breakdown(design.coupling, traj, with_rho=with_rho)


def evaluate_lenient(
    design: GateDesign, domega: float, with_rho: bool = False, panels: int = DEFAULT_PANELS
) -> tuple[ErrorBreakdown, bool]:
    """Like evaluate_with_error but flags resonance instead of raising."""
    ctx = DetuningContext(design.delta_c, domega)
    deltas = ctx.sideband_detunings(design.coupling.freqs)
    flagged = bool(np.any(np.abs(deltas) < RESONANCE_GUARD))
    traj = mode_trajectory(design.coupling, design.pulse, ctx, panels=panels)
    return error_breakdown(design.coupling, traj, with_rho=with_rho), flagged


@dataclass(frozen=True)
class BreakdownCurve:
    """Vectorised error metrics over a grid of frequency errors."""

    domegas: np.ndarray
    eps_d: np.ndarray
    eps_r: np.ndarray
    fidelity: np.ndarray
    flags: np.ndarray  # True where some mode sits inside the resonance guard

    @property
    def eps_s(self) -> np.ndarray:
        return self.eps_d + self.eps_r


def breakdown_curve(
    design: GateDesign, domegas, with_fidelity: bool = True, panels: int = DEFAULT_PANELS
) -> BreakdownCurve:
    """eps_d / eps_r / fidelity over an array of frequency errors.

    All (mode, grid-point) pairs go through the quadrature in one batch.
    Points where a shifted detuning falls inside the resonance guard are
    still evaluated (the quadrature is regular there) but flagged.
    """
    domegas = np.asarray(domegas, dtype=float)
    freqs = design.coupling.freqs
    deltas = (design.delta_c - freqs)[None, :] + domegas[:, None]
    engine = engine_for(design.pulse, panels)
    alphas, phases = engine.alpha_and_phase_many(deltas.ravel())
    alphas = alphas.reshape(deltas.shape)
    phases = phases.reshape(deltas.shape)
    eigsys = spin_eigensystem(design.coupling)
    products = design.coupling.eta_products

    n = domegas.size
    eps_d = np.empty(n)
    eps_r = np.empty(n)
    fid = np.full(n, np.nan)
    for i in range(n):
        traj = Trajectory(detunings=deltas[i], alphas=alphas[i], phases=phases[i])
        _, eps_d[i] = displacement_error(eigsys, traj)
        eps_r[i] = rotation_error(float(products @ phases[i]))
        if with_fidelity:
            fid[i] = exact_fidelity(eigsys, traj)
    flags = np.any(np.abs(deltas) < RESONANCE_GUARD, axis=1)
    return BreakdownCurve(domegas=domegas, eps_d=eps_d, eps_r=eps_r, fidelity=fid, flags=flags)


def eps_s_curve(design: GateDesign, domegas, panels: int = DEFAULT_PANELS) -> np.ndarray:
    """eps_s over an array of frequency errors, batched over modes x grid."""
    curve = breakdown_curve(design, domegas, with_fidelity=False, panels=panels)
    return curve.eps_s


def sensitivity(
    design: GateDesign,
    half_range: float = TWO_PI * 3e3,
    grid_step: float = TWO_PI * 50.0,
    refine_tol: float = TWO_PI * 1.0,
) -> float:
    """Worst eps_s within +-half_range of the error that minimises eps_s.

    The minimum is located on a dense grid and polished by golden
    section; the maximum over the window is then taken on the same grid
    (window endpoints included).
    """
    search = 2.0 * half_range
    grid = np.arange(-search, search + 0.5 * grid_step, grid_step)
    vals = eps_s_curve(design, grid)
    i_min = int(np.argmin(vals))
    if 0 < i_min < grid.size - 1:
        lo, hi = grid[i_min - 1], grid[i_min + 1]
        best = golden_section_min(lambda w: eps_s_curve(design, [w])[0], lo, hi, refine_tol)
    else:
        best = grid[i_min]
    window = np.arange(best - half_range, best + half_range + 0.5 * grid_step, grid_step)
    window[-1] = best + half_range  # include the far endpoint exactly
    return float(eps_s_curve(design, window).max())
