"""Normal modes of the chain and Lamb-Dicke couplings for a target pair.

The axial mode matrix has entries (dimensionless, eigenvalues mu_k >= 1)

    A_ii = 1 + 2 sum_{m != i} |u_i - u_m|^-3,   A_ij = -2 |u_i - u_j|^-3

and the radial matrix for a trap frequency omega_t (the radial COM mode)

    A_ii = (omega_t/omega_z)^2 - sum_{m != i} |u_i - u_m|^-3,
    A_ij = +|u_i - u_j|^-3.

Mode frequencies are ``omega_z * sqrt(mu_k)`` in both cases. The highest
radial mode is always the centre-of-mass mode at exactly omega_t.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .chain import IonChain, axial_hessian
from .config import LaserGeometry, SystemConfig, angular_to_hz, hz_to_angular
from .numerics import jacobi_eigh

LAMB_DICKE_WARN = 0.2  # |eta| beyond this leaves the regime the model assumes


class ZigZagInstabilityError(ValueError):
    """The radial confinement is too weak for a linear chain."""


class DegenerateModesError(ValueError):
    """Two modes of one direction are too close to order reliably."""


@dataclass(frozen=True)
class ModeStructure:
    """Eigenmodes of one principal direction.

    ``freqs`` are angular frequencies in rad/s, ascending; column k of
    ``participation`` is the orthonormal displacement pattern of mode k,
    sign-fixed so that the first entry of significant size is positive.
    """

    direction: str  # 'axial' | 'radial_a' | 'radial_b'
    freqs: np.ndarray = field(repr=False)
    participation: np.ndarray = field(repr=False)
    labels: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.freqs.size

    def splitting(self, k1: int = 0, k2: int = 1) -> float:
        """Frequency gap nu_k2 - nu_k1 in rad/s."""
        return float(self.freqs[k2] - self.freqs[k1])

    def to_csv_rows(self):
        """Rows (direction, index, freq_hz, b_0..b_{n-1})."""
        rows = []
        for k in range(self.n):
            rows.append(
                [self.direction, k, angular_to_hz(self.freqs[k])]
                + list(self.participation[:, k])
            )
        return rows


def _fix_column_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the first nonzero entry of each column positive.

    Entries that vanish by mirror symmetry come out of the eigensolver as
    O(1e-16) noise, so "nonzero" means above 1e-8 of the column maximum;
    that keeps the sign choice reproducible run to run.
    """
    v = vectors.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        cutoff = 1e-8 * np.abs(col).max()
        idx = np.flatnonzero(np.abs(col) > cutoff)[0]
        if col[idx] < 0:
            v[:, k] = -col
    return v


def _labels(direction: str, n: int) -> tuple[str, ...]:
    names = [""] * n
    if direction == "axial":
        names[0] = "com"
        if n >= 2:
            names[1] = "stretch"
    else:
        names[-1] = "com"
        if n >= 3:
            names[-2] = "tilt"
            names[0] = "zigzag"
        elif n == 2:
            names[0] = "rocking"
    return tuple(names)


def _check_nondegenerate(freqs: np.ndarray, direction: str) -> None:
    gaps = np.diff(freqs)
    if np.any(gaps < 1e-6 * freqs[:-1]):
        raise DegenerateModesError(
            f"near-degenerate {direction} modes; frequency ordering is not reliable"
        )


def axial_modes(chain: IonChain) -> ModeStructure:
    """Axial eigenmodes; the lowest is the COM mode with uniform participation."""
    mu, b = jacobi_eigh(axial_hessian(chain))
    freqs = chain.omega_z * np.sqrt(mu)
    _check_nondegenerate(freqs, "axial")
    return ModeStructure(
        direction="axial",
        freqs=freqs,
        participation=_fix_column_signs(b),
        labels=_labels("axial", chain.n),
    )


def radial_hessian(chain: IonChain, trap_freq: float) -> np.ndarray:
    diff = np.abs(chain.u[:, None] - chain.u[None, :])
    np.fill_diagonal(diff, np.inf)
    inv3 = 1.0 / diff**3
    a = inv3.copy()
    ratio2 = (trap_freq / chain.omega_z) ** 2
    np.fill_diagonal(a, ratio2 - inv3.sum(axis=1))
    return a


def radial_modes(chain: IonChain, trap_freq: float, direction: str = "radial_b") -> ModeStructure:
    """Radial eigenmodes for a trap (COM) angular frequency ``trap_freq``.

    Raises ZigZagInstabilityError when the lowest eigenvalue is not
    positive, i.e. the chain would buckle out of the line.
    """
    mu, b = jacobi_eigh(radial_hessian(chain, trap_freq))
    if mu[0] <= 0.0:
        raise ZigZagInstabilityError(
            f"zig-zag mode unstable: lowest radial eigenvalue {mu[0]:.6g} "
            f"(omega_z/2pi = {angular_to_hz(chain.omega_z):.6g} Hz is too stiff "
            f"for trap {angular_to_hz(trap_freq):.6g} Hz)"
        )
    freqs = chain.omega_z * np.sqrt(mu)
    _check_nondegenerate(freqs, direction)
    return ModeStructure(
        direction=direction,
        freqs=freqs,
        participation=_fix_column_signs(b),
        labels=_labels(direction, chain.n),
    )


@dataclass(frozen=True)
class GateCoupling:
    """Sideband couplings of one ion pair to all 2n radial modes.

    Mode arrays concatenate the radial-a block first, then radial-b.
    ``eta1``/``eta2`` are the Lamb-Dicke parameters of the first and
    second target ion; a differential drive phase of pi on the second
    ion (``even_flip``) is folded in as ``eta2 -> -eta2``.
    """

    pair: tuple[int, int]
    freqs: np.ndarray = field(repr=False)  # rad/s, per mode
    eta1: np.ndarray = field(repr=False)
    eta2: np.ndarray = field(repr=False)
    directions: tuple[str, ...] = field(repr=False, default=())
    mode_indices: tuple[int, ...] = field(repr=False, default=())
    even_flip: bool = False

    @property
    def n_modes(self) -> int:
        return self.freqs.size

    @property
    def eta_products(self) -> np.ndarray:
        """Per-mode eta1*eta2; these weight the entangling phase."""
        return self.eta1 * self.eta2

    def flat_index(self, direction: str, k: int) -> int:
        """Position of mode (direction, k) in the concatenated arrays."""
        for flat, (d, i) in enumerate(zip(self.directions, self.mode_indices)):
            if d == direction and i == k:
                return flat
        raise KeyError(f"no mode {k} in direction {direction!r}")

    def flipped(self) -> "GateCoupling":
        """Same coupling with the differential pi phase toggled."""
        return GateCoupling(
            pair=self.pair,
            freqs=self.freqs,
            eta1=self.eta1,
            eta2=-self.eta2,
            directions=self.directions,
            mode_indices=self.mode_indices,
            even_flip=not self.even_flip,
        )


def lamb_dicke_parameters(
    modes: ModeStructure, geometry: LaserGeometry, ion: int, mass: float, hbar: float
) -> np.ndarray:
    """eta_k of one ion for every mode of one radial direction."""
    ground_extent = np.sqrt(hbar / (2.0 * mass * modes.freqs))
    k_proj = geometry.effective_wavevector * np.cos(geometry.projection_angle)
    return modes.participation[ion, :] * k_proj * ground_extent


def gate_coupling(
    modes_a: ModeStructure,
    modes_b: ModeStructure,
    geometry: LaserGeometry,
    pair: tuple[int, int],
    mass: float,
    hbar: float,
    even_flip: bool = False,
) -> GateCoupling:
    """Couplings of ``pair`` to the 2n radial modes of both directions."""
    i1, i2 = pair
    freqs = np.concatenate([modes_a.freqs, modes_b.freqs])
    eta1 = np.concatenate(
        [
            lamb_dicke_parameters(modes_a, geometry, i1, mass, hbar),
            lamb_dicke_parameters(modes_b, geometry, i1, mass, hbar),
        ]
    )
    eta2 = np.concatenate(
        [
            lamb_dicke_parameters(modes_a, geometry, i2, mass, hbar),
            lamb_dicke_parameters(modes_b, geometry, i2, mass, hbar),
        ]
    )
    if even_flip:
        eta2 = -eta2
    worst = max(np.abs(eta1).max(), np.abs(eta2).max())
    if worst >= LAMB_DICKE_WARN:
        warnings.warn(
            f"Lamb-Dicke parameter {worst:.3f} exceeds {LAMB_DICKE_WARN}; "
            "the linearised sideband model is questionable",
            stacklevel=2,
        )
    n = modes_a.n
    return GateCoupling(
        pair=(int(i1), int(i2)),
        freqs=freqs,
        eta1=eta1,
        eta2=eta2,
        directions=tuple([modes_a.direction] * n + [modes_b.direction] * n),
        mode_indices=tuple(list(range(n)) + list(range(n))),
        even_flip=bool(even_flip),
    )


def build_coupling(config: SystemConfig, chain: IonChain, even_flip: bool | None = None) -> GateCoupling:
    """Chain + config -> GateCoupling for the configured target pair.

    ``even_flip`` defaults to True for even chains, which keeps the gate
    phase sign uniform across chain lengths.
    """
    if even_flip is None:
        even_flip = config.n_ions % 2 == 0
    modes_a = radial_modes(chain, hz_to_angular(config.radial_a_freq_hz), "radial_a")
    modes_b = radial_modes(chain, hz_to_angular(config.radial_b_freq_hz), "radial_b")
    return gate_coupling(
        modes_a,
        modes_b,
        config.geometry,
        config.target_pair,
        mass=config.constants.ion_mass,
        hbar=config.constants.hbar,
        even_flip=even_flip,
    )
