"""Physical constants, unit conventions, and the experiment configuration.

Unit conventions used throughout the package:

* configuration files, CSV outputs and serialized records carry ordinary
  frequencies in Hz (and times in seconds unless a ``_us`` suffix says
  otherwise);
* everything internal to the dynamics (detunings, mode frequencies, Rabi
  rates) is an angular frequency in rad/s.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

TWO_PI = 2.0 * math.pi

# SI values; the elementary charge is exact, the rest are CODATA.
ELEMENTARY_CHARGE = 1.602176634e-19  # C
EPSILON_0 = 8.8541878128e-12  # F/m
HBAR = 1.054571817e-34  # J s
ATOMIC_MASS = 1.66053906660e-27  # kg
YB171_MASS = 170.936 * ATOMIC_MASS  # kg, 171Yb+

PULSE_TYPES = ("square", "trunc_gaussian", "spline_gaussian")


class ConfigError(ValueError):
    """Raised when a configuration file fails schema or stability checks."""


def hz_to_angular(f):
    """Ordinary frequency in Hz -> angular frequency in rad/s."""
    return TWO_PI * f


def angular_to_hz(w):
    """Angular frequency in rad/s -> ordinary frequency in Hz."""
    return w / TWO_PI


@dataclass(frozen=True)
class PhysicalConstants:
    """Ion mass and electrostatic constants entering the chain model."""

    ion_mass: float = YB171_MASS  # kg
    coulomb_coeff: float = ELEMENTARY_CHARGE**2 / (4.0 * math.pi * EPSILON_0)  # kg m^3 / s^2
    hbar: float = HBAR  # J s

    def __post_init__(self):
        if self.ion_mass <= 0 or self.coulomb_coeff <= 0 or self.hbar <= 0:
            raise ConfigError("physical constants must be strictly positive")


@dataclass(frozen=True)
class LaserGeometry:
    """Raman beam geometry: wavelength, wavevector factor and projection.

    ``wavevector_factor`` is 2 for counter-propagating Raman beams; the
    effective wavevector magnitude is ``factor * 2 pi / wavelength``.
    ``projection_angle`` is the angle between the effective k-vector and
    each radial principal axis (pi/4 couples both directions equally).
    """

    wavelength: float = 355e-9  # m
    wavevector_factor: float = 2.0
    projection_angle: float = math.pi / 4.0  # rad

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ConfigError("wavelength must be positive")
        if not 0.0 <= self.projection_angle <= math.pi / 2.0:
            raise ConfigError("projection_angle must lie in [0, pi/2]")

    @property
    def effective_wavevector(self) -> float:
        """|Delta k| of the two-photon transition, 1/m."""
        return self.wavevector_factor * TWO_PI / self.wavelength


@dataclass(frozen=True)
class PulseSpec:
    """Pulse parameters as they appear in the config file (Hz / s units)."""

    type: str = "trunc_gaussian"
    omega0_hz: float = 1e5  # carrier Rabi rate peak, Hz (trial value; designs recalibrate)
    tau_s: float = 200e-6
    z_s: float = 25e-6  # Gaussian width; ignored by the square pulse
    n_knots: int = 13  # spline_gaussian only

    def __post_init__(self):
        if self.type not in PULSE_TYPES:
            raise ConfigError(f"pulse type must be one of {PULSE_TYPES}, got {self.type!r}")
        if self.omega0_hz < 0:
            raise ConfigError("omega0_hz must be non-negative")
        if self.tau_s <= 0:
            raise ConfigError("tau_s must be positive")
        if self.type != "square" and self.z_s <= 0:
            raise ConfigError("z_s must be positive for Gaussian pulse shapes")
        if self.type == "spline_gaussian" and self.n_knots < 4:
            raise ConfigError("n_knots must be at least 4")


@dataclass(frozen=True)
class Tolerances:
    quad_rel: float = 1e-10  # relative quadrature accuracy target
    root_hz: float = 1.0  # balance-point root tolerance on delta_c, Hz

    def __post_init__(self):
        if self.quad_rel <= 0 or self.root_hz <= 0:
            raise ConfigError("tolerances must be positive")


@dataclass(frozen=True)
class SystemConfig:
    """Validated description of one chain + laser + pulse arrangement.

    Exactly one of ``axial_freq_hz`` (centre-of-mass axial mode) and
    ``center_spacing_m`` (equilibrium separation of the two designated
    centre ions) must be given. Immutable, so it can be shared freely
    across concurrent sweep workers.
    """

    n_ions: int
    radial_a_freq_hz: float
    radial_b_freq_hz: float
    axial_freq_hz: float | None = None
    center_spacing_m: float | None = None
    geometry: LaserGeometry = field(default_factory=LaserGeometry)
    target_pair: tuple[int, int] | None = None
    pulse: PulseSpec = field(default_factory=PulseSpec)
    tol: Tolerances = field(default_factory=Tolerances)
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if self.n_ions < 2:
            raise ConfigError("n_ions must be at least 2 (a gate needs a pair)")
        if (self.axial_freq_hz is None) == (self.center_spacing_m is None):
            raise ConfigError("exactly one of axial_freq_hz and center_spacing_m is required")
        if self.axial_freq_hz is not None and self.axial_freq_hz <= 0:
            raise ConfigError("axial_freq_hz must be positive")
        if self.center_spacing_m is not None and self.center_spacing_m <= 0:
            raise ConfigError("center_spacing_m must be positive")
        if self.radial_a_freq_hz <= self.radial_b_freq_hz:
            raise ConfigError("radial_a_freq_hz must exceed radial_b_freq_hz")
        if self.target_pair is None:
            object.__setattr__(self, "target_pair", default_target_pair(self.n_ions))
        i, j = self.target_pair
        if i == j or not (0 <= i < self.n_ions) or not (0 <= j < self.n_ions):
            raise ConfigError("target_pair indices must be distinct and in [0, n_ions)")
        if self.implied_axial_freq_hz() >= self.radial_b_freq_hz:
            raise ConfigError(
                "axial frequency must stay below the radial trap frequencies "
                f"(axial {self.implied_axial_freq_hz():.6g} Hz vs radial-b "
                f"{self.radial_b_freq_hz:.6g} Hz)"
            )

    def implied_axial_freq_hz(self) -> float:
        """Axial COM frequency in Hz, whichever way the axial well was specified."""
        if self.axial_freq_hz is not None:
            return self.axial_freq_hz
        from .chain import axial_freq_for_center_spacing

        omega = axial_freq_for_center_spacing(
            self.n_ions, self.center_spacing_m, constants=self.constants
        )
        return angular_to_hz(omega)

    def to_dict(self) -> dict:
        d = {
            "n_ions": self.n_ions,
            "radial_a_freq_hz": self.radial_a_freq_hz,
            "radial_b_freq_hz": self.radial_b_freq_hz,
            "wavelength_m": self.geometry.wavelength,
            "wavevector_factor": self.geometry.wavevector_factor,
            "projection_angle_rad": self.geometry.projection_angle,
            "target_pair": list(self.target_pair),
            "pulse": {
                "type": self.pulse.type,
                "omega0_hz": self.pulse.omega0_hz,
                "tau_s": self.pulse.tau_s,
                "z_s": self.pulse.z_s,
                "n_knots": self.pulse.n_knots,
            },
            "tol": {"quad_rel": self.tol.quad_rel, "root_hz": self.tol.root_hz},
        }
        if self.axial_freq_hz is not None:
            d["axial_freq_hz"] = self.axial_freq_hz
        else:
            d["center_spacing_m"] = self.center_spacing_m
        return d

    def config_hash(self) -> str:
        """Short stable hash identifying this configuration in CSV headers."""
        import hashlib

        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def default_target_pair(n_ions: int) -> tuple[int, int]:
    """The two ions immediately left and right of the chain centre.

    For even chains these are the two middle ions. For odd chains they
    are the two neighbours of the centre ion: the centre ion itself sits
    on a node of every mirror-antisymmetric mode, so pairing it with a
    neighbour gives a vanishing coupling product on the second-lowest
    radial mode and no balanced operating point exists between the
    lowest two modes.
    """
    if n_ions % 2 == 0:
        return (n_ions // 2 - 1, n_ions // 2)
    return ((n_ions - 1) // 2 - 1, (n_ions - 1) // 2 + 1)


_TOP_LEVEL_KEYS = {
    "n_ions",
    "axial_freq_hz",
    "center_spacing_m",
    "radial_a_freq_hz",
    "radial_b_freq_hz",
    "wavelength_m",
    "wavevector_factor",
    "projection_angle_rad",
    "target_pair",
    "pulse",
    "tol",
}


def config_from_dict(raw: dict) -> SystemConfig:
    """Build a validated SystemConfig from a parsed key/value tree."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a key/value mapping")
    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("n_ions", "radial_a_freq_hz", "radial_b_freq_hz"):
        if key not in raw:
            raise ConfigError(f"missing required config key: {key}")

    geometry = LaserGeometry(
        wavelength=float(raw.get("wavelength_m", 355e-9)),
        wavevector_factor=float(raw.get("wavevector_factor", 2.0)),
        projection_angle=float(raw.get("projection_angle_rad", math.pi / 4.0)),
    )

    pulse_raw = raw.get("pulse", {})
    if not isinstance(pulse_raw, dict):
        raise ConfigError("'pulse' must be a mapping")
    pulse = PulseSpec(
        type=str(pulse_raw.get("type", "trunc_gaussian")),
        omega0_hz=float(pulse_raw.get("omega0_hz", 1e5)),
        tau_s=float(pulse_raw.get("tau_s", 200e-6)),
        z_s=float(pulse_raw.get("z_s", 25e-6)),
        n_knots=int(pulse_raw.get("n_knots", 13)),
    )

    tol_raw = raw.get("tol", {})
    if not isinstance(tol_raw, dict):
        raise ConfigError("'tol' must be a mapping")
    tol = Tolerances(
        quad_rel=float(tol_raw.get("quad_rel", 1e-10)),
        root_hz=float(tol_raw.get("root_hz", 1.0)),
    )

    pair = raw.get("target_pair")
    if pair is not None:
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise ConfigError("target_pair must be a pair of ion indices")
        pair = (int(pair[0]), int(pair[1]))

    n_ions = int(raw["n_ions"])
    if n_ions < 2:
        raise ConfigError("n_ions must be at least 2 (a gate needs a pair)")

    return SystemConfig(
        n_ions=n_ions,
        radial_a_freq_hz=float(raw["radial_a_freq_hz"]),
        radial_b_freq_hz=float(raw["radial_b_freq_hz"]),
        axial_freq_hz=(float(raw["axial_freq_hz"]) if "axial_freq_hz" in raw else None),
        center_spacing_m=(
            float(raw["center_spacing_m"]) if "center_spacing_m" in raw else None
        ),
        geometry=geometry,
        target_pair=pair,
        pulse=pulse,
        tol=tol,
    )


def load_config(path) -> SystemConfig:
    """Load and validate a JSON configuration file.

    Raises ConfigError on parse failures, schema violations and on
    configurations that would make the linear chain radially unstable.
    """
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from exc
    return config_from_dict(raw)
