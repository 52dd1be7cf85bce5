"""THz channel synthesis for the direct, Alice-RIS and RIS-Bob segments.

Each segment is a sum of rank-one path contributions built from array
response vectors. Gains are power transmissivities, so every segment must
come out passive (largest singular value at most one).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

__all__ = [
    "InvalidGeometryError",
    "PassivityError",
    "UlaGeometry",
    "RisGeometry",
    "PathComponent",
    "LinkBudget",
    "LinkChannels",
    "ThzLink",
    "ula_response",
    "ris_response",
    "path_gain",
    "build_segment",
    "compose_effective",
    "check_passive",
]

PASSIVITY_TOL = 1e-12


class InvalidGeometryError(ValueError):
    pass


class PassivityError(ValueError):
    """A channel has a singular value above one."""

    def __init__(self, singular_value: float, what: str = "channel"):
        self.singular_value = float(singular_value)
        super().__init__(
            f"{what} is not passive: largest singular value {singular_value:.6g} > 1"
        )


@dataclass(frozen=True)
class UlaGeometry:
    element_count: int
    element_spacing: float
    carrier_frequency: float

    def __post_init__(self):
        if int(self.element_count) < 1:
            raise InvalidGeometryError(f"element_count must be >= 1, got {self.element_count}")
        if not self.element_spacing > 0:
            raise InvalidGeometryError("element_spacing must be positive")
        if not self.carrier_frequency > 0:
            raise InvalidGeometryError("carrier_frequency must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency


@dataclass(frozen=True)
class RisGeometry:
    elements_x: int
    elements_y: int
    spacing_x: float
    spacing_y: float
    elevation: float = 0.0

    def __post_init__(self):
        if int(self.elements_x) < 1 or int(self.elements_y) < 1:
            raise InvalidGeometryError(
                f"RIS needs at least one element per axis, got {self.elements_x}x{self.elements_y}"
            )
        if not (self.spacing_x > 0 and self.spacing_y > 0):
            raise InvalidGeometryError("RIS element spacings must be positive")

    @property
    def element_count(self) -> int:
        return int(self.elements_x) * int(self.elements_y)


@dataclass(frozen=True)
class PathComponent:
    """One propagation path. Angles in radians, delay in seconds, length in meters."""

    delay: float
    aod: float
    aoa: float
    path_length: float
    fresnel_coeff: float = 1.0
    roughness: float = 1.0
    is_los: bool = True
    path_index: int = 1

    def __post_init__(self):
        if not self.path_length > 0:
            raise InvalidGeometryError("path_length must be positive")
        if self.is_los and self.path_index != 1:
            raise InvalidGeometryError("the LoS component must carry path_index 1")


@dataclass(frozen=True)
class LinkBudget:
    absorption: float  # dB/km
    tx_gain: float  # linear
    rx_gain: float  # linear

    def __post_init__(self):
        if self.absorption < 0:
            raise ValueError("absorption must be non-negative")
        if not (self.tx_gain > 0 and self.rx_gain > 0):
            raise ValueError("gains must be positive")


ArrayDescriptor = Union[UlaGeometry, RisGeometry]


def ula_response(geometry: UlaGeometry, angle: float) -> np.ndarray:
    """Unit-norm ULA steering vector, element m carrying phase 2*pi*d*m*sin(angle)/lambda."""
    if abs(angle) > np.pi / 2 + 1e-12:
        raise ValueError(f"ULA angle must lie in [-pi/2, pi/2], got {angle}")
    n = int(geometry.element_count)
    m = np.arange(n)
    phase = 2 * np.pi / geometry.wavelength * geometry.element_spacing * m * np.sin(angle)
    return np.exp(1j * phase) / np.sqrt(n)


def ris_response(geometry: RisGeometry, azimuthal_angle: float, wavelength: float) -> np.ndarray:
    """Unit-norm planar RIS response, elements ordered x-major with zero-based indices."""
    kx = np.arange(int(geometry.elements_x))
    ky = np.arange(int(geometry.elements_y))
    s = np.sin(azimuthal_angle)
    step_x = geometry.spacing_x * np.cos(geometry.elevation) * s
    step_y = geometry.spacing_y * np.sin(geometry.elevation) * s
    phase = 2 * np.pi / wavelength * np.add.outer(kx * step_x, ky * step_y).ravel()
    return np.exp(1j * phase) / np.sqrt(geometry.element_count)


def path_gain(path: PathComponent, budget: LinkBudget, wavelength: float) -> float:
    """Power gain of one path: free-space spreading, antenna gains and absorption."""
    d = path.path_length
    gain = (wavelength / (4 * np.pi * d)) ** 2 * budget.tx_gain * budget.rx_gain
    gain *= 10 ** (-0.1 * budget.absorption * d / 1000.0)
    if not path.is_los:
        gain *= path.roughness * path.fresnel_coeff
    return float(gain)


def _response(desc: ArrayDescriptor, angle: float, wavelength: float) -> np.ndarray:
    if isinstance(desc, RisGeometry):
        return ris_response(desc, angle, wavelength)
    return ula_response(desc, angle)


def _count(desc: ArrayDescriptor) -> int:
    if isinstance(desc, RisGeometry):
        return desc.element_count
    return int(desc.element_count)


def check_passive(h: np.ndarray, what: str = "channel") -> float:
    """Return the largest singular value of ``h``; raise PassivityError if it exceeds one."""
    if h.size == 0:
        return 0.0
    smax = float(np.linalg.norm(h, 2))
    if smax > 1 + PASSIVITY_TOL:
        raise PassivityError(smax, what)
    return smax


def build_segment(
    paths: Sequence[PathComponent],
    tx: ArrayDescriptor,
    rx: ArrayDescriptor,
    budget: LinkBudget,
    carrier_frequency: float,
) -> np.ndarray:
    """Multipath segment matrix of shape (rx elements, tx elements).

    Raises PassivityError when the synthesized gains would make the segment
    amplify; callers are expected to pick distances where the far-field
    model is valid instead of rescaling.
    """
    if len(paths) == 0:
        raise InvalidGeometryError("a segment needs at least one path")
    wavelength = SPEED_OF_LIGHT / carrier_frequency
    h = np.zeros((_count(rx), _count(tx)), dtype=complex)
    for p in paths:
        amp = np.sqrt(path_gain(p, budget, wavelength)) * np.exp(2j * np.pi * carrier_frequency * p.delay)
        a_rx = _response(rx, p.aoa, wavelength)
        a_tx = _response(tx, p.aod, wavelength)
        h += amp * np.outer(a_rx, a_tx.conj())
    check_passive(h, "segment")
    return h


def compose_effective(
    direct: np.ndarray, tx_ris: np.ndarray, ris_rx: np.ndarray, phases: np.ndarray
) -> np.ndarray:
    """Composite channel H_d + H_r diag(exp(j*phases)) H_t."""
    phases = np.asarray(phases, dtype=float)
    n_r, n_t = direct.shape
    k = phases.shape[0]
    if tx_ris.shape != (k, n_t) or ris_rx.shape != (n_r, k):
        raise InvalidGeometryError(
            f"dimension chain mismatch: direct {direct.shape}, H_t {tx_ris.shape}, "
            f"H_r {ris_rx.shape}, {k} phases"
        )
    return direct + (ris_rx * np.exp(1j * phases)[None, :]) @ tx_ris


@dataclass(frozen=True)
class LinkChannels:
    direct: np.ndarray  # N_R x N_T
    tx_ris: np.ndarray  # K x N_T
    ris_rx: np.ndarray  # N_R x K

    def __post_init__(self):
        n_r, n_t = self.direct.shape
        k = self.tx_ris.shape[0]
        if self.tx_ris.shape != (k, n_t) or self.ris_rx.shape != (n_r, k):
            raise InvalidGeometryError(
                f"inconsistent segment shapes {self.direct.shape}, {self.tx_ris.shape}, {self.ris_rx.shape}"
            )

    @property
    def n_tx(self) -> int:
        return self.direct.shape[1]

    @property
    def n_rx(self) -> int:
        return self.direct.shape[0]

    @property
    def n_ris(self) -> int:
        return self.tx_ris.shape[0]

    def composite(self, phases: np.ndarray) -> np.ndarray:
        return compose_effective(self.direct, self.tx_ris, self.ris_rx, phases)


def _draw_angles(seed: int, spread: float) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    names = ("d_aod", "d_aoa", "t_aod", "t_aoa", "r_aod", "r_aoa")
    return dict(zip(names, rng.uniform(-spread, spread, size=len(names))))


@dataclass(frozen=True)
class ThzLink:
    """Geometry and link budget of the RIS-assisted MIMO link.

    Defaults follow the 15 THz, 8x8, 64-element reference system: half
    wavelength spacing everywhere, 30 dBi elements, 50 dB/km absorption,
    RIS placed at 0.3 d from Alice and 0.8 d from Bob. Each segment is a
    single LoS path whose angles are drawn once from ``angle_seed``, so a
    distance sweep only changes path loss and delay.
    """

    n_tx: int = 8
    n_rx: int = 8
    ris_x: int = 8
    ris_y: int = 8
    carrier_frequency: float = 15e12
    spacing_wavelengths: float = 0.5
    ris_spacing_wavelengths: float = 0.5
    ris_elevation: float = np.pi / 4
    antenna_gain_dbi: float = 30.0
    absorption_db_per_km: float = 50.0
    ris_tx_fraction: float = 0.3
    ris_rx_fraction: float = 0.8
    angle_seed: int = 7
    angle_spread: float = np.pi / 3
    angles: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "angles", _draw_angles(self.angle_seed, self.angle_spread))
        # validate eagerly so config errors surface before a sweep starts
        self.tx_array, self.rx_array, self.ris  # noqa: B018

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def n_ris(self) -> int:
        return self.ris_x * self.ris_y

    @property
    def tx_array(self) -> UlaGeometry:
        return UlaGeometry(self.n_tx, self.spacing_wavelengths * self.wavelength, self.carrier_frequency)

    @property
    def rx_array(self) -> UlaGeometry:
        return UlaGeometry(self.n_rx, self.spacing_wavelengths * self.wavelength, self.carrier_frequency)

    @property
    def ris(self) -> RisGeometry:
        d = self.ris_spacing_wavelengths * self.wavelength
        return RisGeometry(self.ris_x, self.ris_y, d, d, self.ris_elevation)

    @property
    def element_gain(self) -> float:
        return 10 ** (self.antenna_gain_dbi / 10)

    def _los(self, length: float, aod: float, aoa: float) -> list[PathComponent]:
        return [PathComponent(delay=length / SPEED_OF_LIGHT, aod=aod, aoa=aoa, path_length=length)]

    def segments(self, distance: float) -> LinkChannels:
        """Segment matrices for an Alice-Bob separation of ``distance`` meters."""
        if not distance > 0:
            raise InvalidGeometryError("distance must be positive")
        a = self.angles
        g_t = self.n_tx * self.element_gain
        g_r = self.n_rx * self.element_gain
        k = float(self.n_ris)
        f = self.carrier_frequency
        rho = self.absorption_db_per_km
        h_d = build_segment(
            self._los(distance, a["d_aod"], a["d_aoa"]),
            self.tx_array, self.rx_array, LinkBudget(rho, g_t, g_r), f,
        )
        h_t = build_segment(
            self._los(self.ris_tx_fraction * distance, a["t_aod"], a["t_aoa"]),
            self.tx_array, self.ris, LinkBudget(rho, g_t, k), f,
        )
        h_r = build_segment(
            self._los(self.ris_rx_fraction * distance, a["r_aod"], a["r_aoa"]),
            self.ris, self.rx_array, LinkBudget(rho, k, g_r), f,
        )
        return LinkChannels(h_d, h_t, h_r)
