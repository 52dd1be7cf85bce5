from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import Boltzmann, Planck

__all__ = ["NoiseVariances", "thermal_occupation", "vacuum_variance"]


def thermal_occupation(frequency: float, temperature: float) -> float:
    """Mean Bose-Einstein photon number at ``frequency`` Hz and ``temperature`` K."""
    return 1.0 / np.expm1(Planck * frequency / (Boltzmann * temperature))


def vacuum_variance(frequency: float, temperature: float) -> float:
    return 2.0 * thermal_occupation(frequency, temperature) + 1.0


@dataclass(frozen=True)
class NoiseVariances:
    """Quadrature variances in vacuum units.

    ``eve_segment`` holds the variance Eve injects on each segment
    ('d', 't', 'r'); ``eve_global`` is used by the purification attack.
    """

    signal_variance: float = 1000.0
    vacuum_variance: float = 1.0
    splitter_vacuum: float = 1.0
    eve_segment: dict = field(default_factory=lambda: {"d": 1.0, "t": 1.0, "r": 1.0})
    eve_global: float = 1.0
    detector_noise: float = 0.01
    temperature: float | None = None

    def __post_init__(self):
        if self.signal_variance < 0:
            raise ValueError("signal_variance must be >= 0")
        if self.vacuum_variance < 1:
            raise ValueError("vacuum_variance must be >= 1")
        if self.splitter_vacuum < 1 or self.eve_global < 1:
            raise ValueError("splitter and Eve variances must be >= 1")
        if set(self.eve_segment) != {"d", "t", "r"} or min(self.eve_segment.values()) < 1:
            raise ValueError("eve_segment needs variances >= 1 for 'd', 't' and 'r'")
        if self.detector_noise < 0:
            raise ValueError("detector_noise must be >= 0")

    @classmethod
    def at_temperature(cls, frequency: float, temperature: float = 296.0, **kw) -> "NoiseVariances":
        return cls(vacuum_variance=vacuum_variance(frequency, temperature), temperature=temperature, **kw)

    @property
    def alice_variance(self) -> float:
        return self.signal_variance + self.vacuum_variance

    def with_(self, **changes) -> "NoiseVariances":
        return replace(self, **changes)
