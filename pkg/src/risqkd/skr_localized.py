"""Secret key rate when Eve taps the loss of a single propagation segment.

The whole link is a passive linear network acting on independent input
modes:

    a    Alice's (precoded) modulated modes, variance V_a (V_0 given a)
    v0   vacuum entering the second port of Alice's splitter BS_a
    e_d, e_t, e_r   environment inputs of the three lossy segments

Every output (Bob's combined modes, each segment's environment output) is
stored as a dict of complex coupling matrices, one per input. Covariances
follow as sums of C V C^dagger, so Bob's and Eve's blocks are always
slices of one physical joint state. The environment input of segment j is
half of a TMSV whose idler ``qm_j`` Eve keeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channel import LinkChannels
from .gaussian import (
    ChannelDilation,
    UnphysicalStateError,
    dilate,
    embed_complex,
    homodyne_condition,
    von_neumann_entropy,
    z_block,
)
from .noise import NoiseVariances

__all__ = [
    "SCENARIOS",
    "SplitterSettings",
    "SkrBreakdown",
    "DilatedLink",
    "effective_signal_channel",
    "bob_couplings",
    "eve_couplings",
    "combiner",
    "bob_covariances",
    "mutual_information_ab",
    "eve_output_covariance",
    "eve_bob_cross",
    "holevo_localized",
    "skr_localized",
]

SCENARIOS = ("d", "t", "r")
HOLEVO_TOL = 1e-9

Couplings = dict[str, np.ndarray]


@dataclass(frozen=True)
class SplitterSettings:
    eta_a: float = 0.5
    eta_b: float = 0.5

    def __post_init__(self):
        for name in ("eta_a", "eta_b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class SkrBreakdown:
    scenario: str
    mutual_information: float
    holevo: float
    skr: float
    subchannels: list = field(default_factory=list, repr=False)


class DilatedLink:
    """Segment matrices together with their beam-splitter dilations."""

    def __init__(self, channels: LinkChannels):
        self.channels = channels

    @cached_property
    def dilations(self) -> dict[str, ChannelDilation]:
        ch = self.channels
        return {"d": dilate(ch.direct), "t": dilate(ch.tx_ris), "r": dilate(ch.ris_rx)}

    @property
    def mode_count(self) -> int:
        ch = self.channels
        return min(ch.n_tx, ch.n_rx, ch.n_ris)


def _as_link(link) -> DilatedLink:
    return link if isinstance(link, DilatedLink) else DilatedLink(link)


def _splits(s: SplitterSettings) -> tuple[float, float, float, float]:
    return np.sqrt(s.eta_a), np.sqrt(1 - s.eta_a), np.sqrt(s.eta_b), np.sqrt(1 - s.eta_b)


def bob_couplings(link, phases, splitters: SplitterSettings) -> Couplings:
    """Couplings of Bob's N_R received modes (before the combiner)."""
    link = _as_link(link)
    ch, dil = link.channels, link.dilations
    ta, ra, tb, rb = _splits(splitters)
    hr_phi = ch.ris_rx * np.exp(1j * np.asarray(phases, dtype=float))[None, :]
    g = hr_phi @ ch.tx_ris
    return {
        "a": ta * tb * ch.direct - ra * rb * g,
        "v0": ra * tb * ch.direct + ta * rb * g,
        "e_d": tb * dil["d"].coupling,
        "e_t": rb * (hr_phi @ dil["t"].coupling),
        "e_r": rb * dil["r"].coupling,
    }


def effective_signal_channel(link, phases, splitters: SplitterSettings) -> np.ndarray:
    """End-to-end map from Alice's modes to Bob's, splitters included."""
    return bob_couplings(link, phases, splitters)["a"]


def eve_couplings(scenario: str, link, phases, splitters: SplitterSettings) -> Couplings:
    """Couplings of the environment output of segment ``scenario``."""
    link = _as_link(link)
    ch, dil = link.channels, link.dilations
    ta, ra, _, _ = _splits(splitters)
    if scenario == "d":
        w = dil["d"].reflect_in @ dil["d"].right.conj().T
        return {"a": -ta * w, "v0": -ra * w, "e_d": dil["d"].transmit.T}
    if scenario == "t":
        w = dil["t"].reflect_in @ dil["t"].right.conj().T
        return {"a": ra * w, "v0": -ta * w, "e_t": dil["t"].transmit.T}
    if scenario == "r":
        phi = np.exp(1j * np.asarray(phases, dtype=float))
        w = (dil["r"].reflect_in @ dil["r"].right.conj().T) * phi[None, :]
        wt = w @ ch.tx_ris
        return {"a": ra * wt, "v0": -ta * wt, "e_t": -w @ dil["t"].coupling, "e_r": dil["r"].transmit.T}
    raise ValueError(f"unknown localized scenario {scenario!r}; expected one of {SCENARIOS}")


def combiner(link, phases, splitters: SplitterSettings) -> np.ndarray:
    """Leading N left singular vectors of the end-to-end channel (N_R x N)."""
    link = _as_link(link)
    u, _, _ = np.linalg.svd(effective_signal_channel(link, phases, splitters))
    return u[:, : link.mode_count]


def _variances(noise: NoiseVariances, conditional: bool = False) -> dict[str, float]:
    return {
        "a": noise.vacuum_variance if conditional else noise.alice_variance,
        "v0": noise.splitter_vacuum,
        "e_d": noise.eve_segment["d"],
        "e_t": noise.eve_segment["t"],
        "e_r": noise.eve_segment["r"],
    }


def _cross(c1: Couplings, c2: Couplings, var: dict[str, float]) -> np.ndarray:
    rows = next(iter(c1.values())).shape[0]
    cols = next(iter(c2.values())).shape[0]
    out = np.zeros((rows, cols), dtype=complex)
    for k in (k for k in c1 if k in c2):  # fixed order keeps sums bit-reproducible
        out += var[k] * (c1[k] @ c2[k].conj().T)
    return out


def _project(c: Couplings, p: np.ndarray) -> Couplings:
    return {k: p.conj().T @ m for k, m in c.items()}


def _bob_quadrature(y: Couplings, noise: NoiseVariances, conditional: bool) -> np.ndarray:
    cov = embed_complex(_cross(y, y, _variances(noise, conditional)))
    cov += noise.detector_noise * np.eye(cov.shape[0])
    return (cov + cov.T) / 2


@dataclass
class _Assembly:
    """Everything one SKR evaluation needs, computed once."""

    link: DilatedLink
    phases: np.ndarray
    splitters: SplitterSettings
    noise: NoiseVariances

    @cached_property
    def bob(self) -> Couplings:
        return bob_couplings(self.link, self.phases, self.splitters)

    @cached_property
    def measured(self) -> Couplings:
        u, _, _ = np.linalg.svd(self.bob["a"])
        return _project(self.bob, u[:, : self.link.mode_count])

    def bob_pair(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            _bob_quadrature(self.measured, self.noise, False),
            _bob_quadrature(self.measured, self.noise, True),
        )

    def eve(self, scenario: str, keep_idle: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Eve's covariance (e_out, qm) and its cross block with Bob's measured modes.

        With ``keep_idle=False`` the idlers are dropped when the injected
        state is vacuum: they are then an uncorrelated pure factor and add
        nothing to either entropy.
        """
        e = eve_couplings(scenario, self.link, self.phases, self.splitters)
        var = _variances(self.noise)
        v_e = self.noise.eve_segment[scenario]
        corr = np.sqrt(max(v_e * v_e - 1.0, 0.0))
        inj = e[f"e_{scenario}"]
        n_idler = inj.shape[1] if (keep_idle or corr > 0) else 0

        out_cov = embed_complex(_cross(e, e, var))
        out_idler = corr * embed_complex(inj[:, :n_idler]) @ z_block(n_idler)
        sigma_e = np.block([[out_cov, out_idler], [out_idler.T, v_e * np.eye(2 * n_idler)]])

        y = self.measured
        out_bob = embed_complex(_cross(e, y, var))
        idler_bob = corr * z_block(n_idler) @ embed_complex(y[f"e_{scenario}"][:, :n_idler]).T
        return (sigma_e + sigma_e.T) / 2, np.vstack([out_bob, idler_bob])


def bob_covariances(link, phases, splitters: SplitterSettings, noise: NoiseVariances):
    """Quadrature covariances of Bob's combined modes, unconditioned and given Alice's data."""
    return _Assembly(_as_link(link), np.asarray(phases, float), splitters, noise).bob_pair()


def mutual_information_ab(sigma_b: np.ndarray, sigma_b_given_a: np.ndarray) -> float:
    """Homodyne mutual information from the x-quadrature blocks, in bits per use."""
    x = slice(0, None, 2)
    sign_b, logdet_b = np.linalg.slogdet(sigma_b[x, x])
    sign_c, logdet_c = np.linalg.slogdet(sigma_b_given_a[x, x])
    if sign_c <= 0 or sign_b <= 0:
        raise ValueError("conditional covariance is singular or indefinite")
    return float(0.5 * (logdet_b - logdet_c) / np.log(2))


def eve_output_covariance(scenario, link, phases, splitters, noise) -> np.ndarray:
    asm = _Assembly(_as_link(link), np.asarray(phases, float), splitters, noise)
    return asm.eve(scenario)[0]


def eve_bob_cross(scenario, link, phases, splitters, noise) -> np.ndarray:
    asm = _Assembly(_as_link(link), np.asarray(phases, float), splitters, noise)
    return asm.eve(scenario)[1]


def _holevo(sigma_e: np.ndarray, cross: np.ndarray, sigma_b: np.ndarray) -> tuple[float, float, float]:
    n_e = sigma_e.shape[0] // 2
    n_b = sigma_b.shape[0] // 2
    joint = np.block([[sigma_e, cross], [cross.T, sigma_b]])
    cond = homodyne_condition(joint, range(n_e), range(n_e, n_e + n_b))
    s_e = von_neumann_entropy(sigma_e)
    s_cond = von_neumann_entropy(cond)
    chi = s_e - s_cond
    if chi < -HOLEVO_TOL:
        raise UnphysicalStateError(f"negative Holevo information {chi:.3g}")
    return max(chi, 0.0), s_e, s_cond


def holevo_localized(scenario, link, phases, splitters, noise) -> float:
    asm = _Assembly(_as_link(link), np.asarray(phases, float), splitters, noise)
    sigma_e, cross = asm.eve(scenario, keep_idle=False)
    return _holevo(sigma_e, cross, asm.bob_pair()[0])[0]


def skr_localized(scenario, link, phases, splitters, noise) -> SkrBreakdown:
    """SKR_j = I(A;B) - chi_j under reverse reconciliation; the raw value may be negative."""
    asm = _Assembly(_as_link(link), np.asarray(phases, float), splitters, noise)
    sigma_b, sigma_ba = asm.bob_pair()
    mi = mutual_information_ab(sigma_b, sigma_ba)
    sigma_e, cross = asm.eve(scenario, keep_idle=False)
    chi = _holevo(sigma_e, cross, sigma_b)[0]
    return SkrBreakdown(scenario, mi, chi, mi - chi)
