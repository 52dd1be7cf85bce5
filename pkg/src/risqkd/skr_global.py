"""Benchmark attack: Eve purifies the whole end-to-end channel.

After SVD precoding/combining the MIMO link splits into independent
lossy SISO channels with transmissivities beta_i (squared singular
values). Eve's two-mode state per subchannel has closed-form symplectic
spectra before and after Bob's x-homodyne.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import check_passive
from .gaussian import UnphysicalStateError, ho_entropy
from .noise import NoiseVariances
from .skr_localized import SkrBreakdown

__all__ = [
    "ParallelChannel",
    "EveTwoModeDiagnostics",
    "parallelize",
    "mutual_information_i",
    "eve_diagnostics",
    "eve_spectrum_unconditional",
    "eve_spectrum_conditional",
    "subchannel_skr",
    "skr_global",
]

BETA_FLOOR = 1e-14
DISCRIMINANT_TOL = 1e-9


@dataclass(frozen=True)
class ParallelChannel:
    index: int
    transmissivity: float
    count: int


@dataclass(frozen=True)
class EveTwoModeDiagnostics:
    v_eo: float
    cross: float
    delta: float
    det_e: float
    bob_variance: float
    delta_cond: float
    det_cond: float
    lambda_aux: float


def parallelize(channel: np.ndarray) -> list[ParallelChannel]:
    channel = np.atleast_2d(np.asarray(channel, dtype=complex))
    check_passive(channel)
    s = np.linalg.svd(channel, compute_uv=False)
    beta = np.minimum(s**2, 1.0)
    beta = beta[beta >= BETA_FLOOR]
    return [ParallelChannel(i, float(b), len(beta)) for i, b in enumerate(beta)]


def mutual_information_i(beta: float, noise: NoiseVariances) -> float:
    snr = beta * noise.signal_variance / (
        beta * noise.vacuum_variance + (1 - beta) * noise.eve_global + noise.detector_noise
    )
    return float(0.5 * np.log2(1 + snr))


def eve_diagnostics(beta: float, noise: NoiseVariances) -> EveTwoModeDiagnostics:
    """Scalars entering Eve's spectra for one subchannel.

    The conditional invariants are written in factorised form:
    det = Lambda (V_a + sigma^2 Lambda) / V_b and
    Delta = ((1 - beta) V_e (V_a^2 + 1) + 2 beta V_a + sigma^2 Delta_0) / V_b,
    with Lambda = (1 - beta) V_a V_e + beta and Delta_0 the unconditional
    invariant.
    """
    va, ve, s2 = noise.alice_variance, noise.eve_global, noise.detector_noise
    v_eo = (1 - beta) * va + beta * ve
    c2 = beta * (ve * ve - 1)
    delta = v_eo**2 + ve**2 - 2 * c2
    det_e = (v_eo * ve - c2) ** 2
    vb = beta * va + (1 - beta) * ve + s2
    lam = (1 - beta) * va * ve + beta
    # detector noise enters as sigma^2 times the unconditional invariant
    delta_cond = ((1 - beta) * ve * (va * va + 1) + 2 * beta * va + s2 * delta) / vb
    det_cond = lam * (va + s2 * lam) / vb
    return EveTwoModeDiagnostics(v_eo, float(np.sqrt(c2)), delta, det_e, vb, delta_cond, det_cond, lam)


def _pair(delta: float, det: float) -> tuple[float, float]:
    disc = delta * delta - 4 * det
    if disc < -DISCRIMINANT_TOL * max(1.0, delta * delta):
        raise UnphysicalStateError(f"negative discriminant {disc:.3g} in two-mode spectrum")
    big2 = 0.5 * (delta + np.sqrt(max(disc, 0.0)))
    big = np.sqrt(big2)
    # product of the two eigenvalues is sqrt(det); avoids cancellation in the minus branch
    small = np.sqrt(det) / big if big > 0 else 0.0
    return float(big), float(small)


def eve_spectrum_unconditional(beta: float, noise: NoiseVariances) -> tuple[float, float]:
    d = eve_diagnostics(beta, noise)
    return _pair(d.delta, d.det_e)


def eve_spectrum_conditional(beta: float, noise: NoiseVariances) -> tuple[float, float]:
    d = eve_diagnostics(beta, noise)
    return _pair(d.delta_cond, d.det_cond)


def subchannel_skr(beta: float, noise: NoiseVariances) -> dict:
    l1, l2 = eve_spectrum_unconditional(beta, noise)
    l3, l4 = eve_spectrum_conditional(beta, noise)
    mi = mutual_information_i(beta, noise)
    chi = float(ho_entropy(l1) + ho_entropy(l2) - ho_entropy(l3) - ho_entropy(l4))
    return {"beta": beta, "mutual_information": mi, "holevo": chi, "skr": mi - chi,
            "eigenvalues": (l1, l2, l3, l4)}


def skr_global(channel: np.ndarray, noise: NoiseVariances) -> SkrBreakdown:
    """Sum of per-subchannel rates, summed in index order."""
    rows = [subchannel_skr(p.transmissivity, noise) for p in parallelize(channel)]
    mi = float(sum(r["mutual_information"] for r in rows))
    chi = float(sum(r["holevo"] for r in rows))
    return SkrBreakdown("global", mi, chi, mi - chi, rows)
