"""Gaussian-state toolkit in the quadrature picture.

Covariance matrices are real 2M x 2M arrays in mode-interleaved order
(x_1, p_1, ..., x_M, p_M) with vacuum normalised to the identity. Complex
mode maps enter through :func:`embed_complex`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .channel import PASSIVITY_TOL, PassivityError

__all__ = [
    "UnphysicalStateError",
    "ChannelDilation",
    "dilate",
    "embed_complex",
    "omega",
    "z_block",
    "tmsv_covariance",
    "quadrature_indices",
    "ho_entropy",
    "symplectic_eigenvalues",
    "von_neumann_entropy",
    "homodyne_condition",
]

CLAMP_TOL = 1e-9
SYMMETRY_TOL = 1e-10
PINV_RCOND = 1e-12


class UnphysicalStateError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelDilation:
    """Beam-splitter dilation of a passive segment H = U D V^dagger.

    ``transmit`` is the rectangular singular-value matrix D (rows x cols of
    H). ``reflect`` is square on the output side, so ``coupling`` = U S
    satisfies H H^dagger + N N^dagger = I. ``reflect_in`` is the matching
    factor on the input side, which maps the signal into the environment
    output ports.
    """

    left: np.ndarray
    right: np.ndarray
    singular_values: np.ndarray
    transmit: np.ndarray
    reflect: np.ndarray
    reflect_in: np.ndarray
    coupling: np.ndarray
    rank: int

    @property
    def channel(self) -> np.ndarray:
        return self.left @ self.transmit @ self.right.conj().T

    def unitary(self) -> np.ndarray:
        """Joint map (signal_in, env_in) -> (signal_out, env_out).

        The environment input lives in the left singular basis, so the
        environment output is ``-reflect_in V^dagger a + D^T e``.
        """
        top = np.hstack([self.channel, self.coupling])
        bottom = np.hstack([-self.reflect_in @ self.right.conj().T, self.transmit.T.astype(complex)])
        return np.vstack([top, bottom])


def dilate(h: np.ndarray) -> ChannelDilation:
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    m, n = h.shape
    u, s, vh = np.linalg.svd(h, full_matrices=True)
    if s.size and s[0] > 1 + PASSIVITY_TOL:
        raise PassivityError(s[0])
    s = np.minimum(s, 1.0)
    r = min(m, n)
    transmit = np.zeros((m, n))
    transmit[:r, :r] = np.diag(s)
    loss = np.sqrt(1.0 - s**2)
    reflect = np.eye(m)
    reflect[:r, :r] = np.diag(loss)
    reflect_in = np.eye(n)
    reflect_in[:r, :r] = np.diag(loss)
    tol = max(m, n) * np.finfo(float).eps
    rank = int(np.sum(s > tol))
    return ChannelDilation(
        left=u,
        right=vh.conj().T,
        singular_values=s,
        transmit=transmit,
        reflect=reflect,
        reflect_in=reflect_in,
        coupling=u @ reflect,
        rank=rank,
    )


def embed_complex(m: np.ndarray) -> np.ndarray:
    """Real quadrature form of a complex mode matrix: a+jb -> [[a, -b], [b, a]] blocks."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    r, c = m.shape
    out = np.empty((2 * r, 2 * c))
    out[0::2, 0::2] = m.real
    out[0::2, 1::2] = -m.imag
    out[1::2, 0::2] = m.imag
    out[1::2, 1::2] = m.real
    return out


def omega(modes: int) -> np.ndarray:
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def z_block(modes: int) -> np.ndarray:
    return np.kron(np.eye(modes), np.diag([1.0, -1.0]))


def tmsv_covariance(v: float) -> np.ndarray:
    """Two-mode squeezed vacuum with variance ``v`` per quadrature."""
    c = np.sqrt(max(v * v - 1.0, 0.0))
    eye = np.eye(2)
    z = np.diag([1.0, -1.0])
    return np.block([[v * eye, c * z], [c * z, v * eye]])


def quadrature_indices(modes: Sequence[int]) -> np.ndarray:
    modes = np.asarray(list(modes), dtype=int)
    return np.stack([2 * modes, 2 * modes + 1], axis=1).ravel()


def ho_entropy(nu):
    """Entropy in bits of a thermal mode with symplectic eigenvalue ``nu``."""
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 1 - CLAMP_TOL):
        raise UnphysicalStateError(f"symplectic eigenvalue below one: {np.min(nu)!r}")
    nu = np.maximum(nu, 1.0)
    p = (nu + 1) / 2
    q = (nu - 1) / 2
    h = (xlogy(p, p) - xlogy(q, q)) / np.log(2)
    return h if h.ndim else float(h)


def _check_symmetric(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise ValueError(f"covariance must be square with even size, got {cov.shape}")
    scale = max(1.0, float(np.max(np.abs(cov)))) if cov.size else 1.0
    if np.max(np.abs(cov - cov.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("covariance matrix is not symmetric")
    return (cov + cov.T) / 2


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic spectrum, sorted descending.

    Uses the Hermitian form i S^{1/2} Omega S^{1/2}, which is similar to
    i Omega S and whose eigenvalues come out as exact +/- pairs.
    """
    cov = _check_symmetric(cov)
    m = cov.shape[0] // 2
    if m == 0:
        return np.zeros(0)
    w, q = np.linalg.eigh(cov)
    if w[0] < -1e-9 * max(1.0, w[-1]):
        raise UnphysicalStateError(f"covariance is not positive semidefinite (eigenvalue {w[0]:.3g})")
    root = (q * np.sqrt(np.clip(w, 0.0, None))) @ q.T
    a = root @ omega(m) @ root
    ev = np.linalg.eigvalsh(1j * a)
    return np.sort(ev[m:])[::-1]


def von_neumann_entropy(cov: np.ndarray) -> float:
    return float(np.sum(ho_entropy(symplectic_eigenvalues(cov))))


def homodyne_condition(
    joint: np.ndarray, kept_modes: Sequence[int], measured_modes: Sequence[int]
) -> np.ndarray:
    """State of ``kept_modes`` after x-homodyne on every mode in ``measured_modes``."""
    joint = _check_symmetric(joint)
    kept = quadrature_indices(kept_modes)
    measured = list(measured_modes)
    if set(kept_modes) & set(measured):
        raise ValueError("kept and measured modes overlap")
    sigma_e = joint[np.ix_(kept, kept)]
    if not measured:
        return sigma_e
    xb = 2 * np.asarray(measured, dtype=int)
    cross = joint[np.ix_(kept, xb)]
    inv = np.linalg.pinv(joint[np.ix_(xb, xb)], rcond=PINV_RCOND, hermitian=True)
    out = sigma_e - cross @ inv @ cross.T
    return (out + out.T) / 2
