import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import block_diag

from risqkd.channel import PassivityError
from risqkd.gaussian import (
    UnphysicalStateError,
    dilate,
    embed_complex,
    ho_entropy,
    homodyne_condition,
    omega,
    symplectic_eigenvalues,
    tmsv_covariance,
    von_neumann_entropy,
)

from conftest import random_passive


def thermal(*nus):
    return np.diag(np.repeat(nus, 2)).astype(float)


def random_symplectic_unitary(rng, modes):
    a = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    q, _ = np.linalg.qr(a)
    return embed_complex(q)


class TestDilation:
    def test_unitary_over_random_channels(self, rng):
        for _ in range(100):
            m, n = rng.integers(1, 9, size=2)
            dil = dilate(random_passive(rng, m, n))
            u = dil.unitary()
            np.testing.assert_allclose(u @ u.conj().T, np.eye(m + n), atol=1e-11)
            h, nn = dil.channel, dil.coupling
            np.testing.assert_allclose(h @ h.conj().T + nn @ nn.conj().T, np.eye(m), atol=1e-11)

    def test_reconstructs_channel(self, rng):
        h = random_passive(rng, 4, 6)
        np.testing.assert_allclose(dilate(h).channel, h, atol=1e-12)

    def test_identity_has_no_loss(self):
        dil = dilate(np.eye(3))
        np.testing.assert_allclose(dil.coupling, 0, atol=1e-15)
        assert dil.rank == 3

    def test_zero_channel_is_pure_loss(self):
        dil = dilate(np.zeros((2, 2)))
        np.testing.assert_allclose(dil.coupling @ dil.coupling.conj().T, np.eye(2))
        assert dil.rank == 0

    def test_amplifying_channel_rejected(self):
        with pytest.raises(PassivityError):
            dilate(1.01 * np.eye(2))


class TestEmbedding:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30)
    def test_is_multiplicative(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
        b = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        np.testing.assert_allclose(embed_complex(a @ b), embed_complex(a) @ embed_complex(b), atol=1e-12)
        np.testing.assert_allclose(embed_complex(a.conj().T), embed_complex(a).T)

    def test_unitary_maps_to_symplectic(self, rng):
        s = random_symplectic_unitary(rng, 4)
        np.testing.assert_allclose(s @ omega(4) @ s.T, omega(4), atol=1e-12)


class TestEntropy:
    def test_vacuum(self):
        assert ho_entropy(1.0) == 0.0

    def test_reference_values(self):
        mp.mp.dps = 30

        def h(nu):
            nu = mp.mpf(nu)
            return ((nu + 1) / 2) * mp.log((nu + 1) / 2, 2) - ((nu - 1) / 2) * mp.log((nu - 1) / 2, 2)

        assert ho_entropy(3.0) == pytest.approx(2.0, abs=1e-14)
        assert ho_entropy(2.0) == pytest.approx(float(h(2)), abs=1e-14)
        assert ho_entropy(2.0) == pytest.approx(1.3774437510817346, abs=1e-12)
        assert ho_entropy(1001.0) == pytest.approx(float(h(1001)), rel=1e-13)

    def test_within_tolerance_below_one_is_clamped(self):
        assert ho_entropy(1 - 1e-12) == 0.0

    def test_clearly_unphysical_raises(self):
        with pytest.raises(UnphysicalStateError):
            ho_entropy(0.9)

    @given(st.floats(1.0, 1e6), st.floats(1.0, 1e6))
    def test_increasing(self, a, b):
        lo, hi = sorted((a, b))
        assert ho_entropy(lo) <= ho_entropy(hi) + 1e-12


class TestSymplecticSpectrum:
    def test_thermal(self):
        np.testing.assert_allclose(symplectic_eigenvalues(thermal(3.0, 1.5)), [3.0, 1.5])

    @pytest.mark.parametrize("v", [1.0, 1.5, 10.0, 1000.0])
    def test_tmsv_is_pure(self, v):
        np.testing.assert_allclose(symplectic_eigenvalues(tmsv_covariance(v)), [1.0, 1.0], atol=1e-9 * v)

    def test_invariant_under_passive_transforms(self, rng):
        cov = thermal(1.0, 2.5, 7.0)
        s = random_symplectic_unitary(rng, 3)
        np.testing.assert_allclose(symplectic_eigenvalues(s @ cov @ s.T), [7.0, 2.5, 1.0], atol=1e-10)

    def test_entropy_additive_over_products(self, rng):
        a = tmsv_covariance(4.0)
        a[2:, 2:] += np.eye(2)  # mixed two-mode state
        b = thermal(2.0)
        assert von_neumann_entropy(block_diag(a, b)) == pytest.approx(
            von_neumann_entropy(a) + von_neumann_entropy(b), abs=1e-12
        )

    def test_rejects_asymmetric(self):
        m = np.eye(2)
        m[0, 1] = 0.1
        with pytest.raises(ValueError):
            symplectic_eigenvalues(m)

    def test_rejects_indefinite(self):
        with pytest.raises(UnphysicalStateError):
            symplectic_eigenvalues(np.diag([1.0, -1.0]))

    def test_empty(self):
        assert symplectic_eigenvalues(np.zeros((0, 0))).size == 0


class TestHomodyne:
    @pytest.mark.parametrize("v", [1.5, 10.0, 1000.0])
    def test_epr_partner(self, v):
        cond = homodyne_condition(tmsv_covariance(v), [0], [1])
        np.testing.assert_allclose(cond, np.diag([1 / v, v]), rtol=1e-9)

    def test_nothing_measured_returns_marginal(self):
        cov = tmsv_covariance(5.0)
        np.testing.assert_array_equal(homodyne_condition(cov, [0], []), cov[:2, :2])

    def test_uncorrelated_unchanged(self):
        cov = block_diag(thermal(3.0), thermal(2.0))
        np.testing.assert_allclose(homodyne_condition(cov, [0], [1]), thermal(3.0))

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            homodyne_condition(np.eye(4), [0, 1], [1])

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_conditioning_never_raises_entropy(self, seed):
        rng = np.random.default_rng(seed)
        # physical state: passive mixing of thermal modes
        nus = rng.uniform(1, 20, size=4)
        s = random_symplectic_unitary(rng, 4)
        cov = s @ thermal(*nus) @ s.T
        cond = homodyne_condition(cov, [0, 1], [2, 3])
        assert np.min(symplectic_eigenvalues(cond)) >= 1 - 1e-9
        assert von_neumann_entropy(cond) <= von_neumann_entropy(cov[:4, :4]) + 1e-9
