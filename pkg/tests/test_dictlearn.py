import numpy as np
import pytest

from xsep.dictlearn import (
    CoupledDictionaryTriple,
    LearnConfig,
    TrainingSet,
    coupled_objective,
    coupled_sparse_coding,
    init_dictionary,
    sample_training_patches,
    train,
    update_phi,
    update_psi,
)
from xsep.numerics import normalize_columns


def random_triple(rng, n, gamma, d):
    return CoupledDictionaryTriple(
        psi_c=normalize_columns(rng.standard_normal((n, gamma)))[0],
        phi_c=normalize_columns(rng.standard_normal((n, gamma)))[0],
        phi=normalize_columns(rng.standard_normal((n, d)))[0],
    )


def dc_free(rng, n, t):
    M = rng.standard_normal((n, t))
    return M - M.mean(axis=0)


class TestTypes:
    def test_triple_rejects_non_unit(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            CoupledDictionaryTriple(
                psi_c=2.0 * np.eye(4),
                phi_c=np.eye(4),
                phi=np.eye(4),
            )

    def test_training_set_rejects_dc(self):
        with pytest.raises(ValueError):
            TrainingSet(X=np.ones((4, 2)), Y=np.ones((4, 2)))

    def test_training_set_rejects_mismatch(self):
        with pytest.raises(ValueError):
            TrainingSet(X=np.zeros((4, 2)), Y=np.zeros((4, 3)))


class TestInitDictionary:
    def test_square_uses_odct(self):
        D = init_dictionary(16, 64)
        np.testing.assert_allclose(np.linalg.norm(D, axis=0), 1.0, atol=1e-12)
        assert D.shape == (16, 64)

    def test_non_square_atom_count(self):
        D = init_dictionary(16, 24)
        assert D.shape == (16, 24)
        np.testing.assert_allclose(np.linalg.norm(D, axis=0), 1.0, atol=1e-12)


class TestCoupledSparseCoding:
    @staticmethod
    def zero_mean_orthonormal(rng, n, k):
        # k orthonormal columns inside the zero-mean subspace of R^n (k <= n-1)
        M = rng.standard_normal((n, k))
        M -= M.mean(axis=0)
        Q, _ = np.linalg.qr(M)
        return Q

    def test_planted_recovery_orthonormal(self):
        # stacked system built orthonormal by construction: with phi_c and phi
        # drawn from one orthonormal set, the normalized stacked columns are
        # mutually orthogonal and the pursuit recovers planted codes exactly
        rng = np.random.default_rng(1)
        n, gamma, d = 9, 4, 4
        U = self.zero_mean_orthonormal(rng, n, gamma + d)
        psi_c = self.zero_mean_orthonormal(rng, n, gamma)
        phi_c, phi = U[:, :gamma], U[:, gamma:]
        dicts = CoupledDictionaryTriple(psi_c=psi_c, phi_c=phi_c, phi=phi)
        z = np.zeros((gamma, 1))
        z[1, 0] = 1.2
        z[3, 0] = -0.7
        v = np.zeros((d, 1))
        v[2, 0] = 0.9
        Y = psi_c @ z
        X = phi_c @ z + phi @ v
        ts = TrainingSet(X=X, Y=Y)
        Z, V = coupled_sparse_coding(ts, dicts, LearnConfig(s_z=2, s_v=1))
        np.testing.assert_allclose(Z, z, atol=1e-10)
        np.testing.assert_allclose(V, v, atol=1e-10)

    def test_zero_budgets(self):
        rng = np.random.default_rng(2)
        dicts = random_triple(rng, 9, 12, 6)
        ts = TrainingSet(X=dc_free(rng, 9, 5), Y=dc_free(rng, 9, 5))
        Z, V = coupled_sparse_coding(ts, dicts, LearnConfig(s_z=0, s_v=0))
        assert not Z.any() and not V.any()

    def test_zero_column_early_exit(self):
        rng = np.random.default_rng(3)
        dicts = random_triple(rng, 9, 12, 6)
        ts = TrainingSet(X=np.zeros((9, 1)), Y=np.zeros((9, 1)))
        Z, V = coupled_sparse_coding(ts, dicts, LearnConfig(s_z=3, s_v=2))
        assert not Z.any() and not V.any()

    def test_sparsity_budgets_respected(self):
        rng = np.random.default_rng(4)
        dicts = random_triple(rng, 16, 20, 10)
        ts = TrainingSet(X=dc_free(rng, 16, 30), Y=dc_free(rng, 16, 30))
        Z, V = coupled_sparse_coding(ts, dicts, LearnConfig(s_z=3, s_v=2))
        assert np.count_nonzero(Z, axis=0).max() <= 3
        assert np.count_nonzero(V, axis=0).max() <= 2


class TestUpdates:
    def test_identity_codes(self):
        rng = np.random.default_rng(5)
        Y = rng.standard_normal((6, 6))
        psi, scales = update_psi(Y, np.eye(6))
        expect, expect_scales = normalize_columns(Y)
        np.testing.assert_allclose(psi, expect, atol=1e-6)
        np.testing.assert_allclose(scales, expect_scales, rtol=1e-6)

    def test_planted_factor_recovery(self):
        rng = np.random.default_rng(6)
        psi0 = normalize_columns(rng.standard_normal((8, 5)))[0]
        Z = rng.standard_normal((5, 40))
        Y = psi0 @ Z
        psi, scales = update_psi(Y, Z)
        np.testing.assert_allclose(psi * scales, psi0, atol=1e-6)
        np.testing.assert_allclose(np.abs(np.sum(psi * psi0, axis=0)), 1.0, atol=1e-8)

    def test_objective_non_increase(self):
        rng = np.random.default_rng(7)
        n, gamma, d, t = 8, 10, 6, 50
        dicts = random_triple(rng, n, gamma, d)
        ts = TrainingSet(X=dc_free(rng, n, t), Y=dc_free(rng, n, t))
        Z, V = coupled_sparse_coding(ts, dicts, LearnConfig(s_z=2, s_v=2))
        before = coupled_objective(ts, dicts.psi_c, dicts.phi_c, dicts.phi, Z, V)
        psi, s1 = update_psi(ts.Y, Z)
        mid = coupled_objective(ts, psi * np.where(s1 > 0, s1, 1.0), dicts.phi_c, dicts.phi, Z, V)
        assert mid <= before + 1e-9
        phibar, s2 = update_phi(ts.X, Z, V)
        raw = phibar * np.where(s2 > 0, s2, 1.0)
        after = coupled_objective(
            ts, psi * np.where(s1 > 0, s1, 1.0), raw[:, :gamma], raw[:, gamma:], Z, V
        )
        assert after <= mid + 1e-9

    def test_phi_planted_recovery(self):
        rng = np.random.default_rng(8)
        n, gamma, d, t = 8, 5, 4, 60
        phi_c0 = normalize_columns(rng.standard_normal((n, gamma)))[0]
        phi0 = normalize_columns(rng.standard_normal((n, d)))[0]
        Z = rng.standard_normal((gamma, t))
        V = rng.standard_normal((d, t))
        X = phi_c0 @ Z + phi0 @ V
        phibar, scales = update_phi(X, Z, V)
        raw = phibar * scales
        np.testing.assert_allclose(raw[:, :gamma], phi_c0, atol=1e-6)
        np.testing.assert_allclose(raw[:, gamma:], phi0, atol=1e-6)

    def test_all_zero_codes_rejected(self):
        with pytest.raises(ValueError):
            update_psi(np.ones((4, 3)), np.zeros((2, 3)))


class TestTrain:
    def test_zero_iterations_returns_init(self):
        rng = np.random.default_rng(9)
        ts = TrainingSet(X=dc_free(rng, 16, 40), Y=dc_free(rng, 16, 40))
        triple, trace = train(ts, 25, 16, LearnConfig(s_z=2, s_v=1, iterations=0))
        assert trace == []
        np.testing.assert_allclose(triple.psi_c, init_dictionary(16, 25), atol=1e-12)

    def test_update_monotonicity_in_trace(self):
        rng = np.random.default_rng(10)
        ts = TrainingSet(X=dc_free(rng, 16, 200), Y=dc_free(rng, 16, 200))
        _, trace = train(ts, 20, 8, LearnConfig(s_z=3, s_v=2, iterations=5, objective_tol=0.0))
        for obj_code, obj_psi, obj_phi in trace:
            assert obj_psi <= obj_code + 1e-9
            assert obj_phi <= obj_psi + 1e-9

    def test_unit_norm_output(self):
        rng = np.random.default_rng(11)
        ts = TrainingSet(X=dc_free(rng, 16, 100), Y=dc_free(rng, 16, 100))
        triple, _ = train(ts, 18, 9, LearnConfig(s_z=2, s_v=2, iterations=3, objective_tol=0.0))
        for M in (triple.psi_c, triple.phi_c, triple.phi):
            np.testing.assert_allclose(np.linalg.norm(M, axis=0), 1.0, atol=1e-10)

    def test_deterministic(self):
        rng_data = np.random.default_rng(12)
        X = dc_free(rng_data, 16, 80)
        Y = dc_free(rng_data, 16, 80)
        cfg = LearnConfig(s_z=2, s_v=1, iterations=3, objective_tol=0.0)
        _, t1 = train(TrainingSet(X=X, Y=Y), 18, 9, cfg)
        _, t2 = train(TrainingSet(X=X, Y=Y), 18, 9, cfg)
        assert t1 == t2


class TestSampleTrainingPatches:
    LEVELS = [(8, 4), (8, 4)]

    def test_small_enumeration(self):
        rng = np.random.default_rng(13)
        pair = (rng.random((8, 8)), rng.random((8, 8)))
        ts = sample_training_patches([pair], 4, [(8, 1)], 1, seed=0)
        assert ts.X.shape == (64, 4)
        assert np.abs(ts.X.mean(axis=0)).max() <= 1e-12
        assert np.abs(ts.Y.mean(axis=0)).max() <= 1e-12

    def test_constant_images_zero_columns(self):
        pair = (np.full((16, 16), 0.3), np.full((16, 16), 0.8))
        ts = sample_training_patches([pair], 10, self.LEVELS, 1, seed=1)
        assert np.abs(ts.X).max() <= 1e-12 and np.abs(ts.Y).max() <= 1e-12

    def test_seed_determinism(self):
        rng = np.random.default_rng(14)
        pair = (rng.random((32, 32)), rng.random((32, 32)))
        a = sample_training_patches([pair], 20, self.LEVELS, 1, seed=7)
        b = sample_training_patches([pair], 20, self.LEVELS, 1, seed=7)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.Y, b.Y)

    def test_scale_two_samples_lowpass(self):
        rng = np.random.default_rng(15)
        pair = (rng.random((64, 64)), rng.random((64, 64)))
        ts = sample_training_patches([pair], 5, self.LEVELS, 2, seed=2)
        assert ts.X.shape == (64, 5)

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            sample_training_patches([(np.zeros((8, 8)), np.zeros((8, 9)))], 2, [(8, 4)], 1, 0)
