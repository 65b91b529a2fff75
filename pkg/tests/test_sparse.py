import numpy as np
import pytest

from xsep.numerics import normalize_columns
from xsep.sparse import BudgetPartition, SparseCode, budgeted_omp, greedy_step_oracle, omp

from alg1_reference import reference_budgeted_omp


def random_unit_dictionary(rng, n, d):
    return normalize_columns(rng.standard_normal((n, d)))[0]


class TestSparseCode:
    def test_dense_roundtrip(self):
        code = SparseCode(5, np.array([1, 3]), np.array([2.0, -1.0]))
        np.testing.assert_array_equal(code.to_dense(), [0.0, 2.0, 0.0, -1.0, 0.0])

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            SparseCode(5, np.array([3, 1]), np.array([1.0, 1.0]))

    def test_rejects_stored_zero(self):
        with pytest.raises(ValueError):
            SparseCode(5, np.array([1]), np.array([0.0]))

    def test_from_pairs_drops_zeros(self):
        code = SparseCode.from_pairs(4, [2, 0], [0.0, 1.5])
        np.testing.assert_array_equal(code.indices, [0])


class TestBudgetPartition:
    def test_rejects_overlap(self):
        with pytest.raises(ValueError):
            BudgetPartition(((np.array([0, 1]), 1), (np.array([1, 2]), 1)))

    def test_rejects_gap(self):
        with pytest.raises(ValueError):
            BudgetPartition(((np.array([0]), 1), (np.array([2]), 1)))

    def test_contiguous(self):
        part = BudgetPartition.contiguous([2, 3], [1, 2])
        np.testing.assert_array_equal(part.block_of, [0, 0, 1, 1, 1])
        np.testing.assert_array_equal(part.budgets, [1, 2])


class TestOmp:
    def test_single_atom(self):
        theta = np.eye(4)
        code = omp(theta, theta[:, 3], 1)
        np.testing.assert_array_equal(code.indices, [3])
        np.testing.assert_allclose(code.values, [1.0])

    def test_zero_budget(self):
        code = omp(np.eye(4), np.ones(4), 0)
        assert code.indices.size == 0

    def test_orthonormal_exact_recovery(self):
        rng = np.random.default_rng(0)
        theta, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        b = 2.0 * theta[:, 1] - theta[:, 4]
        code = omp(theta, b, 2)
        np.testing.assert_array_equal(code.indices, [1, 4])
        np.testing.assert_allclose(code.values, [2.0, -1.0], atol=1e-10)

    def test_budget_over_atoms_rejected(self):
        with pytest.raises(ValueError):
            omp(np.eye(3), np.ones(3), 4)

    def test_non_unit_dictionary_rejected(self):
        with pytest.raises(ValueError):
            omp(2.0 * np.eye(3), np.ones(3), 1)


class TestGreedyStepOracle:
    def setup_method(self):
        self.theta = np.eye(4)
        self.part = BudgetPartition.contiguous([2, 2], [1, 1])

    def test_single_admissible(self):
        r = np.array([0.0, 0.0, 0.7, 0.0])
        sel = np.zeros(4, dtype=bool)
        assert greedy_step_oracle(self.theta, r, self.part, sel, np.zeros(2)) == 2

    def test_exhausted_block_skipped(self):
        r = np.array([0.9, 0.0, 0.5, 0.0])
        sel = np.zeros(4, dtype=bool)
        counts = np.array([1, 0])  # block 0 already full
        assert greedy_step_oracle(self.theta, r, self.part, sel, counts) == 2

    def test_selected_atom_skipped(self):
        r = np.array([0.9, 0.4, 0.5, 0.0])
        sel = np.array([True, False, False, False])
        assert greedy_step_oracle(self.theta, r, self.part, sel, np.zeros(2)) == 2

    def test_tie_breaks_low_index(self):
        r = np.array([0.5, 0.0, 0.5, 0.0])
        sel = np.zeros(4, dtype=bool)
        assert greedy_step_oracle(self.theta, r, self.part, sel, np.zeros(2)) == 0

    def test_no_admissible_raises(self):
        sel = np.zeros(4, dtype=bool)
        with pytest.raises(RuntimeError):
            greedy_step_oracle(self.theta, np.ones(4), self.part, sel, np.array([1, 1]))


class TestBudgetedOmp:
    def test_degenerate_budget_matches_restricted_omp(self):
        rng = np.random.default_rng(1)
        theta = random_unit_dictionary(rng, 8, 12)
        b = rng.standard_normal(8)
        part = BudgetPartition.contiguous([4, 8], [0, 3])
        code = budgeted_omp(theta, b, part)
        restricted = omp(theta[:, 4:], b, 3)
        np.testing.assert_array_equal(code.indices - 4, restricted.indices)
        np.testing.assert_allclose(code.values, restricted.values, atol=1e-12)

    def test_two_block_budget_forces_switch(self):
        theta = np.eye(4)
        b = theta[:, 0] + 0.5 * theta[:, 1] + 0.1 * theta[:, 2]
        part = BudgetPartition.contiguous([2, 2], [1, 1])
        code = budgeted_omp(theta, b, part)
        # index 0 takes block 1's budget; despite atom 1 correlating higher,
        # the second pick must come from block 2
        assert set(code.indices) == {0, 2}

    def test_matches_reference_transcription(self):
        rng = np.random.default_rng(2)
        part = BudgetPartition.contiguous([12, 6], [3, 2])
        for _ in range(100):
            theta = random_unit_dictionary(rng, 8, 18)
            b = rng.standard_normal(8)
            code = budgeted_omp(theta, b, part)
            ref_support, ref_w = reference_budgeted_omp(
                theta, b, range(12), range(12, 18), 3, 2
            )
            np.testing.assert_array_equal(code.indices, np.sort(ref_support))
            dense = code.to_dense()
            ref_dense = np.zeros(18)
            ref_dense[ref_support] = ref_w
            np.testing.assert_allclose(dense, ref_dense, atol=1e-10)

    def test_single_block_identical_to_omp(self):
        rng = np.random.default_rng(3)
        theta = random_unit_dictionary(rng, 10, 20)
        b = rng.standard_normal(10)
        part = BudgetPartition.contiguous([20], [4])
        a = budgeted_omp(theta, b, part)
        c = omp(theta, b, 4)
        np.testing.assert_array_equal(a.indices, c.indices)
        np.testing.assert_array_equal(a.values, c.values)

    def test_budget_compliance_and_orthogonality(self):
        rng = np.random.default_rng(4)
        part = BudgetPartition.contiguous([10, 10, 12], [2, 3, 1])
        for _ in range(50):
            theta = random_unit_dictionary(rng, 16, 32)
            b = rng.standard_normal(16)
            code = budgeted_omp(theta, b, part)
            dense = code.to_dense()
            for (idx, budget) in part.blocks:
                assert np.count_nonzero(dense[idx]) <= budget
            r = b - theta @ dense
            if code.indices.size:
                assert np.max(np.abs(theta[:, code.indices].T @ r)) <= 1e-8 * np.linalg.norm(b)

    def test_residual_monotone(self):
        rng = np.random.default_rng(5)
        theta = random_unit_dictionary(rng, 12, 24)
        b = rng.standard_normal(12)
        part = BudgetPartition.contiguous([12, 12], [3, 3])
        # re-run pursuit manually via the step oracle to watch the residual
        from xsep.numerics import least_squares

        sel = np.zeros(24, dtype=bool)
        counts = np.zeros(2)
        support = []
        r = b.copy()
        last = np.linalg.norm(r)
        for _ in range(6):
            idx = greedy_step_oracle(theta, r, part, sel, counts)
            sel[idx] = True
            counts[part.block_of[idx]] += 1
            support.append(idx)
            w = least_squares(theta[:, support], b)
            r = b - theta[:, support] @ w
            cur = np.linalg.norm(r)
            assert cur <= last + 1e-12
            last = cur

    def test_early_exit_on_exact_signal(self):
        theta = np.eye(6)
        part = BudgetPartition.contiguous([3, 3], [2, 2])
        code = budgeted_omp(theta, theta[:, 1], part)
        np.testing.assert_array_equal(code.indices, [1])

    def test_zero_signal(self):
        theta = np.eye(6)
        part = BudgetPartition.contiguous([3, 3], [2, 2])
        assert budgeted_omp(theta, np.zeros(6), part).indices.size == 0

    def test_total_budget_exceeds_dim(self):
        rng = np.random.default_rng(7)
        theta = random_unit_dictionary(rng, 4, 6)
        part = BudgetPartition.contiguous([3, 3], [3, 3])
        with pytest.raises(ValueError, match="budget"):
            budgeted_omp(theta, np.ones(4), part)

    def test_determinism(self):
        rng = np.random.default_rng(6)
        theta = random_unit_dictionary(rng, 8, 16)
        b = rng.standard_normal(8)
        part = BudgetPartition.contiguous([8, 8], [2, 2])
        a = budgeted_omp(theta, b, part)
        c = budgeted_omp(theta, b, part)
        np.testing.assert_array_equal(a.indices, c.indices)
        np.testing.assert_array_equal(a.values, c.values)
