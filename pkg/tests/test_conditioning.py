import numpy as np
import pytest

from exstab.conditioning import (
    ConditionReport,
    RankDeficientError,
    build_kernel_matrix,
    condition_number,
    jacobi_eigenvalues,
    run_simulation,
    write_bins_csv,
    write_kappa_csv,
)


class TestBuildKernelMatrix:
    def test_shape(self):
        a = build_kernel_matrix(20, 200, seed=0)
        assert a.shape == (200, 20)

    def test_entries_in_unit_interval(self):
        a = build_kernel_matrix(12, 100, seed=1)
        assert a.min() >= 0.0
        assert a.max() <= 1.0

    def test_no_zero_rows(self):
        a = build_kernel_matrix(10, 300, seed=2)
        assert np.abs(a).sum(axis=1).min() > 0

    def test_rows_scaled_by_cosine_weight(self):
        a = build_kernel_matrix(8, 50, seed=3)
        for row in a:
            present = row > 0
            s = present.sum()
            expected = np.sqrt(s / 8)
            assert row[present] == pytest.approx(expected, abs=1e-12)

    def test_full_row_unchanged(self):
        rng_hits = 0
        for seed in range(200):
            a = build_kernel_matrix(3, 8, seed=seed)
            full_rows = a[(a > 0).all(axis=1)]
            for row in full_rows:
                if np.allclose(row, 1.0):
                    rng_hits += 1
        assert rng_hits > 0  # sampled full rows keep weight one

    def test_deterministic(self):
        assert np.array_equal(build_kernel_matrix(15, 60, 7), build_kernel_matrix(15, 60, 7))

    def test_preconditions(self):
        with pytest.raises(ValueError):
            build_kernel_matrix(1, 10, 0)
        with pytest.raises(ValueError):
            build_kernel_matrix(10, 5, 0)


class TestJacobi:
    def test_diagonal_matrix(self):
        eig = jacobi_eigenvalues(np.diag([3.0, 1.0, 2.0]))
        assert eig == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)

    def test_hand_two_by_two(self):
        # [[2, 1], [1, 2]] has eigenvalues 1 and 3
        eig = jacobi_eigenvalues(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert eig == pytest.approx([1.0, 3.0], abs=1e-12)

    def test_matches_numpy_on_random_symmetric(self):
        rng = np.random.default_rng(0)
        for n in (3, 5, 10, 20):
            x = rng.normal(size=(n, n))
            sym = x + x.T
            mine = jacobi_eigenvalues(sym)
            ref = np.sort(np.linalg.eigvalsh(sym))
            assert mine == pytest.approx(ref, abs=1e-9 * max(1, np.abs(ref).max()))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            jacobi_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestConditionNumber:
    def test_orthonormal_columns_give_one(self):
        q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(30, 6)))
        assert condition_number(q) == pytest.approx(1.0, abs=1e-9)

    def test_scaled_orthogonal_pair(self):
        a = np.zeros((4, 2))
        a[0, 0] = 3.0
        a[1, 1] = 1.0
        assert condition_number(a) == pytest.approx(3.0, abs=1e-12)

    def test_hand_three_by_two(self):
        # columns orthogonal with norms 2 and 1 -> kappa = 2
        a = np.array([[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        assert condition_number(a) == pytest.approx(2.0, abs=1e-12)

    def test_matches_svd_oracle_on_kernel_matrix(self):
        a = build_kernel_matrix(20, 200, seed=5)
        sv = np.linalg.svd(a, compute_uv=False)
        expected = sv[0] / sv[-1]
        assert condition_number(a) == pytest.approx(expected, rel=1e-6)

    def test_scale_invariance(self):
        a = build_kernel_matrix(10, 80, seed=6)
        kappa = condition_number(a)
        for c in (0.001, 7.3, 1e4):
            assert condition_number(c * a) == pytest.approx(kappa, rel=1e-9)

    def test_kappa_at_least_one(self):
        for seed in range(5):
            a = build_kernel_matrix(6, 40, seed=seed)
            assert condition_number(a) >= 1.0

    def test_rank_deficient_reports_effective_rank(self):
        a = np.ones((10, 3))  # rank one
        with pytest.raises(RankDeficientError, match="effective rank 1 of 3"):
            condition_number(a)


@pytest.fixture(scope="module")
def small_report():
    return run_simulation(lengths=(6, 10), iterations=40, m=50, seed=1)


class TestRunSimulation:
    def test_bins_conserve_iterations(self, small_report):
        for l in small_report.lengths:
            assert sum(count for _, _, count in small_report.bins[l]) == 40

    def test_all_kappas_at_least_one(self, small_report):
        for l in small_report.lengths:
            assert small_report.kappas[l].min() >= 1.0

    def test_deterministic(self):
        a = run_simulation(lengths=(6,), iterations=10, m=30, seed=2)
        b = run_simulation(lengths=(6,), iterations=10, m=30, seed=2)
        assert np.array_equal(a.kappas[6], b.kappas[6])

    def test_iteration_seeds_are_order_independent(self):
        # each iteration derives its own seed, so a subset computed alone
        # matches the same positions of the full run
        from exstab.conditioning import _iteration_seed

        full = run_simulation(lengths=(8,), iterations=12, m=30, seed=3).kappas[8]
        lone = condition_number(build_kernel_matrix(8, 30, _iteration_seed(3, 8, 7)))
        assert lone == full[7]

    def test_csv_outputs(self, small_report, tmp_path):
        kappa_path = tmp_path / "kappa.csv"
        bins_path = tmp_path / "bins.csv"
        write_kappa_csv(small_report, kappa_path)
        write_bins_csv(small_report, bins_path)
        kappa_lines = kappa_path.read_text().splitlines()
        assert kappa_lines[0] == "length,iteration,kappa"
        assert len(kappa_lines) == 1 + 2 * 40
        value = float(kappa_lines[1].split(",")[2])
        assert value == small_report.kappas[small_report.lengths[0]][0]
        bins_lines = bins_path.read_text().splitlines()
        assert bins_lines[0] == "length,bin_lo,bin_hi,count"
