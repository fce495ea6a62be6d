"""Tests for the quadratic pencil solver and the eigenvalue bound."""

import numpy as np
import pytest

import specdamp as sd
from specdamp import spectrum
from specdamp.model import phase_operator

import oracles


def scalar_model(k, c):
    return sd.SystemModel(K=np.array([[float(k)]]), C=np.array([[float(c)]]))


class TestQuadraticPencil:
    def test_formula(self):
        m = sd.SystemModel(K=np.diag([2.0, 3.0]), C=np.diag([0.5, 1.0]))
        lam = -1.0 + 2.0j
        q = spectrum.quadratic_pencil(m, lam)
        assert np.allclose(q, lam**2 * np.eye(2) + lam * m.C + m.K)

    def test_real_argument_stays_real(self):
        m = scalar_model(2.0, 1.0)
        assert spectrum.quadratic_pencil(m, -0.5).dtype == np.float64


class TestScalarClosedForms:
    def test_overdamped_distinct_roots(self):
        # lam^2 + 3 lam + 2 = (lam + 1)(lam + 2)
        rep = sd.solve_qep(scalar_model(2.0, 3.0))
        assert np.allclose(sorted(rep.eigenvalues.real), [-2.0, -1.0], atol=1e-14)
        assert np.all(rep.eigenvalues.imag == 0.0)

    def test_critical_damping_exact_double_root(self):
        rep = sd.solve_qep(scalar_model(1.0, 2.0))
        assert np.array_equal(rep.eigenvalues, np.array([-1.0 + 0.0j, -1.0 + 0.0j]))

    def test_underdamped_conjugate_pair(self):
        # lam^2 + lam + 1: roots -1/2 +- i sqrt(3)/2
        rep = sd.solve_qep(scalar_model(1.0, 1.0))
        want = [-0.5 - 0.5j * np.sqrt(3.0), -0.5 + 0.5j * np.sqrt(3.0)]
        assert oracles.multiset_distance(rep.eigenvalues, want) <= 1e-15

    def test_undamped_pure_imaginary(self):
        rep = sd.solve_qep(scalar_model(4.0, 0.0))
        assert oracles.multiset_distance(rep.eigenvalues, [2.0j, -2.0j]) <= 1e-15


class TestSolveQep:
    def test_matches_companion_eigenvalues(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            n = int(rng.integers(1, 6))
            m = oracles.random_model(rng, n)
            got = sd.solve_qep(m).eigenvalues
            want = np.linalg.eigvals(phase_operator(m))
            assert oracles.multiset_distance(got, want) <= 1e-9

    def test_eigenpairs_satisfy_pencil(self):
        rng = np.random.default_rng(32)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            m = oracles.random_model(rng, n)
            rep = sd.solve_qep(m)
            for p in rep.eigenpairs:
                q = spectrum.quadratic_pencil(m, p.value)
                x = p.vector.position
                denom = np.linalg.norm(q) * max(np.linalg.norm(x), 1e-300)
                assert np.linalg.norm(q @ x) <= 1e-8 * denom
                # phase-space eigenvector structure: velocity = lam * position
                assert np.allclose(p.vector.velocity, p.value * x, atol=1e-8 * (1.0 + abs(p.value)))

    def test_residuals_within_tolerance(self):
        rng = np.random.default_rng(33)
        tol = sd.DEFAULT_TOLERANCES
        for _ in range(30):
            m = oracles.random_model(rng, int(rng.integers(1, 7)))
            rep = sd.solve_qep(m)
            assert all(p.residual <= tol.residual_tol for p in rep.eigenpairs)

    def test_sorted_by_real_then_imag(self):
        rng = np.random.default_rng(34)
        m = oracles.random_model(rng, 4)
        vals = sd.solve_qep(m).eigenvalues
        keys = [(v.real, v.imag) for v in vals]
        assert keys == sorted(keys)

    def test_left_half_plane(self):
        rng = np.random.default_rng(35)
        for _ in range(50):
            m = oracles.random_model(rng, int(rng.integers(1, 7)))
            assert sd.solve_qep(m).max_real <= 1e-12

    def test_block_diagonal_components_solved_independently(self):
        # two decoupled oscillators: spectrum is the union of the parts,
        # eigenvectors supported on their own block
        ka, ca = 2.0, 3.0
        kb, cb = 5.0, 0.0
        m = sd.SystemModel(K=np.diag([ka, kb]), C=np.diag([ca, cb]))
        rep = sd.solve_qep(m)
        want = list(sd.solve_qep(scalar_model(ka, ca)).eigenvalues) + list(
            sd.solve_qep(scalar_model(kb, cb)).eigenvalues
        )
        assert oracles.multiset_distance(rep.eigenvalues, want) <= 1e-14
        for p in rep.eigenpairs:
            x = p.vector.position
            assert min(abs(x[0]), abs(x[1])) == 0.0

    def test_report_helpers(self):
        rep = sd.solve_qep(scalar_model(4.0, 0.0))
        assert rep.min_abs == 2.0
        assert rep.max_real == 0.0
        assert rep.disk_radius == rep.bound.value


class TestEigenvalueBound:
    def test_undamped_equality(self):
        m = sd.SystemModel(K=np.diag([4.0, 9.0]), C=np.zeros((2, 2)))
        b = sd.eigenvalue_lower_bound(m)
        assert np.isclose(b.value, 2.0, rtol=1e-14)
        rep = sd.solve_qep(m)
        assert np.isclose(rep.min_abs, b.value, rtol=1e-14)

    def test_formula_reconstruction(self):
        rng = np.random.default_rng(36)
        for _ in range(25):
            n = int(rng.integers(1, 6))
            m = oracles.random_model(rng, n)
            b = sd.eigenvalue_lower_bound(m)
            v = 1.0 / np.linalg.eigvalsh(m.K)[0]
            vals, vecs = np.linalg.eigh(m.K)
            kih = vecs @ np.diag(vals**-0.5) @ vecs.T
            d = np.linalg.norm(kih @ m.C @ kih, 2)
            want = (np.sqrt(d * d + 4.0 * v) - d) / (2.0 * v)
            assert np.isclose(b.value, want, rtol=1e-10)
            assert np.isclose(b.norm_ainv, v, rtol=1e-10)
            assert np.isclose(b.norm_ainv_d, d, rtol=1e-10)

    def test_every_eigenvalue_outside_disk(self):
        rng = np.random.default_rng(37)
        for _ in range(60):
            m = oracles.random_model(rng, int(rng.integers(1, 7)))
            rep = sd.solve_qep(m)
            assert np.min(np.abs(rep.eigenvalues)) >= rep.bound.value - 1e-10

    def test_disk_radius_equals_bound(self):
        rng = np.random.default_rng(38)
        m = oracles.random_model(rng, 3)
        assert sd.resolvent_disk_radius(m) == sd.eigenvalue_lower_bound(m).value


class TestKernelBasis:
    def test_simple_eigenvalue_dimension_one(self):
        m = scalar_model(2.0, 3.0)
        basis = spectrum.pencil_kernel_basis(m, -1.0)
        assert basis.shape == (1, 1)

    def test_semisimple_double_dimension_two(self):
        # two identical decoupled modes share each eigenvalue
        m = sd.SystemModel(K=np.diag([2.0, 2.0]), C=np.diag([3.0, 3.0]))
        basis = spectrum.pencil_kernel_basis(m, -1.0)
        assert basis.shape == (2, 2)
        assert np.allclose(basis.conj().T @ basis, np.eye(2), atol=1e-12)

    def test_defective_double_dimension_one(self):
        # critical damping: algebraic 2, geometric 1
        m = scalar_model(1.0, 2.0)
        basis = spectrum.pencil_kernel_basis(m, -1.0)
        assert basis.shape == (1, 1)

    def test_max_dim_cap(self):
        m = sd.SystemModel(K=np.diag([2.0, 2.0]), C=np.diag([3.0, 3.0]))
        basis = spectrum.pencil_kernel_basis(m, -1.0, max_dim=1)
        assert basis.shape == (2, 1)


class TestClustering:
    def test_merges_conjugate_split_pair(self):
        vals = np.array([-1.0 + 1e-8j, -1.0 - 1e-8j, -3.0])
        clusters = spectrum.cluster_eigenvalues(vals, 1e-7)
        assert sorted(map(sorted, clusters)) == [[0, 1], [2]]

    def test_keeps_separated_values_apart(self):
        vals = np.array([-1.0, -1.001, 2.0j])
        clusters = spectrum.cluster_eigenvalues(vals, 1e-7)
        assert len(clusters) == 3

    def test_chains_through_running_mean(self):
        vals = np.array([-1.0, -1.0 + 4e-8, -1.0 + 8e-8])
        clusters = spectrum.cluster_eigenvalues(vals, 1e-7)
        assert len(clusters) == 1 and len(clusters[0]) == 3


class TestAccumulation:
    def test_uniform_beam_counts(self):
        spec = sd.BeamSpec(E=1.0, patches=(sd.Patch(2.0, 0.0, 1.0),), N=32)
        acc = spectrum.accumulation_experiment(spec, (8, 16, 32))
        assert acc.points == (-0.5,)
        assert acc.counts_nondecreasing
        assert np.all(np.diff(acc.counts[:, 0]) >= 0)
        # the slow branch homes in on the predicted point
        assert np.all(np.diff(acc.nearest[:, 0]) < 0)

    def test_two_patch_points_order(self):
        spec = sd.BeamSpec(
            E=2.0,
            patches=(sd.Patch(1.0, 0.0, 0.5), sd.Patch(4.0, 0.5, 1.0)),
            N=8,
        )
        acc = spectrum.accumulation_experiment(spec, (8,))
        # predicted points -E/a sorted by coefficient size, largest first
        assert acc.points == (-0.5, -2.0)

    def test_orders_validated(self):
        spec = sd.BeamSpec(E=1.0, patches=(sd.Patch(2.0, 0.0, 1.0),), N=8)
        with pytest.raises(ValueError):
            spectrum.accumulation_experiment(spec, (0,))
