"""Variance bounds, measured edges, cavity and Poisson-process solvers."""
import cmath
import math
import warnings

import numpy as np
import pytest

from msmlab.bulk import (
    PPPAtoms,
    cavity_solve,
    density_mass,
    edge_samples,
    measure_bulk_edge,
    norm_lower_bound_check,
    norm_upper_bound,
    ppp_fixed_point,
    ppp_sample,
    variance_profile,
)
from msmlab.model import (
    FitnessVector,
    ModelParams,
    SymmetricMatrix,
    expected_matrix,
    gen_fitness,
    noise_matrix,
    sample_adjacency,
)


def zero_P(n: int) -> SymmetricMatrix:
    return SymmetricMatrix(n=n, entries=np.zeros((n, n)), kind="expected_P")


class TestVarianceProfile:
    def test_zero_kernel(self):
        vp = variance_profile(zero_P(4))
        assert vp.sigma == 0.0
        assert vp.sigma_star == 0.0
        assert vp.d_max == 0.0

    def test_maximal_bernoulli_variance(self):
        # p = 1/2 everywhere maximizes p(1-p), pinning both maxima
        n = 6
        P = SymmetricMatrix(n=n, entries=0.5 * (np.ones((n, n)) - np.eye(n)), kind="expected_P")
        vp = variance_profile(P)
        assert vp.sigma_star == 0.5
        assert vp.sigma == pytest.approx(math.sqrt(n - 1) / 2, abs=1e-15)

    def test_sigma_under_crude_level_paper_scale_kernel(self):
        params = ModelParams(n=4096, alpha=0.5)
        vp = variance_profile(expected_matrix(gen_fitness(params), params.epsilon_n))
        assert vp.sigma <= math.sqrt(4096) / 2
        # hubs saturate a pair probability through p = 1/2 exactly
        assert vp.sigma_star == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    def test_structural_invariants(self, alpha):
        params = ModelParams(n=256, alpha=alpha)
        vp = variance_profile(expected_matrix(gen_fitness(params), params.epsilon_n))
        assert vp.sigma_star <= 0.5 + 1e-12
        assert vp.sigma**2 <= vp.d_max + 1e-9

    def test_rejects_wrong_kind(self):
        A = SymmetricMatrix(n=3, entries=np.zeros((3, 3)), kind="adjacency_A")
        with pytest.raises(ValueError):
            variance_profile(A)


class TestNormUpperBound:
    def test_crude_value_paper_scale(self):
        _, crude = norm_upper_bound(variance_profile(zero_P(4)), 10**4)
        assert crude == pytest.approx(50.0 + 0.25 * math.sqrt(math.log(10**4)), abs=1e-12)
        assert crude == pytest.approx(50.76, abs=0.005)

    def test_zero_profile_collapses_expectation_bound(self):
        eb, crude = norm_upper_bound(variance_profile(zero_P(4)), 64)
        assert eb == 0.0
        assert crude == math.sqrt(64) / 2 + math.sqrt(math.log(64)) / 4

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    @pytest.mark.parametrize("n", [256, 1024])
    def test_expectation_under_crude_for_generated_profiles(self, alpha, n):
        params = ModelParams(n=n, alpha=alpha)
        vp = variance_profile(expected_matrix(gen_fitness(params), params.epsilon_n))
        eb, crude = norm_upper_bound(vp, n)
        assert eb <= crude

    def test_rejects_tiny_n(self):
        with pytest.raises(ValueError):
            norm_upper_bound(variance_profile(zero_P(3)), 1)


class TestBulkEdge:
    def test_zero_kernel_gives_zero_edge(self):
        assert np.array_equal(edge_samples(zero_P(8), 3, 0), np.zeros(3))

    def test_mean_under_crude_bound(self):
        params = ModelParams(n=512, alpha=0.5, seed=0)
        mean, stderr = measure_bulk_edge(params, 6)
        _, crude = norm_upper_bound(variance_profile(zero_P(4)), 512)
        assert 0.0 < mean <= crude
        assert stderr > 0.0

    def test_single_realization_has_zero_stderr(self):
        params = ModelParams(n=128, alpha=0.5, seed=0)
        mean, stderr = measure_bulk_edge(params, 1)
        assert mean > 0.0
        assert stderr == 0.0

    def test_reproducible(self):
        params = ModelParams(n=128, alpha=0.3, seed=5)
        assert measure_bulk_edge(params, 3) == measure_bulk_edge(params, 3)

    def test_rejects_no_realizations(self):
        with pytest.raises(ValueError):
            edge_samples(zero_P(4), 0, 0)


@pytest.fixture(scope="module")
def instance():
    params = ModelParams(n=1024, alpha=0.5, seed=3)
    P = expected_matrix(gen_fitness(params), params.epsilon_n)
    vp = variance_profile(P)
    noises = [noise_matrix(sample_adjacency(P, s), P) for s in range(5)]
    return vp, noises


class TestLowerBound:
    def test_full_fraction_at_half_delta(self, instance):
        vp, noises = instance
        rep = norm_lower_bound_check(vp, noises, delta=0.5)
        assert rep.fraction == 1.0
        assert rep.passed
        assert rep.threshold == pytest.approx(math.sqrt(0.5) * vp.sigma)
        assert 0.0 < rep.floor < 1.0

    def test_delta_one_trivial(self, instance):
        vp, noises = instance
        rep = norm_lower_bound_check(vp, noises, delta=1.0)
        assert rep.threshold == 0.0
        assert rep.fraction == 1.0

    def test_column_norm_witness(self, instance):
        vp, noises = instance
        rep = norm_lower_bound_check(vp, noises)
        assert rep.witness_width == pytest.approx(
            math.sqrt(1023 * math.log(2 / 0.05) / 2), abs=1e-12
        )
        assert rep.witness_max_dev <= 3 * rep.witness_width
        assert rep.witness_ok

    def test_validation(self, instance):
        vp, noises = instance
        with pytest.raises(ValueError):
            norm_lower_bound_check(vp, noises, delta=0.0)
        with pytest.raises(ValueError):
            norm_lower_bound_check(vp, [])
        with pytest.raises(ValueError):
            norm_lower_bound_check(vp, [zero_P(4)])


class TestCavitySolve:
    def test_free_resolvent_exact(self):
        fv = FitnessVector(x=np.ones(32), mode="deterministic", seed=0)
        sol = cavity_solve(fv, 0.0, np.array([0.3]), eta=0.7)
        # numpy and CPython complex division differ in the last ulp
        free = -1.0 / complex(0.3, 0.7)
        assert np.max(np.abs(sol.g_per_node - free)) < 1e-15
        assert sol.converged.all()
        assert sol.iterations[0] == 1
        assert abs(sol.S_n[0] - free) < 1e-15

    @pytest.mark.parametrize("zr,eta", [(0.2, 0.5), (0.0, 1.0), (-0.4, 0.3)])
    def test_constant_kernel_quadratic_oracle(self, zr, eta):
        # equal weights make the kernel constant, so the fixed point is the
        # scalar root of c g^2 + z g + 1 = 0 with c = p (n-1)/n
        p, n = 0.3, 64
        eps = -math.log1p(-p)
        fv = FitnessVector(x=np.ones(n), mode="deterministic", seed=0)
        sol = cavity_solve(fv, eps, np.array([zr]), eta=eta, tol=1e-12)
        c = p * (n - 1) / n
        z = complex(zr, eta)
        disc = cmath.sqrt(z * z - 4 * c)
        oracle = next(r for r in ((-z + disc) / (2 * c), (-z - disc) / (2 * c)) if r.imag > 0)
        assert abs(sol.g_per_node[0, 0] - oracle) < 1e-10
        assert sol.converged.all()

    def test_bulk_window_density(self):
        params = ModelParams(n=512, alpha=0.5, seed=1)
        fv = gen_fitness(params)
        sol, history = cavity_solve(
            fv, params.epsilon_n, np.linspace(-0.75, 0.75, 41), eta=0.05, track_deltas=True
        )
        assert sol.converged.all()
        assert (sol.S_n.imag > 0.0).all()
        assert (sol.density >= -1e-9).all()
        assert 0.9 <= density_mass(sol) <= 1.1
        # contraction diagnostic: step sizes shrink monotonically after
        # burn-in; violations warn rather than fail
        worst = np.array([h.max() for h in history])
        violations = int(np.sum(np.diff(worst[10:]) > 1e-12))
        if violations:
            warnings.warn(f"{violations} non-monotone delta steps after burn-in")

    def test_default_eta_heuristic(self):
        fv = FitnessVector(x=np.ones(64), mode="deterministic", seed=0)
        grid = np.linspace(-1.0, 1.0, 5)
        sol = cavity_solve(fv, 0.0, grid)
        assert np.allclose(sol.z_grid.imag, 2.5 / math.sqrt(64) * 2.0)

    def test_validation(self):
        fv = FitnessVector(x=np.ones(8), mode="deterministic", seed=0)
        grid = np.array([0.0])
        with pytest.raises(ValueError):
            cavity_solve(fv, 0.0, grid, eta=0.1, damping=0.0)
        with pytest.raises(ValueError):
            cavity_solve(fv, 0.0, grid, eta=-0.1)
        with pytest.raises(ValueError):
            cavity_solve(fv, -1.0, grid, eta=0.1)
        with pytest.raises(ValueError):
            cavity_solve(fv, 0.0, np.empty(0), eta=0.1)

    def test_herglotz_across_alpha(self):
        for alpha in (0.2, 0.8):
            params = ModelParams(n=256, alpha=alpha)
            sol = cavity_solve(
                gen_fitness(params), params.epsilon_n, np.linspace(-0.6, 0.6, 7), eta=0.1
            )
            assert sol.converged.all()
            assert (sol.S_n.imag > 0.0).all()


class TestPPPSample:
    def test_gamma_mean(self):
        last = np.array([ppp_sample(0.5, 10, seed).gamma_cumsum[-1] for seed in range(2000)])
        assert abs(last.mean() - 10.0) <= 5 * math.sqrt(10) / math.sqrt(2000)

    def test_poisson_count_above_one(self):
        counts = np.array([(ppp_sample(0.5, 50, s).y > 1.0).sum() for s in range(2000)])
        # E#{y_k > u} = u^(-alpha) = 1 at u = 1
        assert abs(counts.mean() - 1.0) <= 5 / math.sqrt(2000)

    def test_monotone_atoms(self):
        atoms = ppp_sample(0.3, 500, 11)
        assert np.all(np.diff(atoms.gamma_cumsum) > 0)
        assert np.all(np.diff(atoms.y) < 0)

    def test_tail_weight_bound_value(self):
        # alpha/(1-alpha) K^(-(1-alpha)/alpha) = 1e-4 at alpha=1/2, K=1e4
        assert ppp_sample(0.5, 10**4, 0).tail_weight_bound == pytest.approx(1e-4, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            ppp_sample(0.5, 0, 0)
        with pytest.raises(ValueError):
            ppp_sample(1.0, 10, 0)
        with pytest.raises(ValueError):
            PPPAtoms(alpha=0.5, K=2, gamma_cumsum=np.array([2.0, 1.0]), y=np.array([2.0, 1.0]), seed=0)
        with pytest.raises(ValueError):
            PPPAtoms(alpha=0.5, K=3, gamma_cumsum=np.array([1.0, 2.0]), y=np.array([2.0, 1.0]), seed=0)


class TestPPPFixedPoint:
    def test_empty_atoms_free_resolvent(self):
        empty = PPPAtoms(alpha=0.5, K=0, gamma_cumsum=np.empty(0), y=np.empty(0), seed=0)
        fp = ppp_fixed_point(empty, 0.3, 0.7)
        assert fp.averaged == -1.0 / complex(0.3, 0.7)
        assert fp.converged

    @pytest.mark.parametrize("zr,eta", [(0.0, 2.0), (0.5, 1.0), (-0.3, 0.8)])
    def test_single_saturated_atom_quadratic(self, zr, eta):
        # one huge atom saturates the kernel, so g = -1/(z + g)
        one = PPPAtoms(alpha=0.5, K=1, gamma_cumsum=np.array([1e-4]), y=np.array([1e8]), seed=0)
        fp = ppp_fixed_point(one, zr, eta, tol=1e-13)
        z = complex(zr, eta)
        disc = cmath.sqrt(z * z - 4)
        oracle = next(r for r in ((-z + disc) / 2, (-z - disc) / 2) if r.imag > 0)
        assert abs(fp.g[0] - oracle) < 1e-12
        assert fp.converged

    def test_truncation_stability_under_doubling(self):
        f1 = ppp_fixed_point(ppp_sample(0.5, 10_000, 0), 0.0, 0.5)
        f2 = ppp_fixed_point(ppp_sample(0.5, 20_000, 0), 0.0, 0.5)
        assert f1.converged and f2.converged
        assert abs(f1.averaged - f2.averaged) / abs(f1.averaged) < 0.05

    def test_herglotz(self):
        fp = ppp_fixed_point(ppp_sample(0.5, 5_000, 3), 0.2, 0.3)
        assert fp.converged
        assert fp.averaged.imag > 0
        assert (fp.g.imag > 0).all()

    def test_validation(self):
        atoms = ppp_sample(0.5, 10, 0)
        with pytest.raises(ValueError):
            ppp_fixed_point(atoms, 0.0, 0.0)
        with pytest.raises(ValueError):
            ppp_fixed_point(atoms, 0.0, 0.5, damping=1.5)


class TestCrossMethod:
    def test_cavity_and_ppp_transforms_agree(self):
        # both transforms are near the free resolvent at these z, so the
        # band mostly certifies that scaling and sign conventions line up
        params = ModelParams(n=2048, alpha=0.5)
        fv = gen_fitness(params)
        atoms = ppp_sample(0.5, 10_000, 0)
        for eta in (0.5, 1.0, 2.0):
            sol = cavity_solve(fv, params.epsilon_n, np.array([0.0]), eta=eta)
            fp = ppp_fixed_point(atoms, 0.0, eta)
            assert sol.converged.all() and fp.converged
            rel = abs(sol.S_n[0] - fp.averaged) / abs(sol.S_n[0])
            assert rel < 0.2
