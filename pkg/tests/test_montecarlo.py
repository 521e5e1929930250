import math

import numpy as np
import pytest

from trigdisc.errors import PreconditionError
from trigdisc.grids import PointSet, full_grid
from trigdisc.indexset import box_set, hyperbolic_cross
from trigdisc.korobov import exact_discretization
from trigdisc.montecarlo import (
    DiscretizationReport,
    certify_l2_constants,
    clipped_gaussian_family,
    concentration_tail_check,
    discretization_defect,
    empirical_constants,
    lambda_min_ladder,
    marcinkiewicz_search,
    polynomial_pair_family,
    random_nodes,
    tail_bound,
    two_point_family,
)
from trigdisc.polynomial import (
    NormSpec,
    TrigPolynomial,
    evaluate,
    lq_norm,
    random_polynomial,
)

Q1 = hyperbolic_cross(1, 2)
Q2 = hyperbolic_cross(2, 2)


def defect_oracle(f, q, z):
    """Second implementation of the defect formula: plain python loops for the
    discrete mean, manual Parseval (q = 2) or the shared norm spec otherwise."""
    total = 0.0
    for x in z.nodes:
        total += abs(evaluate(f, x)) ** q
    if q == 2:
        norm_q = sum(abs(c) ** 2 for c in f.coeffs.values())
    else:
        norm_q = lq_norm(f, NormSpec(q, 8)) ** q
    return total / len(z) - norm_q


class TestDefect:
    def test_constant(self):
        f = TrigPolynomial(2, {(0, 0): 2.0 - 1.0j})
        for q in (1, 2, 3.5):
            assert discretization_defect(f, q, random_nodes(17, 2, 0)) == pytest.approx(0, abs=1e-12)

    def test_unimodular(self):
        f = TrigPolynomial(2, {(1, 0): 1.0})
        assert discretization_defect(f, 1, random_nodes(9, 2, 1)) == pytest.approx(0, abs=1e-12)

    def test_against_oracle(self):
        f = random_polynomial(Q1, 3)
        z = random_nodes(11, 2, 5)
        for q in (1, 2):
            assert discretization_defect(f, q, z) == pytest.approx(
                defect_oracle(f, q, z), abs=1e-12
            )

    def test_unequal_weights_rejected(self):
        z = PointSet(1, [[0.0], [1.0]], [0.3, 0.7])
        with pytest.raises(ValueError):
            discretization_defect(TrigPolynomial(1, {(0,): 1.0}), 2, z)

    def test_mean_zero_over_node_draws(self):
        f = random_polynomial(Q1, 7)
        vals = np.array([discretization_defect(f, 2, random_nodes(8, 2, s)) for s in range(10_000)])
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean()) <= 4 * se


class TestRandomNodes:
    def test_deterministic(self):
        assert random_nodes(20, 3, 9) == random_nodes(20, 3, 9)

    def test_single(self):
        assert len(random_nodes(1, 2, 0)) == 1

    def test_clt_scale_mean(self):
        m, failures = 100_000, 0
        for seed in range(20):
            z = random_nodes(m, 1, seed)
            mean = np.exp(1j * z.nodes[:, 0]).mean()
            if abs(mean) > 4 / math.sqrt(m):
                failures += 1
        assert failures <= 1


class TestCertify:
    def test_korobov_unit(self):
        _, nodes = exact_discretization(Q1)
        lmin, lmax = certify_l2_constants(Q1, nodes)
        assert abs(lmin - 1) < 1e-9 and abs(lmax - 1) < 1e-9

    def test_rank_deficiency(self):
        lmin, _ = certify_l2_constants(Q1, random_nodes(4, 2, 0))
        assert lmin <= 1e-10

    def test_full_grid_unit(self):
        lmin, lmax = certify_l2_constants(box_set((2, 1)), full_grid((2, 1)))
        assert abs(lmin - 1) < 1e-10 and abs(lmax - 1) < 1e-10

    def test_size_cap(self):
        with pytest.raises(ValueError):
            certify_l2_constants(Q1, random_nodes(5, 2, 0), size_cap=3)

    def test_ratio_attained_by_eigenvectors(self):
        z = random_nodes(40, 2, 11)
        lmin, lmax = certify_l2_constants(Q1, z)
        K = Q1.as_array().astype(float)
        V = np.exp(1j * (z.nodes @ K.T))
        G = V.conj().T @ (z.weights[:, None] * V)
        lams, vecs = np.linalg.eigh(G)
        for lam, idx in ((lams[0], 0), (lams[-1], len(lams) - 1)):
            c = vecs[:, idx]
            ratio = (c.conj() @ G @ c).real / (c.conj() @ c).real
            assert ratio == pytest.approx(lam, abs=1e-8)


class TestEmpirical:
    def test_within_certified_interval(self):
        z = random_nodes(30, 2, 2)
        lmin, lmax = certify_l2_constants(Q1, z)
        rep = empirical_constants(Q1, 2, z, trials=25, seed=0)
        assert rep.lower >= lmin - 1e-9 and rep.upper <= lmax + 1e-9

    def test_korobov_near_one(self):
        _, nodes = exact_discretization(Q1)
        rep = empirical_constants(Q1, 2, nodes, trials=10, seed=1)
        assert abs(rep.lower - 1) < 1e-6 and abs(rep.upper - 1) < 1e-6

    def test_repeated_single_node_spreads(self):
        x0 = np.array([[0.7, 1.1]])
        z = PointSet(2, np.repeat(x0, 8, axis=0), np.full(8, 1 / 8))
        rep = empirical_constants(Q1, 1, z, trials=100, seed=3)
        assert rep.upper > 2 * rep.lower

    def test_report_schema(self):
        rep = empirical_constants(Q1, 2, random_nodes(10, 2, 0), trials=2, seed=0)
        d = rep.to_dict()
        for key in ("kind", "q", "d", "n", "Q_size", "m", "lower", "upper",
                    "eta", "trials", "attempts", "seeds", "runtime_ms"):
            assert key in d

    def test_invalid_order_rejected(self):
        with pytest.raises(ValueError):
            DiscretizationReport("empirical", 2, 2, 5, 10, lower=2.0, upper=1.0)


class TestSearch:
    def test_l2_success(self):
        res = marcinkiewicz_search(Q1, 2, 80, attempts=5, eta=0.25, trials=1, seed=0)
        assert res.success and res.point_set is not None
        assert res.report.success and res.report.kind == "certified-l2"
        assert 0.5 <= res.report.lower and res.report.upper <= 1.5

    def test_l2_rank_failure(self):
        res = marcinkiewicz_search(Q1, 2, len(Q1) - 1, attempts=3, eta=0.45, trials=1, seed=0)
        assert not res.success and res.point_set is None
        assert res.report.attempts == 3

    def test_l1_ensemble(self):
        res = marcinkiewicz_search(Q1, 1, 150, attempts=5, eta=0.25, trials=30, seed=0)
        assert res.success
        assert res.worst_samples and res.worst_samples[0].defect <= 0.25

    def test_deterministic_report(self):
        a = marcinkiewicz_search(Q1, 2, 40, attempts=3, eta=0.3, trials=1, seed=5).report
        b = marcinkiewicz_search(Q1, 2, 40, attempts=3, eta=0.3, trials=1, seed=5).report
        da, db = a.to_dict(), b.to_dict()
        da.pop("runtime_ms"), db.pop("runtime_ms")
        assert da == db


class TestLipschitz:
    def test_exact_perturbation(self):
        # f2 = f1 + delta * e^{i<k0, x>} has exactly ||f1 - f2||_inf = delta
        delta = 0.05
        f1 = random_polynomial(Q1, 0, "unit-l1").scaled(0.8)  # ||f1||_1 = 0.4
        f2 = TrigPolynomial(2, dict(f1.coeffs))
        f2.coeffs[(1, 0)] = f2.coeffs.get((1, 0), 0.0) + delta
        z = random_nodes(64, 2, 4)
        d1 = discretization_defect(f1, 1, z)
        d2 = discretization_defect(f2, 1, z)
        assert abs(d1 - d2) <= 2 * delta + 1e-9

    def test_random_pairs(self):
        z = random_nodes(50, 2, 8)
        for seed in range(4):
            f1 = random_polynomial(Q2, (seed, 0), "unit-l1")
            f2 = random_polynomial(Q2, (seed, 1), "unit-l1")
            sup = lq_norm(f1 - f2, NormSpec(math.inf, 16))
            gap = abs(discretization_defect(f1, 1, z) - discretization_defect(f2, 1, z))
            assert gap <= 2 * sup * 1.05 + 1e-9


class TestConcentration:
    def test_vacuous_bound_passes(self):
        # eta so small the bound exceeds 1: nothing to check
        assert tail_bound("L1-style", 1.0, 10, 0.1) >= 1.0

    def test_two_point_example(self):
        obs = concentration_tail_check(1.0, 200, 0.5, 10_000, 0, "L1-style")
        bound = tail_bound("L1-style", 1.0, 200, 0.5)
        assert bound == pytest.approx(2 * math.exp(-200 * 0.25 / 8))
        assert obs <= bound + 3 * math.sqrt(bound * (1 - bound) / 10_000)

    def test_l2_style_both_branches(self):
        fam = clipped_gaussian_family(1.0, 3.0)
        for eta in (0.5, 2.0):  # below and above 4/M = 4/3
            obs = concentration_tail_check(3.0, 100, eta, 5_000, 0, "L2-style", family=fam)
            bound = tail_bound("L2-style", 3.0, 100, eta)
            assert obs <= min(bound, 1.0) + 3 * math.sqrt(max(bound * (1 - bound), 1e-12) / 5_000)

    def test_proposition_pair_instance(self):
        delta = 0.05
        f1 = random_polynomial(Q1, 2, "unit-l1").scaled(0.8)
        f2 = TrigPolynomial(2, dict(f1.coeffs))
        f2.coeffs[(0, 1)] = f2.coeffs.get((0, 1), 0.0) + delta
        fam = polynomial_pair_family(f1, f2, delta)
        m, eta, trials = 200, 0.2, 4_000
        obs = concentration_tail_check(2 * delta, m, eta, trials, 0, "L1-style", family=fam)
        bound = 2 * math.exp(-m * eta**2 / (16 * delta))
        assert obs <= bound + 3 * math.sqrt(max(bound * (1 - bound), 1e-12) / trials)

    def test_family_validation(self):
        with pytest.raises(PreconditionError):
            concentration_tail_check(1.0, 10, 0.5, 10, 0, "L1-style", family=two_point_family(3.0))
        big = random_polynomial(Q1, 0, "unit-lq", q=1)  # ||f||_1 = 1 > 1/2
        with pytest.raises(PreconditionError):
            polynomial_pair_family(big, big, 0.1)

    def test_eta_domain(self):
        with pytest.raises(ValueError):
            concentration_tail_check(1.0, 10, 1.5, 10, 0, "L1-style")


class TestLadder:
    def test_median_lambda_min_monotone(self):
        rows = lambda_min_ladder(Q2, [34, 68, 136, 272], range(20), n=2)
        meds = [r["median_lambda_min"] for r in rows]
        assert all(b >= a for a, b in zip(meds, meds[1:]))
        assert all(r["n"] == 2 for r in rows)
