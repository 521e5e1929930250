import math

import numpy as np
import pytest

from trigdisc.errors import VerificationError
from trigdisc.grids import full_grid
from trigdisc.indexset import box_set, hyperbolic_cross
from trigdisc.korobov import exact_discretization
from trigdisc.montecarlo import random_nodes
from trigdisc.sparsify import (
    FrameSystem,
    brute_force_subset,
    bss_condition_bound,
    bss_sparsify,
    frame_from_grid,
    random_tight_frame,
    real_embedding,
)

Q1 = hyperbolic_cross(1, 2)


class TestFrameSystem:
    def test_random_tight_frame_passes(self):
        fr = random_tight_frame(40, 8, 0)
        assert fr.space_dim == 8 and fr.size == 40 and fr.is_real

    def test_perturbed_frame_rejected(self):
        fr = random_tight_frame(20, 5, 1)
        bad = fr.vectors.copy()
        bad[0, 0] += 1e-3
        with pytest.raises(VerificationError):
            FrameSystem(bad)

    def test_grid_frame_counts(self):
        fr = frame_from_grid(Q1, full_grid((1, 1)))
        assert fr.space_dim == 5 and fr.size == 9 and fr.equal_norm

    def test_square_grid_frame(self):
        fr = frame_from_grid(box_set((1,)), full_grid((1,)))
        assert fr.space_dim == fr.size == 3

    def test_korobov_frame(self):
        Q = hyperbolic_cross(2, 2)
        params, nodes = exact_discretization(Q)
        fr = frame_from_grid(Q, nodes)
        assert fr.size == params.p and fr.space_dim == len(Q) and fr.equal_norm

    def test_non_exact_grid_rejected(self):
        with pytest.raises(VerificationError):
            frame_from_grid(Q1, random_nodes(9, 2, 0))


class TestRealEmbedding:
    def test_shape_and_invariants(self):
        fr = frame_from_grid(Q1, full_grid((1, 1)))
        emb = real_embedding(fr)
        assert emb.space_dim == 10 and emb.size == 18
        assert emb.is_real and emb.equal_norm

    def test_quadratic_form_preserved(self):
        fr = frame_from_grid(Q1, full_grid((1, 1)))
        emb = real_embedding(fr)
        g = np.random.default_rng(0)
        for _ in range(5):
            w = g.standard_normal(5) + 1j * g.standard_normal(5)
            w_emb = np.empty(10)
            w_emb[0::2], w_emb[1::2] = w.real, w.imag
            for j in range(fr.size):
                lhs = abs(np.vdot(w, fr.vectors[:, j])) ** 2
                rhs = (w_emb @ emb.vectors[:, 2 * j]) ** 2 + (w_emb @ emb.vectors[:, 2 * j + 1]) ** 2
                assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_real_input_passthrough(self):
        fr = random_tight_frame(12, 4, 2)
        assert real_embedding(fr) is fr


class TestBssSparsify:
    def test_square_frame_unit_weights(self):
        fr = random_tight_frame(9, 9, 3)
        w, kappa = bss_sparsify(fr, 2.0)
        assert np.allclose(w, 1.0) and kappa == pytest.approx(1.0, abs=1e-9)

    def test_bound_formula(self):
        assert bss_condition_bound(4.0) == pytest.approx(9.0)

    def test_oversample_validated(self):
        with pytest.raises(ValueError):
            bss_sparsify(random_tight_frame(10, 3, 0), 1.0)

    @pytest.mark.parametrize("oversample", [2.0, 4.0, 9.0])
    def test_random_frames(self, oversample):
        fr = random_tight_frame(60, 10, 4)
        w, kappa = bss_sparsify(fr, oversample)
        assert np.count_nonzero(w) <= math.ceil(oversample * 10)
        assert kappa <= bss_condition_bound(oversample) + 1e-9
        assert np.all(w >= 0)

    def test_two_sided_inequality_spectrally(self):
        fr = random_tight_frame(48, 8, 5)
        w, kappa = bss_sparsify(fr, 4.0)
        A = (fr.vectors * w) @ fr.vectors.conj().T
        lam = np.linalg.eigvalsh(A)
        assert lam[0] == pytest.approx(1.0, rel=1e-12)
        assert lam[-1] == pytest.approx(kappa, rel=1e-12)
        g = np.random.default_rng(1)
        for _ in range(5):
            c = g.standard_normal(8)
            lhs = float(np.sum(w * np.abs(fr.vectors.conj().T @ c) ** 2))
            n2 = float(c @ c)
            assert n2 - 1e-9 <= lhs <= kappa * n2 + 1e-9

    def test_complex_grid_frame(self):
        Q = hyperbolic_cross(2, 2)
        _, nodes = exact_discretization(Q)
        fr = frame_from_grid(Q, nodes)
        w, kappa = bss_sparsify(fr, 4.0)
        assert np.count_nonzero(w) <= math.ceil(4.0 * len(Q))
        assert kappa <= 9.0 + 1e-9

    def test_deterministic(self):
        fr = random_tight_frame(30, 6, 6)
        w1, k1 = bss_sparsify(fr, 3.0)
        w2, k2 = bss_sparsify(fr, 3.0)
        assert np.array_equal(w1, w2) and k1 == k2


class TestBruteForceSubset:
    def test_square_orthonormal_full_set(self):
        fr = random_tight_frame(5, 5, 7)
        res = brute_force_subset(fr, 1.0)
        assert res.success and res.subset == tuple(range(5))
        assert res.c0 == pytest.approx(1.0) and res.C0 == pytest.approx(1.0)

    def test_grid_frame_exhaustive(self):
        fr = frame_from_grid(Q1, full_grid((1, 1)))
        res = brute_force_subset(fr, 7 / 9)
        assert res.success and res.exhaustive
        assert len(res.subset) <= 7 and res.c0 > 0

    def test_too_small_budget_fails(self):
        fr = frame_from_grid(Q1, full_grid((1, 1)))
        res = brute_force_subset(fr, 4 / 9)  # fewer than N = 5 vectors
        assert not res.success

    def test_remark_cardinality_bounds(self):
        # equal-norm frames: c0 * N <= |J| <= C0 * N for achieved constants
        for seed in (0, 1):
            fr = frame_from_grid(box_set((2,)), full_grid((2,)))
            res = brute_force_subset(fr, 1.0)
            assert res.success
            N = fr.space_dim
            assert res.c0 * N <= len(res.subset) + 1e-9
            assert len(res.subset) <= res.C0 * N + 1e-9

    def test_greedy_fallback_flagged(self):
        fr = random_tight_frame(24, 3, 8)
        res = brute_force_subset(fr, 0.5)
        assert res.success and not res.exhaustive
        assert len(res.subset) <= 12

    def test_size_cap(self):
        with pytest.raises(ValueError):
            brute_force_subset(random_tight_frame(201, 3, 0), 0.5)
