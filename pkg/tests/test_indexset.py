import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trigdisc.indexset import (
    IndexSet,
    box_set,
    difference_set,
    dyadic_block,
    hyperbolic_cross,
    load_indexset,
    positive_part,
    save_indexset,
)


def brute_force_block(s):
    """Oracle: scan a wide integer range against the defining inequalities."""
    d = len(s)
    bound = 2 ** max(s) + 2
    out = []
    import itertools

    for k in itertools.product(range(-bound, bound + 1), repeat=d):
        ok = True
        for kj, sj in zip(k, s):
            lo = int(2 ** (sj - 1)) if sj >= 1 else 0
            if not (lo <= abs(kj) < 2**sj):
                ok = False
                break
        if ok:
            out.append(k)
    return sorted(out)


class TestDyadicBlock:
    def test_zero_block(self):
        assert dyadic_block((0, 0)).freqs == ((0, 0),)

    def test_univariate(self):
        assert dyadic_block((1,)).freqs == ((-1,), (1,))

    def test_mixed(self):
        assert dyadic_block((2, 0)).freqs == ((-3, 0), (-2, 0), (2, 0), (3, 0))

    @pytest.mark.parametrize("s", [(0,), (3,), (1, 2), (2, 0, 1)])
    def test_against_brute_force(self, s):
        assert dyadic_block(s).freqs == tuple(brute_force_block(s))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            dyadic_block((-1,))


class TestHyperbolicCross:
    def test_level_zero(self):
        assert hyperbolic_cross(0, 2).freqs == ((0, 0),)

    def test_level_one_d2(self):
        Q = hyperbolic_cross(1, 2)
        assert set(Q) == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}

    def test_level_two_d1(self):
        assert set(k for (k,) in hyperbolic_cross(2, 1)) == set(range(-3, 4))

    @pytest.mark.parametrize("n", range(13))
    def test_univariate_size(self, n):
        # oracle: membership scan over the defining block inequalities
        members = [k for (k,) in brute_force_union(n)]
        assert len(hyperbolic_cross(n, 1)) == len(members) == 2 ** (n + 1) - 1

    def test_blocks_disjoint_and_sizes_add(self):
        import itertools

        for n, d in [(3, 2), (2, 3)]:
            blocks = []
            for s in itertools.product(range(n + 1), repeat=d):
                if sum(s) <= n:
                    blocks.append(set(dyadic_block(s)))
            for a in range(len(blocks)):
                for b in range(a + 1, len(blocks)):
                    assert not (blocks[a] & blocks[b])
            assert len(hyperbolic_cross(n, d)) == sum(len(b) for b in blocks)

    def test_box_containment(self):
        for n, d in [(3, 2), (4, 1), (2, 3)]:
            box = box_set([2**n - 1] * d)
            assert all(k in box for k in hyperbolic_cross(n, d))

    def test_d_zero_rejected(self):
        with pytest.raises(ValueError):
            hyperbolic_cross(1, 0)


def brute_force_union(n):
    out = set()
    for s in range(n + 1):
        out.update(dyadic_block((s,)).freqs)
    return sorted(out)


class TestDifferenceSet:
    def test_singleton(self):
        assert difference_set(IndexSet(2, ((0, 0),))).freqs == ((0, 0),)

    def test_level_one_cross(self):
        # oracle: all 25 ordered pairs, deduplicated by hand
        Q = hyperbolic_cross(1, 2)
        pairs = {tuple(np.subtract(m, k)) for m in Q for k in Q}
        L = difference_set(Q)
        assert set(L) == pairs
        assert len(L) == 13
        expected = {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (2, 0), (-2, 0),
                    (0, 2), (0, -2), (1, 1), (-1, -1), (1, -1), (-1, 1)}
        assert set(L) == expected

    def test_size_bound_random(self):
        g = np.random.default_rng(0)
        freqs = tuple(map(tuple, g.integers(-10, 11, (20, 3)).tolist()))
        Q = IndexSet(3, freqs)
        assert len(difference_set(Q)) <= len(Q) ** 2

    @given(st.sets(st.tuples(st.integers(-8, 8), st.integers(-8, 8)), min_size=1, max_size=12))
    @settings(max_examples=50, deadline=None)
    def test_symmetric_under_negation(self, freqs):
        L = difference_set(IndexSet(2, tuple(freqs)))
        assert all((-v[0], -v[1]) in L for v in L)

    def test_contains_zero(self):
        L = difference_set(hyperbolic_cross(2, 2))
        assert (0, 0) in L

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            difference_set(IndexSet(1, ()))


class TestBoxSet:
    def test_examples(self):
        assert box_set((0, 0)).freqs == ((0, 0),)
        assert set(k for (k,) in box_set((1,))) == {-1, 0, 1}
        assert len(box_set((2, 1))) == 15

    def test_size_formula(self):
        for N in [(3,), (2, 2), (1, 0, 2)]:
            assert len(box_set(N)) == int(np.prod([2 * c + 1 for c in N]))


class TestPositivePart:
    def test_cross(self):
        assert positive_part(hyperbolic_cross(1, 2)).freqs == ((0, 0), (0, 1), (1, 0))

    def test_box(self):
        assert set(k for (k,) in positive_part(box_set((1,)))) == {0, 1}

    def test_empty_result(self):
        assert len(positive_part(IndexSet(1, ((-1,),)))) == 0


class TestCanonicalForm:
    def test_deduplication_and_order(self):
        Q = IndexSet(2, ((1, 0), (0, 1), (1, 0), (-1, 0)))
        assert Q.freqs == ((-1, 0), (0, 1), (1, 0))

    def test_serialization_stable(self):
        a = IndexSet(2, ((1, 0), (0, 1), (-1, 0)))
        b = IndexSet(2, ((-1, 0), (1, 0), (0, 1)))
        assert a.serialize() == b.serialize()
        assert a.sha256() == b.sha256()

    def test_roundtrip(self, tmp_path):
        Q = hyperbolic_cross(2, 2)
        path = tmp_path / "q.txt"
        save_indexset(Q, path)
        assert load_indexset(path) == Q

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            IndexSet(2, ((1,),))
