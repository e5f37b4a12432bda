import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codakit import (
    CodaError,
    CompositionMatrix,
    RawCountMatrix,
    adjusted_rand,
    amalgamation_cluster,
    close,
    dendrogram_slr_pairs,
    dendrogram_to_contrast_tree,
    explained_logratio_variance,
    kmeans,
    matched_agreement,
    slr_set,
    total_variance,
    ward_parts,
)

from conftest import random_composition


def proportional_pair_composition(seed=0, n=12, factor=1.7):
    rng = np.random.default_rng(seed)
    raw = rng.random((n, 3)) + 0.1
    raw = np.column_stack([raw[:, 0], factor * raw[:, 0], raw[:, 1], raw[:, 2]])
    return close(RawCountMatrix(raw))


class TestWardParts:
    def test_identical_clr_columns_merge_first_at_zero(self):
        # an exactly duplicated part has an identical CLR column; Ward must
        # merge the pair first at height 0
        c = proportional_pair_composition(factor=1.0)
        d = ward_parts(c)
        first = d.merges[0]
        assert {first[0], first[1]} == {0, 1}
        assert first[2] < 1e-9

    def test_two_parts_single_merge(self):
        c = random_composition(1, n=8, d=2)
        d = ward_parts(c)
        assert len(d.merges) == 1

    def test_part_reorder_invariance(self):
        c = random_composition(2, n=15, d=6)
        perm = [3, 0, 5, 1, 4, 2]
        reordered = CompositionMatrix(
            c.values[:, perm], part_names=[c.part_names[i] for i in perm]
        )
        d1, d2 = ward_parts(c), ward_parts(reordered)
        names1 = sorted(
            tuple(sorted(
                [d1.leaf_names[i] for i in d1.leaves_under(a)]
                + [d1.leaf_names[i] for i in d1.leaves_under(b)]
            ))
            for a, b, _ in d1.merges
        )
        names2 = sorted(
            tuple(sorted(
                [d2.leaf_names[i] for i in d2.leaves_under(a)]
                + [d2.leaf_names[i] for i in d2.leaves_under(b)]
            ))
            for a, b, _ in d2.merges
        )
        assert names1 == names2
        assert np.allclose(sorted(h for _, _, h in d1.merges),
                           sorted(h for _, _, h in d2.merges), atol=1e-9)

    def test_tree_to_contrasts_orthonormal(self, comp20x8):
        tree = dendrogram_to_contrast_tree(ward_parts(comp20x8))
        cm = tree.orthonormal_contrast()
        assert np.allclose(cm @ cm.T, np.eye(7), atol=1e-10)


class TestAmalgamation:
    def test_proportional_parts_merge_first_with_zero_loss(self):
        c = proportional_pair_composition()
        d = amalgamation_cluster(c)
        first = d.merges[0]
        assert {first[0], first[1]} == {0, 1}
        assert first[2] < 1e-9

    def test_losses_nonnegative_and_sum_to_100(self, comp20x8):
        d = amalgamation_cluster(comp20x8)
        heights = np.array([h for _, _, h in d.merges])
        assert np.all(heights >= -1e-12)
        assert abs(heights.sum() - 100.0) < 1e-8

    def test_cumulative_explained_monotone(self, comp20x8):
        d = amalgamation_cluster(comp20x8)
        explained = 100.0 - np.cumsum([h for _, _, h in d.merges])
        assert np.all(np.diff(explained) <= 1e-10)

    def test_induced_logratio_tree_explains_most_variance(self, comp20x8):
        d = amalgamation_cluster(comp20x8)
        pairs = dendrogram_slr_pairs(d)
        lm = slr_set(comp20x8, pairs)
        explained = explained_logratio_variance(comp20x8, lm.values)
        assert 0.9 < explained <= 1.0 + 1e-12

    def test_loss_sum_matches_direct_recomputation(self):
        c = random_composition(77, n=10, d=5)
        d = amalgamation_cluster(c)
        assert abs(sum(h for _, _, h in d.merges) - 100.0) < 1e-8
        assert total_variance(c) > 0


class TestKmeans:
    @staticmethod
    def blobs(seed=0, n_per=30, spread=0.05, k=3):
        rng = np.random.default_rng(seed)
        centers = rng.standard_normal((k, 4)) * 10
        points = np.vstack(
            [centers[i] + spread * rng.standard_normal((n_per, 4)) for i in range(k)]
        )
        truth = np.repeat(np.arange(1, k + 1), n_per)
        return points, truth

    def test_k_equals_n_gives_zero_inertia(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((6, 3))
        a = kmeans(x, 6, seed=0, restarts=3)
        assert a.inertia < 1e-20

    def test_recovers_separated_blobs(self):
        x, truth = self.blobs(seed=9)
        a = kmeans(x, 3, seed=1, restarts=5)
        assert np.isclose(adjusted_rand(a.labels, truth), 1.0)

    def test_inertia_path_nonincreasing(self):
        x, _ = self.blobs(seed=10, spread=2.0)
        a = kmeans(x, 3, seed=3, restarts=4)
        assert all(np.diff(a.inertia_path) <= 1e-9)

    def test_k_too_large_rejected(self):
        with pytest.raises(CodaError, match="k must"):
            kmeans(np.zeros((4, 2)), 5, seed=0)

    def test_deterministic(self):
        x, _ = self.blobs(seed=11, spread=1.0)
        a = kmeans(x, 3, seed=5, restarts=8)
        b = kmeans(x, 3, seed=5, restarts=8)
        assert np.array_equal(a.labels, b.labels)
        assert a.inertia == b.inertia

    def test_labels_one_based_no_empty(self):
        x, _ = self.blobs(seed=12)
        a = kmeans(x, 3, seed=1)
        assert set(np.unique(a.labels)) == {1, 2, 3}


class TestAdjustedRand:
    def test_identical(self):
        labels = np.array([1, 1, 2, 2, 3, 3])
        assert adjusted_rand(labels, labels) == 1.0

    def test_label_permutation_invariance(self):
        a = np.array([1, 1, 2, 2, 3, 3])
        b = np.array([3, 3, 1, 1, 2, 2])
        assert adjusted_rand(a, b) == 1.0

    def test_one_cluster_vs_singletons_zero(self):
        n = 10
        a = np.ones(n, dtype=int)
        b = np.arange(n)
        # closed form: index = expected = 0, max_index = C(n,2)/2
        assert adjusted_rand(a, b) == 0.0

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.integers(1, 4, 30)
        b = rng.integers(1, 4, 30)
        assert np.isclose(adjusted_rand(a, b), adjusted_rand(b, a), atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(CodaError, match="same rows"):
            adjusted_rand([1, 2], [1, 2, 3])


class TestMatchedAgreement:
    def test_identical(self):
        labels = np.array([1, 2, 3, 1, 2, 3])
        assert matched_agreement(labels, labels) == 1.0

    def test_known_confusion(self):
        a = np.array([1, 1, 1, 2, 2, 2])
        b = np.array([2, 2, 1, 1, 1, 1])
        # best matching: a1->b2 (2 hits), a2->b1 (3 hits) out of 6
        assert np.isclose(matched_agreement(a, b), 5 / 6)
