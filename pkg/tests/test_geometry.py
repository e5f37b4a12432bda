import numpy as np
import pytest
from itertools import combinations
from scipy.spatial.distance import pdist

from codakit import (
    CodaError,
    CompositionMatrix,
    DistanceMatrix,
    alr,
    chi_square_distances,
    clr,
    hellinger_distances,
    logratio_distances,
    lr_all,
    pair_distances,
    principal_coordinates,
    procrustes_correlation,
    sample_index_pairs,
    set_weights,
    stress,
    subcomposition,
    variation_matrix,
)
from codakit.geometry import euclidean_row_distances

from conftest import random_composition


class TestLogratioDistances:
    def test_identical_rows_zero(self):
        c = CompositionMatrix([[0.2, 0.3, 0.5]] * 3)
        assert np.allclose(logratio_distances(c).values, 0.0)

    def test_equals_weighted_all_pairs_form(self):
        rng = np.random.default_rng(2)
        c = set_weights(random_composition(21, n=10, d=6), rng.random(6) + 0.2)
        d_clr = logratio_distances(c).values
        lm = lr_all(c)
        w = c.weights
        pair_w = np.array([w[j] * w[k] for j, k in combinations(range(6), 2)])
        d_lr = euclidean_row_distances(lm.values, c.row_ids, pair_w).values
        assert np.allclose(d_clr, d_lr, atol=1e-10)

    def test_two_part_value(self):
        # weighted (averaged) form: d = |LR_i - LR_i'| / 2 for D = 2; the
        # unweighted sum form gives |LR_i - LR_i'| / sqrt(2)
        c = CompositionMatrix([[0.8, 0.2], [0.4, 0.6], [0.5, 0.5]])
        lr = np.log(c.values[:, 0] / c.values[:, 1])
        d = logratio_distances(c).values
        assert np.isclose(d[0, 1], abs(lr[0] - lr[1]) / 2)
        d_sum = euclidean_row_distances(clr(c).values, c.row_ids).values
        assert np.isclose(d_sum[0, 1], abs(lr[0] - lr[1]) / np.sqrt(2))

    def test_alr_distances_below_full_logratio_distances(self, comp20x8):
        d_alr = pdist(alr(comp20x8, 0).values)
        d_full = pdist(lr_all(comp20x8).values)
        assert np.all(d_alr <= d_full + 1e-12)
        d_clr_sum = pdist(clr(comp20x8).values)
        assert np.allclose(d_full, np.sqrt(8) * d_clr_sum, atol=1e-10)


class TestChiSquare:
    def test_identical_profiles_zero(self):
        m = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 1.0, 1.0]])
        d = chi_square_distances(m).values
        assert np.isclose(d[0, 1], 0.0)

    def test_hand_computed_2x2(self):
        d = chi_square_distances(np.array([[1.0, 1.0], [1.0, 3.0]])).values
        assert np.isclose(d[0, 1], np.sqrt(0.28125))

    def test_zero_entries_allowed(self):
        m = np.array([[1.0, 0.0, 2.0], [0.0, 3.0, 1.0]])
        d = chi_square_distances(m).values
        assert np.all(np.isfinite(d))

    def test_zero_margin_rejected(self):
        m = np.array([[1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(CodaError, match="margin"):
            chi_square_distances(m)

    def test_row_scaling_invariance(self):
        # masses follow the table margins, so row-scale invariance holds
        # whenever the margins are unchanged: global rescaling, and per-row
        # rescaling followed by closure (compositional use)
        rng = np.random.default_rng(5)
        m = rng.random((6, 4)) + 0.1
        closed = m / m.sum(axis=1)[:, None]
        q = rng.random(6) * 3 + 0.2
        scaled = q[:, None] * closed
        reclosed = scaled / scaled.sum(axis=1)[:, None]
        d1 = chi_square_distances(closed).values
        assert np.allclose(d1, chi_square_distances(2.5 * closed).values, atol=1e-12)
        assert np.allclose(d1, chi_square_distances(reclosed).values, atol=1e-12)

    def test_column_axis(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        d = chi_square_distances(m, axis="columns")
        assert d.size == 2
        assert np.allclose(d.values, chi_square_distances(m.T).values)


class TestHellinger:
    def test_identical_rows_zero(self):
        c = CompositionMatrix([[0.2, 0.8], [0.2, 0.8]])
        assert np.allclose(hellinger_distances(c).values, 0.0)

    def test_disjoint_rows(self):
        c = CompositionMatrix([[1.0, 0.0], [0.0, 1.0]])
        assert np.isclose(hellinger_distances(c).values[0, 1], np.sqrt(2))

    def test_matches_chi_square_on_sqrt_for_balanced_margins(self):
        # Circulant construction: every row of M is a rotation of one positive
        # vector, so M is doubly balanced and the squared rows close with a
        # common factor. The chi-square distances on the sqrt-transformed
        # compositions then coincide with the Hellinger geometry exactly, up
        # to the global factor sqrt(d * t) / s (s, t the common row sums of
        # M and M^2); strict equality would force a constant matrix.
        rng = np.random.default_rng(7)
        d = 5
        v = rng.random(d) + 0.3
        m = np.array([np.roll(v, i) for i in range(d)])
        s, t = v.sum(), (v**2).sum()
        x = m**2 / t
        c = CompositionMatrix(x)
        d_hell = hellinger_distances(c)
        d_chi = chi_square_distances(np.sqrt(c.values), ids=c.row_ids)
        assert stress(d_chi, d_hell) < 1e-10
        iu = np.triu_indices(d, 1)
        ratio = d_chi.values[iu] / d_hell.values[iu]
        assert np.allclose(ratio, np.sqrt(d * t) / s, atol=1e-10)


class TestProcrustes:
    def test_self_correlation_one(self, comp20x8):
        x = clr(comp20x8).values
        assert np.isclose(procrustes_correlation(x, x), 1.0)

    def test_symmetry(self, comp20x8):
        x = clr(comp20x8).values
        y = alr(comp20x8, 0).values
        assert abs(
            procrustes_correlation(x, y) - procrustes_correlation(y, x)
        ) < 1e-10

    def test_similarity_invariance(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((15, 3))
        theta = 0.7
        rot = np.array([
            [np.cos(theta), -np.sin(theta), 0],
            [np.sin(theta), np.cos(theta), 0],
            [0, 0, 1],
        ])
        y = 3.7 * x @ rot + rng.standard_normal(3)
        assert np.isclose(procrustes_correlation(x, y), 1.0, atol=1e-10)

    def test_zero_padding_of_narrower_configuration(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((10, 2))
        y = rng.standard_normal((10, 4))
        r1 = procrustes_correlation(x, y)
        r2 = procrustes_correlation(np.column_stack([x, np.zeros((10, 2))]), y)
        assert np.isclose(r1, r2, atol=1e-12)

    def test_degenerate_rejected(self):
        with pytest.raises(CodaError, match="degenerate"):
            procrustes_correlation(np.ones((5, 2)), np.random.default_rng(0).random((5, 2)))

    def test_two_point_configurations_always_concordant(self):
        rng = np.random.default_rng(13)
        assert np.isclose(
            procrustes_correlation(rng.random((2, 3)), rng.random((2, 5))), 1.0
        )


class TestStress:
    def test_scaled_distances_zero_stress(self, comp20x8):
        d1 = logratio_distances(comp20x8)
        d2 = DistanceMatrix(3.5 * d1.values, d1.ids)
        assert stress(d2, d1) < 1e-12

    def test_mismatched_ids_rejected(self, comp20x8):
        d1 = logratio_distances(comp20x8)
        ids = list(d1.ids)
        ids[0], ids[1] = ids[1], ids[0]
        d2 = DistanceMatrix(d1.values, ids)
        with pytest.raises(CodaError, match="ids"):
            stress(d1, d2)

    def test_logratio_part_distances_coherent(self, comp20x8):
        idx = [0, 2, 5, 7]
        names = [comp20x8.part_names[i] for i in idx]
        tau_full = variation_matrix(comp20x8).tau
        d_full = DistanceMatrix(np.sqrt(tau_full[np.ix_(idx, idx)]), names)
        sub = subcomposition(comp20x8, idx)
        d_sub = DistanceMatrix(np.sqrt(variation_matrix(sub).tau), names)
        assert stress(d_sub, d_full) < 1e-10


class TestPrincipalCoordinates:
    def test_reproduces_distances(self, comp20x8):
        d = logratio_distances(comp20x8)
        coords = principal_coordinates(d)
        recon = euclidean_row_distances(coords, d.ids).values
        assert np.allclose(recon, d.values, atol=1e-9)


class TestPairSampling:
    def test_distinct_and_deterministic(self):
        pairs = sample_index_pairs(50, 200, seed=99)
        again = sample_index_pairs(50, 200, seed=99)
        assert np.array_equal(pairs, again)
        assert len({(i, j) for i, j in pairs}) == 200
        assert np.all(pairs[:, 0] < pairs[:, 1])

    def test_pair_distances_match_full_matrix(self, comp20x8):
        x = clr(comp20x8).values
        full = euclidean_row_distances(x, comp20x8.row_ids).values
        pairs = sample_index_pairs(comp20x8.n_rows, 30, seed=1)
        d = pair_distances(x, pairs)
        assert np.allclose(d, full[pairs[:, 0], pairs[:, 1]], atol=1e-12)

    def test_too_many_pairs(self):
        with pytest.raises(CodaError, match="sample"):
            sample_index_pairs(4, 100, seed=0)


def test_triangle_inequality_spot_check(comp20x8):
    assert logratio_distances(comp20x8).check_triangle(100, seed=3)
