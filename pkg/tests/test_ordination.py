import numpy as np
import pytest

from codakit import (
    CodaError,
    CompositionMatrix,
    alr,
    bootstrap_ellipses,
    ca,
    clr,
    contribution_coordinates,
    lra,
    pca,
    procrustes_correlation,
    set_weights,
    total_variance,
)
from codakit.ordination import Ordination, supplementary_rows

from conftest import random_composition


class TestLra:
    def test_inertia_equals_total_variance(self, comp20x8):
        o = lra(comp20x8)
        assert abs((o.singular_values**2).sum() - total_variance(comp20x8)) < 1e-10

    def test_weighted_inertia_equals_weighted_total_variance(self):
        rng = np.random.default_rng(17)
        c = set_weights(random_composition(55, n=12, d=5), rng.random(5) + 0.2)
        o = lra(c)
        assert abs((o.singular_values**2).sum() - total_variance(c)) < 1e-12

    def test_rank_bound(self):
        c = random_composition(1, n=6, d=10)
        assert lra(c).n_axes <= min(5, 9)

    def test_principal_is_standard_times_sigma(self, comp20x8):
        o = lra(comp20x8)
        assert np.allclose(o.row_principal, o.row_standard * o.singular_values,
                           atol=1e-10)
        assert np.allclose(o.col_principal, o.col_standard * o.singular_values,
                           atol=1e-10)

    def test_equals_pca_of_clr(self, comp20x8):
        o1 = lra(comp20x8)
        o2 = pca(clr(comp20x8))
        assert np.allclose(o1.row_principal, o2.row_principal, atol=1e-10)
        assert np.allclose(o1.col_principal, o2.col_principal, atol=1e-10)
        assert np.allclose(o1.explained_shares, o2.explained_shares, atol=1e-12)

    def test_explained_shares_nonincreasing_sum_one(self, comp20x8):
        o = lra(comp20x8)
        assert np.all(np.diff(o.explained_shares) <= 1e-12)
        assert abs(o.explained_shares.sum() - 1) < 1e-10


class TestPca:
    def test_single_column_explains_everything(self):
        c = random_composition(3, n=10, d=2)
        lm = alr(c, 1)
        o = pca(lm)
        assert o.n_axes == 1
        assert np.isclose(o.explained_shares[0], 1.0)

    def test_needs_two_rows(self):
        c = CompositionMatrix([[0.3, 0.7]])
        with pytest.raises(CodaError, match="2 rows"):
            pca(alr(c, 1))


class TestCa:
    def test_independence_table_zero_inertia(self):
        r = np.array([0.2, 0.3, 0.5])
        c = np.array([0.1, 0.4, 0.2, 0.3])
        o = ca(10.0 * np.outer(r, c))
        assert o.n_axes == 0
        assert (o.singular_values**2).sum() == 0.0

    def test_zero_margin_rejected(self):
        m = np.array([[1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(CodaError, match="margin"):
            ca(m)

    def test_alpha_scaling_of_inertia_and_coordinates(self, comp20x8):
        plain = ca(comp20x8.values**0.5)
        powered = ca(comp20x8.values, alpha=0.5)
        assert np.allclose(powered.singular_values, plain.singular_values / 0.5,
                           atol=1e-12)
        assert np.allclose(powered.row_principal, plain.row_principal / 0.5,
                           atol=1e-10)
        assert np.allclose(powered.explained_shares, plain.explained_shares,
                           atol=1e-12)

    def test_alpha_curve_monotone_to_lra(self, comp20x8):
        ref = lra(comp20x8).col_principal
        corrs = [
            procrustes_correlation(ca(comp20x8.values, alpha=a).col_principal, ref)
            for a in (1.0, 0.5, 0.1, 0.01, 0.001)
        ]
        assert all(np.diff(corrs) >= -1e-12)
        assert corrs[-1] > 0.99


class TestSupplementary:
    def test_active_rows_reproduced(self, comp20x8):
        for o, rows in (
            (lra(comp20x8), comp20x8.values),
            (pca(alr(comp20x8, 2)), alr(comp20x8, 2).values),
            (ca(comp20x8.values, alpha=0.5), comp20x8.values),
            (ca(comp20x8.values), comp20x8.values),
        ):
            proj = supplementary_rows(o, rows)
            assert np.allclose(proj, o.row_principal, atol=1e-9)

    def test_all_zero_row_rejected(self, comp20x8):
        o = ca(comp20x8.values)
        with pytest.raises(CodaError, match="zero total"):
            supplementary_rows(o, np.zeros((1, 8)))

    def test_dimension_mismatch_rejected(self, comp20x8):
        o = lra(comp20x8)
        with pytest.raises(CodaError, match="columns"):
            supplementary_rows(o, np.ones((2, 5)))

    def test_new_rows_do_not_change_active_solution(self, comp20x8):
        o = ca(comp20x8.values)
        before = o.row_principal.copy()
        supplementary_rows(o, np.abs(np.random.default_rng(5).random((3, 8))) + 0.1)
        assert np.array_equal(o.row_principal, before)


class TestContributions:
    def test_axis_contributions_sum_to_one(self, comp20x8):
        o = lra(comp20x8)
        table = contribution_coordinates(o)
        sums = table.contributions.sum(axis=0)
        assert np.allclose(sums, 1.0, atol=1e-12)

    def test_plane_contribution_sums_to_one(self, comp20x8):
        table = contribution_coordinates(lra(comp20x8))
        assert abs(table.plane_contribution.sum() - 1) < 1e-12

    def test_uniform_contributions_flag_nothing_under_strict_rule(self):
        # hand-built ordination with exactly uniform contributions
        d = 4
        masses = np.full(d, 0.25)
        gamma = np.array([
            [1.0, 1.0],
            [1.0, -1.0],
            [-1.0, 1.0],
            [-1.0, -1.0],
        ])
        sv = np.array([2.0, 1.0])
        phi = np.ones((3, 2))
        o = Ordination(
            method="PCA",
            row_principal=phi * sv,
            row_standard=phi,
            col_principal=gamma * sv,
            col_standard=gamma,
            singular_values=sv,
            explained_shares=sv**2 / (sv**2).sum(),
            row_masses=np.full(3, 1 / 3),
            col_masses=masses,
            row_ids=("a", "b", "c"),
            col_names=("w", "x", "y", "z"),
        )
        table = contribution_coordinates(o)
        assert np.allclose(table.plane_contribution, 0.25)
        assert not table.flagged.any()

    def test_dominant_column_flagged(self, comp20x8):
        o = lra(comp20x8)
        table = contribution_coordinates(o)
        assert table.flagged.any()
        top = int(np.argmax(table.plane_contribution))
        assert table.flagged[top]


class TestBootstrapEllipses:
    @staticmethod
    def _grouped_composition(sizes, seed=0):
        rng = np.random.default_rng(seed)
        blocks, groups = [], []
        for gi, size in enumerate(sizes):
            base = rng.dirichlet(np.ones(5) * 3)
            noise = rng.dirichlet(np.ones(5) * 40, size=size)
            blocks.append(0.5 * base + 0.5 * noise)
            groups += [f"g{gi}"] * size
        values = np.vstack(blocks)
        values /= values.sum(axis=1)[:, None]
        return CompositionMatrix(values, groups=groups)

    def test_defaults_and_determinism(self):
        c = self._grouped_composition([10, 12])
        o = lra(c)
        e1 = bootstrap_ellipses(o, c.groups, replicates=50, seed=7)
        e2 = bootstrap_ellipses(o, c.groups, replicates=50, seed=7)
        assert e1 == e2
        assert e1.level == 0.99
        assert {el.group for el in e1.ellipses} == {"g0", "g1"}

    def test_degenerate_group_zero_area(self):
        values = np.vstack([
            np.tile([0.2, 0.3, 0.5], (5, 1)),
            np.random.default_rng(1).dirichlet([4, 4, 4], size=5),
        ])
        values /= values.sum(axis=1)[:, None]
        c = CompositionMatrix(values, groups=["a"] * 5 + ["b"] * 5)
        o = lra(c)
        es = bootstrap_ellipses(o, c.groups, replicates=30, seed=0)
        degenerate = next(el for el in es.ellipses if el.group == "a")
        assert degenerate.semi_axes[0] < 1e-9

    def test_larger_groups_give_smaller_ellipses(self):
        # homogeneous data: replicate-mean covariance scales like 1/n_g,
        # so the mean ellipse area ratio tracks the inverse size ratio
        rng = np.random.default_rng(3)
        n_small, n_big = 15, 60
        values = rng.dirichlet(np.ones(5) * 8, size=n_small + n_big)
        c = CompositionMatrix(values, groups=["s"] * n_small + ["b"] * n_big)
        o = lra(c)
        es = bootstrap_ellipses(o, c.groups, replicates=400, seed=11)
        areas = {el.group: np.pi * el.semi_axes[0] * el.semi_axes[1]
                 for el in es.ellipses}
        ratio = areas["s"] / areas["b"]
        assert 0.5 * (n_big / n_small) < ratio < 2.0 * (n_big / n_small)

    def test_undersized_group_rejected(self, comp20x8):
        o = lra(comp20x8)
        groups = ["a", "a", "b"] + ["c"] * 17
        with pytest.raises(CodaError, match="fewer than 3"):
            bootstrap_ellipses(o, groups, replicates=10)
