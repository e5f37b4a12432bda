import numpy as np
import pytest

from codakit import (
    CodaError,
    CompositionMatrix,
    RawCountMatrix,
    backward_alr,
    close,
    explained_logratio_variance,
    find_alr,
    lr_all,
    permutation_fdr,
    stepwise_lr,
    theta_anova,
)

from conftest import random_composition


class TestFindAlr:
    def test_two_parts_give_perfect_procrustes(self):
        c = random_composition(0, n=10, d=2)
        ranking = find_alr(c)
        assert all(np.isclose(r.procrustes, 1.0) for r in ranking)

    def test_sorted_descending(self, comp20x8):
        ranking = find_alr(comp20x8)
        values = [r.procrustes for r in ranking]
        assert values == sorted(values, reverse=True)
        assert all(v <= 1.0 + 1e-12 for v in values)

    def test_row_permutation_invariance(self, comp20x8):
        perm = np.random.default_rng(0).permutation(comp20x8.n_rows)
        shuffled = CompositionMatrix(comp20x8.values[perm])
        a = [(r.ref_index, round(r.procrustes, 12)) for r in find_alr(comp20x8)]
        b = [(r.ref_index, round(r.procrustes, 12)) for r in find_alr(shuffled)]
        assert a == b

    def test_log_variance_reported(self, comp20x8):
        logs = np.log(comp20x8.values)
        for r in find_alr(comp20x8):
            assert np.isclose(r.log_ref_variance, logs[:, r.ref_index].var())


class TestStepwise:
    def test_reaches_100_at_d_minus_1(self):
        c = random_composition(7, n=15, d=6)
        trace = stepwise_lr(c)
        assert len(trace.steps) == 5
        assert abs(trace.steps[-1].explained_pct - 100.0) < 1e-8
        explained = [s.explained_pct for s in trace.steps]
        assert all(np.diff(explained) >= -1e-10)

    def test_dependent_candidates_never_add_variance(self):
        # log space built so that LR(0,1), LR(0,2) and LR(1,2) all span the
        # same direction: the projection gain is scale-free, so they tie and
        # the lexicographic rule picks (0,1); the other two are then exactly
        # dependent and must never beat the independent part-3 ratios
        rng = np.random.default_rng(13)
        t = rng.standard_normal(30)
        logs = np.column_stack([t, np.zeros(30), -t, 0.1 * rng.standard_normal(30)])
        values = np.exp(logs)
        c = close(RawCountMatrix(values))
        trace = stepwise_lr(c, max_steps=2)
        assert trace.steps[0].parts == (0, 1)
        # the dependent ratios add nothing on top of the selected set
        lm = lr_all(c)
        selected = lm.values[:, [lm.column_labels.index(trace.steps[0].label)]]
        base = explained_logratio_variance(c, selected)
        for label in (f"{c.part_names[0]}/{c.part_names[2]}",
                      f"{c.part_names[1]}/{c.part_names[2]}"):
            col = lm.values[:, [lm.column_labels.index(label)]]
            combined = explained_logratio_variance(c, np.hstack([selected, col]))
            assert abs(combined - base) < 1e-9
        # and the second pick involves the independent fourth part
        assert 3 in trace.steps[1].parts

    def test_selected_graph_is_acyclic(self):
        c = random_composition(19, n=25, d=7)
        trace = stepwise_lr(c)
        edges = [s.parts for s in trace.steps]
        parent = list(range(7))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for j, k in edges:
            assert find(j) != find(k), "cycle among selected logratios"
            parent[find(j)] = find(k)

    def test_threshold_stopping(self):
        c = random_composition(23, n=20, d=8)
        trace = stepwise_lr(c, min_explained=80.0)
        assert trace.steps[-1].explained_pct >= 80.0
        assert trace.steps[-2].explained_pct < 80.0 if len(trace.steps) > 1 else True
        assert trace.warning is None

    def test_unreachable_threshold_warns(self):
        c = random_composition(29, n=20, d=8)
        trace = stepwise_lr(c, min_explained=99.9, max_steps=2)
        assert trace.warning is not None

    def test_top_candidates_recorded(self, comp20x8):
        trace = stepwise_lr(comp20x8, max_steps=2, top=5)
        assert 1 <= len(trace.steps[0].candidates) <= 5
        best_label, best_r2 = trace.steps[0].candidates[0]
        assert best_label == trace.steps[0].label
        assert np.isclose(best_r2, trace.steps[0].explained_pct)


class TestBackward:
    def test_starts_at_100_with_findalr_procrustes(self, comp20x8):
        trace = backward_alr(comp20x8, 0)
        assert trace.steps[0].label == "ALL"
        assert abs(trace.steps[0].explained_pct - 100.0) < 1e-8
        ranking = {r.ref_index: r.procrustes for r in find_alr(comp20x8)}
        assert abs(trace.steps[0].procrustes - ranking[0]) < 1e-9

    def test_explained_nonincreasing(self, comp20x8):
        trace = backward_alr(comp20x8, 3)
        explained = [s.explained_pct for s in trace.steps]
        assert all(np.diff(explained) <= 1e-10)

    def test_stops_before_crossing(self):
        c = random_composition(31, n=25, d=7)
        trace = backward_alr(c, 0, min_explained=70.0)
        assert all(s.explained_pct >= 70.0 for s in trace.steps)
        unrestricted = backward_alr(c, 0)
        assert len(unrestricted.steps) > len(trace.steps)

    def test_invalid_ref(self, comp20x8):
        with pytest.raises(CodaError, match="unknown part"):
            backward_alr(comp20x8, "nope")


def two_group_composition(seed=0, n_per=10, d=5):
    rng = np.random.default_rng(seed)
    logs = rng.standard_normal((2 * n_per, d))
    logs[:n_per, 0] += 3.0  # group separation on part 0
    values = np.exp(logs)
    groups = ["a"] * n_per + ["b"] * n_per
    return close(RawCountMatrix(values, groups=groups))


class TestThetaAnova:
    def test_identical_group_means_give_one(self):
        rng = np.random.default_rng(2)
        block = rng.dirichlet(np.ones(4), size=6)
        values = np.vstack([block, block])  # same rows in both groups
        c = CompositionMatrix(values, groups=["a"] * 6 + ["b"] * 6)
        table = theta_anova(c)
        assert np.allclose(table.theta, 1.0, atol=1e-12)

    def test_zero_within_distinct_means_give_zero(self):
        a = np.tile([0.5, 0.3, 0.2], (4, 1))
        b = np.tile([0.2, 0.3, 0.5], (4, 1))
        c = CompositionMatrix(np.vstack([a, b]), groups=["a"] * 4 + ["b"] * 4)
        table = theta_anova(c)
        assert np.allclose(table.theta, 0.0, atol=1e-12)

    def test_constant_logratio_reported_as_one(self):
        a = np.tile([0.5, 0.25, 0.25], (4, 1))
        b = np.tile([0.2, 0.4, 0.4], (4, 1))
        c = CompositionMatrix(np.vstack([a, b]), groups=["a"] * 4 + ["b"] * 4)
        table = theta_anova(c)
        # parts 1 and 2 keep a constant ratio: no discriminating power
        pair_12 = [i for i, (j, k) in enumerate(table.pairs) if (j, k) == (1, 2)][0]
        assert table.theta[pair_12] == 1.0

    def test_matches_squared_t_for_two_groups(self):
        c = two_group_composition(5)
        table = theta_anova(c)
        logs = np.log(c.values)
        n = c.n_rows
        garr = np.asarray(c.groups)
        for (j, k), theta in zip(table.pairs, table.theta):
            lr = logs[:, j] - logs[:, k]
            a, b = lr[garr == "a"], lr[garr == "b"]
            sp2 = (((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum()) / (n - 2)
            t2 = (a.mean() - b.mean()) ** 2 / (sp2 * (1 / a.size + 1 / b.size))
            assert abs(t2 - (n - 2) * (1 - theta) / theta) < 1e-8 * max(1, t2)

    def test_scale_and_subcomposition_coherence(self):
        c = two_group_composition(9)
        rng = np.random.default_rng(1)
        q = rng.random(c.n_rows) * 5 + 0.1
        rescaled = close(RawCountMatrix(q[:, None] * c.values, groups=c.groups))
        assert np.allclose(theta_anova(c).theta, theta_anova(rescaled).theta,
                           atol=1e-10)
        from codakit import subcomposition

        sub = subcomposition(c, [0, 1, 2])
        table_full = theta_anova(c)
        table_sub = theta_anova(sub)
        kept = [i for i, (j, k) in enumerate(table_full.pairs) if j < 3 and k < 3]
        assert np.allclose(table_full.theta[kept], table_sub.theta, atol=1e-10)

    def test_singleton_group_rejected(self):
        c = CompositionMatrix(
            np.random.default_rng(0).dirichlet([2, 2, 2], size=5),
            groups=["a"] * 4 + ["b"],
        )
        with pytest.raises(CodaError, match="fewer than 2"):
            theta_anova(c)

    def test_missing_groups_rejected(self, comp20x8):
        with pytest.raises(CodaError, match="group labels"):
            theta_anova(comp20x8)


class TestPermutationFdr:
    def test_zero_cutoff_reports_zero(self):
        c = two_group_composition(3)
        table = permutation_fdr(c, cutoff=0.0, permutations=5, seed=1)
        assert table.fdr_estimates[0.0] == 0.0
        assert table.selected_parts == ()

    def test_independent_labels_give_high_fdr(self):
        rng = np.random.default_rng(8)
        values = rng.dirichlet(np.ones(6) * 2, size=24)
        groups = (["a"] * 12 + ["b"] * 12)
        c = CompositionMatrix(values, groups=groups)
        observed = theta_anova(c).theta
        cutoff = float(np.median(observed))
        table = permutation_fdr(c, cutoff=cutoff, permutations=40, seed=4)
        assert table.fdr_estimates[cutoff] > 0.5

    def test_deterministic_given_seed(self):
        c = two_group_composition(6)
        t1 = permutation_fdr(c, cutoff=0.2, permutations=20, seed=9)
        t2 = permutation_fdr(c, cutoff=0.2, permutations=20, seed=9)
        assert t1.fdr_estimates == t2.fdr_estimates
        assert t1.selected_parts == t2.selected_parts
