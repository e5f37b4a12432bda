"""Clustering of parts and of samples.

Parts are clustered either by Ward linkage on their CLR profiles or by
amalgamation: at each step the pair of parts (or part groups) whose merger
by summation loses the least total logratio variance is amalgamated, and
the dendrogram heights record the percentage of the original variance lost
per node. Samples are clustered by seeded k-means; clusterings are compared
with the Hubert-Arabie adjusted Rand index and with matched agreement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.optimize import linear_sum_assignment

from .composition import CompositionMatrix
from .errors import CodaError
from .transforms import ContrastTree, clr

__all__ = [
    "Dendrogram",
    "ClusterAssignment",
    "ward_parts",
    "amalgamation_cluster",
    "kmeans",
    "adjusted_rand",
    "matched_agreement",
    "dendrogram_to_contrast_tree",
    "dendrogram_slr_pairs",
]

HEIGHT_KINDS = ("ward-distance", "variance-loss-pct")


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree over the parts.

    Nodes 0..D-1 are the leaves in part order; merge i creates node D+i.
    ``height_kind`` states what the merge heights measure.
    """

    merges: tuple[tuple[int, int, float], ...]
    leaf_names: tuple[str, ...]
    height_kind: str

    def __post_init__(self):
        if self.height_kind not in HEIGHT_KINDS:
            raise CodaError(f"unknown height kind {self.height_kind!r}")
        d = len(self.leaf_names)
        merges = tuple(
            (int(a), int(b), float(h)) for a, b, h in self.merges
        )
        if len(merges) != d - 1:
            raise CodaError(f"a full tree over {d} leaves needs {d - 1} merges")
        used: set[int] = set()
        for i, (a, b, h) in enumerate(merges):
            limit = d + i
            for node in (a, b):
                if not 0 <= node < limit:
                    raise CodaError(f"merge {i} refers to invalid node {node}")
                if node in used:
                    raise CodaError(f"node {node} merged twice")
                used.add(node)
            if h < 0:
                raise CodaError(f"negative height at merge {i}")
        object.__setattr__(self, "merges", merges)
        object.__setattr__(self, "leaf_names", tuple(str(x) for x in self.leaf_names))

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_names)

    def leaves_under(self, node: int) -> tuple[int, ...]:
        """All leaf indices below a node (leaves return themselves)."""
        d = self.n_leaves
        stack = [node]
        out = []
        while stack:
            cur = stack.pop()
            if cur < d:
                out.append(cur)
            else:
                a, b, _ = self.merges[cur - d]
                stack.extend((a, b))
        return tuple(sorted(out))


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Cluster labels (1-based) with the within-cluster sum of squares.

    ``inertia_path`` records the inertia after each Lloyd assignment pass of
    the winning restart; it is nonincreasing.
    """

    labels: np.ndarray
    k: int
    inertia: float
    inertia_path: tuple[float, ...] = ()

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1:
            raise CodaError("labels must be a vector")
        present = np.unique(labels)
        if present.min() < 1 or present.max() > self.k:
            raise CodaError(f"labels must lie in [1, {self.k}]")
        if present.size != self.k:
            raise CodaError("every cluster must be nonempty")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)


def ward_parts(c: CompositionMatrix) -> Dendrogram:
    """Ward clustering of the parts on their CLR profiles.

    Each part is a point in sample space (its CLR column); agglomeration
    uses the squared-Euclidean Ward update and heights are the Ward merge
    distances.
    """
    if c.n_parts < 2:
        raise CodaError("clustering needs at least 2 parts")
    profiles = np.array(clr(c).values.T)
    z = linkage(profiles, method="ward")
    merges = tuple((int(a), int(b), float(h)) for a, b, h, _ in z)
    return Dendrogram(merges, c.part_names, "ward-distance")


def amalgamation_cluster(c: CompositionMatrix) -> Dendrogram:
    """Amalgamation clustering: merge the pair losing the least explained
    logratio variance.

    The explained variance of a stage is the fraction of the total weighted
    CLR variance captured by least-squares projection onto the centered
    log-transformed cluster sums; it starts at 100% with every part its own
    cluster and falls to 0% at the root, so the per-node losses (the
    dendrogram heights, in percent) add up to 100. At every step all pairs
    of current clusters are tried and the pair whose summation loses the
    least is amalgamated. Cost is O(D^2) candidates per step, each O(N D);
    fine for D up to ~100.
    """
    c.require_positive("amalgamation clustering")
    vals = clr(c).values
    yc = vals - vals.mean(axis=0)
    w = c.weights
    total = float((w * (yc**2).sum(axis=0)).sum())
    if total <= 0:
        raise CodaError("the data carry no logratio variance to cluster")

    cols = [np.array(c.values[:, j]) for j in range(c.n_parts)]
    node_ids = list(range(c.n_parts))

    def explained_pct(a_mat, b_mat) -> float:
        try:
            sol = np.linalg.solve(a_mat, b_mat)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(a_mat, b_mat, rcond=None)[0]
        return 100.0 * float((w * (b_mat * sol).sum(axis=0)).sum() / total)

    merges = []
    prev_pct = 100.0
    while len(cols) > 1:
        m = len(cols)
        z = np.column_stack([np.log(col) for col in cols])
        z -= z.mean(axis=0)
        gram = z.T @ z
        cross = z.T @ yc
        best = None
        for a in range(m - 1):
            for b in range(a + 1, m):
                u = np.log(cols[a] + cols[b])
                u -= u.mean()
                keep = [j for j in range(m) if j not in (a, b)]
                zu = z.T @ u
                a_mat = np.empty((m - 1, m - 1))
                a_mat[:-1, :-1] = gram[np.ix_(keep, keep)]
                a_mat[:-1, -1] = zu[keep]
                a_mat[-1, :-1] = zu[keep]
                a_mat[-1, -1] = u @ u
                b_mat = np.vstack([cross[keep], u @ yc])
                pct = explained_pct(a_mat, b_mat) if m > 2 else 0.0
                key = tuple(sorted((node_ids[a], node_ids[b])))
                if best is None or pct > best[0] + 1e-12 or (
                    abs(pct - best[0]) <= 1e-12 and key < best[1]
                ):
                    best = (pct, key, a, b)
        pct, _, a, b = best
        loss_pct = prev_pct - pct
        if loss_pct < -1e-9:
            raise CodaError(f"explained variance rose by {-loss_pct:.3g}% at a merge")
        merges.append((node_ids[a], node_ids[b], max(loss_pct, 0.0)))
        new_id = c.n_parts + len(merges) - 1
        cols[a] = cols[a] + cols[b]
        node_ids[a] = new_id
        del cols[b]
        del node_ids[b]
        prev_pct = pct
    return Dendrogram(tuple(merges), c.part_names, "variance-loss-pct")


def dendrogram_to_contrast_tree(d: Dendrogram) -> ContrastTree:
    """Read a dendrogram as a sequential binary partition (root split first).

    Enables using a part clustering to define an ILR basis.
    """
    splits = []
    for i in range(len(d.merges) - 1, -1, -1):
        a, b, _ = d.merges[i]
        splits.append((d.leaves_under(a), d.leaves_under(b)))
    return ContrastTree(n_parts=d.n_leaves, splits=tuple(splits))


def dendrogram_slr_pairs(d: Dendrogram) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The (numerator, denominator) part blocks of each merge node.

    The D-1 summed logratios over these blocks form the logratio tree
    induced by an amalgamation clustering.
    """
    return [
        (d.leaves_under(a), d.leaves_under(b)) for a, b, _ in d.merges
    ]


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i] = x[rng.integers(n)]
            continue
        centers[i] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((x - centers[i]) ** 2).sum(axis=1))
    return centers


def _lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int):
    k = centers.shape[0]
    labels = None
    path = []
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        # repopulate empty clusters with the worst-fitting points
        for cluster in range(k):
            if not np.any(new_labels == cluster):
                worst = int(np.argmax(d2[np.arange(x.shape[0]), new_labels]))
                new_labels[worst] = cluster
                d2[worst, :] = np.inf
                d2[worst, cluster] = 0.0
        inertia = float(d2[np.arange(x.shape[0]), new_labels].sum())
        path.append(inertia)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for cluster in range(k):
            members = x[labels == cluster]
            if members.size:  # duplicated points can defeat the repair
                centers[cluster] = members.mean(axis=0)
    inertia = float(
        ((x - centers[labels]) ** 2).sum()
    )
    return labels, inertia, path


def kmeans(
    features: np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
) -> ClusterAssignment:
    """Seeded k-means: k-means++ initialization, Lloyd iterations, best of
    restarts by inertia.

    Restart r draws from the random stream (seed, r), so the result depends
    only on the seed regardless of execution order.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise CodaError("features must be an N x K matrix")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise CodaError(f"k must lie in [1, {n}], got {k}")
    if restarts < 1:
        raise CodaError("at least one restart required")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        centers = _kmeans_pp(x, k, rng)
        labels, inertia, path = _lloyd(x, centers.copy(), max_iter)
        if best is None or inertia < best[0]:
            best = (inertia, labels, path)
    inertia, labels, path = best
    return ClusterAssignment(labels + 1, k, inertia, tuple(path))


def _label_vector(a) -> np.ndarray:
    if isinstance(a, ClusterAssignment):
        return np.asarray(a.labels)
    return np.asarray(a)


def _contingency(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def adjusted_rand(a, b) -> float:
    """Hubert-Arabie adjusted Rand index between two clusterings.

    1 for identical clusterings (up to label permutation), about 0 for
    independent ones; can be negative. Degenerate identical clusterings
    (everything in one cluster, or all singletons on both sides) return 1.
    """
    av = _label_vector(a)
    bv = _label_vector(b)
    if av.shape != bv.shape:
        raise CodaError("clusterings must label the same rows")
    table = _contingency(av, bv)
    n = av.size

    def comb2(x):
        return x * (x - 1) / 2.0

    index = comb2(table).sum()
    sum_a = comb2(table.sum(axis=1)).sum()
    sum_b = comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / comb2(n)
    max_index = (sum_a + sum_b) / 2.0
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def matched_agreement(a, b) -> float:
    """Fraction of rows agreeing after optimal cluster-label matching.

    The label correspondence maximizing the confusion-matrix trace is found
    by Hungarian assignment.
    """
    av = _label_vector(a)
    bv = _label_vector(b)
    if av.shape != bv.shape:
        raise CodaError("clusterings must label the same rows")
    table = _contingency(av, bv)
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum() / av.size)
