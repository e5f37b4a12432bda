"""Distance geometries and configuration concordance.

Logratio distances are weighted Euclidean distances on the CLR rows;
chi-square distances standardize profiles by square-root expected margins
and need no zero replacement; Hellinger distances are Euclidean on
square-rooted compositions. Procrustes correlation measures concordance of
two point configurations after optimal translation, rotation, and scaling.

Distance conventions: ``logratio_distances`` uses the weighted (averaged)
form. In the unweighted sum form (``euclidean_row_distances`` on raw
transform values), distances on an ALR matrix never exceed those on the
full pairwise-logratio matrix, which equal sqrt(D) times the CLR sum-form
distances; that is the convention under which the ALR lower-bound property
holds and is tested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .composition import CompositionMatrix
from .errors import CodaError
from .transforms import clr

__all__ = [
    "DistanceMatrix",
    "euclidean_row_distances",
    "logratio_distances",
    "chi_square_distances",
    "hellinger_distances",
    "procrustes_correlation",
    "stress",
    "principal_coordinates",
    "sample_index_pairs",
    "pair_distances",
]


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric nonnegative M x M distance matrix with zero diagonal.

    Full matrices cost O(M^2) memory; for very many rows use
    ``sample_index_pairs`` + ``pair_distances`` instead of materializing one.
    """

    values: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise CodaError("distance matrix must be square")
        if not np.allclose(values, values.T, atol=1e-12):
            raise CodaError("distance matrix must be symmetric")
        if np.any(np.abs(np.diag(values)) > 1e-12):
            raise CodaError("distance matrix must have zero diagonal")
        if np.any(values < 0):
            raise CodaError("distances must be nonnegative")
        values = (values + values.T) / 2.0
        np.fill_diagonal(values, 0.0)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        ids = tuple(str(x) for x in self.ids)
        if len(ids) != values.shape[0]:
            raise CodaError("one id per row required")
        object.__setattr__(self, "ids", ids)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def check_triangle(self, n_triples: int = 200, seed: int = 0) -> bool:
        """Spot-check the triangle inequality on randomly sampled triples."""
        m = self.size
        if m < 3:
            return True
        rng = np.random.default_rng(seed)
        d = self.values
        for _ in range(n_triples):
            i, j, k = rng.choice(m, size=3, replace=False)
            if d[i, k] > d[i, j] + d[j, k] + 1e-9:
                return False
        return True


def euclidean_row_distances(
    values: np.ndarray, ids, weights: np.ndarray | None = None
) -> DistanceMatrix:
    """Euclidean distances between rows, optionally column-weighted.

    With weights w the squared distance is ``sum_j w_j (x_ij - x_i'j)^2``;
    without weights the plain sum form is used.
    """
    values = np.asarray(values, dtype=float)
    if weights is not None:
        values = values * np.sqrt(np.asarray(weights, dtype=float))
    return DistanceMatrix(squareform(pdist(values)), ids)


def logratio_distances(c: CompositionMatrix) -> DistanceMatrix:
    """Weighted Euclidean distances on the CLR rows.

    Identical to the doubly weighted all-pairs logratio form
    ``sqrt(sum_{j<k} w_j w_k (LR_ijk - LR_i'jk)^2)``; with uniform weights
    this is the averaged logratio distance.
    """
    return euclidean_row_distances(clr(c).values, c.row_ids, c.weights)


def chi_square_distances(
    m: np.ndarray, axis: str = "rows", ids=None
) -> DistanceMatrix:
    """Chi-square distances between row or column profiles.

    Profiles are differenced and standardized by the square roots of the
    opposite margin's relative values. Zeros in entries are fine; a zero
    margin on the chosen axis is not.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise CodaError("chi-square distances need a 2-d matrix")
    if np.any(m < 0):
        raise CodaError("chi-square distances need nonnegative entries")
    total = m.sum()
    if total <= 0:
        raise CodaError("matrix total must be positive")
    if axis == "columns":
        m = m.T
    elif axis != "rows":
        raise CodaError(f"axis must be 'rows' or 'columns', got {axis!r}")
    p = m / total
    row_masses = p.sum(axis=1)
    col_masses = p.sum(axis=0)
    if np.any(row_masses <= 0):
        i = int(np.argmax(row_masses <= 0))
        raise CodaError(f"zero margin at {axis[:-1]} {i + 1}")
    if np.any(col_masses <= 0):
        j = int(np.argmax(col_masses <= 0))
        raise CodaError(f"zero margin on the opposite axis at position {j + 1}")
    profiles = p / row_masses[:, None]
    scaled = profiles / np.sqrt(col_masses)
    if ids is None:
        ids = tuple(f"{axis[0]}{i + 1}" for i in range(m.shape[0]))
    return DistanceMatrix(squareform(pdist(scaled)), ids)


def hellinger_distances(c: CompositionMatrix) -> DistanceMatrix:
    """Euclidean distances on the square-rooted compositions."""
    return euclidean_row_distances(np.sqrt(c.values), c.row_ids)


def _centered(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise CodaError(f"{name} configuration must be 2-d")
    xc = x - x.mean(axis=0)
    if not np.any(np.abs(xc) > 0):
        raise CodaError(f"{name} configuration is degenerate (all rows equal)")
    return xc


def procrustes_correlation(x: np.ndarray, y: np.ndarray) -> float:
    """Concordance of two configurations under optimal similarity matching.

    Both configurations are column-centered; the narrower one is padded with
    zero columns. Returns ``sum(sigma_i) / sqrt(||Xc||_F^2 ||Yc||_F^2)``
    where sigma_i are the singular values of ``Xc.T @ Yc``, a value in
    [0, 1] invariant to rotation, translation, and positive scaling of
    either side.
    """
    xc = _centered(x, "first")
    yc = _centered(y, "second")
    if xc.shape[0] != yc.shape[0]:
        raise CodaError("configurations must have the same number of rows")
    # two-point configurations are always perfectly concordant; anything
    # smaller is degenerate and already rejected above
    if xc.shape[0] < 2:
        raise CodaError("at least 2 rows are needed")
    # Padding with zero columns changes nothing numerically; the SVD of the
    # cross-product already handles unequal widths.
    sv = np.linalg.svd(xc.T @ yc, compute_uv=False)
    denom = np.sqrt((xc**2).sum() * (yc**2).sum())
    return float(min(1.0, sv.sum() / denom))


def stress(d_sub: DistanceMatrix, d_full: DistanceMatrix) -> float:
    """Kruskal stress-1 between two distance sets over matching ids.

    ``sqrt(sum (d_sub - b * d_full)^2 / sum d_sub^2)`` with b the
    least-squares scaling, so exact proportionality gives zero.
    """
    if d_sub.ids != d_full.ids:
        raise CodaError("distance matrices must carry identical ids in order")
    iu = np.triu_indices(d_sub.size, k=1)
    a = d_sub.values[iu]
    b_full = d_full.values[iu]
    ss = (a**2).sum()
    if ss <= 0:
        raise CodaError("all-zero distances; stress undefined")
    denom = (b_full**2).sum()
    scale = (a * b_full).sum() / denom if denom > 0 else 0.0
    return float(np.sqrt(((a - scale * b_full) ** 2).sum() / ss))


def principal_coordinates(d: DistanceMatrix, rel_tol: float = 1e-9) -> np.ndarray:
    """Classical scaling: the full set of principal coordinates.

    Eigendecomposition of the double-centered squared distances; axes with
    eigenvalues below ``rel_tol`` times the largest are dropped.
    """
    m = d.size
    sq = d.values**2
    j = np.eye(m) - np.full((m, m), 1.0 / m)
    b = -0.5 * j @ sq @ j
    eigval, eigvec = np.linalg.eigh(b)
    order = np.argsort(eigval)[::-1]
    eigval = eigval[order]
    eigvec = eigvec[:, order]
    if eigval[0] <= 0:
        return np.zeros((m, 1))
    keep = eigval > rel_tol * eigval[0]
    return eigvec[:, keep] * np.sqrt(eigval[keep])


def sample_index_pairs(n_rows: int, n_pairs: int, seed: int) -> np.ndarray:
    """Sample distinct unordered row pairs (i < j) without replacement.

    Deterministic for a given 64-bit seed; intended for scatterplots of
    inter-row distances when the full matrix would be too large.
    """
    total = n_rows * (n_rows - 1) // 2
    if n_pairs > total:
        raise CodaError(f"cannot sample {n_pairs} pairs from {total}")
    rng = np.random.default_rng(seed)
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < n_pairs:
        i, j = rng.integers(0, n_rows, size=2)
        if i == j:
            continue
        chosen.add((min(i, j), max(i, j)))
    return np.array(sorted(chosen), dtype=int)


def pair_distances(
    values: np.ndarray, pairs: np.ndarray, weights: np.ndarray | None = None
) -> np.ndarray:
    """Euclidean distances between the given row pairs of a feature matrix."""
    values = np.asarray(values, dtype=float)
    if weights is not None:
        values = values * np.sqrt(np.asarray(weights, dtype=float))
    diff = values[pairs[:, 0]] - values[pairs[:, 1]]
    return np.sqrt((diff**2).sum(axis=1))
