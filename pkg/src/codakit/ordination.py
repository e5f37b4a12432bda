"""Ordinations: logratio analysis, PCA of logratio matrices, and
correspondence analysis with an optional Box-Cox power.

All three are weighted SVDs of a double-centered matrix and share one
coordinate convention: principal = standard x singular value on each side,
and explained shares are squared singular values over their total. Axis
signs are fixed by orienting each axis so that its largest-magnitude column
standard coordinate is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .composition import CompositionMatrix
from .errors import CodaError
from .transforms import LogratioMatrix, clr, power_transform

__all__ = [
    "Ordination",
    "Ellipse",
    "EllipseSet",
    "ContributionTable",
    "lra",
    "pca",
    "ca",
    "supplementary_rows",
    "contribution_coordinates",
    "bootstrap_ellipses",
]

# Singular values below this fraction of the largest are treated as rank noise.
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Ordination:
    """SVD-based ordination result.

    ``row_principal = row_standard * diag(singular_values)`` and likewise for
    columns. ``col_centers`` stores the column means removed before the SVD
    (None for CA) so that supplementary rows can be projected later.
    """

    method: str
    row_principal: np.ndarray
    row_standard: np.ndarray
    col_principal: np.ndarray
    col_standard: np.ndarray
    singular_values: np.ndarray
    explained_shares: np.ndarray
    row_masses: np.ndarray
    col_masses: np.ndarray
    row_ids: tuple[str, ...]
    col_names: tuple[str, ...]
    alpha: float | None = None
    col_centers: np.ndarray | None = None

    def __post_init__(self):
        for name in (
            "row_principal",
            "row_standard",
            "col_principal",
            "col_standard",
            "singular_values",
            "explained_shares",
            "row_masses",
            "col_masses",
        ):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.col_centers is not None:
            centers = np.asarray(self.col_centers, dtype=float)
            centers.flags.writeable = False
            object.__setattr__(self, "col_centers", centers)
        sv = self.singular_values
        if sv.size and (np.any(sv <= 0) or np.any(np.diff(sv) > 1e-12 * sv[0])):
            raise CodaError("singular values must be positive and nonincreasing")
        if self.explained_shares.sum() > 1 + 1e-10:
            raise CodaError("explained shares must sum to at most 1")

    @property
    def n_axes(self) -> int:
        return self.singular_values.shape[0]


def _weighted_svd(y: np.ndarray, row_masses: np.ndarray, col_masses: np.ndarray):
    """SVD of sqrt(r) y sqrt(c) with rank trimming and fixed axis signs.

    Data without variation (e.g. an independence table in CA) come back
    with zero axes and zero inertia.
    """
    s = np.sqrt(row_masses)[:, None] * y * np.sqrt(col_masses)
    u, sv, vt = np.linalg.svd(s, full_matrices=False)
    scale = np.sqrt((s**2).sum())
    if sv.size and sv[0] > RANK_TOL * max(scale, 1.0):
        keep = sv > RANK_TOL * sv[0]
    else:
        keep = np.zeros(sv.shape, dtype=bool)
    u, sv, v = u[:, keep], sv[keep], vt[keep].T
    gamma = v / np.sqrt(col_masses)[:, None]
    for k in range(sv.size):
        j = int(np.argmax(np.abs(gamma[:, k])))
        if gamma[j, k] < 0:
            u[:, k] = -u[:, k]
            v[:, k] = -v[:, k]
            gamma[:, k] = -gamma[:, k]
    phi = u / np.sqrt(row_masses)[:, None]
    return phi, sv, gamma


def _assemble(
    method, phi, sv, gamma, row_masses, col_masses, row_ids, col_names,
    alpha=None, col_centers=None,
) -> Ordination:
    inertia = (sv**2).sum()
    shares = sv**2 / inertia if inertia > 0 else sv**2
    return Ordination(
        method=method,
        row_principal=phi * sv,
        row_standard=phi,
        col_principal=gamma * sv,
        col_standard=gamma,
        singular_values=sv,
        explained_shares=shares,
        row_masses=row_masses,
        col_masses=col_masses,
        row_ids=tuple(row_ids),
        col_names=tuple(col_names),
        alpha=alpha,
        col_centers=col_centers,
    )


def lra(c: CompositionMatrix) -> Ordination:
    """Logratio analysis: PCA of the (weighted) CLR-transformed data.

    The log matrix is double-centered (row-centered under the part weights,
    which is the CLR, then column-centered over rows with masses 1/N), so
    all pairwise logratio directions are optimized simultaneously. The
    squared singular values sum to the total logratio variance.
    """
    vals = clr(c).values
    centers = vals.mean(axis=0)
    y = vals - centers
    n = c.n_rows
    row_masses = np.full(n, 1.0 / n)
    phi, sv, gamma = _weighted_svd(y, row_masses, c.weights)
    return _assemble(
        "LRA", phi, sv, gamma, row_masses, c.weights, c.row_ids, c.part_names,
        col_centers=centers,
    )


def pca(lm: LogratioMatrix) -> Ordination:
    """PCA of a logratio matrix: column-centered, unstandardized.

    Row masses are 1/N and column masses 1/K, so the total inertia is the
    average column variance and ``pca(clr(c))`` coincides with ``lra(c)``
    for uniform part weights.
    """
    vals = lm.values
    n, k = vals.shape
    if n < 2:
        raise CodaError("PCA needs at least 2 rows")
    centers = vals.mean(axis=0)
    y = vals - centers
    row_masses = np.full(n, 1.0 / n)
    col_masses = np.full(k, 1.0 / k)
    phi, sv, gamma = _weighted_svd(y, row_masses, col_masses)
    return _assemble(
        "PCA", phi, sv, gamma, row_masses, col_masses, lm.row_ids,
        lm.column_labels, col_centers=centers,
    )


def ca(
    m: np.ndarray,
    alpha: float | None = None,
    row_ids=None,
    col_names=None,
) -> Ordination:
    """Correspondence analysis, optionally of Box-Cox power-transformed data.

    Standardized residuals of the relative matrix are decomposed by SVD.
    When ``alpha`` is given the data are first transformed by
    (1/alpha) x**alpha and the singular values are divided by alpha, which
    preserves the limit to logratio analysis as alpha tends to 0.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise CodaError("correspondence analysis needs a 2-d matrix")
    if np.any(m < 0):
        raise CodaError("correspondence analysis needs nonnegative entries")
    t = power_transform(m, alpha) if alpha is not None else m
    total = t.sum()
    if total <= 0:
        raise CodaError("matrix total must be positive")
    p = t / total
    r = p.sum(axis=1)
    cmass = p.sum(axis=0)
    if np.any(r <= 0):
        i = int(np.argmax(r <= 0))
        raise CodaError(f"zero row margin at row {i + 1}")
    if np.any(cmass <= 0):
        j = int(np.argmax(cmass <= 0))
        raise CodaError(f"zero column margin at column {j + 1}")
    y = p / np.outer(r, cmass) - 1.0
    phi, sv, gamma = _weighted_svd(y, r, cmass)
    if alpha is not None:
        sv = sv / alpha
    if row_ids is None:
        row_ids = tuple(f"r{i + 1}" for i in range(m.shape[0]))
    if col_names is None:
        col_names = tuple(f"c{j + 1}" for j in range(m.shape[1]))
    return _assemble("CA", phi, sv, gamma, r, cmass, row_ids, col_names, alpha=alpha)


def supplementary_rows(o: Ordination, rows: np.ndarray) -> np.ndarray:
    """Project extra rows into an existing ordination (transition formula).

    The active solution is untouched. Rows are expected in the space of the
    active matrix: compositions for LRA, already-transformed logratios for
    PCA, nonnegative profiles-to-be for CA (powered internally when the
    ordination used a Box-Cox alpha). An active row projects exactly onto
    its own principal coordinates.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    d = o.col_standard.shape[0]
    if rows.shape[1] != d:
        raise CodaError(f"expected {d} columns, got {rows.shape[1]}")
    if o.method == "CA":
        t = power_transform(rows, o.alpha) if o.alpha is not None else rows
        if np.any(t < 0):
            raise CodaError("supplementary rows must be nonnegative")
        sums = t.sum(axis=1)
        if np.any(sums <= 0):
            i = int(np.argmax(sums <= 0))
            raise CodaError(f"supplementary row {i + 1} has zero total")
        coords = (t / sums[:, None]) @ o.col_standard
        if o.alpha is not None:
            coords = coords / o.alpha
        return coords
    if o.method == "LRA":
        if np.any(rows <= 0):
            raise CodaError("supplementary compositions must be strictly positive")
        logs = np.log(rows / rows.sum(axis=1)[:, None])
        y = logs - (logs @ o.col_masses)[:, None] - o.col_centers
        return y @ (o.col_masses[:, None] * o.col_standard)
    if o.method == "PCA":
        return (rows - o.col_centers) @ (o.col_masses[:, None] * o.col_standard)
    raise CodaError(f"unsupported ordination method {o.method!r}")


@dataclass(frozen=True, eq=False)
class ContributionTable:
    """Column coordinates scaled for a contribution biplot.

    ``coords`` are standard coordinates times sqrt(column mass), so squared
    coordinates are the contributions of each column to each axis (summing
    to 1 per axis). ``flagged`` marks columns whose contribution to the
    requested plane exceeds the 1/D average (strictly).
    """

    names: tuple[str, ...]
    dims: tuple[int, int]
    coords: np.ndarray
    contributions: np.ndarray
    plane_contribution: np.ndarray
    flagged: np.ndarray


def contribution_coordinates(
    o: Ordination, dims: tuple[int, int] = (1, 2), flag_above_average: bool = True
) -> ContributionTable:
    """Contribution coordinates and above-average flags for a plane.

    ``dims`` are 1-based axis numbers. The plane contribution combines the
    two axes weighted by their inertias.
    """
    for dim in dims:
        if not 1 <= dim <= o.n_axes:
            raise CodaError(f"axis {dim} out of range [1, {o.n_axes}]")
    coords = np.sqrt(o.col_masses)[:, None] * o.col_standard
    contributions = coords**2
    a, b = dims[0] - 1, dims[1] - 1
    lam = o.singular_values**2
    plane = (lam[a] * contributions[:, a] + lam[b] * contributions[:, b]) / (
        lam[a] + lam[b]
    )
    d = len(o.col_names)
    if flag_above_average:
        flagged = plane > 1.0 / d
    else:
        flagged = np.zeros(d, dtype=bool)
    return ContributionTable(
        names=o.col_names,
        dims=(dims[0], dims[1]),
        coords=coords,
        contributions=contributions,
        plane_contribution=plane,
        flagged=flagged,
    )


@dataclass(frozen=True)
class Ellipse:
    group: str
    center: tuple[float, float]
    semi_axes: tuple[float, float]
    angle: float
    n_members: int


@dataclass(frozen=True)
class EllipseSet:
    level: float
    replicates: int
    dims: tuple[int, int]
    ellipses: tuple[Ellipse, ...]


def bootstrap_ellipses(
    o: Ordination,
    groups,
    replicates: int = 1000,
    level: float = 0.99,
    seed: int = 0,
    dims: tuple[int, int] = (1, 2),
) -> EllipseSet:
    """Normal concentration ellipses of bootstrapped group means.

    Each group's rows are resampled with replacement ``replicates`` times;
    the 2-d mean of the selected principal coordinates is recorded per
    replicate, and a bivariate-normal ellipse at the requested level is
    fitted to the replicate means. Replicates draw from replicate-indexed
    random streams, so results depend only on the seed.
    """
    if groups is None:
        raise CodaError("group labels are required for confidence ellipses")
    groups = [str(g) for g in groups]
    if len(groups) != o.row_principal.shape[0]:
        raise CodaError("one group label per row required")
    if not 0 < level < 1:
        raise CodaError("confidence level must lie in (0, 1)")
    if replicates < 1:
        raise CodaError("at least one replicate required")
    labels = sorted(set(groups))
    if len(labels) < 2:
        raise CodaError("at least 2 groups required")
    coords = o.row_principal[:, [dims[0] - 1, dims[1] - 1]]
    # chi-square quantile with 2 degrees of freedom
    q = -2.0 * np.log(1.0 - level)
    garr = np.asarray(groups)
    ellipses = []
    for gi, label in enumerate(labels):
        idx = np.flatnonzero(garr == label)
        if idx.size < 3:
            raise CodaError(f"group {label!r} has fewer than 3 members")
        means = np.empty((replicates, 2))
        for rep in range(replicates):
            rng = np.random.default_rng([seed, gi, rep])
            take = rng.integers(0, idx.size, idx.size)
            means[rep] = coords[idx[take]].mean(axis=0)
        center = means.mean(axis=0)
        cov = np.cov(means, rowvar=False, bias=True)
        eigval, eigvec = np.linalg.eigh(cov)
        eigval = np.maximum(eigval[::-1], 0.0)
        lead = eigvec[:, ::-1][:, 0]
        ellipses.append(
            Ellipse(
                group=label,
                center=(float(center[0]), float(center[1])),
                semi_axes=(float(np.sqrt(q * eigval[0])), float(np.sqrt(q * eigval[1]))),
                angle=float(np.arctan2(lead[1], lead[0])),
                n_members=int(idx.size),
            )
        )
    return EllipseSet(
        level=level, replicates=replicates, dims=dims, ellipses=tuple(ellipses)
    )
