"""Logratio transformations and the Box-Cox power transform.

Every transform here is a log-contrast: a linear combination of the
log-transformed parts with coefficients summing to zero, which is what makes
the values invariant to row scaling of the pre-closure data. Natural
logarithms are used throughout. The summed logratio (SLR) is the one
exception: it takes logs of sums of parts, so it is not a log-contrast, but
it is recorded with the analogous contrast of block indicators.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .composition import CompositionMatrix
from .errors import CodaError

__all__ = [
    "LogratioMatrix",
    "ContrastTree",
    "lr_all",
    "alr",
    "clr",
    "ilr",
    "plr",
    "slr",
    "slr_set",
    "box_cox",
    "power_transform",
    "log_contrast",
]

KINDS = ("LR-all", "ALR", "CLR", "ILR", "PLR", "SLR-set", "custom")


@dataclass(frozen=True, eq=False)
class LogratioMatrix:
    """N x K matrix of transformed values with the defining contrasts.

    ``contrast`` is K x D with zero row sums; for every kind except
    ``SLR-set`` the values equal ``log(parts) @ contrast.T``.
    """

    values: np.ndarray
    column_labels: tuple[str, ...]
    contrast: np.ndarray
    kind: str
    row_ids: tuple[str, ...] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        contrast = np.asarray(self.contrast, dtype=float)
        if self.kind not in KINDS:
            raise CodaError(f"unknown logratio kind {self.kind!r}")
        if values.ndim != 2 or contrast.ndim != 2:
            raise CodaError("values and contrast must be 2-d")
        if contrast.shape[0] != values.shape[1]:
            raise CodaError("one contrast row per value column required")
        rowsums = contrast.sum(axis=1)
        if np.any(np.abs(rowsums) > 1e-12):
            k = int(np.argmax(np.abs(rowsums)))
            raise CodaError(
                f"contrast row {k} sums to {rowsums[k]:.3e}; log-contrast "
                "coefficients must sum to 0"
            )
        labels = tuple(str(x) for x in self.column_labels)
        if len(labels) != values.shape[1]:
            raise CodaError("one label per column required")
        for a in (values, contrast):
            a.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "contrast", contrast)
        object.__setattr__(self, "column_labels", labels)
        if self.row_ids is None:
            object.__setattr__(
                self, "row_ids", tuple(f"r{i + 1}" for i in range(values.shape[0]))
            )
        else:
            object.__setattr__(self, "row_ids", tuple(str(r) for r in self.row_ids))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ContrastTree:
    """Sequential binary partition of parts, one split per tree node.

    The first split divides all parts into a numerator and a denominator
    set; every later split subdivides one block produced earlier. A full
    tree over D parts has D-1 splits.
    """

    n_parts: int
    splits: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __post_init__(self):
        splits = tuple(
            (tuple(sorted(int(i) for i in num)), tuple(sorted(int(i) for i in den)))
            for num, den in self.splits
        )
        if not splits:
            raise CodaError("a contrast tree needs at least one split")
        blocks = [tuple(range(self.n_parts))]
        for k, (num, den) in enumerate(splits):
            if not num or not den:
                raise CodaError(f"split {k} has an empty side")
            if set(num) & set(den):
                raise CodaError(f"split {k} has overlapping sides")
            merged = tuple(sorted(num + den))
            if merged not in blocks:
                raise CodaError(
                    f"split {k} does not refine a block produced by earlier splits"
                )
            blocks.remove(merged)
            blocks.extend([num, den])
        object.__setattr__(self, "splits", splits)

    @classmethod
    def from_pivot_order(cls, order: Sequence[int]) -> "ContrastTree":
        """Pivot tree: part j against all later parts in the given order."""
        order = [int(i) for i in order]
        d = len(order)
        splits = [((order[j],), tuple(order[j + 1:])) for j in range(d - 1)]
        return cls(n_parts=d, splits=tuple(splits))

    def orthonormal_contrast(self) -> np.ndarray:
        """Contrast matrix with rows scaled to unit sum of squares.

        A split with r numerator and s denominator parts gets entries
        ``sqrt(rs/(r+s))/r`` and ``-sqrt(rs/(r+s))/s``, so the rows of a
        full tree form an orthonormal basis of the zero-sum subspace.
        """
        rows = np.zeros((len(self.splits), self.n_parts))
        for k, (num, den) in enumerate(self.splits):
            r, s = len(num), len(den)
            scale = np.sqrt(r * s / (r + s))
            rows[k, list(num)] = scale / r
            rows[k, list(den)] = -scale / s
        return rows

    def split_labels(self, part_names: Sequence[str]) -> list[str]:
        out = []
        for num, den in self.splits:
            top = ".".join(part_names[i] for i in num)
            bot = ".".join(part_names[i] for i in den)
            out.append(f"{top}/{bot}")
        return out


def _log_values(c: CompositionMatrix, operation: str) -> np.ndarray:
    c.require_positive(operation)
    return np.log(c.values)


def lr_all(c: CompositionMatrix) -> LogratioMatrix:
    """All D(D-1)/2 pairwise logratios log(x_j/x_k), j < k lexicographic."""
    logs = _log_values(c, "pairwise logratios")
    d = c.n_parts
    pairs = list(combinations(range(d), 2))
    values = np.empty((c.n_rows, len(pairs)))
    contrast = np.zeros((len(pairs), d))
    labels = []
    for col, (j, k) in enumerate(pairs):
        values[:, col] = logs[:, j] - logs[:, k]
        contrast[col, j] = 1.0
        contrast[col, k] = -1.0
        labels.append(f"{c.part_names[j]}/{c.part_names[k]}")
    return LogratioMatrix(values, labels, contrast, "LR-all", c.row_ids)


def alr(c: CompositionMatrix, ref: int | str) -> LogratioMatrix:
    """Additive logratios log(x_j/x_ref) for all parts j != ref."""
    ref_idx = c.part_index(ref)
    logs = _log_values(c, "additive logratios")
    keep = [j for j in range(c.n_parts) if j != ref_idx]
    values = logs[:, keep] - logs[:, [ref_idx]]
    contrast = np.zeros((len(keep), c.n_parts))
    labels = []
    for row, j in enumerate(keep):
        contrast[row, j] = 1.0
        contrast[row, ref_idx] = -1.0
        labels.append(f"{c.part_names[j]}/{c.part_names[ref_idx]}")
    return LogratioMatrix(values, labels, contrast, "ALR", c.row_ids)


def clr(c: CompositionMatrix) -> LogratioMatrix:
    """Centered logratios log(x_j / g(x)) against the weighted geometric mean.

    With uniform weights this is the classical CLR with respect to the plain
    geometric mean; with varying part weights the mean is
    ``prod_k x_k ** w_k``, which keeps the weighted total-variance identity
    exact. Each output row sums to zero under the weights.
    """
    logs = _log_values(c, "centered logratios")
    w = c.weights
    values = logs - (logs @ w)[:, None]
    contrast = np.eye(c.n_parts) - np.tile(w, (c.n_parts, 1))
    labels = [f"clr({name})" for name in c.part_names]
    return LogratioMatrix(values, labels, contrast, "CLR", c.row_ids)


def ilr(c: CompositionMatrix, tree: ContrastTree) -> LogratioMatrix:
    """Isometric logratios for a sequential binary partition.

    The D-1 contrast rows are orthonormal, so Euclidean distances between
    rows of the result equal the (unweighted, summed) distances between the
    CLR rows.
    """
    if tree.n_parts != c.n_parts:
        raise CodaError(
            f"tree is over {tree.n_parts} parts but the composition has {c.n_parts}"
        )
    if len(tree.splits) != c.n_parts - 1:
        raise CodaError(
            f"a full tree needs {c.n_parts - 1} splits, got {len(tree.splits)}"
        )
    logs = _log_values(c, "isometric logratios")
    contrast = tree.orthonormal_contrast()
    values = logs @ contrast.T
    labels = tree.split_labels(c.part_names)
    return LogratioMatrix(values, labels, contrast, "ILR", c.row_ids)


def plr(c: CompositionMatrix, order: Sequence[int | str] | None = None) -> LogratioMatrix:
    """Pivot logratios: each part against the geometric mean of the later ones.

    ``order`` is a permutation of the parts (names or indices); by default
    the stored part order is used.
    """
    if order is None:
        idx = list(range(c.n_parts))
    else:
        idx = c.part_indices(order)
    if sorted(idx) != list(range(c.n_parts)):
        raise CodaError("order must be a permutation of all parts")
    tree = ContrastTree.from_pivot_order(idx)
    out = ilr(c, tree)
    return LogratioMatrix(out.values, out.column_labels, out.contrast, "PLR", c.row_ids)


def _block_sums(c: CompositionMatrix, num, den) -> tuple[np.ndarray, np.ndarray, list[int], list[int]]:
    num_idx = c.part_indices(num)
    den_idx = c.part_indices(den)
    if not num_idx or not den_idx:
        raise CodaError("numerator and denominator sets must be nonempty")
    if set(num_idx) & set(den_idx):
        raise CodaError("numerator and denominator sets must be disjoint")
    top = c.values[:, num_idx].sum(axis=1)
    bot = c.values[:, den_idx].sum(axis=1)
    for side, name in ((top, "numerator"), (bot, "denominator")):
        if np.any(side <= 0):
            i = int(np.argmax(side <= 0))
            raise CodaError(f"row {c.row_ids[i]!r} has zero {name} block sum")
    return top, bot, num_idx, den_idx


def slr(c: CompositionMatrix, num, den) -> np.ndarray:
    """Summed (amalgamated) logratio: log of the ratio of two block sums.

    Zeros inside a block are tolerated as long as each block sum stays
    positive.
    """
    top, bot, _, _ = _block_sums(c, num, den)
    return np.log(top / bot)


def slr_set(c: CompositionMatrix, pairs) -> LogratioMatrix:
    """Assemble several SLRs into one matrix (kind ``SLR-set``).

    Each contrast row records the block-indicator log-contrast (1/r on the
    numerator parts, -1/s on the denominator); the values themselves are
    logs of sums, not log-contrasts.
    """
    cols, labels = [], []
    contrast = np.zeros((len(pairs), c.n_parts))
    for k, (num, den) in enumerate(pairs):
        top, bot, num_idx, den_idx = _block_sums(c, num, den)
        cols.append(np.log(top / bot))
        contrast[k, num_idx] = 1.0 / len(num_idx)
        contrast[k, den_idx] = -1.0 / len(den_idx)
        labels.append(
            "+".join(c.part_names[i] for i in num_idx)
            + "/"
            + "+".join(c.part_names[i] for i in den_idx)
        )
    return LogratioMatrix(np.column_stack(cols), labels, contrast, "SLR-set", c.row_ids)


def power_transform(values: np.ndarray, alpha: float) -> np.ndarray:
    """Box-Cox power transform (1/alpha) * x**alpha applied entrywise.

    The additive -1/alpha term of the classical transform is dropped (it
    vanishes under double-centering) but the 1/alpha factor is kept, so the
    transform tends to log(x) as alpha tends to 0.
    """
    if alpha <= 0:
        raise CodaError(f"alpha must be positive, got {alpha}")
    values = np.asarray(values, dtype=float)
    if np.any(values < 0):
        raise CodaError("power transform needs nonnegative entries")
    return values**alpha / alpha


def box_cox(c: CompositionMatrix, alpha: float) -> np.ndarray:
    """Box-Cox power transform of the composition values (left unclosed)."""
    return power_transform(c.values, alpha)


def log_contrast(c: CompositionMatrix, coeffs) -> np.ndarray:
    """Evaluate a general log-contrast sum_j a_j log(x_j) per row.

    The coefficients must sum to zero (within 1e-10), which makes the value
    invariant to row rescaling of the pre-closure data.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (c.n_parts,):
        raise CodaError(f"expected {c.n_parts} coefficients")
    if abs(coeffs.sum()) > 1e-10:
        raise CodaError(
            f"log-contrast coefficients sum to {coeffs.sum():.3e}, not 0"
        )
    logs = _log_values(c, "log-contrast")
    return logs @ coeffs
