"""Core data model for compositions.

A composition carries only relative information: each row of nonnegative
parts is normalized to unit sum (closure). This module holds the matrix
containers plus the structural operations on them: subcompositions,
amalgamations, multiplicative zero replacement, and part weighting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CodaError

__all__ = [
    "CompositionMatrix",
    "RawCountMatrix",
    "Partition",
    "close",
    "subcomposition",
    "amalgamate",
    "replace_zeros",
    "set_weights",
]

# Rows whose sums deviate from 1 by at most this are accepted as closed and
# then renormalized exactly (CSV round-trips lose trailing digits).
CLOSURE_TOL = 1e-6


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


def _as_names(names, n: int, what: str) -> tuple[str, ...]:
    if names is None:
        width = len(str(n))
        prefix = "p" if what == "part" else "r"
        return tuple(f"{prefix}{i + 1:0{width}d}" for i in range(n))
    names = tuple(str(x) for x in names)
    if len(names) != n:
        raise CodaError(f"expected {n} {what} names, got {len(names)}")
    if len(set(names)) != n:
        raise CodaError(f"duplicate {what} names")
    return names


def _check_matrix(values, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 2:
        raise CodaError(f"{what} must be a 2-d matrix with at least 2 columns")
    if not np.all(np.isfinite(values)):
        raise CodaError(f"{what} contains non-finite entries")
    if np.any(values < 0):
        i, j = np.argwhere(values < 0)[0]
        raise CodaError(f"{what} has a negative entry at row {i + 1}, column {j + 1}")
    return values


@dataclass(frozen=True, eq=False)
class CompositionMatrix:
    """N x D matrix of closed compositions with part names and weights.

    Rows must already sum to 1 within ``CLOSURE_TOL``; they are renormalized
    exactly on construction. Part weights are strictly positive and sum
    to 1 (uniform by default). Instances are immutable: the stored arrays
    are read-only, so values can be shared freely across threads.
    """

    values: np.ndarray
    part_names: tuple[str, ...] = None
    row_ids: tuple[str, ...] = None
    groups: tuple[str, ...] | None = None
    weights: np.ndarray = None

    def __post_init__(self):
        values = _check_matrix(self.values, "composition matrix")
        totals = values.sum(axis=1)
        bad = np.abs(totals - 1.0) > CLOSURE_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise CodaError(
                f"row {i + 1} sums to {totals[i]:.6g}, not 1; close() the data first"
            )
        object.__setattr__(self, "values", _frozen(values / totals[:, None]))
        n, d = values.shape
        object.__setattr__(self, "part_names", _as_names(self.part_names, d, "part"))
        object.__setattr__(self, "row_ids", _as_names(self.row_ids, n, "row"))
        if self.groups is not None:
            groups = tuple(str(g) for g in self.groups)
            if len(groups) != n:
                raise CodaError(f"expected {n} group labels, got {len(groups)}")
            object.__setattr__(self, "groups", groups)
        if self.weights is None:
            weights = np.full(d, 1.0 / d)
        else:
            weights = np.asarray(self.weights, dtype=float)
            if weights.shape != (d,):
                raise CodaError(f"expected {d} part weights")
            if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
                raise CodaError("part weights must be strictly positive")
            weights = weights / weights.sum()
        object.__setattr__(self, "weights", _frozen(weights))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_parts(self) -> int:
        return self.values.shape[1]

    def part_index(self, part: int | str) -> int:
        """Resolve a part given by name or 0-based index."""
        if isinstance(part, str):
            try:
                return self.part_names.index(part)
            except ValueError:
                raise CodaError(f"unknown part {part!r}") from None
        idx = int(part)
        if not 0 <= idx < self.n_parts:
            raise CodaError(f"part index {idx} out of range [0, {self.n_parts})")
        return idx

    def part_indices(self, parts) -> list[int]:
        return [self.part_index(p) for p in parts]

    def require_positive(self, operation: str) -> None:
        """Reject zero entries, directing the caller to replace_zeros()."""
        if np.any(self.values <= 0):
            i, j = np.argwhere(self.values <= 0)[0]
            raise CodaError(
                f"{operation} needs strictly positive entries, but "
                f"row {self.row_ids[i]!r} has a zero in part {self.part_names[j]!r}; "
                "apply replace_zeros() first"
            )


@dataclass(frozen=True, eq=False)
class RawCountMatrix:
    """N x D matrix of nonnegative raw values (counts) before closure."""

    values: np.ndarray
    part_names: tuple[str, ...] = None
    row_ids: tuple[str, ...] = None
    groups: tuple[str, ...] | None = None

    def __post_init__(self):
        values = _check_matrix(self.values, "count matrix")
        n, d = values.shape
        object.__setattr__(self, "part_names", _as_names(self.part_names, d, "part"))
        object.__setattr__(self, "row_ids", _as_names(self.row_ids, n, "row"))
        totals = values.sum(axis=1)
        if np.any(totals <= 0):
            i = int(np.argmax(totals <= 0))
            raise CodaError(f"row {self.row_ids[i]!r} has zero total")
        if self.groups is not None:
            groups = tuple(str(g) for g in self.groups)
            if len(groups) != n:
                raise CodaError(f"expected {n} group labels, got {len(groups)}")
            object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "values", _frozen(values))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_parts(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty blocks of part indices to be amalgamated."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise CodaError("empty block in partition")
            if len(set(b)) != len(b):
                raise CodaError(f"repeated index within block {b}")
            if seen & set(b):
                raise CodaError(f"overlapping blocks at indices {sorted(seen & set(b))}")
            seen |= set(b)
        object.__setattr__(self, "blocks", blocks)

    def covered(self) -> set[int]:
        return {i for b in self.blocks for i in b}


def close(raw: RawCountMatrix) -> CompositionMatrix:
    """Normalize each row to unit sum (closure).

    Part order is preserved and the result carries uniform weights.
    """
    totals = raw.values.sum(axis=1)
    if np.any(totals <= 0):
        i = int(np.argmax(totals <= 0))
        raise CodaError(f"row {raw.row_ids[i]!r} has zero total and cannot be closed")
    return CompositionMatrix(
        raw.values / totals[:, None],
        part_names=raw.part_names,
        row_ids=raw.row_ids,
        groups=raw.groups,
    )


def subcomposition(c: CompositionMatrix, parts) -> CompositionMatrix:
    """Restrict to a subset of parts and reclose rows and weights.

    Parameters
    ----------
    parts : sequence of part names or 0-based indices, at least two.
    """
    idx = c.part_indices(parts)
    if len(idx) < 2:
        raise CodaError("a subcomposition needs at least 2 parts")
    if len(set(idx)) != len(idx):
        raise CodaError("repeated parts in subcomposition")
    sub = c.values[:, idx]
    subtotals = sub.sum(axis=1)
    if np.any(subtotals <= 0):
        i = int(np.argmax(subtotals <= 0))
        raise CodaError(
            f"row {c.row_ids[i]!r} has zero subtotal over the selected parts"
        )
    w = c.weights[idx]
    return CompositionMatrix(
        sub / subtotals[:, None],
        part_names=[c.part_names[j] for j in idx],
        row_ids=c.row_ids,
        groups=c.groups,
        weights=w / w.sum(),
    )


def amalgamate(
    c: CompositionMatrix, p: Partition, labels: Sequence[str] | None = None
) -> CompositionMatrix:
    """Merge each block of parts into their row-wise sum.

    Parts not listed in any block are carried through unchanged. Each merged
    column sits at the position of its block's first part and is named by
    joining the member names with ``+`` unless explicit labels are given.
    Block weights are the sums of the member weights.
    """
    covered = p.covered()
    if covered and (min(covered) < 0 or max(covered) >= c.n_parts):
        raise CodaError("partition indices out of range")
    if labels is not None and len(labels) != len(p.blocks):
        raise CodaError(f"expected {len(p.blocks)} block labels")

    first_of = {min(b): k for k, b in enumerate(p.blocks)}
    cols, names, weights = [], [], []
    for j in range(c.n_parts):
        if j in first_of:
            k = first_of[j]
            block = list(p.blocks[k])
            cols.append(c.values[:, block].sum(axis=1))
            names.append(
                labels[k] if labels is not None
                else "+".join(c.part_names[i] for i in block)
            )
            weights.append(c.weights[block].sum())
        elif j in covered:
            continue
        else:
            cols.append(c.values[:, j])
            names.append(c.part_names[j])
            weights.append(c.weights[j])
    if len(cols) < 2:
        raise CodaError("amalgamation would leave fewer than 2 parts")
    return CompositionMatrix(
        np.column_stack(cols),
        part_names=names,
        row_ids=c.row_ids,
        groups=c.groups,
        weights=np.array(weights),
    )


def replace_zeros(c: CompositionMatrix, fraction: float = 2.0 / 3.0) -> CompositionMatrix:
    """Replace zeros column-wise by ``fraction`` times the column's minimum
    positive value (a per-part detection-limit rule), then reclose the rows.

    A matrix without zeros is returned unchanged.
    """
    if not 0 < fraction <= 1:
        raise CodaError(f"fraction must lie in (0, 1], got {fraction}")
    values = np.array(c.values)
    zero = values <= 0
    if not zero.any():
        return c
    for j in range(values.shape[1]):
        col = values[:, j]
        if not zero[:, j].any():
            continue
        positive = col[col > 0]
        if positive.size == 0:
            raise CodaError(f"part {c.part_names[j]!r} is zero in every row")
        col[zero[:, j]] = fraction * positive.min()
    values /= values.sum(axis=1)[:, None]
    return CompositionMatrix(
        values,
        part_names=c.part_names,
        row_ids=c.row_ids,
        groups=c.groups,
        weights=c.weights,
    )


def set_weights(c: CompositionMatrix, scheme) -> CompositionMatrix:
    """Attach part weights: ``"uniform"``, ``"column-means"``, or an explicit
    positive vector (renormalized to sum 1).
    """
    if isinstance(scheme, str):
        if scheme == "uniform":
            weights = np.full(c.n_parts, 1.0 / c.n_parts)
        elif scheme == "column-means":
            weights = c.values.mean(axis=0)
            if np.any(weights <= 0):
                j = int(np.argmax(weights <= 0))
                raise CodaError(
                    f"part {c.part_names[j]!r} has zero mean; column-mean "
                    "weights need every part present"
                )
        else:
            raise CodaError(f"unknown weighting scheme {scheme!r}")
    else:
        weights = np.asarray(scheme, dtype=float)
        if weights.shape != (c.n_parts,):
            raise CodaError(f"expected {c.n_parts} weights")
        if np.any(weights <= 0):
            raise CodaError("explicit weights must be strictly positive")
    return CompositionMatrix(
        c.values,
        part_names=c.part_names,
        row_ids=c.row_ids,
        groups=c.groups,
        weights=weights,
    )
