"""Variation matrix, logratio covariance identity, and total variance.

Variances divide by N (each case weighted 1/N) unless the sample form is
requested explicitly. Total logratio variance averages the CLR variances
under the part weights, which equals the doubly weighted sum of pairwise
logratio variances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .composition import CompositionMatrix
from .errors import CodaError
from .transforms import clr

__all__ = [
    "VariationMatrix",
    "variation_matrix",
    "lr_covariance",
    "total_variance",
    "clr_variance_contributions",
    "proportionality",
]


@dataclass(frozen=True, eq=False)
class VariationMatrix:
    """D x D matrix of pairwise logratio variances tau_jk = Var(log(x_j/x_k))."""

    tau: np.ndarray
    part_names: tuple[str, ...]

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if tau.ndim != 2 or tau.shape[0] != tau.shape[1]:
            raise CodaError("variation matrix must be square")
        if not np.allclose(tau, tau.T, atol=1e-12):
            raise CodaError("variation matrix must be symmetric")
        if np.any(np.abs(np.diag(tau)) > 1e-12):
            raise CodaError("variation matrix must have zero diagonal")
        if np.any(tau < -1e-10):
            raise CodaError("variation matrix entries must be nonnegative")
        tau = np.maximum(tau, 0.0)
        np.fill_diagonal(tau, 0.0)
        tau.flags.writeable = False
        object.__setattr__(self, "tau", tau)
        names = tuple(str(x) for x in self.part_names)
        if len(names) != tau.shape[0]:
            raise CodaError("one part name per row required")
        object.__setattr__(self, "part_names", names)

    @property
    def n_parts(self) -> int:
        return self.tau.shape[0]


def _log_cov(c: CompositionMatrix, sample: bool) -> np.ndarray:
    c.require_positive("logratio variances")
    if c.n_rows < 2:
        raise CodaError("at least 2 rows are needed to compute variances")
    logs = np.log(c.values)
    centered = logs - logs.mean(axis=0)
    divisor = c.n_rows - 1 if sample else c.n_rows
    return centered.T @ centered / divisor


def variation_matrix(c: CompositionMatrix, sample: bool = False) -> VariationMatrix:
    """Variance of every pairwise logratio, tau_jk = Var(log(x_j/x_k)).

    ``sample=True`` switches the divisor from N to N-1.
    """
    cov = _log_cov(c, sample)
    var = np.diag(cov)
    tau = var[:, None] + var[None, :] - 2.0 * cov
    return VariationMatrix(tau, c.part_names)


def lr_covariance(t: VariationMatrix, j: int, k: int, u: int, v: int) -> float:
    """Covariance of LR(j,k) with LR(u,v) recovered from the variation matrix.

    Cov(log(x_j/x_k), log(x_u/x_v)) = (tau_jv + tau_ku - tau_ju - tau_kv) / 2.
    """
    d = t.n_parts
    for idx in (j, k, u, v):
        if not 0 <= idx < d:
            raise CodaError(f"part index {idx} out of range [0, {d})")
    tau = t.tau
    return 0.5 * (tau[j, v] + tau[k, u] - tau[j, u] - tau[k, v])


def total_variance(c: CompositionMatrix, sample: bool = False) -> float:
    """Total logratio variance: the weighted average of the CLR variances.

    Equals ``sum_{j<k} w_j w_k Var(log(x_j/x_k))``; with uniform weights this
    is the familiar ``(1/D^2) sum_{j<k} tau_jk``.
    """
    return float(c.weights @ _clr_variances(c, sample))


def _clr_variances(c: CompositionMatrix, sample: bool = False) -> np.ndarray:
    vals = clr(c).values
    centered = vals - vals.mean(axis=0)
    divisor = c.n_rows - 1 if sample else c.n_rows
    if c.n_rows < 2:
        raise CodaError("at least 2 rows are needed to compute variances")
    return (centered**2).sum(axis=0) / divisor


def clr_variance_contributions(c: CompositionMatrix, sample: bool = False) -> np.ndarray:
    """Share of total variance contributed by each part, w_j Var(CLR_j) / TotVar."""
    weighted = c.weights * _clr_variances(c, sample)
    total = weighted.sum()
    if total <= 0:
        raise CodaError("total variance is zero; contributions are undefined")
    return weighted / total


class Proportionality(NamedTuple):
    lr_variance: float
    uncentered_correlation: float


def proportionality(c: CompositionMatrix, j: int | str, k: int | str) -> Proportionality:
    """Two proportionality measures for a pair of parts.

    Returns the variance of log(x_j/x_k) (zero for exactly proportional
    parts) and the uncentered correlation of the raw compositional columns
    (one for exactly proportional parts; not subcompositionally coherent).
    """
    ji = c.part_index(j)
    ki = c.part_index(k)
    tau = variation_matrix(c).tau[ji, ki]
    xj = c.values[:, ji]
    xk = c.values[:, ki]
    denom = np.sqrt((xj**2).sum() * (xk**2).sum())
    if denom == 0:
        raise CodaError("uncentered correlation undefined for all-zero parts")
    return Proportionality(float(tau), float((xj * xk).sum() / denom))
