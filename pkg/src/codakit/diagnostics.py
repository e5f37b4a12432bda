"""Quasi-coherence and quasi-isometry diagnostics.

Coherence sweeps measure how much the geometry of a random set of parts
changes when those parts are re-normalized as a subcomposition; logratio
part geometries are exactly coherent, chi-square geometries only nearly so,
and the gap shrinks with a square-root power transform and with growing
numbers of parts. Alpha sweeps trace the convergence of correspondence
analysis to logratio analysis as the Box-Cox power shrinks. The multinomial
correlation and shrinkage estimator support count-based compositions with
many zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .composition import CompositionMatrix, RawCountMatrix, close, replace_zeros
from .errors import CodaError
from .geometry import (
    DistanceMatrix,
    chi_square_distances,
    principal_coordinates,
    procrustes_correlation,
)
from .ordination import ca, lra
from .variance import variation_matrix

__all__ = [
    "CoherenceSizeResult",
    "CoherenceReport",
    "ConvergenceCurve",
    "DilutionCurve",
    "ShrinkResult",
    "coherence_sweep",
    "alpha_sweep",
    "multinomial_correlation",
    "dilution_curve",
    "shrink_estimate",
]

COHERENCE_TRANSFORMS = ("chi-square", "logratio")
MAX_RESAMPLES = 100


@dataclass(frozen=True, eq=False)
class CoherenceSizeResult:
    size: int
    correlations: np.ndarray
    median: float
    p2_5: float
    p97_5: float
    count_above: int
    resamples: int


@dataclass(frozen=True)
class CoherenceReport:
    transform: str
    alpha: float | None
    threshold: float
    reps: int
    seed: int
    results: tuple[CoherenceSizeResult, ...]


@dataclass(frozen=True, eq=False)
class ConvergenceCurve:
    """Procrustes correlations of CA against LRA along decreasing powers."""

    alphas: np.ndarray
    correlations: np.ndarray
    variant: str

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float)
        corr = np.asarray(self.correlations, dtype=float)
        if alphas.shape != corr.shape:
            raise CodaError("alphas and correlations must have equal length")
        if np.any(np.diff(alphas) >= 0):
            raise CodaError("alphas must be strictly decreasing")
        for a in (alphas, corr):
            a.flags.writeable = False
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "correlations", corr)


@dataclass(frozen=True, eq=False)
class DilutionCurve:
    sizes: np.ndarray
    correlations: np.ndarray
    top_parts: tuple[int, int]


@dataclass(frozen=True, eq=False)
class ShrinkResult:
    """Composition shrunk towards the uniform target with intensity lambda."""

    proportions: np.ndarray
    intensity: float
    total: float


def _as_composition(data) -> CompositionMatrix:
    if isinstance(data, RawCountMatrix):
        return close(data)
    if isinstance(data, CompositionMatrix):
        return data
    raise CodaError("expected a RawCountMatrix or CompositionMatrix")


def _chisq_part_geometry(values: np.ndarray, alpha: float | None) -> np.ndarray:
    vals = values**alpha if alpha is not None else np.array(values, dtype=float)
    sums = vals.sum(axis=1)
    if np.any(sums <= 0):
        raise CodaError("a row has zero total over the selected parts")
    closed = vals / sums[:, None]
    if np.any(closed.sum(axis=0) <= 0):
        raise CodaError("a selected part is zero everywhere")
    dist = chi_square_distances(closed, axis="columns")
    return principal_coordinates(dist)


def coherence_sweep(
    data,
    transform: str = "chi-square",
    sizes=(4, 8, 16),
    reps: int = 100,
    seed: int = 0,
    alpha: float | None = None,
    threshold: float = 0.999,
) -> CoherenceReport:
    """Procrustes concordance of part geometries in random subcompositions.

    For every requested size, ``reps`` random part subsets are drawn; the
    part geometry (full principal coordinates of the between-part distances
    under the chosen transform) is computed in the re-normalized
    subcomposition and in the full composition restricted to those parts,
    and the Procrustes correlation between the two is recorded. Draws that
    produce a degenerate subcomposition are resampled (up to 100 tries) and
    the resample count reported. The logratio transform is exactly coherent,
    so it serves as the oracle returning 1 everywhere.
    """
    if transform not in COHERENCE_TRANSFORMS:
        raise CodaError(f"transform must be one of {COHERENCE_TRANSFORMS}")
    if transform == "logratio" and alpha is not None:
        raise CodaError("alpha only applies to the chi-square transform")
    if reps < 1:
        raise CodaError("at least one replicate required")
    comp = _as_composition(data)
    d = comp.n_parts
    sizes = [int(s) for s in sizes]
    for s in sizes:
        if not 2 <= s <= d:
            raise CodaError(f"subcomposition size {s} out of range [2, {d}]")
    # Restricting the full geometry to a subset of parts preserves their
    # mutual distances exactly, so the full-composition coordinates are
    # computed once and sliced per draw.
    if transform == "logratio":
        comp.require_positive("logratio coherence sweep")
        tau_full = variation_matrix(comp).tau
        full_coords = principal_coordinates(
            DistanceMatrix(np.sqrt(tau_full), comp.part_names)
        )
    else:
        full_coords = _chisq_part_geometry(comp.values, alpha)

    results = []
    for si, size in enumerate(sizes):
        corrs = np.empty(reps)
        resamples = 0
        for rep in range(reps):
            rng = np.random.default_rng([seed, si, rep])
            for attempt in range(MAX_RESAMPLES + 1):
                subset = np.sort(rng.choice(d, size=size, replace=False))
                try:
                    if transform == "logratio":
                        names = [comp.part_names[i] for i in subset]
                        sub_vals = comp.values[:, subset]
                        sub_vals = sub_vals / sub_vals.sum(axis=1)[:, None]
                        sub_c = CompositionMatrix(sub_vals, part_names=names)
                        tau_sub = variation_matrix(sub_c).tau
                        sub_g = principal_coordinates(
                            DistanceMatrix(np.sqrt(tau_sub), names)
                        )
                    else:
                        sub_g = _chisq_part_geometry(comp.values[:, subset], alpha)
                except CodaError:
                    resamples += 1
                    if attempt == MAX_RESAMPLES:
                        raise CodaError(
                            f"could not draw a valid subcomposition of size {size} "
                            f"after {MAX_RESAMPLES} resamples"
                        )
                    continue
                corrs[rep] = procrustes_correlation(sub_g, full_coords[subset])
                break
        results.append(
            CoherenceSizeResult(
                size=size,
                correlations=corrs,
                median=float(np.median(corrs)),
                p2_5=float(np.percentile(corrs, 2.5)),
                p97_5=float(np.percentile(corrs, 97.5)),
                count_above=int((corrs > threshold).sum()),
                resamples=resamples,
            )
        )
    return CoherenceReport(
        transform=transform,
        alpha=alpha,
        threshold=threshold,
        reps=reps,
        seed=seed,
        results=tuple(results),
    )


def alpha_sweep(
    data,
    alphas=(1.0, 0.5, 0.1, 0.01, 0.001),
    replace_data_zeros: bool = True,
    fraction: float = 2.0 / 3.0,
    seed: int | None = None,
) -> ConvergenceCurve:
    """Convergence of the CA column geometry to the LRA column geometry.

    The reference LRA always runs on zero-replaced data. The CA side runs
    either on the same zero-replaced matrix (converging to Procrustes 1 as
    alpha tends to 0) or, with ``replace_data_zeros=False``, on the data
    with zeros kept, where the curve typically peaks near alpha 0.5 and then
    deteriorates. ``seed`` is accepted for interface symmetry with the other
    sweeps; the full-rank geometries need no sampling.
    """
    del seed
    comp = _as_composition(data)
    positive = replace_zeros(comp, fraction)
    reference = lra(positive).col_principal
    ca_input = positive.values if replace_data_zeros else comp.values
    alphas = np.array(sorted({float(a) for a in alphas}, reverse=True))
    if np.any(alphas <= 0) or np.any(alphas > 1):
        raise CodaError("alphas must lie in (0, 1]")
    corrs = np.empty(alphas.size)
    for i, a in enumerate(alphas):
        solution = ca(ca_input, alpha=float(a))
        corrs[i] = procrustes_correlation(solution.col_principal, reference)
    variant = "zeros-replaced" if replace_data_zeros else "zeros-kept"
    return ConvergenceCurve(alphas, corrs, variant)


def multinomial_correlation(p_i: float, p_j: float) -> float:
    """Correlation of two multinomial counts implied by the unit-sum
    constraint: -sqrt(p_i p_j / ((1-p_i)(1-p_j))).

    Always negative on (0,1)^2, reaching -1 when p_i = p_j = 1/2, and
    vanishing as either probability tends to 0.
    """
    for p in (p_i, p_j):
        if not 0 < p < 1:
            raise CodaError(f"probabilities must lie strictly in (0, 1), got {p}")
    if p_i + p_j > 1 + 1e-12:
        raise CodaError("probabilities of distinct parts cannot sum beyond 1")
    return float(-np.sqrt(p_i * p_j / ((1.0 - p_i) * (1.0 - p_j))))


def dilution_curve(counts, sizes, ranking=None) -> DilutionCurve:
    """Constraint-induced correlation of the two most abundant parts versus
    subcomposition size.

    For each size s, the s most abundant parts form a subcomposition; the
    empirical proportions of the overall top two parts within it feed the
    multinomial correlation. With abundance-ordered nesting the magnitude is
    nonincreasing in size.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 1:
        raise CodaError("a single count vector is required")
    if np.any(counts < 0):
        raise CodaError("counts must be nonnegative")
    if (counts > 0).sum() < 2:
        raise CodaError("at least 2 positive parts required")
    if ranking is None:
        ranking = np.argsort(-counts, kind="stable")
    else:
        ranking = np.asarray(ranking, dtype=int)
        if sorted(ranking.tolist()) != list(range(counts.size)):
            raise CodaError("ranking must be a permutation of all parts")
    sizes = sorted({int(s) for s in sizes})
    if sizes[0] < 2 or sizes[-1] > counts.size:
        raise CodaError(f"sizes must lie in [2, {counts.size}]")
    top = ranking[:2]
    if np.any(counts[top] <= 0):
        raise CodaError("the two top-ranked parts must have positive counts")
    corrs = np.empty(len(sizes))
    for i, s in enumerate(sizes):
        selected = ranking[:s]
        total = counts[selected].sum()
        corrs[i] = multinomial_correlation(
            counts[top[0]] / total, counts[top[1]] / total
        )
    return DilutionCurve(np.array(sizes), corrs, (int(top[0]), int(top[1])))


def shrink_estimate(counts) -> ShrinkResult:
    """Shrink empirical proportions towards the uniform target.

    The intensity ``lambda* = (1 - sum p^2) / ((n-1) sum (1/D - p)^2)``
    (clamped to [0, 1]) minimizes an estimate of the mean-squared error of
    the convex combination ``lambda/D + (1-lambda) p``; a degenerate
    denominator yields lambda = 1. Any zero count maps to a strictly
    positive estimate whenever lambda > 0, so the result is ready for
    logratio analysis.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 1 or counts.size < 2:
        raise CodaError("a count vector with at least 2 parts is required")
    if np.any(counts < 0):
        raise CodaError("counts must be nonnegative")
    n = counts.sum()
    if n <= 0:
        raise CodaError("total count must be positive")
    p = counts / n
    target = 1.0 / counts.size
    denom = (n - 1.0) * ((target - p) ** 2).sum()
    if denom <= 0:
        lam = 1.0
    else:
        lam = float(np.clip((1.0 - (p**2).sum()) / denom, 0.0, 1.0))
    return ShrinkResult(lam * target + (1.0 - lam) * p, lam, float(n))
