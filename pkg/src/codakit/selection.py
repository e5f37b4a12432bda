"""Variable selection: ALR reference ranking, stepwise logratio selection,
backward ALR elimination, and supervised theta-ANOVA with permutation FDR.

Explained variance is always the fraction of total weighted CLR variance
captured by least-squares projection of the (column-centered) CLR matrix
onto the span of the selected, column-centered logratio columns. Ties break
first on the documented secondary criterion and then on the lowest
lexicographic part pair, so traces are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .composition import CompositionMatrix
from .errors import CodaError
from .geometry import procrustes_correlation
from .transforms import clr

__all__ = [
    "StepRecord",
    "StepTrace",
    "ThetaTable",
    "AlrCandidate",
    "find_alr",
    "stepwise_lr",
    "backward_alr",
    "theta_anova",
    "permutation_fdr",
    "explained_logratio_variance",
]

# Candidate columns whose residual squared norm falls below this fraction of
# their original squared norm are linearly dependent on the selected set.
DEPENDENCE_TOL = 1e-10
TIE_TOL = 1e-12


class AlrCandidate(NamedTuple):
    ref_index: int
    ref_name: str
    procrustes: float
    log_ref_variance: float


@dataclass(frozen=True)
class StepRecord:
    label: str
    parts: tuple[int, ...]
    explained_pct: float
    procrustes: float
    candidates: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class StepTrace:
    """Ordered record of selection or elimination steps.

    Forward traces have nondecreasing explained variance; backward traces
    start from an ``ALL`` record at 100% and are nonincreasing. ``warning``
    is set when the stopping thresholds could not be reached.
    """

    direction: str
    steps: tuple[StepRecord, ...]
    total_variance: float
    warning: str | None = None

    def labels(self) -> list[str]:
        return [s.label for s in self.steps]


def _centered_clr(c: CompositionMatrix) -> tuple[np.ndarray, np.ndarray, float]:
    vals = clr(c).values
    yc = vals - vals.mean(axis=0)
    weighted_ss = float((c.weights * (yc**2).sum(axis=0)).sum())
    if weighted_ss <= 0:
        raise CodaError("the data carry no logratio variance")
    return yc, c.weights, weighted_ss


def explained_logratio_variance(c: CompositionMatrix, predictors: np.ndarray) -> float:
    """Fraction of total weighted CLR variance explained by the predictors.

    Predictors are column-centered and the projection uses a rank-revealing
    SVD, so linearly dependent columns are harmless.
    """
    yc, w, total = _centered_clr(c)
    z = np.asarray(predictors, dtype=float)
    if z.ndim != 2 or z.shape[0] != c.n_rows:
        raise CodaError("predictors must be an N x m matrix")
    zc = z - z.mean(axis=0)
    u, sv, _ = np.linalg.svd(zc, full_matrices=False)
    if sv.size == 0 or sv[0] <= 0:
        return 0.0
    u = u[:, sv > np.sqrt(DEPENDENCE_TOL) * sv[0]]
    proj = u.T @ yc
    return float((w * (proj**2).sum(axis=0)).sum() / total)


def find_alr(c: CompositionMatrix) -> list[AlrCandidate]:
    """Rank every candidate ALR reference part.

    For each reference the Procrustes correlation between the ALR row
    geometry and the CLR row geometry is computed, together with the
    variance of the log-transformed reference; the list is sorted by
    descending correlation (ties by part order).
    """
    if c.n_parts < 2:
        raise CodaError("reference ranking needs at least 2 parts")
    c.require_positive("ALR reference ranking")
    logs = np.log(c.values)
    y = clr(c).values
    n = c.n_rows
    out = []
    for ref in range(c.n_parts):
        keep = [j for j in range(c.n_parts) if j != ref]
        x = logs[:, keep] - logs[:, [ref]]
        corr = procrustes_correlation(x, y)
        logvar = float(logs[:, ref].var())
        out.append(AlrCandidate(ref, c.part_names[ref], corr, logvar))
    out.sort(key=lambda a: (-a.procrustes, a.ref_index))
    return out


def stepwise_lr(
    c: CompositionMatrix,
    min_explained: float | None = None,
    min_procrustes: float | None = None,
    max_steps: int | None = None,
    top: int = 20,
) -> StepTrace:
    """Greedy forward selection over all pairwise logratios.

    At each step the candidate LR adding the most explained variance is
    selected (ties by least Procrustes loss, then lowest part pair); the
    Procrustes correlation of the selected-LR row geometry against the CLR
    geometry is recorded alongside. Selection stops once all the active
    thresholds (``min_explained`` in percent, ``min_procrustes``) are met,
    or at ``max_steps`` with a warning. The top candidates of every step
    are kept in the trace for expert review.
    """
    c.require_positive("stepwise logratio selection")
    yc, w, total = _centered_clr(c)
    logs = np.log(c.values)
    d = c.n_parts
    pairs = list(combinations(range(d), 2))
    z = np.empty((c.n_rows, len(pairs)))
    for col, (j, k) in enumerate(pairs):
        z[:, col] = logs[:, j] - logs[:, k]
    z -= z.mean(axis=0)
    labels = [f"{c.part_names[j]}/{c.part_names[k]}" for j, k in pairs]

    if max_steps is None:
        max_steps = d - 1
    norms0 = (z**2).sum(axis=0)
    zy = z.T @ yc
    res_norms = norms0.copy()
    num = zy.copy()
    q_basis: list[np.ndarray] = []
    selected: list[int] = []
    steps: list[StepRecord] = []
    explained_ss = 0.0

    def thresholds_met(expl_pct: float, procr: float) -> bool:
        if min_explained is None and min_procrustes is None:
            return False
        if min_explained is not None and expl_pct < min_explained:
            return False
        if min_procrustes is not None and procr < min_procrustes:
            return False
        return True

    warning = None
    while len(selected) < max_steps:
        independent = res_norms > DEPENDENCE_TOL * norms0
        independent[selected] = False
        gains = np.zeros(len(pairs))
        ok = independent.copy()
        gains[ok] = (num[ok] ** 2 @ w) / res_norms[ok]
        if not np.any(gains > 0):
            warning = "no remaining candidate adds explained variance"
            break
        best_gain = gains.max()
        tied = np.flatnonzero(gains >= best_gain - TIE_TOL * max(best_gain, total))
        if tied.size > 1:
            # secondary criterion: highest Procrustes of the prospective set
            scores = []
            for cand in tied:
                config = z[:, selected + [int(cand)]]
                scores.append(procrustes_correlation(config, yc))
            best = int(tied[int(np.argmax(scores))])
        else:
            best = int(tied[0])

        order = np.argsort(-gains, kind="stable")
        shortlist = tuple(
            (labels[int(i)], 100.0 * (explained_ss + gains[int(i)]) / total)
            for i in order[:top]
            if gains[int(i)] > 0
        )

        # orthonormalize the chosen column against the selected basis
        vec = z[:, best].copy()
        for _ in range(2):
            for q in q_basis:
                vec -= (q @ vec) * q
        vec /= np.linalg.norm(vec)
        q_basis.append(vec)
        proj = vec @ yc
        explained_ss += float((w * proj**2).sum())
        upd = z.T @ vec
        res_norms = np.maximum(res_norms - upd**2, 0.0)
        num -= np.outer(upd, proj)
        selected.append(best)

        expl_pct = 100.0 * explained_ss / total
        procr = procrustes_correlation(z[:, selected], yc)
        steps.append(
            StepRecord(
                label=labels[best],
                parts=pairs[best],
                explained_pct=expl_pct,
                procrustes=procr,
                candidates=shortlist,
            )
        )
        if thresholds_met(expl_pct, procr):
            break
    else:
        if steps and not thresholds_met(steps[-1].explained_pct, steps[-1].procrustes):
            if min_explained is not None or min_procrustes is not None:
                warning = f"thresholds not reached within {max_steps} steps"

    return StepTrace("forward", tuple(steps), total / c.n_rows, warning)


def backward_alr(
    c: CompositionMatrix,
    ref: int | str,
    min_explained: float | None = None,
    min_procrustes: float | None = None,
) -> StepTrace:
    """Backward elimination over the ALRs of a chosen reference.

    Starting from all D-1 ALRs (100% explained), the ALR whose removal
    costs the least explained variance is dropped repeatedly (ties by least
    Procrustes reduction, then lowest part index). Elimination stops just
    before a drop would cross an active threshold.
    """
    ref_idx = c.part_index(ref)
    c.require_positive("backward ALR elimination")
    yc, w, total = _centered_clr(c)
    logs = np.log(c.values)
    keep = [j for j in range(c.n_parts) if j != ref_idx]
    z = logs[:, keep] - logs[:, [ref_idx]]
    z -= z.mean(axis=0)
    labels = [f"{c.part_names[j]}/{c.part_names[ref_idx]}" for j in keep]

    gram = z.T @ z
    cross = z.T @ yc
    y_ss = float((yc**2).sum())

    def evaluate(active: list[int]) -> tuple[float, float]:
        a = gram[np.ix_(active, active)]
        b = cross[active]
        try:
            sol = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(a, b, rcond=None)[0]
        expl = float((w * (b * sol).sum(axis=0)).sum() / total)
        sv = np.linalg.svd(b, compute_uv=False)
        procr = float(min(1.0, sv.sum() / np.sqrt(np.trace(a) * y_ss)))
        return 100.0 * expl, procr

    active = list(range(len(keep)))
    expl0, procr0 = evaluate(active)
    steps = [StepRecord("ALL", (), expl0, procr0)]
    warning = None
    while len(active) > 1:
        results = []
        for pos, col in enumerate(active):
            trial = active[:pos] + active[pos + 1:]
            results.append((col, *evaluate(trial)))
        best_expl = max(r[1] for r in results)
        tied = [r for r in results if r[1] >= best_expl - TIE_TOL * 100.0]
        tied.sort(key=lambda r: (-r[2], keep[r[0]]))
        col, expl, procr = tied[0]
        if min_explained is not None and expl < min_explained:
            break
        if min_procrustes is not None and procr < min_procrustes:
            break
        active.remove(col)
        steps.append(
            StepRecord(
                label=labels[col],
                parts=(keep[col], ref_idx),
                explained_pct=expl,
                procrustes=procr,
            )
        )
    return StepTrace("backward", tuple(steps), total / c.n_rows, warning)


@dataclass(frozen=True, eq=False)
class ThetaTable:
    """Per-logratio ratio of within-group to total variance.

    theta near 0 flags a group-discriminating logratio; theta is 1 when the
    group means coincide. ``fdr_estimates`` and ``selected_parts`` are
    filled in by the permutation FDR procedure.
    """

    part_names: tuple[str, ...]
    pairs: np.ndarray
    theta: np.ndarray
    labels: tuple[str, ...]
    fdr_estimates: dict = field(default_factory=dict)
    selected_parts: tuple[str, ...] = ()

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if np.any(theta < -1e-12) or np.any(theta > 1 + 1e-12):
            raise CodaError("theta values must lie in [0, 1]")
        theta = np.clip(theta, 0.0, 1.0)
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        pairs = np.asarray(self.pairs, dtype=int)
        pairs.flags.writeable = False
        object.__setattr__(self, "pairs", pairs)


def _resolve_groups(c: CompositionMatrix, groups) -> np.ndarray:
    if groups is None:
        groups = c.groups
    if groups is None:
        raise CodaError("this operation needs group labels; none were provided")
    garr = np.asarray([str(g) for g in groups])
    if garr.shape[0] != c.n_rows:
        raise CodaError("one group label per row required")
    values, counts = np.unique(garr, return_counts=True)
    if values.size < 2:
        raise CodaError("at least 2 groups required")
    if counts.min() < 2:
        small = values[int(np.argmin(counts))]
        raise CodaError(f"group {small!r} has fewer than 2 members")
    return garr


def _theta_values(
    logs: np.ndarray, garr: np.ndarray, pairs: np.ndarray
) -> np.ndarray:
    centered = logs - logs.mean(axis=0)
    s_tot = centered.T @ centered
    s_within = np.zeros_like(s_tot)
    for label in np.unique(garr):
        block = logs[garr == label]
        bc = block - block.mean(axis=0)
        s_within += bc.T @ bc
    j, k = pairs[:, 0], pairs[:, 1]
    within = s_within[j, j] + s_within[k, k] - 2 * s_within[j, k]
    totals = s_tot[j, j] + s_tot[k, k] - 2 * s_tot[j, k]
    theta = np.ones(len(pairs))
    nz = totals > 1e-300
    theta[nz] = np.clip(within[nz] / totals[nz], 0.0, 1.0)
    return theta


def theta_anova(c: CompositionMatrix, groups=None) -> ThetaTable:
    """Within-group over total variance ratio for every pairwise logratio.

    For two groups, theta is a monotone transform of the squared
    t-statistic; a constant logratio is reported as theta = 1.
    """
    garr = _resolve_groups(c, groups)
    c.require_positive("theta ANOVA")
    logs = np.log(c.values)
    pairs = np.array(list(combinations(range(c.n_parts), 2)), dtype=int)
    theta = _theta_values(logs, garr, pairs)
    labels = tuple(
        f"{c.part_names[j]}/{c.part_names[k]}" for j, k in pairs
    )
    return ThetaTable(c.part_names, pairs, theta, labels)


def permutation_fdr(
    c: CompositionMatrix,
    groups=None,
    cutoff: float = 0.1,
    permutations: int = 99,
    seed: int = 0,
) -> ThetaTable:
    """Plug-in FDR for a theta cutoff via group-label permutations.

    FDR(cutoff) is the average permuted count of logratios at or below the
    cutoff over the observed count (0 when nothing is observed below the
    cutoff). The selected parts are all parts appearing in an observed
    logratio at or below the cutoff. Permutations use permutation-indexed
    random streams, so the estimate depends only on the seed.
    """
    if permutations < 1:
        raise CodaError("at least one permutation required")
    garr = _resolve_groups(c, groups)
    c.require_positive("permutation FDR")
    logs = np.log(c.values)
    pairs = np.array(list(combinations(range(c.n_parts), 2)), dtype=int)
    theta_obs = _theta_values(logs, garr, pairs)
    observed = int((theta_obs <= cutoff).sum())
    perm_counts = np.empty(permutations)
    for rep in range(permutations):
        rng = np.random.default_rng([seed, rep])
        shuffled = garr[rng.permutation(garr.size)]
        perm_counts[rep] = (_theta_values(logs, shuffled, pairs) <= cutoff).sum()
    fdr = float(perm_counts.mean() / max(1, observed))
    hits = pairs[theta_obs <= cutoff]
    part_idx = sorted(set(hits.ravel().tolist()))
    labels = tuple(
        f"{c.part_names[j]}/{c.part_names[k]}" for j, k in pairs
    )
    return ThetaTable(
        part_names=c.part_names,
        pairs=pairs,
        theta=theta_obs,
        labels=labels,
        fdr_estimates={cutoff: fdr},
        selected_parts=tuple(c.part_names[i] for i in part_idx),
    )
