"""SVG figure emission (matplotlib, Agg backend).

Figures carry the numeric content of the corresponding CSV/JSON artifacts;
only those are covered by the byte-identical output guarantee.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Ellipse as MplEllipse

from .clustering import Dendrogram
from .diagnostics import CoherenceReport, ConvergenceCurve, DilutionCurve
from .ordination import EllipseSet, Ordination, contribution_coordinates

__all__ = [
    "biplot_svg",
    "dendrogram_svg",
    "coherence_svg",
    "convergence_svg",
    "dilution_svg",
]

GROUP_CMAP = "tab10"


def _save(fig, path):
    fig.savefig(path, format="svg")
    plt.close(fig)


def biplot_svg(
    path,
    o: Ordination,
    dims: tuple[int, int] = (1, 2),
    groups=None,
    ellipses: EllipseSet | None = None,
    label_flagged_only: bool = True,
    title: str | None = None,
    zoom: tuple[float, float, float, float] | None = None,
):
    """Contribution biplot: rows as points, columns as scaled arrows.

    Column coordinates are contribution coordinates; only above-average
    contributors are labeled unless ``label_flagged_only`` is off. Groups
    color the row points and optional bootstrap ellipses are overlaid.
    ``zoom`` (x0, x1, y0, y1) adds an inset with that window enlarged.
    """
    a, b = dims[0] - 1, dims[1] - 1
    rows = o.row_principal[:, [a, b]]
    table = contribution_coordinates(o, dims)
    fig, ax = plt.subplots(figsize=(7, 7))
    if groups is not None:
        labels = sorted(set(str(g) for g in groups))
        cmap = plt.get_cmap(GROUP_CMAP)
        garr = np.asarray([str(g) for g in groups])
        for gi, label in enumerate(labels):
            mask = garr == label
            ax.scatter(
                rows[mask, 0], rows[mask, 1], s=6, alpha=0.6,
                color=cmap(gi % cmap.N), label=label,
            )
        ax.legend(loc="best", fontsize=7, markerscale=2)
    else:
        ax.scatter(rows[:, 0], rows[:, 1], s=6, alpha=0.6, color="grey")

    span = max(np.abs(rows).max(), 1e-9)
    arrows = table.coords[:, [a, b]]
    arrow_span = max(np.abs(arrows).max(), 1e-9)
    arrows = arrows * (0.8 * span / arrow_span)
    for i, name in enumerate(table.names):
        if label_flagged_only and not table.flagged[i]:
            continue
        ax.annotate(
            "", xy=tuple(arrows[i]), xytext=(0, 0),
            arrowprops=dict(arrowstyle="->", color="brown", lw=0.8),
        )
        ax.text(arrows[i, 0], arrows[i, 1], name, fontsize=8, color="brown")

    def draw_ellipses(target):
        if ellipses is None:
            return
        for el in ellipses.ellipses:
            target.add_patch(MplEllipse(
                el.center,
                width=2 * el.semi_axes[0],
                height=2 * el.semi_axes[1],
                angle=np.degrees(el.angle),
                fill=False, color="black", lw=0.8,
            ))

    draw_ellipses(ax)
    if zoom is not None:
        x0, x1, y0, y1 = zoom
        inset = ax.inset_axes([0.62, 0.62, 0.36, 0.36])
        if groups is not None:
            cmap = plt.get_cmap(GROUP_CMAP)
            garr = np.asarray([str(g) for g in groups])
            for gi, label in enumerate(sorted(set(garr))):
                mask = garr == label
                inset.scatter(rows[mask, 0], rows[mask, 1], s=4, alpha=0.6,
                              color=cmap(gi % cmap.N))
        else:
            inset.scatter(rows[:, 0], rows[:, 1], s=4, alpha=0.6, color="grey")
        draw_ellipses(inset)
        inset.set_xlim(x0, x1)
        inset.set_ylim(y0, y1)
        inset.set_xticks([])
        inset.set_yticks([])
        ax.indicate_inset_zoom(inset, edgecolor="black")

    share_a = 100 * o.explained_shares[a]
    share_b = 100 * o.explained_shares[b]
    ax.set_xlabel(f"dim {dims[0]} ({share_a:.1f}%)")
    ax.set_ylabel(f"dim {dims[1]} ({share_b:.1f}%)")
    ax.axhline(0, color="lightgrey", lw=0.5, zorder=0)
    ax.axvline(0, color="lightgrey", lw=0.5, zorder=0)
    if title:
        ax.set_title(title)
    ax.set_aspect("equal", adjustable="datalim")
    _save(fig, path)


def _dendrogram_layout(d: Dendrogram):
    """Leaf order and node positions for a merge list."""
    n = d.n_leaves
    children = {n + i: (a, b) for i, (a, b, _) in enumerate(d.merges)}

    order: list[int] = []

    def walk(node):
        if node < n:
            order.append(node)
        else:
            left, right = children[node]
            walk(left)
            walk(right)

    walk(n + len(d.merges) - 1)
    xpos = {leaf: float(i) for i, leaf in enumerate(order)}
    ypos = {leaf: 0.0 for leaf in order}
    for i, (a, b, h) in enumerate(d.merges):
        node = n + i
        xpos[node] = 0.5 * (xpos[a] + xpos[b])
        ypos[node] = h
    return order, xpos, ypos, children


def dendrogram_svg(path, d: Dendrogram, title: str | None = None):
    """Draw a merge tree; the y-axis follows the dendrogram's height kind."""
    order, xpos, ypos, _ = _dendrogram_layout(d)
    n = d.n_leaves
    fig, ax = plt.subplots(figsize=(max(6, 0.25 * n), 5))
    for i, (a, b, h) in enumerate(d.merges):
        xa, xb = xpos[a], xpos[b]
        ax.plot([xa, xa, xb, xb], [ypos[a], h, h, ypos[b]], color="black", lw=0.9)
    ax.set_xticks([xpos[leaf] for leaf in order])
    ax.set_xticklabels([d.leaf_names[leaf] for leaf in order], rotation=90, fontsize=7)
    label = (
        "Ward merge distance"
        if d.height_kind == "ward-distance"
        else "% of total logratio variance lost"
    )
    ax.set_ylabel(label)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def coherence_svg(path, report: CoherenceReport, title: str | None = None):
    """Median dots, 2.5/97.5 percentile whiskers, and counts above threshold."""
    fig, ax = plt.subplots(figsize=(7, 5))
    xs = np.arange(len(report.results))
    for x, r in zip(xs, report.results):
        ax.plot([x, x], [r.p2_5, r.p97_5], color="steelblue", lw=1.5)
        ax.plot([x], [r.median], marker="o", color="navy")
        ax.annotate(
            str(r.count_above), (x, 1.0), xytext=(0, 6),
            textcoords="offset points", ha="center", fontsize=8,
        )
    ax.set_xticks(xs)
    ax.set_xticklabels([str(r.size) for r in report.results])
    ax.set_xlabel("subcomposition size")
    ax.set_ylabel("Procrustes correlation")
    ax.set_ylim(min(r.p2_5 for r in report.results) - 0.01, 1.02)
    if title is None:
        power = f", power {report.alpha}" if report.alpha is not None else ""
        title = f"{report.transform}{power}: counts > {report.threshold} shown above"
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    _save(fig, path)


def convergence_svg(path, curves: list[ConvergenceCurve], title: str | None = None):
    """Procrustes correlation versus Box-Cox power, read right to left."""
    fig, ax = plt.subplots(figsize=(6.5, 5))
    styles = {"zeros-replaced": ("-", "steelblue"), "zeros-kept": (":", "firebrick")}
    for curve in curves:
        ls, color = styles.get(curve.variant, ("-", "grey"))
        ax.plot(
            curve.alphas, curve.correlations, ls, color=color, marker="o",
            ms=3, label=curve.variant,
        )
    ax.set_xlabel("Box-Cox power")
    ax.set_ylabel("Procrustes correlation with LRA geometry")
    ax.invert_xaxis()
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def dilution_svg(path, curve: DilutionCurve, title: str | None = None):
    fig, ax = plt.subplots(figsize=(6.5, 5))
    ax.plot(curve.sizes, curve.correlations, "-o", ms=3, color="slategrey")
    ax.set_xscale("log")
    ax.set_xlabel("subcomposition size (most abundant parts)")
    ax.set_ylabel("multinomial correlation of top two parts")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)
