"""CSV and JSON serialization.

Input CSV layout: a header row with part names, the first column a row
identifier, and an optional column named ``group`` anywhere after it.
Decimal points only; empty cells are invalid and reported with their line
number. Numeric output uses 10 significant digits so that identical runs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .clustering import ClusterAssignment, Dendrogram
from .composition import CompositionMatrix, RawCountMatrix
from .diagnostics import CoherenceReport, ConvergenceCurve, DilutionCurve
from .errors import CodaError, CsvFormatError
from .geometry import DistanceMatrix
from .ordination import EllipseSet, Ordination
from .selection import StepTrace, ThetaTable
from .transforms import ContrastTree, LogratioMatrix
from .variance import VariationMatrix

__all__ = [
    "read_counts_csv",
    "write_table_csv",
    "write_composition_csv",
    "write_logratio_csv",
    "write_variation_csv",
    "write_distance_csv",
    "write_contributions_csv",
    "write_step_trace_csv",
    "write_step_candidates_csv",
    "write_theta_csv",
    "write_assignment_csv",
    "write_coherence_csv",
    "write_convergence_csv",
    "write_dilution_csv",
    "ordination_coordinates_csv",
    "explained_variance_json",
    "ellipses_json",
    "dendrogram_json",
    "contrast_tree_json",
    "contrast_tree_from_json",
    "save_json",
    "fmt",
]

GROUP_COLUMN = "group"


def fmt(x: float) -> str:
    """Format a number at 10 significant digits."""
    return f"{x:.10g}"


def read_counts_csv(path) -> RawCountMatrix:
    """Read a samples-by-parts CSV into a raw (unclosed) matrix.

    The first column holds row identifiers; a column named ``group``
    supplies optional row labels; every other column is a part.
    """
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(1, "empty file") from None
        if len(header) < 3:
            raise CsvFormatError(1, "need a row-id column and at least 2 parts")
        header = [h.strip() for h in header]
        group_pos = None
        part_pos = []
        for pos, name in enumerate(header[1:], start=1):
            if name == GROUP_COLUMN:
                if group_pos is not None:
                    raise CsvFormatError(1, "duplicate 'group' column")
                group_pos = pos
            else:
                part_pos.append(pos)
        if len(part_pos) < 2:
            raise CsvFormatError(1, "need at least 2 part columns")
        part_names = [header[p] for p in part_pos]

        row_ids, groups, rows = [], [], []
        for line, record in enumerate(reader, start=2):
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise CsvFormatError(
                    line, f"expected {len(header)} cells, got {len(record)}"
                )
            row_ids.append(record[0].strip())
            if group_pos is not None:
                cell = record[group_pos].strip()
                if not cell:
                    raise CsvFormatError(line, "empty cell in 'group' column")
                groups.append(cell)
            values = []
            for pos in part_pos:
                cell = record[pos].strip()
                if not cell:
                    raise CsvFormatError(
                        line, f"empty cell in column {header[pos]!r}"
                    )
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        line, f"non-numeric value {cell!r} in column {header[pos]!r}"
                    ) from None
            rows.append(values)
    if not rows:
        raise CsvFormatError(2, "no data rows")
    try:
        return RawCountMatrix(
            np.array(rows),
            part_names=part_names,
            row_ids=row_ids,
            groups=groups if group_pos is not None else None,
        )
    except CodaError as err:
        raise CodaError(f"{path.name}: {err}") from None


def write_table_csv(path, col_names, row_ids, values, index_label="id", groups=None):
    """Write a values table with row ids (and optional groups) to CSV."""
    values = np.asarray(values, dtype=float)
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        header = [index_label, *col_names]
        if groups is not None:
            header.insert(1, GROUP_COLUMN)
        writer.writerow(header)
        for i, rid in enumerate(row_ids):
            row = [rid]
            if groups is not None:
                row.append(groups[i])
            row.extend(fmt(v) for v in values[i])
            writer.writerow(row)


def write_composition_csv(path, c: CompositionMatrix):
    write_table_csv(path, c.part_names, c.row_ids, c.values, groups=c.groups)


def write_logratio_csv(path, lm: LogratioMatrix):
    write_table_csv(path, lm.column_labels, lm.row_ids, lm.values)


def write_variation_csv(path, v: VariationMatrix):
    write_table_csv(path, v.part_names, v.part_names, v.tau, index_label="part")


def write_distance_csv(path, d: DistanceMatrix):
    write_table_csv(path, d.ids, d.ids, d.values, index_label="id")


def write_contributions_csv(path, table):
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        a, b = table.dims
        writer.writerow(
            ["part", f"coord{a}", f"coord{b}", f"ctr{a}", f"ctr{b}",
             "plane_ctr", "flagged"]
        )
        for i, name in enumerate(table.names):
            writer.writerow(
                [
                    name,
                    fmt(table.coords[i, a - 1]),
                    fmt(table.coords[i, b - 1]),
                    fmt(table.contributions[i, a - 1]),
                    fmt(table.contributions[i, b - 1]),
                    fmt(table.plane_contribution[i]),
                    int(table.flagged[i]),
                ]
            )


def write_step_trace_csv(path, trace: StepTrace):
    """Step trace CSV: ratio, 1-based part indices, cumulative explained
    percent, and Procrustes correlation per step."""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["step", "ratio", "row", "col", "R2cum", "Procr"])
        start = 0
        for i, step in enumerate(trace.steps):
            if trace.direction == "backward" and i == 0:
                writer.writerow(
                    [0, "ALL", 0, 0, fmt(step.explained_pct), fmt(step.procrustes)]
                )
                start = 1
                continue
            row = step.parts[0] + 1 if step.parts else 0
            col = step.parts[1] + 1 if step.parts else 0
            writer.writerow(
                [
                    i + 1 - start,
                    step.label,
                    row,
                    col,
                    fmt(step.explained_pct),
                    fmt(step.procrustes),
                ]
            )


def write_step_candidates_csv(path, trace: StepTrace):
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["step", "rank", "ratio", "R2cum_if_chosen"])
        for i, step in enumerate(trace.steps, start=1):
            for rank, (label, r2) in enumerate(step.candidates, start=1):
                writer.writerow([i, rank, label, fmt(r2)])


def write_theta_csv(path, table: ThetaTable):
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["ratio", "row", "col", "theta"])
        for (j, k), label, theta in zip(table.pairs, table.labels, table.theta):
            writer.writerow([label, j + 1, k + 1, fmt(theta)])


def write_assignment_csv(path, a: ClusterAssignment, row_ids):
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id", "cluster"])
        for rid, label in zip(row_ids, a.labels):
            writer.writerow([rid, int(label)])


def write_coherence_csv(path, report: CoherenceReport):
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["size", "median", "p2.5", "p97.5",
             f"count_above_{report.threshold}", "resamples"]
        )
        for r in report.results:
            writer.writerow(
                [r.size, fmt(r.median), fmt(r.p2_5), fmt(r.p97_5),
                 r.count_above, r.resamples]
            )


def write_convergence_csv(path, curve: ConvergenceCurve):
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["alpha", "procrustes", "variant"])
        for a, r in zip(curve.alphas, curve.correlations):
            writer.writerow([fmt(a), fmt(r), curve.variant])


def write_dilution_csv(path, curve: DilutionCurve):
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["size", "correlation"])
        for s, r in zip(curve.sizes, curve.correlations):
            writer.writerow([int(s), fmt(r)])


def ordination_coordinates_csv(outdir, o: Ordination, prefix: str):
    """Write row/column principal and standard coordinates as CSVs."""
    outdir = Path(outdir)
    axes = [f"dim{i + 1}" for i in range(o.n_axes)]
    pairs = [
        ("rows_principal", o.row_ids, o.row_principal),
        ("rows_standard", o.row_ids, o.row_standard),
        ("columns_principal", o.col_names, o.col_principal),
        ("columns_standard", o.col_names, o.col_standard),
    ]
    paths = []
    for tag, ids, values in pairs:
        path = outdir / f"{prefix}_{tag}.csv"
        write_table_csv(path, axes, ids, values)
        paths.append(path)
    return paths


def explained_variance_json(o: Ordination) -> dict:
    return {
        "method": o.method,
        "alpha": o.alpha,
        "singular_values": [float(fmt(v)) for v in o.singular_values],
        "explained_shares": [float(fmt(v)) for v in o.explained_shares],
        "total_inertia": float(fmt((o.singular_values**2).sum())),
    }


def ellipses_json(e: EllipseSet) -> dict:
    return {
        "level": e.level,
        "replicates": e.replicates,
        "dims": list(e.dims),
        "groups": [
            {
                "group": el.group,
                "center": [float(fmt(el.center[0])), float(fmt(el.center[1]))],
                "semi_axes": [float(fmt(el.semi_axes[0])), float(fmt(el.semi_axes[1]))],
                "angle": float(fmt(el.angle)),
                "n_members": el.n_members,
            }
            for el in e.ellipses
        ],
    }


def dendrogram_json(d: Dendrogram) -> dict:
    return {
        "leaf_names": list(d.leaf_names),
        "height_kind": d.height_kind,
        "merges": [
            {"left": a, "right": b, "height": float(fmt(h))} for a, b, h in d.merges
        ],
    }


def contrast_tree_json(tree: ContrastTree, part_names) -> list:
    """A contrast tree as a JSON list of [numerator, denominator] name lists."""
    part_names = list(part_names)
    return [
        [[part_names[i] for i in num], [part_names[i] for i in den]]
        for num, den in tree.splits
    ]


def contrast_tree_from_json(data, part_names) -> ContrastTree:
    index = {str(name): i for i, name in enumerate(part_names)}
    splits = []
    for entry in data:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise CodaError("each split must be a [numerator, denominator] pair")
        try:
            num = tuple(index[str(n)] for n in entry[0])
            den = tuple(index[str(n)] for n in entry[1])
        except KeyError as err:
            raise CodaError(f"unknown part {err.args[0]!r} in contrast tree") from None
        splits.append((num, den))
    return ContrastTree(n_parts=len(part_names), splits=tuple(splits))


def save_json(path, payload: dict | list):
    with Path(path).open("w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
