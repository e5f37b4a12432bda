"""Batch command-line interface.

Every run reads one samples-by-parts CSV, applies the configured weighting
and zero-replacement policy, executes one command, and writes its artifacts
plus a JSON manifest (inputs, resolved configuration including the seed,
package versions, and timings) into the output directory. Identical
configuration and seed give byte-identical CSV/JSON result files; the
manifest records wall-clock timings and SVG output is only numerically,
not byte-wise, reproducible.

Errors exit nonzero with a single machine-parseable line on stderr of the
form ``E_<CODE>: message``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import (
    adjusted_rand,
    amalgamation_cluster,
    dendrogram_to_contrast_tree,
    kmeans,
    matched_agreement,
    ward_parts,
)
from .composition import close, replace_zeros, set_weights
from .diagnostics import alpha_sweep, coherence_sweep, dilution_curve, shrink_estimate
from .errors import CodaError, CsvFormatError
from .ordination import bootstrap_ellipses, ca, contribution_coordinates, lra, pca
from .selection import backward_alr, find_alr, permutation_fdr, stepwise_lr
from .transforms import alr, box_cox, clr, ilr, log_contrast, lr_all, plr, slr
from .variance import clr_variance_contributions, total_variance, variation_matrix
from . import io as iom
from . import plots

MANIFEST_SCHEMA = 1
OUTDIR_ENV = "CODAKIT_OUTDIR"


def _parse_list(text, cast):
    return [cast(x) for x in str(text).split(",") if x.strip() != ""]


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_input(cfg):
    raw = iom.read_counts_csv(cfg["input"])
    comp = close(raw)
    if cfg["weights"] != "uniform":
        comp = set_weights(comp, cfg["weights"])
    if cfg["zero_fraction"] is not None:
        comp = replace_zeros(comp, cfg["zero_fraction"])
    return raw, comp


def _resolve(args, file_cfg, key, default):
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in file_cfg:
        return file_cfg[key]
    return default


def _common_config(args) -> dict:
    file_cfg = {}
    if args.config:
        with open(args.config) as handle:
            file_cfg = json.load(handle)
        if not isinstance(file_cfg, dict):
            raise CodaError("config file must hold a JSON object")
    outdir = _resolve(args, file_cfg, "outdir", None)
    if outdir is None:
        outdir = os.environ.get(OUTDIR_ENV, ".")
    zero_fraction = _resolve(args, file_cfg, "zero-fraction", 2.0 / 3.0)
    if getattr(args, "no_zero_replace", False) or file_cfg.get("no-zero-replace"):
        zero_fraction = None
    cfg = {
        "input": _resolve(args, file_cfg, "input", None),
        "outdir": str(outdir),
        "seed": int(_resolve(args, file_cfg, "seed", 0)),
        "weights": _resolve(args, file_cfg, "weights", "uniform"),
        "zero_fraction": zero_fraction,
        "threads": _resolve(args, file_cfg, "threads", None),
    }
    if cfg["input"] is None:
        raise CodaError("an input CSV is required (--input)")
    return cfg, file_cfg


def _write_manifest(outdir: Path, command: str, cfg: dict, outputs, timings):
    import scipy

    manifest = {
        "schema_version": MANIFEST_SCHEMA,
        "command": command,
        "config": {k: v for k, v in cfg.items()},
        "input": {
            "path": str(Path(cfg["input"]).resolve()),
            "sha256": _sha256(Path(cfg["input"])),
        },
        "versions": {
            "codakit": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "outputs": [str(Path(p).name) for p in outputs],
        "timings_s": timings,
    }
    iom.save_json(outdir / "manifest.json", manifest)


def _transform_matrix(comp, kind, args, cfg, file_cfg):
    if kind == "lr":
        return lr_all(comp)
    if kind == "alr":
        ref = _resolve(args, file_cfg, "ref", None)
        if ref is None:
            raise CodaError("--ref is required for the ALR transform")
        return alr(comp, ref)
    if kind == "clr":
        return clr(comp)
    if kind == "ilr":
        tree_path = _resolve(args, file_cfg, "tree", None)
        if tree_path is None:
            raise CodaError("--tree (a JSON contrast tree) is required for ILR")
        with open(tree_path) as handle:
            tree = iom.contrast_tree_from_json(json.load(handle), comp.part_names)
        return ilr(comp, tree)
    if kind == "plr":
        order = _resolve(args, file_cfg, "order", None)
        order = _parse_list(order, str) if order else None
        return plr(comp, order)
    raise CodaError(f"unknown transform kind {kind!r}")


def cmd_transform(args, cfg, file_cfg, outdir):
    _, comp = _load_input(cfg)
    kind = _resolve(args, file_cfg, "kind", "clr")
    cfg["kind"] = kind
    out = outdir / "transform.csv"
    if kind == "slr":
        num = _parse_list(_resolve(args, file_cfg, "num", ""), str)
        den = _parse_list(_resolve(args, file_cfg, "den", ""), str)
        if not num or not den:
            raise CodaError("--num and --den part lists are required for SLR")
        values = slr(comp, num, den)
        label = "+".join(num) + "/" + "+".join(den)
        iom.write_table_csv(out, [label], comp.row_ids, values[:, None])
    elif kind == "boxcox":
        alpha = _resolve(args, file_cfg, "alpha", None)
        if alpha is None:
            raise CodaError("--alpha is required for the Box-Cox transform")
        cfg["alpha"] = float(alpha)
        values = box_cox(comp, float(alpha))
        iom.write_table_csv(out, comp.part_names, comp.row_ids, values)
    elif kind == "logcontrast":
        coeffs = _parse_list(_resolve(args, file_cfg, "coeffs", ""), float)
        values = log_contrast(comp, coeffs)
        iom.write_table_csv(out, ["logcontrast"], comp.row_ids, values[:, None])
    else:
        lm = _transform_matrix(comp, kind, args, cfg, file_cfg)
        iom.write_logratio_csv(out, lm)
    return [out]


def cmd_variance(args, cfg, file_cfg, outdir):
    _, comp = _load_input(cfg)
    outputs = []
    tv = total_variance(comp)
    iom.save_json(outdir / "variance.json", {
        "total_variance": float(iom.fmt(tv)),
        "weighting": cfg["weights"],
    })
    outputs.append(outdir / "variance.json")
    shares = clr_variance_contributions(comp)
    order = np.argsort(-shares, kind="stable")
    with (outdir / "contributions.csv").open("w") as handle:
        handle.write("part,share\n")
        for j in order:
            handle.write(f"{comp.part_names[j]},{iom.fmt(shares[j])}\n")
    outputs.append(outdir / "contributions.csv")
    iom.write_variation_csv(outdir / "variation.csv", variation_matrix(comp))
    outputs.append(outdir / "variation.csv")
    return outputs


def cmd_ordinate(args, cfg, file_cfg, outdir):
    raw, comp = _load_input(cfg)
    method = _resolve(args, file_cfg, "method", "lra")
    cfg["method"] = method
    dims = tuple(_parse_list(_resolve(args, file_cfg, "dims", "1,2"), int))
    if method == "lra":
        solution = lra(comp)
    elif method == "pca":
        kind = _resolve(args, file_cfg, "kind", "alr")
        cfg["kind"] = kind
        lm = _transform_matrix(comp, kind, args, cfg, file_cfg)
        solution = pca(lm)
    elif method == "ca":
        alpha = _resolve(args, file_cfg, "alpha", None)
        cfg["alpha"] = None if alpha is None else float(alpha)
        keep_zeros = bool(_resolve(args, file_cfg, "keep-zeros", False))
        source = close(raw) if keep_zeros else comp
        solution = ca(
            source.values,
            alpha=cfg["alpha"],
            row_ids=source.row_ids,
            col_names=source.part_names,
        )
    else:
        raise CodaError(f"unknown ordination method {method!r}")

    outputs = iom.ordination_coordinates_csv(outdir, solution, method)
    iom.save_json(outdir / "explained.json", iom.explained_variance_json(solution))
    outputs.append(outdir / "explained.json")
    table = contribution_coordinates(solution, dims)
    iom.write_contributions_csv(outdir / "contributions.csv", table)
    outputs.append(outdir / "contributions.csv")

    ellipses = None
    if bool(_resolve(args, file_cfg, "ellipses", False)):
        groups = comp.groups
        replicates = int(_resolve(args, file_cfg, "replicates", 1000))
        level = float(_resolve(args, file_cfg, "level", 0.99))
        ellipses = bootstrap_ellipses(
            solution, groups, replicates=replicates, level=level,
            seed=cfg["seed"], dims=dims,
        )
        iom.save_json(outdir / "ellipses.json", iom.ellipses_json(ellipses))
        outputs.append(outdir / "ellipses.json")

    zoom = _resolve(args, file_cfg, "zoom", None)
    if zoom is not None:
        zoom = tuple(_parse_list(zoom, float))
        if len(zoom) != 4:
            raise CodaError("--zoom needs four numbers: x0,x1,y0,y1")
    plots.biplot_svg(
        outdir / "biplot.svg", solution, dims=dims, groups=comp.groups,
        ellipses=ellipses, title=method.upper(), zoom=zoom,
    )
    outputs.append(outdir / "biplot.svg")
    return outputs


def cmd_findalr(args, cfg, file_cfg, outdir):
    _, comp = _load_input(cfg)
    ranking = find_alr(comp)
    out = outdir / "findalr.csv"
    with out.open("w") as handle:
        handle.write("rank,ref,procrustes,log_ref_variance\n")
        for rank, cand in enumerate(ranking, start=1):
            handle.write(
                f"{rank},{cand.ref_name},{iom.fmt(cand.procrustes)},"
                f"{iom.fmt(cand.log_ref_variance)}\n"
            )
    return [out]


def cmd_step(args, cfg, file_cfg, outdir):
    _, comp = _load_input(cfg)
    cfg.update({
        "min_explained": _resolve(args, file_cfg, "min-explained", None),
        "min_procrustes": _resolve(args, file_cfg, "min-procrustes", None),
        "max_steps": _resolve(args, file_cfg, "max-steps", None),
        "top": int(_resolve(args, file_cfg, "top", 20)),
    })
    trace = stepwise_lr(
        comp,
        min_explained=cfg["min_explained"],
        min_procrustes=cfg["min_procrustes"],
        max_steps=cfg["max_steps"],
        top=cfg["top"],
    )
    iom.write_step_trace_csv(outdir / "step_trace.csv", trace)
    iom.write_step_candidates_csv(outdir / "step_candidates.csv", trace)
    if trace.warning:
        print(f"warning: {trace.warning}", file=sys.stderr)
    return [outdir / "step_trace.csv", outdir / "step_candidates.csv"]


def cmd_backstep(args, cfg, file_cfg, outdir):
    _, comp = _load_input(cfg)
    ref = _resolve(args, file_cfg, "ref", None)
    if ref is None:
        raise CodaError("--ref is required for backward ALR elimination")
    cfg.update({
        "ref": ref,
        "min_explained": _resolve(args, file_cfg, "min-explained", None),
        "min_procrustes": _resolve(args, file_cfg, "min-procrustes", None),
    })
    trace = backward_alr(
        comp,
        ref,
        min_explained=cfg["min_explained"],
        min_procrustes=cfg["min_procrustes"],
    )
    iom.write_step_trace_csv(outdir / "backstep_trace.csv", trace)
    return [outdir / "backstep_trace.csv"]


def cmd_theta(args, cfg, file_cfg, outdir):
    _, comp = _load_input(cfg)
    cutoff = float(_resolve(args, file_cfg, "cutoff", 0.1))
    permutations = int(_resolve(args, file_cfg, "permutations", 99))
    cfg.update({"cutoff": cutoff, "permutations": permutations})
    table = permutation_fdr(
        comp, cutoff=cutoff, permutations=permutations, seed=cfg["seed"]
    )
    iom.write_theta_csv(outdir / "theta.csv", table)
    iom.save_json(outdir / "theta_fdr.json", {
        "cutoff": cutoff,
        "fdr": float(iom.fmt(table.fdr_estimates[cutoff])),
        "n_selected_logratios": int((table.theta <= cutoff).sum()),
        "selected_parts": list(table.selected_parts),
        "permutations": permutations,
        "seed": cfg["seed"],
    })
    return [outdir / "theta.csv", outdir / "theta_fdr.json"]


def _cluster_features(name, raw, comp, args, cfg, file_cfg):
    if name == "clr":
        return clr(comp).values
    if name == "alr":
        ref = _resolve(args, file_cfg, "ref", None)
        if ref is None:
            raise CodaError("--ref is required for ALR features")
        return alr(comp, ref).values
    if name == "ca":
        alpha = float(_resolve(args, file_cfg, "ca-alpha", 0.5))
        source = close(raw)
        return ca(source.values, alpha=alpha).row_principal
    raise CodaError(f"unknown feature space {name!r}")


def cmd_cluster(args, cfg, file_cfg, outdir):
    raw, comp = _load_input(cfg)
    method = _resolve(args, file_cfg, "method", "ward")
    cfg["method"] = method
    outputs = []
    if method in ("ward", "amalg"):
        dend = ward_parts(comp) if method == "ward" else amalgamation_cluster(comp)
        iom.save_json(outdir / "dendrogram.json", iom.dendrogram_json(dend))
        plots.dendrogram_svg(outdir / "dendrogram.svg", dend, title=method)
        outputs += [outdir / "dendrogram.json", outdir / "dendrogram.svg"]
        if method == "ward":
            # the tree read as a sequential binary partition, ready for
            # `transform --kind ilr --tree ...`
            tree = dendrogram_to_contrast_tree(dend)
            iom.save_json(
                outdir / "contrast_tree.json",
                iom.contrast_tree_json(tree, comp.part_names),
            )
            outputs.append(outdir / "contrast_tree.json")
        return outputs
    if method != "kmeans":
        raise CodaError(f"unknown clustering method {method!r}")

    k = int(_resolve(args, file_cfg, "k", 3))
    restarts = int(_resolve(args, file_cfg, "restarts", 10))
    feat_name = _resolve(args, file_cfg, "features", "clr")
    cfg.update({"k": k, "restarts": restarts, "features": feat_name})
    features = _cluster_features(feat_name, raw, comp, args, cfg, file_cfg)
    assignment = kmeans(features, k, seed=cfg["seed"], restarts=restarts)
    iom.write_assignment_csv(outdir / "clusters.csv", assignment, comp.row_ids)
    summary = {
        "k": k,
        "inertia": float(iom.fmt(assignment.inertia)),
        "features": feat_name,
        "seed": cfg["seed"],
        "restarts": restarts,
    }
    compare_with = _resolve(args, file_cfg, "compare-with", None)
    if compare_with is not None:
        other_features = _cluster_features(
            compare_with, raw, comp, args, cfg, file_cfg
        )
        other = kmeans(other_features, k, seed=cfg["seed"], restarts=restarts)
        iom.write_assignment_csv(
            outdir / f"clusters_{compare_with}.csv", other, comp.row_ids
        )
        outputs.append(outdir / f"clusters_{compare_with}.csv")
        summary["comparison"] = {
            "features": compare_with,
            "agreement": float(iom.fmt(matched_agreement(assignment, other))),
            "adjusted_rand": float(iom.fmt(adjusted_rand(assignment, other))),
        }
    iom.save_json(outdir / "kmeans.json", summary)
    outputs = [outdir / "clusters.csv", outdir / "kmeans.json"] + outputs
    return outputs


def cmd_diagnose(args, cfg, file_cfg, outdir):
    raw, comp = _load_input(cfg)
    mode = args.mode
    cfg["mode"] = mode
    if mode == "coherence":
        transform = _resolve(args, file_cfg, "transform", "chi-square")
        alpha = _resolve(args, file_cfg, "alpha", None)
        sizes = _parse_list(_resolve(args, file_cfg, "sizes", "4,8,16"), int)
        reps = int(_resolve(args, file_cfg, "reps", 100))
        keep_zeros = bool(_resolve(args, file_cfg, "keep-zeros", False))
        cfg.update({"transform": transform, "alpha": alpha, "sizes": sizes,
                    "reps": reps, "keep_zeros": keep_zeros})
        data = close(raw) if keep_zeros else comp
        report = coherence_sweep(
            data, transform=transform, sizes=sizes, reps=reps,
            seed=cfg["seed"], alpha=None if alpha is None else float(alpha),
        )
        iom.write_coherence_csv(outdir / "coherence.csv", report)
        plots.coherence_svg(outdir / "coherence.svg", report)
        return [outdir / "coherence.csv", outdir / "coherence.svg"]
    if mode == "alphasweep":
        alphas = _parse_list(
            _resolve(args, file_cfg, "alphas", "1,0.5,0.1,0.01,0.001"), float
        )
        keep_zeros = bool(_resolve(args, file_cfg, "keep-zeros", False))
        fraction = cfg["zero_fraction"] if cfg["zero_fraction"] is not None else 2 / 3
        cfg.update({"alphas": alphas, "keep_zeros": keep_zeros})
        curve = alpha_sweep(
            close(raw), alphas=alphas, replace_data_zeros=not keep_zeros,
            fraction=fraction,
        )
        iom.write_convergence_csv(outdir / "alphasweep.csv", curve)
        plots.convergence_svg(outdir / "alphasweep.svg", [curve])
        return [outdir / "alphasweep.csv", outdir / "alphasweep.svg"]
    if mode == "dilution":
        sizes = _parse_list(_resolve(args, file_cfg, "sizes", ""), int)
        row = _resolve(args, file_cfg, "row", None)
        if row is not None:
            counts = raw.values[list(raw.row_ids).index(str(row))]
        else:
            counts = raw.values.sum(axis=0)
        if not sizes:
            positive = int((counts > 0).sum())
            sizes = sorted({2, 4, 8, 16, positive} & set(range(2, positive + 1)))
        curve = dilution_curve(counts, sizes)
        iom.write_dilution_csv(outdir / "dilution.csv", curve)
        plots.dilution_svg(outdir / "dilution.svg", curve)
        return [outdir / "dilution.csv", outdir / "dilution.svg"]
    raise CodaError(f"unknown diagnostic mode {mode!r}")


def cmd_shrink(args, cfg, file_cfg, outdir):
    raw, _ = _load_input(cfg)
    shrunk = np.empty_like(raw.values)
    lambdas = np.empty(raw.n_rows)
    for i in range(raw.n_rows):
        result = shrink_estimate(raw.values[i])
        shrunk[i] = result.proportions
        lambdas[i] = result.intensity
    iom.write_table_csv(outdir / "shrunk.csv", raw.part_names, raw.row_ids, shrunk)
    iom.write_table_csv(outdir / "lambdas.csv", ["lambda"], raw.row_ids,
                        lambdas[:, None])
    return [outdir / "shrunk.csv", outdir / "lambdas.csv"]


COMMANDS = {
    "transform": cmd_transform,
    "variance": cmd_variance,
    "ordinate": cmd_ordinate,
    "findalr": cmd_findalr,
    "step": cmd_step,
    "backstep": cmd_backstep,
    "theta": cmd_theta,
    "cluster": cmd_cluster,
    "diagnose": cmd_diagnose,
    "shrink": cmd_shrink,
}


def _add_common(parser):
    parser.add_argument("--input", help="samples-by-parts CSV")
    parser.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV} or .)")
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument(
        "--weights", choices=["uniform", "column-means"], help="part weighting scheme"
    )
    parser.add_argument(
        "--zero-fraction", type=float, dest="zero_fraction",
        help="zero replacement: fraction of the column minimum (default 2/3)",
    )
    parser.add_argument(
        "--no-zero-replace", action="store_true",
        help="keep data zeros (logratio operations will then reject zeros)",
    )
    parser.add_argument("--threads", type=int, help="cap worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codakit",
        description="Compositional data analysis toolkit (batch CLI)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="write a logratio or power transform as CSV")
    p.add_argument("--kind", choices=[
        "lr", "alr", "clr", "ilr", "plr", "slr", "boxcox", "logcontrast"
    ])
    p.add_argument("--ref", help="reference part for ALR")
    p.add_argument("--tree", help="JSON contrast tree for ILR")
    p.add_argument("--order", help="comma-separated part order for PLR")
    p.add_argument("--num", help="comma-separated numerator parts for SLR")
    p.add_argument("--den", help="comma-separated denominator parts for SLR")
    p.add_argument("--alpha", type=float, help="Box-Cox power")
    p.add_argument("--coeffs", help="comma-separated log-contrast coefficients")

    sub.add_parser("variance", help="total variance, contributions, variation matrix")

    p = sub.add_parser("ordinate", help="LRA, PCA of a transform, or CA")
    p.add_argument("--method", choices=["lra", "pca", "ca"])
    p.add_argument("--kind", choices=["lr", "alr", "clr", "ilr", "plr"],
                   help="transform feeding PCA")
    p.add_argument("--ref")
    p.add_argument("--tree")
    p.add_argument("--order")
    p.add_argument("--alpha", type=float, help="Box-Cox power for CA")
    p.add_argument("--keep-zeros", action="store_true", dest="keep_zeros",
                   default=None, help="run CA on the data with zeros kept")
    p.add_argument("--dims", help="two 1-based axes for the biplot (default 1,2)")
    p.add_argument("--ellipses", action="store_true", default=None,
                   help="bootstrap group confidence ellipses")
    p.add_argument("--replicates", type=int, help="bootstrap replicates (default 1000)")
    p.add_argument("--level", type=float, help="ellipse confidence level (default 0.99)")
    p.add_argument("--zoom", help="x0,x1,y0,y1 window enlarged in an inset")

    sub.add_parser("findalr", help="rank candidate ALR reference parts")

    p = sub.add_parser("step", help="forward stepwise logratio selection")
    p.add_argument("--min-explained", type=float, dest="min_explained")
    p.add_argument("--min-procrustes", type=float, dest="min_procrustes")
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--top", type=int, help="candidates listed per step (default 20)")

    p = sub.add_parser("backstep", help="backward ALR elimination")
    p.add_argument("--ref", help="ALR reference part")
    p.add_argument("--min-explained", type=float, dest="min_explained")
    p.add_argument("--min-procrustes", type=float, dest="min_procrustes")

    p = sub.add_parser("theta", help="theta ANOVA with permutation FDR")
    p.add_argument("--cutoff", type=float, help="theta cutoff (default 0.1)")
    p.add_argument("--permutations", type=int, help="label permutations (default 99)")

    p = sub.add_parser("cluster", help="ward / amalg part trees or k-means rows")
    p.add_argument("--method", choices=["ward", "amalg", "kmeans"])
    p.add_argument("--k", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--features", choices=["clr", "alr", "ca"])
    p.add_argument("--compare-with", choices=["clr", "alr", "ca"], dest="compare_with")
    p.add_argument("--ref", help="reference part for ALR features")
    p.add_argument("--ca-alpha", type=float, dest="ca_alpha",
                   help="Box-Cox power for CA features (default 0.5)")

    p = sub.add_parser("diagnose", help="coherence, alpha sweep, or dilution curves")
    dsub = p.add_subparsers(dest="mode", required=True)
    d = dsub.add_parser("coherence")
    d.add_argument("--transform", choices=["chi-square", "logratio"])
    d.add_argument("--alpha", type=float, help="power applied before chi-square")
    d.add_argument("--sizes", help="comma-separated subcomposition sizes")
    d.add_argument("--reps", type=int)
    d.add_argument("--keep-zeros", action="store_true", dest="keep_zeros",
                   default=None)
    d = dsub.add_parser("alphasweep")
    d.add_argument("--alphas", help="comma-separated powers (default 1,...,0.001)")
    d.add_argument("--keep-zeros", action="store_true", dest="keep_zeros",
                   default=None)
    d = dsub.add_parser("dilution")
    d.add_argument("--sizes", help="comma-separated subcomposition sizes")
    d.add_argument("--row", help="row id with the counts (default: column sums)")

    sub.add_parser("shrink", help="shrink each row of counts to the uniform target")

    for name, sp in sub.choices.items():
        _add_common(sp)
        if name == "diagnose":
            for dsp in sp._subparsers._group_actions[0].choices.values():
                _add_common(dsp)
    return parser


ERROR_CODES = (
    (CsvFormatError, "E_CSV"),
    (CodaError, "E_INPUT"),
    (FileNotFoundError, "E_IO"),
    (PermissionError, "E_IO"),
    (json.JSONDecodeError, "E_CONFIG"),
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        cfg, file_cfg = _common_config(args)
        outdir = Path(cfg["outdir"])
        outdir.mkdir(parents=True, exist_ok=True)
        command = args.command
        if command == "diagnose":
            cfg["mode"] = args.mode
        outputs = COMMANDS[command](args, cfg, file_cfg, outdir)
        timings = {"total": round(time.perf_counter() - started, 6)}
        _write_manifest(outdir, command, cfg, outputs, timings)
    except Exception as err:  # noqa: BLE001 - single reporting point
        for klass, code in ERROR_CODES:
            if isinstance(err, klass):
                print(f"{code}: {err}", file=sys.stderr)
                return 1
        print(f"E_INTERNAL: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
