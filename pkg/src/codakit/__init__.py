"""Compositional data analysis toolkit.

Logratio transformations, variance decomposition, distance geometries,
ordinations, variable selection, clustering of parts and samples, and
quasi-coherence diagnostics, with a batch CLI (``codakit``).
"""

from .composition import (
    CompositionMatrix,
    Partition,
    RawCountMatrix,
    amalgamate,
    close,
    replace_zeros,
    set_weights,
    subcomposition,
)
from .transforms import (
    ContrastTree,
    LogratioMatrix,
    alr,
    box_cox,
    clr,
    ilr,
    log_contrast,
    lr_all,
    plr,
    slr,
    slr_set,
)
from .variance import (
    VariationMatrix,
    clr_variance_contributions,
    lr_covariance,
    proportionality,
    total_variance,
    variation_matrix,
)
from .geometry import (
    DistanceMatrix,
    chi_square_distances,
    hellinger_distances,
    logratio_distances,
    pair_distances,
    principal_coordinates,
    procrustes_correlation,
    sample_index_pairs,
    stress,
)
from .ordination import (
    Ordination,
    bootstrap_ellipses,
    ca,
    contribution_coordinates,
    lra,
    pca,
    supplementary_rows,
)
from .selection import (
    StepTrace,
    ThetaTable,
    backward_alr,
    explained_logratio_variance,
    find_alr,
    permutation_fdr,
    stepwise_lr,
    theta_anova,
)
from .clustering import (
    ClusterAssignment,
    Dendrogram,
    adjusted_rand,
    amalgamation_cluster,
    dendrogram_slr_pairs,
    dendrogram_to_contrast_tree,
    kmeans,
    matched_agreement,
    ward_parts,
)
from .diagnostics import (
    CoherenceReport,
    ConvergenceCurve,
    alpha_sweep,
    coherence_sweep,
    dilution_curve,
    multinomial_correlation,
    shrink_estimate,
)
from .errors import CodaError, CsvFormatError

__version__ = "0.1.0"
