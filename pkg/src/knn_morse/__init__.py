"""Critical points of the k-nearest-neighbor distance function.

The k-NN distance of a finite point set ``P`` sends ``x`` to the k-th
smallest distance from ``x`` to ``P``; its sublevel sets are the regions
covered by at least ``k`` balls. This package enumerates its critical
points with their indices and homology budgets, checks the predicted
homology changes against independent oracles, and counts critical points of
Poisson samples.
"""

__version__ = "0.1.0"

from .critical import (
    CandidateSubset,
    CriticalPoint,
    MorseValidation,
    clarke_check,
    classify,
    delta,
    enumerate_critical_points,
    euler_sum,
    validate_morse,
)
from .cubical import (
    FiltrationRecord,
    GridField,
    betti_sublevel,
    homology_change_report,
    sample_grid,
)
from .errors import (
    AffinelyDependent,
    DegenerateArrangement,
    GeneralPositionViolation,
    KnnMorseError,
    KTooLarge,
    NotMorseWarning,
    OutOfAffineHull,
    ResolutionTooLow,
    TooIntense,
    TooLarge,
    TooManySubsets,
    UnstableGrid,
)
from .geometry import (
    Circumsphere,
    GeneralPositionReport,
    PointCloud,
    Tolerances,
    barycentric_coords,
    check_general_position,
    circumsphere,
    in_open_simplex,
)
from .knn import KnnQueryResult, in_kfold_cover, knn_distance, knn_distances, minmax_eval, order_k_cell_contains
from .planar import kfold_betti_exact
from .poisson import (
    IndexCounts,
    PoissonEstimate,
    PoissonRunConfig,
    count_by_index,
    run_trials,
    sample_poisson,
)
from .simplicial import (
    AuxiliaryComplex,
    BettiVector,
    SimplicialComplex,
    auxiliary_complex_from_data,
    betti_gf2,
    skeleton_complex,
)
