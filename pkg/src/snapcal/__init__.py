"""Snapshot calibration for one-dimensional hyperbolic conservation laws.

Snapshots are finite-volume cell averages of exact solutions.  Features
(discontinuities and kinks) are detected in every snapshot, the time axis is
split into subsets whose snapshots can be matched to a common reference, and
each snapshot is recomputed on a piecewise-linear transformed domain so that
the calibrated snapshot matrix has fast singular value decay.
"""

from .calibration import (
    CalibrationResult,
    GapCheck,
    MatchPolicy,
    MatchResult,
    SpatialTransform,
    TimePartition,
    TransformError,
    build_transform,
    calibrate_snapshot,
    check_match,
    eval_transform,
    inverse_eval,
    select_references,
    split_and_calibrate,
    validate_transform,
)
from .detect import (
    DISCONTINUITY,
    KINK,
    DetectionMode,
    DetectorConfig,
    FeatureSet,
    Flagger,
    detect_features,
    detect_kinks,
    discontinuity_locations,
    face_jumps,
    flag_faces,
    group_faces,
    mra_flag,
)
from .exact import (
    CASES,
    CaseId,
    RiemannSolverError,
    TestCase,
    burgers_exact,
    exact_feature_trajectories,
    get_case,
    sod_exact,
    sod_star_state,
    wave_exact,
    advection_exact,
)
from .experiments import (
    ComponentRun,
    ExperimentConfig,
    ExperimentError,
    compare_modes,
    run_experiment,
    run_sweep,
)
from .grid import (
    Grid,
    Snapshot,
    SnapshotMatrix,
    build_grid,
    central_difference_derivative,
    project,
    read_matrix_csv,
    write_matrix_csv,
)
from .spectral import (
    feature_error,
    feature_error_sweep,
    pod_modes,
    projection_residual,
    singular_values,
    xi,
    xi_curve,
)

__version__ = "0.1.0"
