"""Entropy of discrete hypersurfaces and their mean curvature flow.

Curves in the plane are closed polylines, surfaces in space are triangle
meshes.  The package computes Gaussian-weighted areas and their supremum
(the entropy), runs the flow with remeshing and singularity detection,
and analyses singularities by parabolic rescaling.
"""

from .errors import (
    DegenerateElement,
    DimensionMismatch,
    EntroflowError,
    InsufficientSamples,
    InvalidSurface,
    NonpositiveScale,
    OptimizerDiverged,
    OutOfRange,
    RemeshFailure,
    SolveFailure,
    UnsupportedIndex,
)
from .flow import (
    FlowAborted,
    FlowControls,
    FlowState,
    NearSingular,
    PinchingReport,
    Scheme,
    Termination,
    Trajectory,
    detect_singularity,
    huisken_series,
    localized_series,
    pinching_report,
    radius_series,
    run_flow,
    step,
)
from .gaussian import (
    PLANE_ENTROPY,
    CutoffSpec,
    EntropyOptions,
    EntropyResult,
    GaussianCenter,
    cylinder_product_check,
    ecker_cutoff,
    entropy,
    f_functional,
    f_gradient,
    localized_f,
    phi_kernel,
    sphere_area,
    stone_entropy,
)
from .geometry import (
    CurvatureField,
    DiscreteHypersurface,
    compute_curvature,
    hausdorff_distance,
    laplacian,
    point_to_surface_distance,
    remesh,
    transform,
    vertex_normals,
)
from .rescale import (
    Classification,
    DensityEstimate,
    RescaleSequence,
    ShrinkerReport,
    TangentFlowReport,
    classify,
    gaussian_density,
    parabolic_rescale,
    shrinker_residual,
    tangent_flow_extract,
)
from .shapes import boundary_vertices, circle, ellipse, ellipsoid, icosphere, planar_disk

__version__ = "0.1.0"
