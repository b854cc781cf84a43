"""Weighted tent space norms on a discretized upper half space.

Fields live on a periodic box times a geometric scale lattice.  The
package evaluates the whole family of mixed norms built from Whitney
averages (tent, Z, change of angle, vertical limits, dyadic and median
characterizations, kernel square functions, interpolation functionals)
and ships a verification harness that checks every claimed equivalence
and embedding as a numerical ratio band.
"""

from .core import (
    INF,
    BoundaryField,
    CoverageError,
    CubeSequence,
    Domain,
    DyadicCube,
    EmptyDomainError,
    ExponentTuple,
    GeometryError,
    HalfSpaceField,
    HypothesisError,
    SubsetFamily,
    WhitneyBox,
    boundary_from_csv,
    cube_cell_slices,
    cube_cells_per_axis,
    field_from_csv,
    field_to_csv,
    holder_conjugate,
    lattice_window,
    load_hsf1,
    save_hsf1,
    whitney_tiling,
)
from .quadrature import (
    WHITNEY,
    AverageSpec,
    ball_count,
    ball_mask,
    ball_max,
    ball_mean,
    ball_sum,
    lp_norm,
    power_mean,
    whitney_average,
    whitney_average_field,
)
from .tent_norms import (
    NormResult,
    beyond_infinity_norm,
    change_of_angle_norm,
    duality_pairing,
    jn_norm,
    tent_norm,
    z_norm,
)
from .dyadic import (
    LocalMeanField,
    c_median,
    dyadic_subset_norm,
    dyadic_tent_norm,
    jn_dyadic_norm,
    local_means,
    local_square_function,
    median_field,
    owning_generation,
    sequence_norm,
)
from .kernels import (
    KernelSpec,
    check_characterization,
    convolution_inequality_check,
    convolve_at_scale,
    custom_kernel,
    extend,
    f_endpoint_norm,
    gauss_weierstrass,
    heat,
    lp_block,
    lp_block_transform,
    multiplier_values,
    peetre_maximal,
    smooth_cutoff,
    x_norm,
)
from .interpolation import (
    SplitProfile,
    e_functional_lp,
    geometric_t_grid,
    k_functional_lp,
    k_infty_lp,
    median_split_profile,
    real_interpolation_norm,
    scale_split_profile,
)
from .families import (
    band_limited_boundary,
    boundary_family,
    box_field,
    halfspace_family,
    lacunary_boundary,
    random_halfspace,
    random_subsets,
    single_mode,
    whitney_indicator,
)
from .harness import (
    HarnessConfig,
    RatioReport,
    default_config,
    hls_pair,
    make_report,
    parse_config,
    read_reports,
    reports_to_csv,
    run_suites,
    summarize,
    write_reports,
)

__version__ = "0.1.0"
