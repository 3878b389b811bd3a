"""Gaussian power-law (Riesz) random fields on triangulated bounded domains.

Three samplers produce consistent fields: a truncated eigen-expansion of the
P1 FEM Laplacian, a contour-integral evaluation of the same fractional
inverse using only shifted sparse solves, and a geodesic Riesz-kernel
convolution of white noise that also supports spatially varying roughness.
Diagnostics cover exact and Monte Carlo covariances, averaged periodograms
and power-law slope estimation, with closed-form 1D processes as oracles.
"""

__version__ = "0.1.0"

from .analysis import (
    CovarianceAtPoint,
    GridField,
    Periodogram2D,
    PowerLawFit,
    cosine_taper,
    fit_power_law,
    interpolate_to_grid,
    periodogram,
    periodogram_1d,
    radial_average,
    sample_covariance_at,
)
from .cim import (
    ContourQuadrature,
    build_quadrature,
    covariance_cim,
    fractional_apply,
    neumann_deflate,
    sample_cim,
)
from .errors import (
    ConvergenceError,
    MeshFormatError,
    MeshInvariantError,
    RieszError,
    SingularMatrixError,
)
from .fem import (
    DIRICHLET,
    NEUMANN,
    BoundaryCondition,
    FemSystem,
    assemble,
    assemble_interval,
    evaluate,
    laplace_eigenpairs,
    robin,
)
from .mesh import (
    EdgeGraph,
    Mesh,
    centroid,
    centroids,
    dump_mesh,
    edge_graph,
    element_area,
    element_areas,
    from_arrays,
    generate_rectangle,
    load_mesh,
    mesh_hash,
    scaled,
)
from .numerics import (
    COUNTERS,
    EigenDecomposition,
    GaussianStream,
    complete_elliptic_K,
    derive_seed,
    dft_1d,
    dft_2d,
    gamma_fn,
    generalized_eigen,
    gershgorin_upper,
    jacobi_elliptic,
    power_iteration_max,
    sparse_factor,
    sparse_solve,
    spectral_interval,
)
from .reference1d import (
    HoskingSpec,
    cholesky_sample,
    fbm_covariance,
    fbs_covariance,
    fgn_autocovariance,
    hosking_filter,
    hosking_impulse,
    hosking_sample,
)
from .riesz import (
    GeodesicTable,
    covariance_riesz,
    dijkstra_table,
    floyd_warshall,
    geodesic_table,
    kernel_matrix,
    riesz_constant,
    sample_riesz,
)
from .spectral import (
    DropZeroMode,
    PinAtOrigin,
    RieszFieldSpec,
    SamplePath,
    covariance_spectral,
    sample_spectral,
    scale_covariance_check,
    truncation_tail_estimate,
    white_noise_load,
)
