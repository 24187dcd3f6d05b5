"""Finite-sample tools for metric discs: glued cylinders, intrinsic discs,
area functionals and Gromov-Hausdorff distances."""

__version__ = "0.1.0"

from .disc_mesh import (  # noqa: E402
    SampledLoop,
    TriDiscMesh,
    boundary_loop,
    chord_arc_constant,
    enumerate_jordan_domains,
    isoperimetric_lower_bound,
    mesh_area,
    vertex_metric,
)
from .gh_distance import (  # noqa: E402
    Correspondence,
    distortion,
    gh_exact_small,
    gh_lower_bounds,
    gh_upper_from_net,
    min_epsilon_net,
)
from .intrinsic_disc import (  # noqa: E402
    PLMap,
    diameter_semimetric,
    factorization_check,
    has_no_bubbles,
    is_monotone,
    pullback_length_metric,
    verify_intrinsic_isometry,
)
from .jacobian_area import (  # noqa: E402
    SeminormRep,
    busemann_jacobian,
    multiplicity_area,
    pl_area,
    pl_energy,
    triangle_differential,
)
from .mapping_cylinder import build_cylinder, cylinder_mesh, transfer_constants, verify_cylinder  # noqa: E402
from .metric_core import (  # noqa: E402
    FiniteMetricSpace,
    SemimetricSample,
    WeightedGraph,
    path_metric,
    quotient_semimetric,
    validate_metric,
)
