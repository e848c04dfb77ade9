"""Zero cycles of sparse Laurent polynomial systems on the algebraic torus,
their angle/radius discrepancy statistics, and the explicit
equidistribution bounds, with desk-scale verification experiments."""

__version__ = "0.1.0"

from .laurent import (
    LaurentPolynomial,
    SystemSpec,
    evaluate,
    face_polynomial,
    format_polynomial,
    height,
    multiply,
    parse_polynomial,
    sup_norm,
)
from .lattice import (
    LatticePolytope,
    convex_hull,
    face,
    facet_normals,
    minkowski_sum,
    mixed_volume,
    support_function,
    volume,
)
from .solver import ZeroCycle, direct_image, univariate_roots, zero_cycle
from .cycles import (
    angle_discrepancy,
    axis_radius_discrepancy,
    exponential_sum,
    positive_degree,
    pushforward_discrepancy_sup,
    radius_discrepancy,
)
from .resultants import (
    DegenerateSystemError,
    DirectionalResultant,
    directional_resultant,
    elimination_polynomial,
    poisson_check,
    sylvester_resultant,
)
from .et_bounds import (
    ET_CONSTANT,
    catalan_constant,
    et_size,
    multivariate_discrepancy_bounds,
    tomography_bound,
    univariate_et_size,
)
