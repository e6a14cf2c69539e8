"""skelpa: exact combinatorics of dual complexes, valuations and envelopes."""

from .classes import (
    ClosedForm,
    Curve,
    IntersectionData,
    is_nef,
    lipschitz_bound,
    vertex_lower_bound,
    zariski_kernel_check,
)
from .complexes import (
    Cell,
    DualComplex,
    RetractionMap,
    SkeletonPoint,
    Subdivision,
    SupportFunction,
    barycentric_refine,
    edge_refinement,
    is_strictly_convex_support,
    retract,
    star_subdivision,
    trivial_subdivision,
    validate_complex,
)
from .envelopes import (
    EnvelopeProblem,
    EnvelopeResult,
    PshConstraintSystem,
    SkeletalPA,
    envelope,
    envelope_axioms,
    max_combine,
    psh_check,
    regularization_trace,
    usc_sup_family,
)
from .geometry import (
    PAFunction,
    SimplexRegion,
    boundary_projection,
    directional_derivative,
    eval_affine,
    is_convex_on_faces,
    lipschitz_sandwich,
)
from .oracle import (
    MetricGraphModel,
    compare,
    generate_intersection_data,
    oracle_envelope,
)
from .valuations import (
    GradedSequence,
    VerticalIdeal,
    VPolynomial,
    graded_limit,
    ideal_from_support_function,
    log_abs_ideal,
    monomial_valuation,
)

__version__ = "0.1.0"
