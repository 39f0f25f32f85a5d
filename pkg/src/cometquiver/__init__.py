"""Numerical toolkit for generalized hyperpolygons on comet-shaped quivers."""

__version__ = "0.1.0"

from .quiver import (  # noqa: E402
    CometQuiver,
    FlagString,
    build_comet,
    complete_comet,
    count_gt_hamiltonians,
    dim_hyperpolygon_space,
    dim_polygon_space,
    flag_dim,
    minimal_comet,
    wildify,
)
from .rep import (  # noqa: E402
    GaugeElement,
    Representation,
    apply_gauge,
    circle_action,
    quaternion_apply,
    random_representation,
    zero_representation,
)
from .moment import (  # noqa: E402
    complex_moment,
    hyperpolygon_residual,
    real_moment,
    wild_specialization_check,
)
from .solver import SolveOptions, dimension_report, solve, solve_polygon  # noqa: E402
from .geometry import higgs_data, polygon_sides  # noqa: E402
from .integrable import (  # noqa: E402
    commutation_matrix,
    evaluate_hamiltonian,
    gt_hamiltonians,
    independence_rank,
    poisson_bracket,
)
from .branes import fixed_locus_check, involution_type_report, sign_involution  # noqa: E402

__all__ = [
    "CometQuiver",
    "FlagString",
    "build_comet",
    "complete_comet",
    "minimal_comet",
    "flag_dim",
    "dim_polygon_space",
    "dim_hyperpolygon_space",
    "count_gt_hamiltonians",
    "wildify",
    "Representation",
    "GaugeElement",
    "random_representation",
    "zero_representation",
    "apply_gauge",
    "quaternion_apply",
    "circle_action",
    "real_moment",
    "complex_moment",
    "hyperpolygon_residual",
    "wild_specialization_check",
    "SolveOptions",
    "solve",
    "solve_polygon",
    "dimension_report",
    "polygon_sides",
    "higgs_data",
    "gt_hamiltonians",
    "evaluate_hamiltonian",
    "poisson_bracket",
    "commutation_matrix",
    "independence_rank",
    "sign_involution",
    "involution_type_report",
    "fixed_locus_check",
]
