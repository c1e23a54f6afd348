"""jetcalc: exact symbolic calculus on jet spaces.

Layers, bottom up: multi-index combinatorics, the differential-function
algebra (exact polynomials, optional transcendental extension), total
derivatives and the horizontal filtration, vertical fields with their
graded decomposition, the bigraded form calculus with the variational
column, and a generic exact spectral-sequence engine for finite filtered
complexes.  The `jetcalc` console script fronts all of it.
"""

from .errors import (
    DegreeError,
    DimensionError,
    DomainError,
    EvaluationError,
    InputValidationError,
    InvariantViolation,
    JetCalcError,
    ParseError,
    WindowError,
)
from .multiindex import MultiIndex, enumerate_upto
from .expr import Context, DiffExpr, apply_fn
from .jetalg import (
    Section,
    chain_rule_check,
    horizontal_degree,
    is_D_constant,
    jet_substitute,
    total_derivative,
    total_derivative_multi,
)
from .evofield import (
    GradedField,
    VerticalField,
    commutator,
    decompose,
    epsilon_component,
    epsilon_field,
    lie_baecklund_degree,
    nabla,
    nabla_multi,
    prolong,
)
from .forms import (
    BiForm,
    MixedField,
    cartan_degree,
    d,
    d_H,
    d_V,
    evolutionary_mixed_field,
    interior,
    lie,
    wedge,
)
from .varcalc import (
    CurrentJ,
    Lagrangian,
    SourceForm,
    check_conservation_law,
    conservation_residual,
    divergence,
    euler,
    euler_closed_form,
    integrate_by_parts,
    is_total_divergence,
    noether_symmetry_check,
)
from .specseq import (
    Bicomplex,
    FilteredComplex,
    Page,
    b_space,
    d_r_map,
    e_infinity,
    e_page,
    from_bicomplex,
    stabilization_radius,
    total_cohomology_dim,
    z_space,
)

__version__ = "0.1.0"

__all__ = [
    "BiForm",
    "Bicomplex",
    "Context",
    "CurrentJ",
    "DegreeError",
    "DiffExpr",
    "DimensionError",
    "DomainError",
    "EvaluationError",
    "FilteredComplex",
    "GradedField",
    "InputValidationError",
    "InvariantViolation",
    "JetCalcError",
    "Lagrangian",
    "MixedField",
    "MultiIndex",
    "Page",
    "ParseError",
    "Section",
    "SourceForm",
    "VerticalField",
    "WindowError",
    "apply_fn",
    "b_space",
    "cartan_degree",
    "chain_rule_check",
    "check_conservation_law",
    "commutator",
    "conservation_residual",
    "d",
    "d_H",
    "d_V",
    "d_r_map",
    "decompose",
    "divergence",
    "e_infinity",
    "e_page",
    "enumerate_upto",
    "epsilon_component",
    "epsilon_field",
    "euler",
    "euler_closed_form",
    "evolutionary_mixed_field",
    "from_bicomplex",
    "horizontal_degree",
    "integrate_by_parts",
    "interior",
    "is_D_constant",
    "is_total_divergence",
    "jet_substitute",
    "lie",
    "lie_baecklund_degree",
    "nabla",
    "nabla_multi",
    "noether_symmetry_check",
    "prolong",
    "stabilization_radius",
    "total_cohomology_dim",
    "total_derivative",
    "total_derivative_multi",
    "wedge",
    "z_space",
]
