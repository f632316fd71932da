"""mkpot: exact and numerical tooling for mirror potentials on the flat
six-dimensional symplectic model.

Layers: exterior algebra with exact coefficients and the symplectic star
(forms, scalars, blades), differential operators (calculus), the grid engine
(gridforms), stable-form analysis and positivity cones (stable, cones), the
potential map and classifiers (potential), equation residuals and the local
crosscheck (residuals), the sigma2 Newton solver (semiflat), convex
conjugation (legendre), the deformation-family fitter (continuity), file
formats (io) and the verification battery (verify).
"""

from .blades import all_blades, indices_from_mask, mask_from_indices
from .calculus import (
    d,
    d_c,
    d_lambda_oracle,
    d_s,
    dd_c,
    dd_s,
    dd_s_complex,
    dd_s_potential,
    oracle_signs,
)
from .cones import (
    ConeSampleConfig,
    ConeSamplingError,
    compare_cone_models,
    positivity_mod,
    positivity_report,
)
from .continuity import ContinuityTarget, continuity_fit, manufactured_target
from .forms import (
    ComplexForm,
    DegreeError,
    Form,
    Multivector,
    SymplecticStructure,
    evaluate_on_vectors,
    interior_product,
    poisson_pairing,
    standard_structures,
    standard_symplectic,
    symplectic_star,
    transform_constant_form,
    wedge,
    wedge_complex,
)
from .gridforms import GridForm, grid_d, grid_d_s, grid_wedge, sample_form, sample_scalar, torus_integral
from .legendre import (
    ConjugateFunction,
    ConvexityError,
    LegendreResult,
    QuadraticPotential,
    QuadPlusTrig,
    SampledConvex,
    legendre_experiment,
    legendre_transform,
)
from .potential import (
    MkpResult,
    PshVerdict,
    classify_psh,
    classify_sl_psh,
    flat_example_check,
    global_mkp_deform,
    mkp_forms,
    squared_norm_potential,
    torus_periods,
)
from .residuals import (
    CrosscheckReport,
    HessianField,
    eq9_normalization_residual,
    eq9_residual,
    eq11_density,
    eq13_crosscheck,
    eq13_lhs,
    eq14_lhs,
)
from .scalars import PolyScalar, TrigScalar
from .semiflat import (
    AdmissibilityError,
    SemiflatPotential,
    SemiflatProblem,
    SolverReport,
    convergence_study,
    manufactured_problem,
    semiflat_newton,
    semiflat_residual,
)
from .stable import StableAnalysis, analyze_stable, hitchin_lambda, k_endomorphism

__version__ = "0.1.0"
