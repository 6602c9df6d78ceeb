"""Exact toolkit for generalized Engel structures: flags, Pfaffian criteria, prolongations and Moser flows."""
from .config import SETTINGS, configure, load_settings
from .constructions import (
    cartan_prolongation, counterexample_fixtures, engel_local_forms, engel_quadratic_family,
    engel_translation_family, fixture, normal_form, sliding_engel_family, standard_engel, tilted_contact_family,
)
from .distributions import (
    Distribution, GrowthVector, PfaffianSystem, annihilator, cauchy_by_brackets, cauchy_characteristic,
    classify_corank_one, derived_flag, flag_generators, flag_ranks, is_involutive, pointwise_rank,
    sample_points, subspace_compare, symbolic_annihilator,
)
from .engel import (
    FlagReport, PfaffianReport, check_generalized_engel, check_pfaffian_criteria,
    distribution_to_forms, forms_to_distribution,
)
from .errors import EngelFlagError
from .expr import parse_expression, print_expression
from .exterior import (
    Chart, ExtForm, PolyScalar, RationalPoint, VectorField, evaluate, exterior_derivative,
    interior_product, lie_bracket, wedge,
)
from .moser import (
    FlowVerification, MoserSolveResult, OneParamFamily, even_contact_moser_field_at,
    integrate_even_contact_flow, integrate_moser_flow, kernel_distributions, moser_field_at,
    verify_stability_pipeline,
)
