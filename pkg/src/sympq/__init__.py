"""Computable model of the de Rham complex of a singular symplectic quotient.

For a linear Hamiltonian action on ``C^n`` with zero fibre ``Z`` and quotient
``X = Z/G`` the package computes, exactly over the rationals, the complex
``Ω(X) = Ω_Φ(M) / I_Φ(M)`` of Φ-basic forms modulo forms vanishing on the
principal stratum, together with homotopy operators, integration over the
principal stratum, and the bundle constructions used for induced spaces.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .actions import (
    ActionError,
    LinearAction,
    all_builtins,
    builtin,
    cyclic_action,
    finite_action,
    induced_vector_field,
    is_invariant,
    moment_map,
    torus_action,
    verify_moment_condition,
)
from .dsl import ParseError, format_form, parse_form
from .forms import (
    DifferentialForm,
    PolyMap,
    PolyVectorField,
    exterior_derivative,
    interior_product,
    lie_derivative,
    pullback,
    symplectic_form,
    wedge,
)
from .homotopy import (
    Homotopy,
    check_allowable_homotopy,
    check_allowable_map,
    chain_homotopy_check,
    constant_homotopy,
    kappa,
    poincare_verify,
    radial_contraction,
    shrinking_homotopy,
)
from .induction import (
    BundleSpec,
    appendix_report,
    circle_bundle,
    cyclic_bundle,
    extension,
    induced_space,
    restrict_to_fibre,
    verify_extension_lemma,
    verify_functoriality,
    verify_reduction_in_stages,
)
from .integration import (
    CutoffFamily,
    cone_scaling_experiment,
    duistermaat_heckman_volume,
    integrate,
    stokes_check,
    symplectic_class_pairing,
    volume_finiteness,
)
from .poly import Poly
from .quotient import (
    MembershipError,
    QuotientComplex,
    cohomology,
    in_ideal,
    is_phi_basic,
    quotient_basis,
    verify_restriction_lemma,
)
from .stratification import strata_of_Z

__all__ = [
    "__version__",
    "ActionError",
    "all_builtins",
    "appendix_report",
    "builtin",
    "BundleSpec",
    "chain_homotopy_check",
    "check_allowable_homotopy",
    "check_allowable_map",
    "circle_bundle",
    "cohomology",
    "cone_scaling_experiment",
    "constant_homotopy",
    "CutoffFamily",
    "cyclic_action",
    "cyclic_bundle",
    "DifferentialForm",
    "duistermaat_heckman_volume",
    "extension",
    "exterior_derivative",
    "finite_action",
    "format_form",
    "Homotopy",
    "in_ideal",
    "induced_space",
    "induced_vector_field",
    "integrate",
    "interior_product",
    "is_invariant",
    "is_phi_basic",
    "kappa",
    "lie_derivative",
    "LinearAction",
    "MembershipError",
    "moment_map",
    "parse_form",
    "ParseError",
    "poincare_verify",
    "Poly",
    "PolyMap",
    "PolyVectorField",
    "pullback",
    "quotient_basis",
    "QuotientComplex",
    "radial_contraction",
    "restrict_to_fibre",
    "shrinking_homotopy",
    "stokes_check",
    "strata_of_Z",
    "symplectic_class_pairing",
    "symplectic_form",
    "torus_action",
    "verify_extension_lemma",
    "verify_functoriality",
    "verify_moment_condition",
    "verify_reduction_in_stages",
    "verify_restriction_lemma",
    "volume_finiteness",
    "wedge",
]
