"""Linear models of many-sorted algebraic theories.

Models live in finite-dimensional vector spaces over Q or a prime field.  The
package provides a small theory language, exact linear algebra, the abelian
structure of the model category, cofree models and extension groups.
"""

from .dsl import ParseError, parse_theory, print_theory
from .ext import (
    Cocycle,
    ExtGroup,
    baer_sum,
    build_extension,
    coboundary_space,
    cocycle_space,
    coresolve,
    ext1,
    ext_n,
    ext_pullback,
    ext_pushout,
)
from .homfin import NotStabilized, adjunction_transpose, adjunction_untranspose, cofree_model, hom_basis
from .linalg import GF, QQ, Matrix
from .models import (
    IndexedFamily,
    Model,
    ModelMorphism,
    cokernel_model,
    direct_sum,
    eval_combination,
    forget,
    forget_morphism,
    hom_space,
    image_factorization,
    kernel_model,
    validate_model,
    value_on_word,
)
from .theory import Apply, Equation, LinearTermCombination, TheoryPresentation, Var, substitute, well_sorted

__version__ = "0.1.0"

__all__ = [
    "adjunction_transpose",
    "adjunction_untranspose",
    "Apply",
    "baer_sum",
    "build_extension",
    "coboundary_space",
    "Cocycle",
    "cocycle_space",
    "cofree_model",
    "cokernel_model",
    "coresolve",
    "direct_sum",
    "Equation",
    "eval_combination",
    "ext1",
    "ext_n",
    "ext_pullback",
    "ext_pushout",
    "ExtGroup",
    "forget",
    "forget_morphism",
    "GF",
    "hom_basis",
    "hom_space",
    "image_factorization",
    "IndexedFamily",
    "kernel_model",
    "LinearTermCombination",
    "Matrix",
    "Model",
    "ModelMorphism",
    "NotStabilized",
    "parse_theory",
    "ParseError",
    "print_theory",
    "QQ",
    "substitute",
    "TheoryPresentation",
    "validate_model",
    "value_on_word",
    "Var",
    "well_sorted",
]
