"""Modular Lie superalgebras of Cartan type over finite fields, with exact
closure checks of small generating sets."""

__version__ = "0.1.0"

from .field import FieldCtx, make_field
from .carrier import Carrier, CarrierParams
from .algebra import GradedSuperalgebra, check_axioms, generation_closure, weight_decomposition
from .classical import build_classical
from .families import FamilySpec, build_family, null_iso

__all__ = ["FieldCtx", "make_field", "Carrier", "CarrierParams", "GradedSuperalgebra",
           "check_axioms", "generation_closure", "weight_decomposition", "build_classical",
           "FamilySpec", "build_family", "null_iso", "__version__"]
