"""Finite colored operads, operator categories, envelopes, and the
discrete straightening/unstraightening correspondence, all checkable by
exhaustion at desk scale."""

from .pointed import (MapKind, PointedMap, beta, classify, enumerate_maps,
                      factorize, identity, projection)
from .fincat import (CheckResult, FinCategory, Functor, OverFunctor,
                     comma_slice, connected_components, grothendieck,
                     is_discrete_opfibration, iso_check, pullback)
from .operads import (Algebra, ColoredOperad, OperadMap, Operation,
                      algebra_map_check, build_operad, enumerate_algebras,
                      terminal_algebra)
from .operators import (OperatorCategory, OperatorCategoryMap,
                        is_operad_map, is_operadic_left_fibration,
                        operator_category, realize_operad_map,
                        truncated_finstar)

__all__ = [name for name in dir() if not name.startswith("_")]
