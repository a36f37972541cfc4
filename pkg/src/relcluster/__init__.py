"""Exact computations with families, sections, blow-ups and clusters of sections."""

__version__ = "0.1.0"

from .poly import GF, QQ, Polynomial, PolyRing, make_ring, parse_polynomial
from .groebner import Ideal, groebner_basis, resource_limits, saturation
from .geom import AmbientSpace, Subscheme, is_effective_cartier_divisor, scheme_image, singular_locus
from .blowup import base_change_commutation_check, lift_section, rees_ideal, strict_transform, total_transform
from .cluster import (Family, Lift, Section, analyze_pair, build_cluster, hirzebruch_intersection,
                      hirzebruch_is_section_class, intersection_scheme, stratify_pairs)

__all__ = [
    "GF", "QQ", "Polynomial", "PolyRing", "make_ring", "parse_polynomial",
    "Ideal", "groebner_basis", "resource_limits", "saturation",
    "AmbientSpace", "Subscheme", "is_effective_cartier_divisor", "scheme_image", "singular_locus",
    "base_change_commutation_check", "lift_section", "rees_ideal", "strict_transform", "total_transform",
    "Family", "Lift", "Section", "analyze_pair", "build_cluster", "hirzebruch_intersection",
    "hirzebruch_is_section_class", "intersection_scheme", "stratify_pairs",
]
