"""Resonances of Schottky surfaces via transfer-operator determinants.

Zeros of twisted Selberg zeta functions are computed as zeros of Fredholm
determinants of transfer operators truncated in explicit Bergman bases, for
a Schottky surface and its finite covers described by coset actions.
"""

__version__ = "0.1.0"

from .covers import (CosetAction, UnitaryRep, abelian_characters, character,
                     congruence_action, cyclic_action, induced_permutation_rep,
                     load_action, product_cyclic_action, regular_action,
                     save_action, sl2_image, trivial_action, trivial_rep)
from .moebius import INFINITY, MoebiusMap, apply, derivative, displacement_length
from .refine import DiskCover, level0_cover, refine
from .scheme import (Disk, SchottkyScheme, contraction_bound, cylinder_scheme,
                     integral_generators, integral_scheme, load_scheme,
                     pants_scheme, save_scheme, shortest_geodesic,
                     validate_scheme)
from .thermo import (DimensionReport, branch_separation, hausdorff_dimension,
                     pressure, separation_fit)
from .transfer import (TransferAssembler, TransferMatrix, assemble,
                       euler_product, fredholm_det, fredholm_det_adaptive,
                       primitive_classes, singular_values, trace_orbit_sum)
from .words import Word, enumerate_words, necklaces, word_displacement
from .zeros import Rect, ResonanceReport, count_M, count_N, locate_zeros, winding_count
from .analysis import (CoverInvariants, cover_invariants, factorization_check,
                       girth, l0_congruence_check, l0_cover,
                       min_subgroup_word_length, zero_volume)

__all__ = [name for name in dir() if not name.startswith("_")]
