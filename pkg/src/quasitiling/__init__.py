"""Exact dynamical quasitilings of Z, Z^2 and the discrete Heisenberg group."""

from .constructor import (
    ConstructionParams,
    ConstructionTrace,
    CongruenceParams,
    choose_deltas,
    choose_r,
    choose_shape_indices,
    congruent_refine,
    construct_dynamical,
    derive_congruence_params,
    disjointify,
    make_params,
    stage_centers,
    static_sequential,
)
from .folner import FolnerFamily, invariance_defect, is_invariant
from .groups import HEISENBERG, Z, Z2, FinSet, GroupElement, box, get_group
from .symbolic import SeparatedCover, ShiftPoint, build_separated_cover
from .tiling import Quasitiling, WindowedTiling, eps_disjoint_flow_check, is_disjoint

__all__ = [
    "ConstructionParams", "ConstructionTrace", "CongruenceParams", "choose_deltas", "choose_r",
    "choose_shape_indices", "congruent_refine", "construct_dynamical", "derive_congruence_params",
    "disjointify", "make_params", "stage_centers", "static_sequential", "FolnerFamily",
    "invariance_defect", "is_invariant", "HEISENBERG", "Z", "Z2", "FinSet", "GroupElement", "box",
    "get_group", "SeparatedCover", "ShiftPoint", "build_separated_cover", "Quasitiling",
    "WindowedTiling", "eps_disjoint_flow_check", "is_disjoint",
]
