"""Betti numbers of triangulated closed manifolds via discrete Hodge theory.

The cohomology pipeline splits random cochains into coexact, exact and
harmonic parts and reads the Betti number off the rank of the harmonic
block.  An exact integer homology computation serves as a cross-check, and
:mod:`hodgebetti.qsvt_sim` simulates the block-encoding algebra behind the
quantum version of the same computation.
"""
from .complex_core import (
    SimplicialComplex,
    barycentric_subdivision,
    boundary_matrix,
    build_from_simplexes,
    double_cover,
    euler_characteristic,
    incidence_matrices,
    validate_closed_manifold,
)
from .dec_geometry import HodgeSystem, build_hodge_system, cotangent_weights, dual_cell_measures
from .formats import ParseError, load_complex, read_triplets, save_json, write_triplets
from .generators import generate, genus_g_surface, sphere_icosa, sphere_tetra, three_torus, torus
from .hodge_engine import (
    BettiReport,
    betti_via_cohomology,
    betti_via_homology_oracle,
    harmonic_matrix,
    homology_betti_numbers,
)
from .rank_tools import StochasticRankConfig, exact_rank, stochastic_rank

__version__ = "0.1.0"

__all__ = [
    "SimplicialComplex", "barycentric_subdivision", "boundary_matrix", "build_from_simplexes",
    "double_cover", "euler_characteristic", "incidence_matrices", "validate_closed_manifold",
    "HodgeSystem", "build_hodge_system", "cotangent_weights", "dual_cell_measures",
    "ParseError", "load_complex", "read_triplets", "save_json", "write_triplets",
    "generate", "genus_g_surface", "sphere_icosa", "sphere_tetra", "three_torus", "torus",
    "BettiReport", "betti_via_cohomology", "betti_via_homology_oracle", "harmonic_matrix",
    "homology_betti_numbers", "StochasticRankConfig", "exact_rank", "stochastic_rank",
]
