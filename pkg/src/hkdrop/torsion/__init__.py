"""Torsion potential on a droplet: meshing, quadratic FEM and the Reilly-type identities."""
from .fem import TorsionSolution, assemble, mesh_is_hydrophilic, solve_torsion
from .identities import (
    DeficitBound,
    LinfCheck,
    ReillyReport,
    StabilityChain,
    SubstrateBound,
    WettedBounds,
    compute_gamma,
    deficit_bound_check,
    hessian_deficit,
    integrals,
    linf_check,
    reilly_report,
    stability_chain,
    substrate_term_bound,
    wetted_bounds,
)
from .mesh import ON_AXIS, ON_M, ON_SIGMA, MeridianMesh, mesh_meridian

__all__ = [
    "TorsionSolution", "assemble", "mesh_is_hydrophilic", "solve_torsion",
    "DeficitBound", "LinfCheck", "ReillyReport", "StabilityChain", "SubstrateBound",
    "WettedBounds", "compute_gamma", "deficit_bound_check", "hessian_deficit", "integrals",
    "linf_check", "reilly_report", "stability_chain", "substrate_term_bound", "wetted_bounds",
    "ON_AXIS", "ON_M", "ON_SIGMA", "MeridianMesh", "mesh_meridian",
]
