"""Binary minimum-compliance topology optimization via generalized Benders
decomposition, with annealing-ready QUBO master problems.

The pipeline decomposes the mixed-integer compliance problem into primal
elasticity solves (upper bounds) and cut-constrained binary masters (lower
bounds), shrinks multi-cut masters by fixing everything the per-cut greedy
optima agree on, and hands the remaining variables to a QUBO backend:
exhaustive enumeration for small models or restart-based simulated
annealing.
"""

from .anneal import AnnealSchedule, SampleSet, default_beta_range, energy, solve_exhaustive, solve_sa
from .binlp import VolumeLP, objective_value, solve_greedy
from .estimator import GbdTopologyOptimizer
from .fem import (
    ElasticityParams,
    LoadCase,
    MeshSpec,
    SolverError,
    assemble,
    cantilever_load,
    compliance,
    element_energies,
    element_stiffness,
    make_load,
    mbb_half_load,
    solve_displacements,
)
from .gbd import (
    ContinuationPlan,
    CutRecord,
    IterationRecord,
    RunResult,
    make_cut,
    pareto_filter,
    repair_layout,
    run,
    solve_stage,
)
from .qubo import (
    BinaryEncoding,
    MasterQubo,
    QuboBuilder,
    QuboModel,
    SplitResult,
    build_full_qubo,
    build_reduced_qubo,
    compute_split,
    cut_value,
    dump_coefficients,
    load_coefficients,
    refine_eta,
)
from .sensitivity import FilterKernel, build_kernel, filter_sensitivities
from .toy import ToyQubo, ToySolution, build_toy_qubo

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "SampleSet",
    "default_beta_range",
    "energy",
    "solve_exhaustive",
    "solve_sa",
    "VolumeLP",
    "objective_value",
    "solve_greedy",
    "GbdTopologyOptimizer",
    "ElasticityParams",
    "LoadCase",
    "MeshSpec",
    "SolverError",
    "assemble",
    "cantilever_load",
    "compliance",
    "element_energies",
    "element_stiffness",
    "make_load",
    "mbb_half_load",
    "solve_displacements",
    "ContinuationPlan",
    "CutRecord",
    "IterationRecord",
    "RunResult",
    "make_cut",
    "pareto_filter",
    "repair_layout",
    "run",
    "solve_stage",
    "BinaryEncoding",
    "MasterQubo",
    "QuboBuilder",
    "QuboModel",
    "SplitResult",
    "build_full_qubo",
    "build_reduced_qubo",
    "compute_split",
    "cut_value",
    "dump_coefficients",
    "load_coefficients",
    "refine_eta",
    "FilterKernel",
    "build_kernel",
    "filter_sensitivities",
    "ToyQubo",
    "ToySolution",
    "build_toy_qubo",
    "__version__",
]
