"""Symmetric geometric multigrid preconditioning for staggered-grid Stokes flow."""

from .discretization import BoundaryData, StokesOperator, assemble_dense, assemble_rhs
from .domain import CellGrid, CellLabel, DofMap, classify_dofs, coarsen_grid, partition_band, read_domain, write_domain
from .driver import Problem, SolverSettings, solve_driver
from .history import ResidualHistory
from .krylov import sqmr_solve
from .multigrid import CycleConfig, MgHierarchy, SolveResult, build_hierarchy, mg_solve
from .scenarios import ScenarioSpec, build, cavity, inflow_profile
from .smoothers import DistributiveGaussSeidel, IntegratedSmoother, SmootherConfig, VankaSmoother
from .transfer import TransferPair
from .verify import commutativity_report, materialize, symmetry_defect

__all__ = [
    "BoundaryData",
    "CellGrid",
    "CellLabel",
    "CycleConfig",
    "DistributiveGaussSeidel",
    "DofMap",
    "IntegratedSmoother",
    "MgHierarchy",
    "Problem",
    "ResidualHistory",
    "ScenarioSpec",
    "SmootherConfig",
    "SolveResult",
    "SolverSettings",
    "StokesOperator",
    "TransferPair",
    "VankaSmoother",
    "assemble_dense",
    "assemble_rhs",
    "build",
    "build_hierarchy",
    "cavity",
    "classify_dofs",
    "coarsen_grid",
    "commutativity_report",
    "inflow_profile",
    "materialize",
    "mg_solve",
    "partition_band",
    "read_domain",
    "solve_driver",
    "sqmr_solve",
    "symmetry_defect",
    "write_domain",
]
