"""LDG discretisation of -div A(grad u) = f - div F with (p, delta)-structure.

Submodules
----------
orlicz       N-functions, conjugates, shifts and the tensor maps A, F, F*
mesh         structured triangulations and regular refinement
dgspace      broken polynomial spaces, projections, traces and jumps
operators    lifting, discrete gradient and modulars
solver       residual, Jacobian and Newton's method
experiments  manufactured solution and convergence studies
"""
from .errors import (ConfigurationError, DomainError, LdgError, LinearSolverError,
                     NonConvergenceError, SingularityError, StagnationError, UsageError)
from .kernels import BACKEND
from .orlicz import NFunction, ShiftedNFunction, map_F, map_Fstar, op_A, op_A_jacobian
from .mesh import Triangulation, build_cartesian, refine_regular
from .dgspace import BrokenField, DGSpace, l2_project
from .operators import DgOperators
from .solver import LDGSystem, ProblemData, SolveReport, newton_solve
from .experiments import ExactSolution, RunConfig, run_convergence_study

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BrokenField", "ConfigurationError", "DGSpace", "DgOperators", "DomainError",
    "ExactSolution", "LDGSystem", "LdgError", "LinearSolverError", "NFunction",
    "NonConvergenceError", "ProblemData", "RunConfig", "ShiftedNFunction", "SingularityError",
    "SolveReport", "StagnationError", "Triangulation", "UsageError", "build_cartesian",
    "l2_project", "map_F", "map_Fstar", "newton_solve", "op_A", "op_A_jacobian",
    "refine_regular", "run_convergence_study",
]
