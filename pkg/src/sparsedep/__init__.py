"""LASSO and sparse density estimation under weakly dependent observations."""
from .quadform import QuadraticObjective, RegressionData, build_regression_objective, evaluate_risk_gap
from .solver import LassoSolution, SolverOptions, solve, solve_path
from .processes import DesignSpec, ProcessSpec, generate, generate_design, stream
from .repcheck import RepEstimate, rep_exact, rep_randomized

__version__ = "0.1.0"

__all__ = [
    "QuadraticObjective",
    "RegressionData",
    "build_regression_objective",
    "evaluate_risk_gap",
    "LassoSolution",
    "SolverOptions",
    "solve",
    "solve_path",
    "DesignSpec",
    "ProcessSpec",
    "generate",
    "generate_design",
    "stream",
    "RepEstimate",
    "rep_exact",
    "rep_randomized",
]
