from .base import (
    BudgetExhausted,
    InverseTarget,
    LossSpec,
    Objective,
    OptimizerConfig,
    SearchOutcome,
    loss,
)
from .bayes import BayesianSolver, solve_bayesian
from .jaya import JayaSolver, solve_metaheuristic
from .neldermead import QuantumParamSolver, nelder_mead, solve_quantum_params, wasserstein_1d

__all__ = [
    "BudgetExhausted",
    "InverseTarget",
    "LossSpec",
    "Objective",
    "OptimizerConfig",
    "SearchOutcome",
    "loss",
    "BayesianSolver",
    "solve_bayesian",
    "JayaSolver",
    "solve_metaheuristic",
    "QuantumParamSolver",
    "nelder_mead",
    "solve_quantum_params",
    "wasserstein_1d",
    "solve",
]


def solve(sut, target, config, spec=None, domain=None):
    """Dispatch on ``config.strategy``."""
    if config.strategy == "metaheuristic":
        return solve_metaheuristic(sut, target, domain, config, spec)
    if config.strategy == "bayesian":
        return solve_bayesian(sut, target, domain, config, spec)
    return solve_quantum_params(sut, target, config, spec)
