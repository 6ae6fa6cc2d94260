"""Neural networks embedded in mathematical models, trained by CMA-ES, with a dense-network baseline."""
from .benchmarks import ModelFormulation, get_formulation, registry
from .cmaes import CmaConfig, OptimizationResult, optimize
from .hybrid import Dataset, HybridPredictor, fitness, objective_for, predict
from .network import NetworkSpec, dimensionality, forward
from .quadrature import Domain, error_integral, gauss_legendre_rule

__version__ = "0.1.0"
