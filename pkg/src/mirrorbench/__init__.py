"""Online mirror descent, expert-advice meta-optimizers, and regret benchmarks."""

__version__ = "0.1.0"

from .bench import (AdversarialStream, CostOracle, RegressionStream,
                    RegretLedger, best_in_hindsight, lower_bound_check,
                    run_single_optimizer, square_loss)
from .diagnostics import Diagnostics
from .experts import (GBPA, Exp3, Hedge, Squint, importance_weighted_loss,
                      tsallis_weights)
from .geometry import (Domain, bregman_project_numeric, bregman_projector,
                       project_ball_l2, project_simplex_entropic,
                       project_simplex_euclidean)
from .meta import (FastMasterGD, MasterGD, SurrogateNormalizer,
                   decompose_regret, estimate_surrogate_bound, make_engine,
                   surrogate_regret_dominates)
from .optimizers import AnytimeStep, FixedStep, OnlineOptimizer, step_size
from .regularizers import (BregmanDiameter, Hypentropy, NegEntropy, Quadratic,
                           Regularizer, bregman_divergence, diameter,
                           make_regularizer)

__all__ = [
    "AdversarialStream", "AnytimeStep", "BregmanDiameter", "CostOracle",
    "Diagnostics", "Domain", "Exp3", "FastMasterGD", "FixedStep", "GBPA",
    "Hedge", "Hypentropy", "MasterGD", "NegEntropy", "OnlineOptimizer",
    "Quadratic", "RegressionStream", "RegretLedger", "Regularizer", "Squint",
    "SurrogateNormalizer", "best_in_hindsight", "bregman_divergence",
    "bregman_project_numeric", "bregman_projector", "decompose_regret",
    "diameter", "estimate_surrogate_bound", "importance_weighted_loss",
    "lower_bound_check", "make_engine", "make_regularizer",
    "project_ball_l2", "project_simplex_entropic", "project_simplex_euclidean",
    "run_single_optimizer", "square_loss", "step_size",
    "surrogate_regret_dominates", "tsallis_weights",
]
