"""Penalty-level selection for l1-regularized regression.

Two Gaussian-approximation estimators of the penalty level (a normal-quantile
formula and a Gaussian-multiplier Monte Carlo quantile), solvers for the
lasso, square-root lasso and Poisson weighted-score-function regression, a
K-fold cross-validation baseline, and a simulation harness comparing them.
"""
from .cv import CvConfig, cv_path, cv_select
from .errors import *  # noqa: F401,F403
from .model import (Dataset, Family, ProblemSpec, gradient, load_dataset, loss,
                    score_vectors, standardize)
from .normal import phi_cdf, phi_inv, phi_sf
from .penalty import (Method, PenaltyEstimate, coverage_check, lambda_mdt,
                      lambda_stein)
from .sim import (ExperimentConfig, ExperimentReport, SimDesign, gen_beta,
                  gen_design, gen_response, prediction_error, run_experiment)
from .solvers import (FitResult, SolverConfig, fit, fit_lasso, fit_poisson_wsf,
                      fit_sqrt_lasso, kkt_residual)

__version__ = "0.1.0"
