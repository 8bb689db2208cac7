"""Numerical laboratory for degenerate-diffusion ignition fronts.

Core pieces: an explicit conservative solver for u_t = (u^m)_xx + f(u)
with free-boundary tracking, shooting solvers for the self-similar and
stationary comparison profiles, a sharp-threshold bisection driver, and
regression tooling for the front-propagation asymptotics.
"""

__version__ = "0.1.0"

from .reaction import ReactionSpec, eval_f, eval_g, validate
from .pme_solver import (
    FrontTrace,
    Grid,
    State,
    evolve,
    level_set_theta,
    mass,
    sign_changes,
    step,
    support_bounds,
    to_pressure,
)
from .selfsimilar import XiProfile, barenblatt, eval_e, shoot_xi
from .stationary_profiles import (
    QbProfile,
    L_of_b,
    invert_L,
    l_of_b_quadrature,
    shoot_qb,
)
from .hw_profile import PhiProfile, gamma_max, solve_phi
from .threshold import CriticalBracket, PsiShape, Verdict, bisect_lambda, classify, near_critical_run
from .asymptotics import fit_correction, fit_sqrt_law, check_bounds, theta_level_bound

__all__ = [
    "ReactionSpec", "eval_f", "eval_g", "validate",
    "Grid", "State", "FrontTrace", "step", "evolve", "support_bounds",
    "level_set_theta", "to_pressure", "mass", "sign_changes",
    "XiProfile", "shoot_xi", "eval_e", "barenblatt",
    "QbProfile", "shoot_qb", "l_of_b_quadrature", "L_of_b", "invert_L",
    "PhiProfile", "gamma_max", "solve_phi",
    "PsiShape", "Verdict", "CriticalBracket", "classify", "bisect_lambda", "near_critical_run",
    "fit_sqrt_law", "fit_correction", "check_bounds", "theta_level_bound",
    "__version__",
]
