"""Shared fixtures.

The threshold brackets and near-critical runs are the expensive parts of
the suite (minutes each), so they are computed once per session and shared
between the unit tests and the acceptance module.
"""

import numpy as np
import pytest

from pme_lab.pme_solver import Grid, State, evolve
from pme_lab.reaction import ReactionSpec
from pme_lab.selfsimilar import eval_e, shoot_xi
from pme_lab.threshold import PsiShape, bisect_lambda, near_critical_run

PROBE_GRID = dict(x_max=30.0, n=500)        # dx = 0.12
PROBE_HORIZON = 2000.0
BRACKET_TOL = 1e-6


@pytest.fixture(scope="session")
def spec_p2():
    return ReactionSpec(theta=0.3, sigma=0.02, p=2.0, m=2.0)


@pytest.fixture(scope="session")
def spec_p5():
    return ReactionSpec(theta=0.3, sigma=0.02, p=5.0, m=2.0)


@pytest.fixture(scope="session")
def psi_tent():
    return PsiShape("tent", 2.0, 1.0)


@pytest.fixture(scope="session")
def xi_profile_03():
    return shoot_xi(2.0, 0.3)


@pytest.fixture(scope="session")
def xi_profile_05():
    return shoot_xi(2.0, 0.5)


def _bracket(psi, spec):
    grid = Grid.symmetric(**PROBE_GRID)
    return bisect_lambda(psi, spec, grid, PROBE_HORIZON, BRACKET_TOL,
                         sample_every=2.0, extend_factor=2.0)


@pytest.fixture(scope="session")
def bracket_p2(psi_tent, spec_p2):
    return _bracket(psi_tent, spec_p2)


@pytest.fixture(scope="session")
def bracket_p5(psi_tent, spec_p5):
    return _bracket(psi_tent, spec_p5)


@pytest.fixture(scope="session")
def nc_p5_below(bracket_p5):
    return near_critical_run(bracket_p5, "below", 1e-5, 2400.0,
                             sample_every=2.0, snapshot_stride=25)


@pytest.fixture(scope="session")
def nc_p5_above(bracket_p5):
    return near_critical_run(bracket_p5, "above", 1e-5, 2400.0,
                             sample_every=2.0)


@pytest.fixture(scope="session")
def nc_p2_below(bracket_p2):
    return near_critical_run(bracket_p2, "below", 1e-5, 800.0,
                             sample_every=1.0, snapshot_stride=5)


@pytest.fixture(scope="session")
def nc_p2_above(bracket_p2):
    return near_critical_run(bracket_p2, "above", 1e-5, 800.0,
                             sample_every=1.0)


@pytest.fixture(scope="session")
def held_theta_run(xi_profile_05, spec_boundary_05):
    """Reaction-free run fed by a held centerline, from the exact profile."""
    grid = Grid.half_line(8.0, 800)  # dx = 0.01
    x = grid.x()
    u0 = eval_e(xi_profile_05, x, 1.0)
    u0[0] = spec_boundary_05.theta
    return evolve(State(1.0, u0), spec_boundary_05, grid, 100.0, 1.0,
                  with_reaction=False, hold_left=spec_boundary_05.theta)


@pytest.fixture(scope="session")
def spec_boundary_05():
    return ReactionSpec(theta=0.5, sigma=0.02, p=2.0, m=2.0)
