import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pme_lab.errors import CFLViolation, FrontError, NonMonotoneProfileError
from pme_lab.pme_solver import (
    FrontTrace,
    Grid,
    State,
    cfl_bound,
    darcy_front_speed,
    evolve,
    level_set_theta,
    mass,
    sign_changes,
    step,
    support_bounds,
    to_pressure,
)
from pme_lab.reaction import ReactionSpec
from pme_lab.selfsimilar import barenblatt, barenblatt_front
from pme_lab.stationary_profiles import shoot_qb


@pytest.fixture(scope="module")
def spec():
    return ReactionSpec(theta=0.3, sigma=0.02, p=2.0, m=2.0)


def tent(grid, height=1.0, half_width=1.0):
    return height * np.clip(1.0 - np.abs(grid.x()) / half_width, 0.0, None)


class TestGrid:
    def test_basic(self):
        g = Grid.symmetric(5.0, 100)
        assert g.dx == pytest.approx(0.1)
        assert g.x()[g.center_index] == pytest.approx(0.0, abs=1e-15)

    def test_rejects_tiny(self):
        with pytest.raises(ValueError):
            Grid(0.0, 1.0, 8)


class TestStep:
    def test_zero_state_fixed(self, spec):
        g = Grid.symmetric(5.0, 64)
        s = State(0.0, np.zeros(g.n + 1))
        out = step(s, spec, g, 1e-3)
        assert np.all(out.u == 0.0)
        assert out.t == 1e-3

    def test_plateau_interior_stationary(self, spec):
        g = Grid.symmetric(8.0, 320)
        x = g.x()
        u = np.where(np.abs(x) <= 5.0, spec.theta,
                     np.clip((7.0 - np.abs(x)) / 2.0 * spec.theta, 0.0, None))
        u[0] = u[-1] = 0.0
        s = State(0.0, u.copy())
        out = step(s, spec, g, 0.4 * cfl_bound(s, spec, g))
        interior = np.abs(x) <= 4.0
        assert np.array_equal(out.u[interior], u[interior])

    def test_cfl_violation_raises(self, spec):
        g = Grid.symmetric(5.0, 64)
        s = State(0.0, tent(g))
        with pytest.raises(CFLViolation):
            step(s, spec, g, 10.0 * cfl_bound(s, spec, g))

    def test_one_step_matches_barenblatt_locally(self, spec):
        # explicit Euler local error against the closed form; refining the
        # grid must shrink it (the error concentrates at the degenerate front)
        m, M, t0 = 2.0, 1.0, 1.0
        errs = []
        for n in (250, 500):
            g = Grid.symmetric(5.0, n)
            s = State(t0, barenblatt(m, M, g.x(), t0))
            dt = 0.4 * cfl_bound(s, spec, g)
            out = step(s, spec, g, dt, with_reaction=False)
            exact = barenblatt(m, M, g.x(), t0 + dt)
            errs.append(np.max(np.abs(out.u - exact)))
        assert errs[0] <= 2e-4
        assert errs[1] <= errs[0] / 1.5


class TestSupportAndLevels:
    def test_support_of_barenblatt(self):
        m, M, t = 2.0, 1.0, 1.0
        g = Grid.symmetric(5.0, 500)
        s = State(t, barenblatt(m, M, g.x(), t))
        l, r = support_bounds(s, g)
        edge = barenblatt_front(m, M, t)
        assert r == pytest.approx(edge, abs=g.dx)
        assert l == pytest.approx(-edge, abs=g.dx)

    def test_support_of_cell_bump(self):
        g = Grid.symmetric(5.0, 100)
        u = np.zeros(g.n + 1)
        u[40:61] = 1.0
        l, r = support_bounds(State(0.0, u), g)
        x = g.x()
        assert abs(l - x[40]) <= g.dx
        assert abs(r - x[60]) <= g.dx

    def test_extinct_marker(self):
        g = Grid.symmetric(5.0, 64)
        assert support_bounds(State(0.0, np.zeros(g.n + 1)), g) is None

    def test_level_set_tent(self, spec):
        # peak 2*theta at 0 falling linearly to 0 at |x|=1 crosses theta at 0.5
        g = Grid.symmetric(2.0, 4000)
        s = State(0.0, tent(g, height=2.0 * spec.theta))
        assert level_set_theta(s, spec, g) == pytest.approx(0.5, abs=1e-6)

    def test_level_set_absent(self, spec):
        g = Grid.symmetric(2.0, 64)
        s = State(0.0, tent(g, height=spec.theta / 2.0))
        assert level_set_theta(s, spec, g) is None

    def test_level_set_rejects_multiple_crossings(self, spec):
        g = Grid.symmetric(4.0, 400)
        x = g.x()
        u = np.clip(0.5 - 0.4 * np.abs(np.sin(2.0 * x)), 0.0, None)
        u[0] = u[-1] = 0.0
        with pytest.raises(NonMonotoneProfileError):
            level_set_theta(State(0.0, u), spec, g)


class TestPressureAndMass:
    def test_pressure_values(self):
        # v = m/(m-1) u^(m-1); for m=2 that is 2u
        s = State(0.0, np.full(5, 0.5))
        assert np.allclose(to_pressure(s, 2.0), 1.0)
        s2 = State(0.0, np.full(5, 0.3))
        theta_pressure = 2.0 * 0.3
        assert np.allclose(to_pressure(s2, 2.0), theta_pressure)
        assert np.all(to_pressure(State(0.0, np.zeros(5)), 3.0) == 0.0)

    def test_mass_box_and_zero(self):
        g = Grid.symmetric(2.0, 400)
        assert mass(State(0.0, np.zeros(g.n + 1)), g) == 0.0
        u = np.where(np.abs(g.x()) < 0.5, 1.0, 0.0)
        assert mass(State(0.0, u), g) == pytest.approx(1.0, abs=2 * g.dx)


class TestDarcySpeed:
    def test_barenblatt_speed(self):
        m, M, t = 2.0, 1.0, 1.0
        g = Grid.symmetric(5.0, 500)
        s = State(t, barenblatt(m, M, g.x(), t))
        tr = FrontTrace(None, g, *(np.array([t]),) * 7)
        speed = darcy_front_speed(tr, s, m)
        alpha = 1.0 / (m + 1.0)
        exact = alpha * barenblatt_front(m, M, t) / t
        assert speed == pytest.approx(exact, rel=0.03)

    def test_stationary_plateau_zero_speed(self):
        g = Grid.symmetric(5.0, 100)
        u = np.where(np.abs(g.x()) <= 2.0, 0.4, 0.0)
        tr = FrontTrace(None, g, *(np.array([0.0]),) * 7)
        assert darcy_front_speed(tr, State(0.0, u), 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_thin_front_raises(self):
        g = Grid.symmetric(5.0, 100)
        u = np.zeros(g.n + 1)
        u[50] = 1.0
        tr = FrontTrace(None, g, *(np.array([0.0]),) * 7)
        with pytest.raises(FrontError):
            darcy_front_speed(tr, State(0.0, u), 2.0)


class TestEvolve:
    def test_barenblatt_exponent_fit(self, spec):
        m, M = 2.0, 1.0
        g = Grid.symmetric(6.0, 600)
        u0 = State(1.0, barenblatt(m, M, g.x(), 1.0))
        tr = evolve(u0, spec, g, 10.0, 0.25, with_reaction=False)
        sel = tr.t >= 1.0
        slope = np.polyfit(np.log(tr.t[sel]), np.log(tr.r[sel]), 1)[0]
        assert slope == pytest.approx(1.0 / (m + 1.0), rel=0.03)
        assert np.ptp(tr.mass[sel]) / tr.mass[0] < 1e-3

    def test_symmetry_preserved(self, spec):
        g = Grid.symmetric(6.0, 300)
        u0 = State(0.0, tent(g, height=0.8))
        tr = evolve(u0, spec, g, 5.0, 1.0, expand=False)
        u = tr.final_state.u
        assert np.max(np.abs(u - u[::-1])) <= 1e-12 * np.max(u)
        assert np.allclose(tr.l, -tr.r, atol=g.dx)

    def test_comparison_principle_random_pairs(self, spec):
        rng = np.random.default_rng(42)
        g = Grid.symmetric(8.0, 320)
        x = g.x()
        for _ in range(10):
            h1 = rng.uniform(0.2, 0.8)
            w1 = rng.uniform(0.5, 2.0)
            extra = rng.uniform(0.05, 0.5)
            u1 = h1 * np.clip(1.0 - np.abs(x) / w1, 0.0, None)
            u2 = u1 + extra * np.clip(1.0 - np.abs(x) / (w1 + 0.5), 0.0, None)
            tr1 = evolve(State(0.0, u1), spec, g, 3.0, 0.5, expand=False)
            tr2 = evolve(State(0.0, u2), spec, g, 3.0, 0.5, expand=False)
            diff = tr1.final_state.u - tr2.final_state.u
            assert np.max(diff) <= 1e-8

    def test_plateau_bound(self, spec):
        g = Grid.symmetric(6.0, 300)
        u0 = State(0.0, tent(g, height=1.0, half_width=2.0))
        tr = evolve(u0, spec, g, 5.0, 1.0, expand=False)
        assert np.max(tr.u_max) <= 1.0 + 1e-10

    def test_positivity_and_clamp_accounting(self, spec):
        g = Grid.symmetric(6.0, 300)
        u0 = State(0.0, tent(g, height=0.9))
        tr = evolve(u0, spec, g, 5.0, 1.0, expand=False)
        assert np.min(tr.final_state.u) >= 0.0
        assert tr.meta["worst_clamp_rel"] <= 1e-14

    def test_auto_expansion_keeps_dx(self, spec):
        g = Grid.symmetric(2.0, 64)
        u0 = State(0.0, tent(g, height=0.9, half_width=0.5))
        tr = evolve(u0, spec, g, 20.0, 2.0)
        assert tr.grid.x_max > 2.0
        assert tr.grid.dx == pytest.approx(g.dx, rel=1e-12)
        assert tr.final_state.u[0] == 0.0 and tr.final_state.u[-1] == 0.0

    def test_vanishing_datum_decays(self, spec):
        g = Grid.symmetric(6.0, 300)
        u0 = State(0.0, tent(g, height=0.4, half_width=0.5))
        tr = evolve(u0, spec, g, 40.0, 1.0)
        below = tr.u_max < spec.theta
        assert np.any(below)
        i = np.argmax(below)
        assert np.all(np.diff(tr.mass[i:]) <= 1e-12)

    def test_held_centerline_mode(self, spec):
        g = Grid.half_line(6.0, 300)
        u0 = np.zeros(g.n + 1)
        u0[0] = spec.theta
        tr = evolve(State(0.0, u0), spec, g, 5.0, 1.0, with_reaction=False,
                    hold_left=spec.theta)
        assert tr.u_center[-1] == pytest.approx(spec.theta)
        assert tr.r[-1] > 0.5

    def test_trace_csv_round_trip(self, spec, tmp_path):
        g = Grid.symmetric(6.0, 300)
        u0 = State(0.0, tent(g, height=0.8))
        tr = evolve(u0, spec, g, 3.0, 0.5, expand=False)
        path = tmp_path / "trace.csv"
        tr.to_csv(path)
        back = FrontTrace.from_csv(path, spec=spec)
        assert np.array_equal(back.t, tr.t)
        assert np.array_equal(back.r, tr.r)
        assert np.array_equal(back.mass, tr.mass)
        nan_safe = np.isnan(tr.theta_pos) == np.isnan(back.theta_pos)
        assert np.all(nan_safe)


@given(height=st.floats(min_value=0.35, max_value=1.0),
       half_width=st.floats(min_value=0.4, max_value=1.5))
@settings(max_examples=5, deadline=None)
def test_front_monotone_while_burning(height, half_width):
    spec = ReactionSpec(theta=0.3, sigma=0.02, p=2.0, m=2.0)
    g = Grid.symmetric(8.0, 320)
    u0 = State(0.0, height * np.clip(1.0 - np.abs(g.x()) / half_width, 0.0, None))
    tr = evolve(u0, spec, g, 4.0, 0.5, expand=False)
    burning = tr.u_center > spec.theta
    r = tr.r[burning]
    if len(r) > 1:
        assert np.all(np.diff(r) >= -g.dx)


class TestSignChanges:
    def test_zero_state(self, spec):
        qb = shoot_qb(spec, 0.01)
        g = Grid.symmetric(20.0, 400)
        assert sign_changes(State(0.0, np.zeros(g.n + 1)), g, qb) == 0

    def test_single_crossing(self, spec):
        qb = shoot_qb(spec, 0.01)
        g = Grid.symmetric(20.0, 400)
        u = np.clip(0.6 - 0.05 * np.abs(g.x()), 0.0, None)
        u[0] = u[-1] = 0.0
        assert sign_changes(State(0.0, u), g, qb) == 1
