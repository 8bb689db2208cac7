import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pme_lab.reaction import ReactionSpec, eval_f, eval_g, validate


@pytest.fixture(scope="module")
def spec():
    return ReactionSpec(theta=0.3, sigma=0.2, p=2.0, m=2.0)


def test_plateau_value(spec):
    assert eval_f(spec, 0.4) == pytest.approx(0.01, abs=1e-15)


def test_dead_zone_and_endpoints(spec):
    assert eval_f(spec, spec.theta) == 0.0
    assert eval_f(spec, 0.0) == 0.0
    assert eval_f(spec, 1.0) == 0.0
    xs = np.linspace(0.0, spec.theta, 501)
    assert np.all(eval_f(spec, xs) == 0.0)


def test_sign_conditions(spec):
    xs = np.linspace(spec.theta + 1e-9, 1.0 - 1e-9, 2001)
    assert np.all(eval_f(spec, xs) > 0.0)
    xs = np.linspace(1.0, spec.u_cap, 2001)
    assert np.all(eval_f(spec, xs) <= 0.0)
    assert np.all(eval_f(spec, np.linspace(1.0 + 1e-9, spec.u_cap, 500)) < 0.0)


def test_rejects_negative_state(spec):
    with pytest.raises(ValueError):
        eval_f(spec, -0.1)
    with pytest.raises(ValueError):
        eval_g(spec, -0.1)


def test_c1_across_joints(spec):
    # one-sided difference quotients agree across theta+sigma and 1
    h = 1e-7
    for x0 in (spec.theta + spec.sigma, 1.0):
        left = (eval_f(spec, x0) - eval_f(spec, x0 - h)) / h
        right = (eval_f(spec, x0 + h) - eval_f(spec, x0)) / h
        assert right == pytest.approx(left, abs=5e-6)


def test_c1_at_theta_for_p_above_one():
    spec = ReactionSpec(theta=0.3, sigma=0.2, p=1.5, m=2.0)
    h = 1e-8
    left = (eval_f(spec, spec.theta) - eval_f(spec, spec.theta - h)) / h
    right = (eval_f(spec, spec.theta + h) - eval_f(spec, spec.theta)) / h
    assert left == 0.0
    assert right == pytest.approx(0.0, abs=1e-3)


def test_g_trivial_values(spec):
    assert eval_g(spec, 0.0) == 0.0
    assert eval_g(spec, spec.pressure_theta) == 0.0


def test_g_direct_substitution(spec):
    # u = theta + sigma/2 = 0.4, v = 2 u^(m-1) elsewhere m=2 -> v = 0.8
    u = spec.theta + spec.sigma / 2
    v = spec.m / (spec.m - 1.0) * u ** (spec.m - 1.0)
    assert eval_g(spec, v) == pytest.approx(2.0 * (spec.sigma / 2) ** 2, rel=1e-12)


@given(v=st.floats(min_value=1e-6, max_value=3.0))
@settings(max_examples=200, deadline=None)
def test_g_matches_f_through_chain_rule(v):
    # dv/dt = (dv/du) du/dt gives g(v) = m u^(m-2) f(u); verify the factor
    # dv/du by finite differences
    spec = ReactionSpec(theta=0.3, sigma=0.2, p=2.0, m=2.5)
    m = spec.m
    u = ((m - 1.0) / m * v) ** (1.0 / (m - 1.0))
    h = max(1e-7 * u, 1e-10)
    dv_du = (m / (m - 1.0) * (u + h) ** (m - 1.0)
             - m / (m - 1.0) * (u - h) ** (m - 1.0)) / (2.0 * h)
    expected = dv_du * eval_f(spec, u)
    assert eval_g(spec, v) == pytest.approx(expected, rel=1e-8, abs=1e-14)


@given(theta=st.floats(min_value=0.05, max_value=0.9),
       frac=st.floats(min_value=0.01, max_value=0.99),
       p=st.floats(min_value=1.01, max_value=6.0),
       m=st.floats(min_value=1.1, max_value=4.0))
@settings(max_examples=60, deadline=None)
def test_plateau_identity_and_signs_random_specs(theta, frac, p, m):
    sigma = frac * (1.0 - theta)
    spec = ReactionSpec(theta=theta, sigma=sigma, p=p, m=m)
    xs = theta + sigma * np.linspace(0.0, 1.0, 64)
    # libm vs numpy pow may differ in the last ulp
    np.testing.assert_allclose(eval_f(spec, xs), (xs - theta) ** p,
                               rtol=5e-16, atol=0.0)
    mids = np.linspace(theta + 1e-9, 1.0 - 1e-9, 256)
    assert np.all(eval_f(spec, mids) > 0.0)


def test_lipschitz_bound_positive(spec):
    assert spec.lipschitz_K > 0.0
    # plateau slope at theta+sigma is a lower bound for max |f'|
    assert spec.lipschitz_K >= spec.p * spec.sigma ** (spec.p - 1.0) * 0.9


def test_validate_wide_plateau_flags_width_constraint():
    # (0.5^2 - 0.3^2) = 0.16 >= 0.09 * 2 * 1 / 2 = 0.09: constraint fails,
    # reported as a warning because only the width monotonicity needs it
    rep = validate(0.3, 0.2, 2.0, 2.0)
    assert rep.ok
    assert rep.warnings
    assert rep.sigma_constraint_lhs == pytest.approx(0.16)
    assert rep.sigma_constraint_rhs == pytest.approx(0.09)


def test_validate_narrow_plateau_all_clear():
    # (0.32^2 - 0.09) = 0.0124 < 0.09
    rep = validate(0.3, 0.02, 2.0, 2.0)
    assert rep.ok
    assert not rep.warnings
    assert rep.lipschitz_K > 0.0


def test_validate_structural_violation_never_raises():
    rep = validate(0.5, 0.6, 2.0, 2.0)
    assert not rep.ok
    assert "theta+sigma<1" in rep.violations


def test_spec_constructor_rejects_bad_params():
    with pytest.raises(ValueError):
        ReactionSpec(theta=0.5, sigma=0.6, p=2.0, m=2.0)
    with pytest.raises(ValueError):
        ReactionSpec(theta=0.3, sigma=0.02, p=1.0, m=2.0)
    with pytest.raises(ValueError):
        ReactionSpec(theta=0.3, sigma=0.02, p=2.0, m=1.0)


def test_round_trip_dict(spec):
    assert ReactionSpec.from_dict(spec.to_dict()) == spec
