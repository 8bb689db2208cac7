"""Numba kernels for the explicit conservative update.

The time loop lives here so that Python-level overhead is paid per sample
interval, not per step.  All arithmetic is strict IEEE double; runs are
bit-reproducible.
"""

from numba import njit

from .reaction import _f_scalar

OK = 0
CLAMP_FAIL = 1
BLOW_UP = 2
STEP_LIMIT = 3


@njit(cache=True)
def _fill_power(u, um, m):
    n = u.shape[0]
    if m == 2.0:
        for i in range(n):
            um[i] = u[i] * u[i]
    elif m == 3.0:
        for i in range(n):
            um[i] = u[i] * u[i] * u[i]
    else:
        for i in range(n):
            um[i] = u[i] ** m


@njit(cache=True)
def _one_step(u, um, dt, dx2, m, theta, sigma, p, delta, k1,
              with_reaction, hold_left, left_value):
    """Single explicit update in place.  Returns (new max u, worst clamp)."""
    n = u.shape[0]
    _fill_power(u, um, m)
    c = dt / dx2
    worst = 0.0
    umax = 0.0
    for i in range(1, n - 1):
        ui = u[i]
        val = ui + c * (um[i - 1] - 2.0 * um[i] + um[i + 1])
        if with_reaction:
            val += dt * _f_scalar(ui, theta, sigma, p, delta, k1)
        if val < 0.0:
            neg = -val
            if neg > worst:
                worst = neg
            val = 0.0
        u[i] = val
        if val > umax:
            umax = val
    if hold_left:
        u[0] = left_value
        if left_value > umax:
            umax = left_value
    else:
        u[0] = 0.0
    u[n - 1] = 0.0
    return umax, worst


@njit(cache=True)
def advance(u, um, t, t_stop, dx, m, K, safety, theta, sigma, p, delta, k1,
            with_reaction, hold_left, left_value, blowup_cap, clamp_rel,
            max_steps):
    """March the state from t to t_stop with CFL-limited steps.

    Returns (t, status, steps, max_u, worst_clamp_rel).
    """
    n = u.shape[0]
    dx2 = dx * dx
    umax = 0.0
    for i in range(n):
        if u[i] > umax:
            umax = u[i]
    steps = 0
    worst_rel = 0.0
    while t < t_stop:
        if steps >= max_steps:
            return t, STEP_LIMIT, steps, umax, worst_rel
        denom = dx2 * K
        if umax > 0.0:
            denom += 2.0 * m * umax ** (m - 1.0)
        if denom > 0.0:
            dt = safety * dx2 / denom
        else:
            dt = t_stop - t
        rem = t_stop - t
        if dt >= rem:
            dt = rem
            t_next = t_stop
        else:
            t_next = t + dt
        umax_prev = umax if umax > 0.0 else 1.0
        umax, worst = _one_step(u, um, dt, dx2, m, theta, sigma, p, delta, k1,
                                with_reaction, hold_left, left_value)
        rel = worst / umax_prev
        if rel > worst_rel:
            worst_rel = rel
        if rel > clamp_rel:
            return t_next, CLAMP_FAIL, steps + 1, umax, worst_rel
        if umax > blowup_cap:
            return t_next, BLOW_UP, steps + 1, umax, worst_rel
        t = t_next
        steps += 1
    return t, OK, steps, umax, worst_rel
