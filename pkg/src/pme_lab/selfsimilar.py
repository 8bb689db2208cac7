"""Self-similar boundary-fed profile and the source-type closed form.

shoot_xi solves the profile problem xi'' = -(2y/m) xi^((1-m)/m) xi' with
xi(0) = theta^m, a first zero at y0, and a Darcy front there (the pressure
zeta = m/(m-1) xi^((m-1)/m) reaches 0 with slope -2 y0).  This is the
profile of the level-theta boundary-fed free-boundary problem, and its
front constant y0 sets the leading front law r(t) ~ 2 y0 sqrt(t).  Forward
integration is useless here: the Darcy connection is a separatrix, so the
profile is integrated backward from the front (the stable direction) in
the pressure variable and matched to the centerline value by the exact
scaling y -> lambda y, zeta -> lambda^2 zeta of the pressure equation.

barenblatt supplies the closed-form source solution of the reaction-free
equation as an independent solver oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .errors import ProfileError


@dataclass
class XiProfile:
    """Monotone decreasing profile table on [0, y0]; immutable once built."""

    m: float
    theta: float
    ys: np.ndarray
    xi: np.ndarray
    dxi: np.ndarray
    y0: float

    @cached_property
    def _xi_interp(self):
        return PchipInterpolator(self.ys, self.xi, extrapolate=False)

    @cached_property
    def _dxi_interp(self):
        return PchipInterpolator(self.ys, self.dxi, extrapolate=False)

    def xi_at(self, y):
        y = np.asarray(y, dtype=float)
        out = np.where(y >= self.y0, 0.0,
                       np.nan_to_num(self._xi_interp(np.clip(y, 0.0, self.y0))))
        return np.clip(out, 0.0, None)

    def dxi_at(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y >= self.y0, 0.0,
                        np.nan_to_num(self._dxi_interp(np.clip(y, 0.0, self.y0))))


_FRONT_SEED = 1e-10


def _zeta_rhs(m):
    def rhs(y, w):
        return (w[1], -(w[1] * w[1] + 2.0 * y * w[1]) / ((m - 1.0) * w[0]))

    return rhs


@lru_cache(maxsize=64)
def _normalized_pressure(m: float, rtol: float = 1e-13):
    """Darcy-front pressure profile normalized to a front at y = 1.

    Integrates backward from the front seeded with the local expansion
    zeta = 2 D - D^2/m (D = 1 - y), which is the unique trajectory whose
    pressure slope stays finite (-2 at the normalized front).  Returns the
    dense solution plus the centerline values (zeta(0), zeta'(0)).
    """
    D = _FRONT_SEED
    sol = solve_ivp(_zeta_rhs(m), (1.0 - D, 0.0),
                    (2.0 * D - D * D / m, -2.0 + 2.0 * D / m),
                    method="DOP853", rtol=rtol, atol=1e-20,
                    dense_output=True)
    if not sol.success:
        raise ProfileError(f"backward profile integration failed: {sol.message}")
    z0, w0 = float(sol.y[0][-1]), float(sol.y[1][-1])
    if z0 <= 0.0 or w0 >= 0.0:
        raise ProfileError("pressure slope lost its sign before the centerline")
    return sol, z0, w0


def shoot_xi(m: float, theta: float, tol: float = 1e-10, *,
             table_points: int | None = None) -> XiProfile:
    """Solve the profile problem and return the table with its front y0.

    The front constant is fixed by matching the centerline pressure
    m/(m-1) theta^(m-1): the pressure equation is invariant under
    y -> lambda y, zeta -> lambda^2 zeta, so the normalized backward-shot
    profile rescales exactly and y0 solves y0^2 zeta_norm(0) = Theta.  The
    match is verified by bracketing+bisection of the residual to
    tolerance tol.
    """
    if m <= 1.0:
        raise ValueError("m must be > 1")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must be in (0,1)")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if table_points is None:
        # table density keeping the interpolated ODE residual under
        # 1e-6 * theta^m; the required density grows as theta shrinks
        table_points = int(np.clip(24000 * (0.3 / theta) ** ((m - 1.0) / 2.0),
                                   24000, 200000))

    sol, z0, w0 = _normalized_pressure(m)
    c = m / (m - 1.0)
    beta = (m - 1.0) / m
    Theta = c * theta ** (m - 1.0)
    y0_direct = math.sqrt(Theta / z0)

    def residual(y):
        return y * y * z0 - Theta

    lo, hi = 0.5 * y0_direct, 2.0 * y0_direct
    if not residual(lo) < 0.0 < residual(hi):
        raise ProfileError("centerline-match root is not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    y0 = 0.5 * (lo + hi)

    # scaled tables; the seeded sliver (1-D, 1] uses the front expansion
    ss = np.linspace(0.0, 1.0, table_points)
    inner = ss <= 1.0 - _FRONT_SEED
    zeta = np.empty_like(ss)
    dzeta = np.empty_like(ss)
    vals = sol.sol(ss[inner])
    zeta[inner] = vals[0]
    dzeta[inner] = vals[1]
    Dd = 1.0 - ss[~inner]
    zeta[~inner] = 2.0 * Dd - Dd * Dd / m
    dzeta[~inner] = -2.0 + 2.0 * Dd / m

    ys = y0 * ss
    zeta = np.clip(y0 * y0 * zeta, 0.0, None)
    dzeta = y0 * dzeta
    xi = (zeta / c) ** (1.0 / beta)
    dxi = dzeta * xi ** (1.0 / m)
    xi[0] = theta**m
    xi[-1] = 0.0
    dxi[-1] = 0.0

    if not np.all(np.diff(ys) > 0.0):
        raise ProfileError("profile table is not strictly increasing in y")
    if not np.all(np.diff(xi) < 0.0):
        raise ProfileError("profile table is not strictly decreasing")
    return XiProfile(m=m, theta=theta, ys=ys, xi=xi, dxi=dxi, y0=y0)


def front_pressure_slope(profile: XiProfile) -> float:
    """Pressure slope at the front; the Darcy law makes it -2 y0."""
    return -2.0 * profile.y0


def eval_e(profile: XiProfile, x, t):
    """Self-similar solution value xi^(1/m)(x / (2 sqrt(t))), zero beyond the front."""
    if np.any(np.asarray(t) <= 0.0):
        raise ValueError("t must be positive")
    y = np.abs(np.asarray(x, dtype=float)) / (2.0 * np.sqrt(t))
    val = profile.xi_at(y) ** (1.0 / profile.m)
    if np.isscalar(x) and np.isscalar(t):
        return float(val)
    return val


def xi_residual(profile: XiProfile, ys=None) -> np.ndarray:
    """Pointwise residual of the profile ODE on the interpolated table."""
    if ys is None:
        ys = np.linspace(0.0, 0.9 * profile.y0, 500)
    ys = np.asarray(ys, dtype=float)
    m = profile.m
    xi = profile.xi_at(ys)
    dxi = profile.dxi_at(ys)
    d2 = profile._dxi_interp.derivative()(np.clip(ys, 0.0, profile.y0))
    return d2 + 2.0 * ys / m * xi ** ((1.0 - m) / m) * dxi


def barenblatt_coefficients(m: float, total_mass: float):
    """(alpha, kappa, C) of the source solution with the given mass."""
    alpha = 1.0 / (m + 1.0)
    kappa = (m - 1.0) / (2.0 * m * (m + 1.0))
    q = 1.0 / (m - 1.0)
    # integral of (1 - s^2)_+^q over [-1, 1]
    shape = math.sqrt(math.pi) * math.gamma(q + 1.0) / math.gamma(q + 1.5)
    C = (total_mass * math.sqrt(kappa) / shape) ** (1.0 / (q + 0.5))
    return alpha, kappa, C


def barenblatt(m: float, total_mass: float, x, t):
    """Closed-form source solution of u_t = (u^m)_xx with the given mass."""
    if np.any(np.asarray(t) <= 0.0):
        raise ValueError("t must be positive")
    if total_mass <= 0.0:
        raise ValueError("total_mass must be positive")
    alpha, kappa, C = barenblatt_coefficients(m, total_mass)
    x = np.asarray(x, dtype=float)
    ta = np.asarray(t, dtype=float)
    core = C - kappa * x**2 * ta ** (-2.0 * alpha)
    val = ta ** (-alpha) * np.clip(core, 0.0, None) ** (1.0 / (m - 1.0))
    if val.ndim == 0:
        return float(val)
    return val


def barenblatt_front(m: float, total_mass: float, t):
    """Support edge sqrt(C/kappa) * t^alpha of the source solution."""
    alpha, kappa, C = barenblatt_coefficients(m, total_mass)
    return math.sqrt(C / kappa) * np.asarray(t) ** alpha
