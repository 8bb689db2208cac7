"""Decay profile of the semilinear surrogate n_t = m theta^(m-1) n_xx + n^p.

For p > 3 and small enough centerline value gamma the self-similar profile
phi stays positive and decays algebraically, y^(2/(p-1)) phi(y) -> A > 0.
The profile powers the explicit sub/supersolution pair that pins the
centerline decay rate u(0,t) - theta ~ t^(-1/(p-1)).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .errors import ProfileError, ValidityError, WindowError
from .pme_solver import FrontTrace


def gamma_max(p: float) -> float:
    """Upper end ((p-3)/(2p-2))^(1/(p-1)) of the admissible centerline range."""
    if p <= 3.0:
        raise ValueError(f"gamma_max requires p > 3, got {p}")
    return ((p - 3.0) / (2.0 * p - 2.0)) ** (1.0 / (p - 1.0))


def default_span(p: float) -> float:
    # convergence to the algebraic tail slows as p -> 3+ (exponent 2/(p-1))
    return 1.0e4 if p >= 3.5 else 1.0e5


@dataclass
class PhiProfile:
    p: float
    m: float
    theta: float
    gamma: float
    ys: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    A: float
    Y: float
    plateau_slope: float

    @cached_property
    def _interp(self):
        return PchipInterpolator(self.ys, self.phi, extrapolate=False)

    def phi_at(self, y):
        """phi(|y|); beyond the integrated span uses the A y^(-2/(p-1)) tail."""
        ay = np.abs(np.asarray(y, dtype=float))
        out = np.where(
            ay <= self.Y,
            np.nan_to_num(self._interp(np.clip(ay, 0.0, self.Y))),
            self.A * np.maximum(ay, self.Y) ** (-2.0 / (self.p - 1.0)),
        )
        if np.isscalar(y):
            return float(out)
        return out

    def phi2_at(self, y):
        """phi'' recovered from the profile equation (no differencing)."""
        ay = np.abs(np.asarray(y, dtype=float))
        phi = self.phi_at(ay)
        dphi = np.nan_to_num(PchipInterpolator(self.ys, self.dphi,
                                               extrapolate=False)(ay))
        return -(phi / (self.p - 1.0) + 0.5 * ay * dphi +
                 np.abs(phi) ** (self.p - 1.0) * phi) / (self.m * self.theta ** (self.m - 1.0))


def solve_phi(p: float, m: float, theta: float, gamma: float,
              Y: float | None = None, *, rtol: float = 1e-11,
              plateau_gate: float = 1e-3, table_points: int = 4000) -> PhiProfile:
    """Integrate the profile ODE outward and estimate the tail constant A.

    A is the average of y^(2/(p-1)) phi(y) over the last decade of [0, Y];
    the run is rejected if phi crosses zero before Y or if the plateau is
    not flat to `plateau_gate` in log-log slope.
    """
    if p <= 3.0:
        raise ValueError("profile requires p > 3")
    gmax = gamma_max(p)
    if not 0.0 < gamma < gmax:
        raise ValueError(f"gamma must be in (0, {gmax:g}), got {gamma}")
    if Y is None:
        Y = default_span(p)
    if Y < 100.0:
        raise ValueError("integration span Y must be at least 100")

    d = m * theta ** (m - 1.0)

    def rhs(y, z):
        phi, dphi = z
        return (dphi, -(phi / (p - 1.0) + 0.5 * y * dphi +
                        abs(phi) ** (p - 1.0) * phi) / d)

    ev = lambda y, z: z[0]
    ev.terminal = True
    ev.direction = -1
    ys = np.concatenate([np.linspace(0.0, 1.0, table_points // 4, endpoint=False),
                         np.geomspace(1.0, Y, table_points - table_points // 4)])
    sol = solve_ivp(rhs, (0.0, Y), (gamma, 0.0), method="LSODA",
                    events=(ev,), t_eval=ys, rtol=rtol, atol=gamma * 1e-15)
    if len(sol.t_events[0]):
        raise ProfileError(
            f"phi crossed zero at y={sol.t_events[0][0]:.4g}: gamma outside the "
            "admissible behavior at this resolution")
    if not sol.success:
        raise ProfileError(f"profile integration failed: {sol.message}")

    phi, dphi = sol.y[0], sol.y[1]
    ex = 2.0 / (p - 1.0)
    tail = sol.t >= Y / 10.0
    z = sol.t[tail] ** ex * phi[tail]
    A = float(np.mean(z))
    coef = np.polyfit(np.log(sol.t[tail]), np.log(z), 1)
    slope = float(coef[0])
    if abs(slope) > plateau_gate:
        raise ProfileError(
            f"plateau not reached: |dlog(y^{{2/(p-1)}}phi)/dlogy| = {abs(slope):.2e} "
            f"> {plateau_gate:g}; increase Y")
    return PhiProfile(p=p, m=m, theta=theta, gamma=gamma, ys=sol.t,
                      phi=phi, dphi=dphi, A=A, Y=float(Y),
                      plateau_slope=slope)


@dataclass
class ConsistencyReport:
    A: float
    A_from_dphi: float
    A_from_d2phi: float
    rel_dev_dphi: float
    rel_dev_d2phi: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.rel_dev_dphi <= self.tol and self.rel_dev_d2phi <= self.tol


def estimate_A_consistency(profile: PhiProfile, tol: float = 0.02) -> ConsistencyReport:
    """Cross-check A against the derivative limits of the profile tail.

    The tail obeys phi' y^(2/(p-1)+1) -> -2A/(p-1) and
    phi'' y^(2/(p-1)+2) -> (p+1)/(p-1) * 2/(p-1) * A.
    """
    p = profile.p
    ex = 2.0 / (p - 1.0)
    tail = profile.ys >= profile.Y / 10.0
    y = profile.ys[tail]
    a1 = -np.mean(profile.dphi[tail] * y ** (ex + 1.0)) * (p - 1.0) / 2.0
    d2 = profile.phi2_at(y)
    a2 = np.mean(d2 * y ** (ex + 2.0)) * (p - 1.0) ** 2 / (2.0 * (p + 1.0))
    r1 = abs(a1 - profile.A) / profile.A
    r2 = abs(a2 - profile.A) / profile.A
    return ConsistencyReport(A=profile.A, A_from_dphi=float(a1),
                             A_from_d2phi=float(a2), rel_dev_dphi=float(r1),
                             rel_dev_d2phi=float(r2), tol=tol)


def eval_n(profile: PhiProfile, x, t):
    """Similarity solution n(x, t) = t^(-1/(p-1)) phi(|x| / sqrt(t))."""
    if np.any(np.asarray(t) <= 0.0):
        raise ValueError("t must be positive")
    y = np.abs(np.asarray(x, dtype=float)) / np.sqrt(t)
    out = np.asarray(t, dtype=float) ** (-1.0 / (profile.p - 1.0)) * profile.phi_at(y)
    if np.isscalar(x) and np.isscalar(t):
        return float(out)
    return out


def supersolution_w(profile: PhiProfile, spec, x, t):
    """Upper comparison function theta + n(x,t)/2; valid once n < sigma."""
    n = eval_n(profile, x, t)
    if np.any(np.asarray(n) >= spec.sigma):
        raise ValidityError("n(x,t) >= sigma: outside the validity window")
    return spec.theta + 0.5 * n


def subsolution_w(k: float, a: float, p: float, theta: float, x, t):
    """Lower comparison function theta + k/(a t + x^2)^(1/(p-1))."""
    if k <= 0.0 or a <= 0.0:
        raise ValueError("k and a must be positive")
    base = a * np.asarray(t, dtype=float) + np.asarray(x, dtype=float) ** 2
    if np.any(base <= 0.0):
        raise ValidityError("a t + x^2 must be positive (t > 0 when x = 0)")
    out = theta + k * base ** (-1.0 / (p - 1.0))
    if np.isscalar(x) and np.isscalar(t):
        return float(out)
    return out


def subsolution_margin(k: float, a: float, p: float, theta: float, m: float, x, t):
    """Sufficiency margin a - 2m w^(m-1) of the lower comparison function."""
    w = subsolution_w(k, a, p, theta, x, t)
    return a - 2.0 * m * np.asarray(w) ** (m - 1.0)


@dataclass
class CenterlineBound:
    C: float
    T: float
    p: float
    slope: float
    expected_slope: float
    dips_below_theta: bool
    n_samples: int

    @property
    def ok(self) -> bool:
        return self.C > 0.0 and not self.dips_below_theta


def centerline_lower_bound(trace: FrontTrace, p: float, T: float = 1.0) -> CenterlineBound:
    """Largest C with u(0,t) >= theta + C (t+T)^(-1/(p-1)) along the trace.

    Also reports the log-log slope of u(0,t) - theta against t + T for a
    fit-quality check (the expected slope is -1/(p-1)).
    """
    theta = trace.spec.theta
    sel = trace.t >= T
    if not np.any(sel):
        raise WindowError("no samples at or beyond t = T")
    t = trace.t[sel]
    exc = trace.u_center[sel] - theta
    dips = bool(np.any(exc <= 0.0))
    if dips:
        C = 0.0
        slope = np.nan
    else:
        C = float(np.min(exc * (t + T) ** (1.0 / (p - 1.0))))
        coef = np.polyfit(np.log(t + T), np.log(exc), 1)
        slope = float(coef[0])
    return CenterlineBound(C=C, T=T, p=p, slope=slope,
                           expected_slope=-1.0 / (p - 1.0),
                           dips_below_theta=dips, n_samples=int(sel.sum()))
