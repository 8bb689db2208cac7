"""Stationary bump profiles Q_b and their widths.

Q_b solves (Q^m)'' + f(Q) = 0 with Q(0) = theta + b, Q'(0) = 0.  It falls
to theta at l(b); below theta the reaction is off, so Q^m continues
exactly linearly down to zero at the support endpoint L(b).  The widths
obey l(b) ~ b^-(p-1)/2 and L(b) - l(b) ~ b^-(p+1)/2 as b -> 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma as _gamma

from .errors import NumericsError, ProfileError, RangeError
from .reaction import ReactionSpec, eval_f

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def reaction_moment(spec: ReactionSpec, q_lo, q_hi: float):
    """Integral of r^(m-1) f(r) over [q_lo, q_hi], vectorized in q_lo.

    Fixed 64-point Gauss-Legendre; the integrand is smooth on the plateau
    so this is accurate to rounding for the bump amplitudes used here.
    """
    q = np.atleast_1d(np.asarray(q_lo, dtype=float))
    half = 0.5 * (q_hi - q)
    mid = 0.5 * (q_hi + q)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = eval_f(spec, nodes.ravel()).reshape(nodes.shape)
    vals *= nodes ** (spec.m - 1.0)
    out = half * (vals * _GL_WEIGHTS[None, :]).sum(axis=1)
    if np.isscalar(q_lo):
        return float(out[0])
    return out


@dataclass
class QbProfile:
    """Stationary bump with amplitude theta + b and computed widths."""

    spec: ReactionSpec
    b: float
    xs: np.ndarray        # sample points on [0, l_b]
    Qs: np.ndarray
    Ps: np.ndarray        # (Q^m)' along the samples
    l_b: float
    L_b: float
    slope_at_l: float     # (Q^m)'(l_b) < 0

    @cached_property
    def _interp(self):
        return PchipInterpolator(self.xs, self.Qs, extrapolate=False)

    def value(self, x):
        """Profile value at |x|; exact linear-in-Q^m tail on [l_b, L_b]."""
        ax = np.abs(np.asarray(x, dtype=float))
        th = self.spec.theta
        m = self.spec.m
        out = np.zeros_like(ax)
        inner = ax <= self.l_b
        out[inner] = np.nan_to_num(self._interp(ax[inner]), nan=th)
        tail = (~inner) & (ax < self.L_b)
        qm = th**m + self.slope_at_l * (ax[tail] - self.l_b)
        out[tail] = np.clip(qm, 0.0, None) ** (1.0 / m)
        if np.isscalar(x):
            return float(out)
        return out


def _l_upper_bound(spec: ReactionSpec, b: float) -> float:
    """Closed-form upper bound for l(b) used to size the integration span."""
    p, m, th = spec.p, spec.m, spec.theta
    # integral of (1 - x^(p+1))^(-1/2) over [0, 1]
    shape = _gamma(1.0 / (p + 1.0)) * _gamma(0.5) / ((p + 1.0) * _gamma(1.0 / (p + 1.0) + 0.5))
    cp = np.sqrt(m) * (th + b) ** (m - 1.0) / (np.sqrt(2.0 / (p + 1.0)) * th ** ((m - 1.0) / 2.0))
    return float(cp * shape * b ** (-(p - 1.0) / 2.0))


def shoot_qb(spec: ReactionSpec, b: float, *, rtol: float = 1e-12,
             table_points: int = 2000) -> QbProfile:
    """Integrate the bump ODE as the regular system (Q, (Q^m)').

    The system Q' = P/(m Q^(m-1)), P' = -f(Q) starts at (theta+b, 0) and is
    integrated until Q hits theta, which gives l(b) and the interface slope
    (Q^m)'(l(b)).  The support endpoint follows from the exact linear
    continuation of Q^m: L(b) = l(b) + theta^m / |slope|.
    """
    if not 0.0 < b < spec.sigma:
        raise ValueError(f"b must be in (0, sigma), got {b}")
    m, th = spec.m, spec.theta

    def rhs(x, z):
        q, pp = z
        return (pp / (m * q ** (m - 1.0)), -eval_f(spec, q))

    ev = lambda x, z: z[0] - th
    ev.terminal = True
    ev.direction = -1
    span = 1.5 * _l_upper_bound(spec, b) + 5.0
    sol = solve_ivp(rhs, (0.0, span), (th + b, 0.0), method="DOP853",
                    events=(ev,), dense_output=True, rtol=rtol,
                    atol=1e-16)
    if not sol.success:
        raise ProfileError(f"bump integration failed: {sol.message}")
    if not len(sol.t_events[0]):
        raise ProfileError("bump never reached theta within the span bound")
    l_b = float(sol.t_events[0][0])
    slope = float(sol.y_events[0][0][1])
    if not slope < 0.0:
        raise NumericsError("interface slope is not negative: invalid reaction")

    xs = np.linspace(0.0, l_b, table_points)
    z = sol.sol(xs)
    Qs, Ps = z[0].copy(), z[1].copy()
    Qs[0], Ps[0] = th + b, 0.0
    Qs[-1], Ps[-1] = th, slope
    L_b = l_b + th**m / abs(slope)
    return QbProfile(spec=spec, b=b, xs=xs, Qs=Qs, Ps=Ps, l_b=l_b, L_b=L_b,
                     slope_at_l=slope)


def first_integral_residual(profile: QbProfile, n: int = 200) -> float:
    """Worst relative mismatch of ((Q^m)')^2 against 2m * moment(Q).

    Both sides vanish quadratically at x = 0; the denominator is floored at
    a small multiple of the overall scale so the ratio stays meaningful.
    """
    spec = profile.spec
    sel = np.linspace(0, len(profile.xs) - 1, n).astype(int)
    Q = profile.Qs[sel]
    P = profile.Ps[sel]
    rhs = 2.0 * spec.m * reaction_moment(spec, Q, spec.theta + profile.b)
    scale = max(float(np.max(rhs)), 1e-300)
    denom = np.maximum(rhs, 1e-10 * scale)
    return float(np.max(np.abs(P * P - rhs) / denom))


def l_of_b_quadrature(spec: ReactionSpec, b: float,
                      rel_tol: float = 1e-9) -> float:
    """Width l(b) by direct quadrature of the inverse-function integral.

    l(b) = int_theta^(theta+b) m Q^(m-1) dQ / sqrt(2m int_Q^(theta+b) r^(m-1) f(r) dr).
    The substitution Q = theta + b s^(2/(p+1)) normalizes the integrable
    inverse-square-root endpoint singularity at Q = theta + b; adaptive
    quadrature handles the remaining (1-s^2)^(-1/2) edge.
    """
    if not 0.0 < b < spec.sigma:
        raise ValueError(f"b must be in (0, sigma), got {b}")
    m, th, p = spec.m, spec.theta, spec.p
    ex = 2.0 / (p + 1.0)
    q_hi = th + b

    def integrand(s):
        Q = th + b * s**ex
        dQds = b * ex * s ** (ex - 1.0)
        inner = reaction_moment(spec, Q, q_hi)
        return m * Q ** (m - 1.0) * dQds / np.sqrt(2.0 * m * inner)

    with warnings.catch_warnings():
        # the (1-s^2)^(-1/2) edge drives QUADPACK's extrapolation to the
        # roundoff floor, which is the accuracy we want anyway
        warnings.simplefilter("ignore", IntegrationWarning)
        v1, _ = quad(integrand, 0.0, 0.5, epsabs=0.0, epsrel=rel_tol / 2, limit=200)
        v2, _ = quad(integrand, 0.5, 1.0, epsabs=0.0, epsrel=rel_tol / 2, limit=200)
    return float(v1 + v2)


def interface_slope(spec: ReactionSpec, b: float) -> float:
    """(Q^m)'(l(b)) = -sqrt(2m * moment over the full bump)."""
    return -float(np.sqrt(2.0 * spec.m *
                          reaction_moment(spec, spec.theta, spec.theta + b)))


@dataclass
class WidthReport:
    b: float
    l_b: float
    slope: float
    L: float             # l_b + theta^m/|slope|: exact linear tail of Q^m
    L_q_linear: float    # l_b + m theta^m/|slope|: treats Q itself as linear


def L_of_b(spec: ReactionSpec, b: float) -> float:
    """Support endpoint L(b) from quadrature width plus the exact tail."""
    return width_report(spec, b).L


def width_report(spec: ReactionSpec, b: float) -> WidthReport:
    """Both width conventions; the Q^m-linear value is the true support edge."""
    l_b = l_of_b_quadrature(spec, b)
    slope = interface_slope(spec, b)
    th_m = spec.theta**spec.m
    return WidthReport(b=b, l_b=l_b, slope=slope,
                       L=l_b + th_m / abs(slope),
                       L_q_linear=l_b + spec.m * th_m / abs(slope))


def invert_L(spec: ReactionSpec, y: float, tol: float = 1e-9,
             b_hi_frac: float = 1.0 - 1e-6) -> float:
    """Solve L(b) = y by bisection on the strictly decreasing width map."""
    b_hi = spec.sigma * b_hi_frac
    L_hi = L_of_b(spec, b_hi)
    if y < L_hi:
        raise RangeError(f"y={y:g} below the range of L (min ~ {L_hi:g})")
    b_lo = 0.5 * b_hi
    for _ in range(200):
        if L_of_b(spec, b_lo) > y:
            break
        b_lo *= 0.25
    else:
        raise NumericsError("could not bracket L(b) = y")
    L_lo = L_of_b(spec, b_lo)
    while (b_hi - b_lo) > tol * 0.5 * (b_hi + b_lo):
        mid = 0.5 * (b_lo + b_hi)
        L_mid = L_of_b(spec, mid)
        if not (L_hi - 1e-9 * abs(L_hi) <= L_mid <= L_lo + 1e-9 * abs(L_lo)):
            raise NumericsError(
                "L(b) is not monotone on the bisection interval; the width "
                "constraint of the reaction likely fails")
        if L_mid > y:
            b_lo, L_lo = mid, L_mid
        else:
            b_hi, L_hi = mid, L_mid
    return 0.5 * (b_lo + b_hi)
