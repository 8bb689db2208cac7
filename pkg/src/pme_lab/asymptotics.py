"""Front-trajectory fits against the propagation laws.

The leading law is r(t) ~ 2 y0 sqrt(t); the correction r - 2 y0 sqrt(t)
carries the exponent corridor [1/2 - 1/(p-1), 1/2 - 1/(p+1)] for p > 3 and
a bounded-below / t^(1/2 - 1/(p+1))-above corridor for 1 < p <= 3.  y0 is
always supplied by the profile module, never co-fitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindowError
from .pme_solver import FrontTrace, Grid
from .selfsimilar import XiProfile, eval_e


def trailing_window(trace: FrontTrace, window=None):
    """Indices of the trailing half of the trace in log-t (or a given [ta, tb])."""
    t = trace.t
    pos = t > 0.0
    if not np.any(pos):
        raise WindowError("trace has no positive sample times")
    if window is None:
        t_min = float(np.min(t[pos]))
        t_max = float(np.max(t))
        t_a = float(np.exp(0.5 * (np.log(t_min) + np.log(t_max))))
        t_b = t_max
    else:
        t_a, t_b = window
    sel = (t >= t_a) & (t <= t_b) & pos & ~np.isnan(trace.r)
    if sel.sum() < 30:
        raise WindowError(f"window [{t_a:g}, {t_b:g}] holds {int(sel.sum())} "
                          "samples; need >= 30")
    return sel, (t_a, t_b)


@dataclass
class SqrtFit:
    y0_fit: float
    intercept: float
    window: tuple
    n: int


def fit_sqrt_law(trace: FrontTrace, window=None, *,
                 require_decade: bool = True) -> SqrtFit:
    """Least-squares slope of r against sqrt(t) over the trailing window, /2."""
    sel, win = trailing_window(trace, window)
    if require_decade and win[1] < 10.0 * win[0]:
        raise WindowError("trailing window spans less than one decade in t")
    s = np.sqrt(trace.t[sel])
    slope, intercept = np.polyfit(s, trace.r[sel], 1)
    return SqrtFit(y0_fit=float(slope) / 2.0, intercept=float(intercept),
                   window=win, n=int(sel.sum()))


@dataclass
class CorrectionFit:
    q_fit: float
    stderr: float
    amplitude: float
    unresolved: bool
    n_floored: int
    window: tuple
    n: int


def fit_correction(trace: FrontTrace, y0: float, window=None) -> CorrectionFit:
    """Log-log slope of max(r - 2 y0 sqrt(t), dx) over the trailing window.

    y0 must come from the profile shoot, not from a fit of the same trace.
    Corrections below one grid cell are floored at dx and flagged; a fully
    floored window is reported as unresolved.
    """
    sel, win = trailing_window(trace, window)
    # traces imported from CSV carry dx = 0 (unknown); keep a tiny positive
    # floor so sub-floor corrections still flag without breaking the log
    dx = max(trace.meta.get("dx", trace.grid.dx), 1e-12)
    t = trace.t[sel]
    corr = trace.r[sel] - 2.0 * y0 * np.sqrt(t)
    floored = corr < dx
    n_floored = int(floored.sum())
    if n_floored == len(corr):
        return CorrectionFit(np.nan, np.nan, np.nan, True, n_floored, win,
                             len(corr))
    corr = np.maximum(corr, dx)
    lx, ly = np.log(t), np.log(corr)
    coef, cov = np.polyfit(lx, ly, 1, cov=True)
    return CorrectionFit(q_fit=float(coef[0]), stderr=float(np.sqrt(cov[0, 0])),
                         amplitude=float(np.exp(coef[1])), unresolved=False,
                         n_floored=n_floored, window=win, n=len(corr))


@dataclass
class BoundReport:
    p: float
    y0: float
    H_fit: float          # smallest H with r <= 2 y0 sqrt(t) + H t^(1/2-1/(p+1))
    h_fit: float          # p > 3: largest h with r >= 2 y0 sqrt(t) + h t^(1/2-1/(p-1));
                          # p <= 3: smallest h with r >= 2 y0 sqrt(t) - h
    unshifted_min: float  # min of r - 2 y0 sqrt(t) over the window
    window: tuple
    n: int


def check_bounds(trace: FrontTrace, y0: float, p: float, window=None) -> BoundReport:
    """Extremal constants making the two-sided front bounds hold on the window."""
    sel, win = trailing_window(trace, window)
    t = trace.t[sel]
    resid = trace.r[sel] - 2.0 * y0 * np.sqrt(t)
    H = float(np.max(resid / t ** (0.5 - 1.0 / (p + 1.0))))
    if p > 3.0:
        h = float(np.min(resid / t ** (0.5 - 1.0 / (p - 1.0))))
    else:
        h = float(np.max(-resid))
    return BoundReport(p=p, y0=y0, H_fit=H, h_fit=h,
                       unshifted_min=float(np.min(resid)), window=win,
                       n=int(sel.sum()))


@dataclass
class ThetaLevelBound:
    G_fit: float
    slope: float
    expected_slope: float
    window: tuple
    n: int


def theta_level_bound(trace: FrontTrace, p: float, window=None) -> ThetaLevelBound:
    """Minimal G with theta_pos <= G t^(1/2-1/(p+1)) over the trailing window."""
    sel, win = trailing_window(trace, window)
    tp = trace.theta_pos[sel]
    if np.all(np.isnan(tp)):
        raise WindowError("theta_pos absent over the window "
                          "(centerline fell below theta)")
    t = trace.t[sel][~np.isnan(tp)]
    tp = tp[~np.isnan(tp)]
    ex = 0.5 - 1.0 / (p + 1.0)
    if np.all(tp == 0.0):
        return ThetaLevelBound(0.0, np.nan, ex, win, len(tp))
    G = float(np.max(tp / t**ex))
    pos = tp > 0.0
    slope = float(np.polyfit(np.log(t[pos]), np.log(tp[pos]), 1)[0])
    return ThetaLevelBound(G_fit=G, slope=slope, expected_slope=ex, window=win,
                           n=len(tp))


@dataclass
class OrderingReport:
    max_violation: float
    t_worst: float
    x_worst: float
    n_points: int

    def ok(self, tol: float) -> bool:
        return self.max_violation <= tol


def _as_evaluator(obj):
    if callable(obj):
        return obj
    if isinstance(obj, FrontTrace):
        if not obj.snapshots:
            raise ValueError("trace has no snapshots; grids not alignable")
        times = np.array([s.t for s in obj.snapshots])

        def ev(x, t):
            i = int(np.argmin(np.abs(times - t)))
            if abs(times[i] - t) > 1e-9 * max(1.0, abs(t)):
                raise ValueError(f"no snapshot at t={t:g}; grids not alignable")
            s = obj.snapshots[i]
            return np.interp(x, s.x, s.u)

        return ev
    raise TypeError(f"cannot evaluate ordering side of type {type(obj)!r}")


def verify_ordering(lower, upper, xs, ts, region=None) -> OrderingReport:
    """Max violation of lower <= upper over the (xs, ts) grid.

    Sides are callables (x, t) -> values or traces with snapshots.  An
    optional region(x_array, t) -> mask restricts the comparison.
    """
    lo = _as_evaluator(lower)
    up = _as_evaluator(upper)
    worst, tw, xw, n = -np.inf, np.nan, np.nan, 0
    xs = np.asarray(xs, dtype=float)
    for t in np.asarray(ts, dtype=float):
        mask = np.ones_like(xs, dtype=bool) if region is None else region(xs, t)
        if not np.any(mask):
            continue
        x = xs[mask]
        d = np.asarray(lo(x, t)) - np.asarray(up(x, t))
        n += len(x)
        i = int(np.argmax(d))
        if d[i] > worst:
            worst, tw, xw = float(d[i]), float(t), float(x[i])
    if n == 0:
        raise ValueError("empty comparison region")
    return OrderingReport(max_violation=worst, t_worst=tw, x_worst=xw,
                          n_points=n)


def front_supersolution(profile: XiProfile, M: float, p: float):
    """Translated self-similar upper barrier e(x - M t^(1/2-1/(p+1)), t).

    Valid (an upper solution) on x >= shift(t); the returned callable maps
    x < shift(t) to the centerline value so that region masks are easy.
    """
    ex = 0.5 - 1.0 / (p + 1.0)

    def shift(t):
        return M * t**ex

    def ev(x, t):
        arg = np.clip(np.asarray(x, dtype=float) - shift(t), 0.0, None)
        return eval_e(profile, arg, t)

    ev.shift = shift
    return ev


def scaled_subsolution(profile: XiProfile, a: float, k: float, theta: float,
                       p: float, T: float, T1: float):
    """Lower barrier (1 + alpha(t)) e(x, beta(t)^2) of the p > 3 argument."""
    s = 1.0 / (p - 1.0)

    def alpha(t):
        return a / theta * (T + t) ** (-s)

    def beta(t):
        tau = T1 + t
        return np.sqrt(tau) * (1.0 + k * tau ** (-s))

    def ev(x, t):
        return (1.0 + alpha(t)) * eval_e(profile, x, beta(t) ** 2)

    ev.alpha, ev.beta = alpha, beta
    return ev


def scaled_subsolution_margin(m: float, p: float, a: float, k: float,
                              theta: float, T: float, T1: float, ts):
    """Margin (1+alpha)^(m-1) - d(beta^2)/dt; positive means valid barrier."""
    ts = np.asarray(ts, dtype=float)
    s = 1.0 / (p - 1.0)
    alpha = a / theta * (T + ts) ** (-s)
    tau = T1 + ts
    dbeta2 = (1.0 + k * tau ** (-s)) * (1.0 + k * (1.0 - 2.0 * s) * tau ** (-s))
    return (1.0 + alpha) ** (m - 1.0) - dbeta2


def synthetic_trace(ts, r_law, theta_law=None, u_center_law=None,
                    spec=None, dx: float = 1e-6) -> FrontTrace:
    """Build a trace from closed-form laws; part of the fitting test surface."""
    ts = np.asarray(ts, dtype=float)
    r = np.asarray(r_law(ts), dtype=float)
    tp = (np.asarray(theta_law(ts), dtype=float) if theta_law is not None
          else np.full_like(ts, np.nan))
    uc = (np.asarray(u_center_law(ts), dtype=float) if u_center_law is not None
          else np.full_like(ts, np.nan))
    span = max(2.0, float(np.nanmax(r)) * 1.5)
    grid = Grid.symmetric(span, 64)
    tr = FrontTrace(spec, grid, ts, -r, r, tp, uc, uc.copy(),
                    np.full_like(ts, np.nan), meta={"dx": dx, "synthetic": True})
    return tr
