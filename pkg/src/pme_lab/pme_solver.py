"""Explicit conservative solver for u_t = (u^m)_xx + f(u) on a 1-D grid.

Produces time traces of the free boundaries l(t), r(t), the ignition level
set, the centerline value, and the mass.  The grid auto-expands (doubling
toward the moving side, zero fill) so compactly supported data never touch
the boundary.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    BlowUpError,
    CFLViolation,
    FrontError,
    NonMonotoneProfileError,
    StabilityError,
)
from .reaction import ReactionSpec

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

SUPPORT_TOL = 1e-12
CSV_HEADER = "t,l,r,theta_pos,u_center,mass"


@dataclass(frozen=True)
class Grid:
    """Uniform node grid on [x_min, x_max] with n cells (n+1 nodes)."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"need at least 16 cells, got {self.n}")
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be below x_max")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n + 1)

    @property
    def center_index(self) -> int:
        i = int(round(-self.x_min / self.dx))
        return min(max(i, 0), self.n)

    @classmethod
    def symmetric(cls, x_max: float, n: int) -> "Grid":
        if n % 2:
            n += 1
        return cls(-x_max, x_max, n)

    @classmethod
    def half_line(cls, x_max: float, n: int) -> "Grid":
        """[0, x_max] grid for runs with the centerline value held fixed."""
        return cls(0.0, x_max, n)


@dataclass
class State:
    """Spatial sample of u at time t; values live on the grid nodes."""

    t: float
    u: np.ndarray

    def copy(self) -> "State":
        return State(self.t, self.u.copy())


@dataclass
class Snapshot:
    t: float
    x: np.ndarray
    u: np.ndarray


@dataclass
class FrontTrace:
    """Time series of free boundaries and companion diagnostics."""

    spec: ReactionSpec | None
    grid: Grid
    t: np.ndarray
    l: np.ndarray
    r: np.ndarray
    theta_pos: np.ndarray
    u_center: np.ndarray
    u_max: np.ndarray
    mass: np.ndarray
    snapshots: list = field(default_factory=list)
    final_state: State | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def to_csv(self, path=None) -> str:
        """Serialize samples as CSV (shortest round-trip float formatting)."""
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for i in range(len(self.t)):
            row = [self.t[i], self.l[i], self.r[i], self.theta_pos[i],
                   self.u_center[i], self.mass[i]]
            buf.write(",".join("" if np.isnan(v) else repr(float(v)) for v in row))
            buf.write("\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path, spec: ReactionSpec | None = None,
                 grid: Grid | None = None) -> "FrontTrace":
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError(f"unexpected trace header in {path!r}")
        cols = [[], [], [], [], [], []]
        for ln in lines[1:]:
            parts = ln.split(",")
            for c, val in zip(cols, parts):
                c.append(float(val) if val else np.nan)
        t, l, r, theta_pos, u_center, m = (np.asarray(c) for c in cols)
        if grid is None:
            grid = Grid.symmetric(max(1.0, float(np.nanmax(np.abs(r))) * 1.5), 64)
        # the producing run's cell size is not recorded in the CSV schema
        return cls(spec, grid, t, l, r, theta_pos, u_center,
                   np.full_like(t, np.nan), m,
                   meta={"source": str(path), "dx": 0.0})


def cfl_bound(state: State, spec: ReactionSpec, grid: Grid,
              with_reaction: bool = True) -> float:
    """Largest stable explicit step for the current state."""
    umax = float(np.max(state.u))
    K = spec.lipschitz_K if with_reaction else 0.0
    denom = 2.0 * spec.m * umax ** (spec.m - 1.0) if umax > 0.0 else 0.0
    denom += grid.dx**2 * K
    if denom <= 0.0:
        return np.inf
    return grid.dx**2 / denom


def step(state: State, spec: ReactionSpec, grid: Grid, dt: float, *,
         with_reaction: bool = True, hold_left: float | None = None,
         clamp_rel: float = 1e-14) -> State:
    """One explicit update u += dt*((u^m)_xx + f(u)); endpoints held.

    dt must respect the CFL bound dx^2/(2 m max(u)^(m-1) + dx^2 K).
    Negative values within clamp_rel*max(u) are clamped to zero; anything
    larger raises StabilityError.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    bound = cfl_bound(state, spec, grid, with_reaction)
    if dt > bound * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:g} exceeds CFL bound {bound:g}")
    u = state.u.copy()
    um = np.empty_like(u)
    umax_prev = float(np.max(u)) or 1.0
    hl = hold_left is not None
    umax, worst = kernels._one_step(
        u, um, dt, grid.dx**2, spec.m, *spec.f_consts(),
        with_reaction, hl, hold_left if hl else 0.0)
    if worst / umax_prev > clamp_rel:
        raise StabilityError(
            f"clamped negative of relative size {worst / umax_prev:.3g}")
    return State(state.t + dt, u)


def support_bounds(state: State, grid: Grid, support_tol: float = SUPPORT_TOL):
    """(l, r) of the support above support_tol, linearly interpolated.

    Returns None for an extinct (all below tolerance) state.
    """
    u = state.u
    idx = np.nonzero(u > support_tol)[0]
    if idx.size == 0:
        return None
    x = grid.x()
    jl, jr = idx[0], idx[-1]
    if jr < len(u) - 1:
        r = x[jr] + grid.dx * (u[jr] - support_tol) / (u[jr] - u[jr + 1])
    else:
        r = x[jr]
    if jl > 0:
        l = x[jl] - grid.dx * (u[jl] - support_tol) / (u[jl] - u[jl - 1])
    else:
        l = x[jl]
    return float(l), float(r)


def level_set_theta(state: State, spec: ReactionSpec, grid: Grid):
    """Position of the downward crossing of level theta on x > 0.

    Returns None when the centerline value is at or below theta.  Raises
    NonMonotoneProfileError when the profile crosses theta more than once
    on x >= 0 (the data then violate the symmetric-decreasing assumption).
    """
    i0 = grid.center_index
    u = state.u[i0:]
    if u[0] <= spec.theta:
        return None
    sgn = np.sign(u - spec.theta)
    nz = sgn[sgn != 0.0]
    crossings = int(np.sum(nz[1:] != nz[:-1]))
    if crossings > 1:
        raise NonMonotoneProfileError(
            f"{crossings} crossings of theta on x>=0")
    below = np.nonzero(u < spec.theta)[0]
    if below.size == 0:
        return None
    k = below[0] - 1
    x = grid.x()[i0:]
    pos = x[k] + grid.dx * (u[k] - spec.theta) / (u[k] - u[k + 1])
    return float(pos)


def to_pressure(state: State, m: float) -> np.ndarray:
    """Pointwise pressure transform v = m/(m-1) u^(m-1)."""
    return m / (m - 1.0) * state.u ** (m - 1.0)


def mass(state: State, grid: Grid) -> float:
    """Trapezoid integral of u over the grid."""
    return float(_trapezoid(state.u, dx=grid.dx))


def darcy_front_speed(trace: FrontTrace, state: State, m: float,
                      support_tol: float = SUPPORT_TOL) -> float:
    """Front speed estimate -v_x at the right interface.

    Uses a one-sided second-order difference of the pressure over the last
    three nodes inside the front of `state`, which must live on the trace's
    grid.  Diagnostic against the finite-difference slope of r(t).
    """
    grid = trace.grid
    if len(state.u) != grid.n + 1:
        raise ValueError("state does not live on the trace grid")
    idx = np.nonzero(state.u > support_tol)[0]
    if idx.size < 3:
        raise FrontError("front thinner than 3 cells")
    j = idx[-1]
    if j < 2:
        raise FrontError("front touches the left boundary")
    v = to_pressure(state, m)
    vx = (3.0 * v[j] - 4.0 * v[j - 1] + v[j - 2]) / (2.0 * grid.dx)
    return float(-vx)


def sign_changes(state: State, grid: Grid, profile, atol: float = 0.0) -> int:
    """Count strict sign alternations of u - Q_b over x in [0, max(r, L_b)].

    `profile` is a stationary bump with a .value(x) evaluator and support
    endpoint L_b; runs of zeros are ignored.
    """
    i0 = grid.center_index
    x = grid.x()[i0:]
    sb = support_bounds(state, grid)
    r = sb[1] if sb is not None else 0.0
    hi = max(r, profile.L_b)
    sel = x <= hi
    d = state.u[i0:][sel] - profile.value(x[sel])
    s = np.sign(np.where(np.abs(d) <= atol, 0.0, d))
    s = s[s != 0.0]
    if s.size < 2:
        return 0
    return int(np.sum(s[1:] != s[:-1]))


class _TraceBuilder:
    def __init__(self, spec, grid):
        self.spec = spec
        self.grid = grid
        self.rows = {k: [] for k in
                     ("t", "l", "r", "theta_pos", "u_center", "u_max", "mass")}
        self.snapshots = []
        self.meta = {}

    def add(self, t, l, r, theta_pos, u_center, u_max, m):
        for k, v in zip(self.rows, (t, l, r, theta_pos, u_center, u_max, m)):
            self.rows[k].append(v)

    def build(self, grid, final_state=None) -> FrontTrace:
        arrays = {k: np.asarray(v, dtype=float) for k, v in self.rows.items()}
        return FrontTrace(self.spec, grid, arrays["t"], arrays["l"],
                          arrays["r"], arrays["theta_pos"], arrays["u_center"],
                          arrays["u_max"], arrays["mass"],
                          snapshots=self.snapshots, final_state=final_state,
                          meta=dict(self.meta))


def _expand(grid: Grid, u: np.ndarray, left: bool, right: bool):
    """Double the domain toward the moving side(s), zero filling."""
    n = grid.n
    add_l = n if left else 0
    add_r = n if right else 0
    new = np.zeros(n + 1 + add_l + add_r)
    new[add_l:add_l + n + 1] = u
    width = grid.x_max - grid.x_min
    g = Grid(grid.x_min - (width if left else 0.0),
             grid.x_max + (width if right else 0.0),
             n + add_l + add_r)
    return g, new


def evolve(u0: State, spec: ReactionSpec, grid: Grid, horizon: float,
           sample_every: float, *, safety: float = 0.4,
           with_reaction: bool = True, hold_left: float | None = None,
           expand: bool = True, snapshot_stride: int = 0,
           stop_when=None, support_tol: float = SUPPORT_TOL,
           blowup_cap: float = 10.0, clamp_rel: float = 1e-14,
           expansion_margin: float = 10.0, record_level_set: bool = True,
           max_steps_per_interval: int = 200_000_000) -> FrontTrace:
    """March u0 to time `horizon`, sampling the trace every `sample_every`.

    horizon is an absolute end time (u0.t may be nonzero).  Per-step dt is
    safety times the CFL bound.  When the support comes within
    expansion_margin*dx of a boundary the domain doubles toward that side.
    `stop_when(partial_trace)` is checked at each sample and ends the run
    early when it returns True.  `snapshot_stride` > 0 stores a full (x, u)
    snapshot every that many samples.
    """
    if horizon <= u0.t:
        raise ValueError("horizon must exceed the initial time")
    if sample_every <= 0.0:
        raise ValueError("sample_every must be positive")
    if hold_left is None:
        if u0.u[0] != 0.0 or u0.u[-1] != 0.0:
            raise ValueError("initial state must vanish at the domain endpoints")
    if np.any(u0.u < 0.0):
        raise ValueError("initial state must be nonnegative")
    # the guard is about runaway growth (impossible for an ignition-type
    # reaction), so legitimately large initial data must clear it
    blowup_cap = max(blowup_cap, 1.5 * float(np.max(u0.u)) + 1.0)

    t0 = u0.t
    u = u0.u.copy()
    g = grid
    if len(u) != g.n + 1:
        raise ValueError("initial state does not match the grid")
    builder = _TraceBuilder(spec, g)
    builder.meta.update(dict(safety=safety, with_reaction=with_reaction,
                             hold_left=hold_left, sample_every=sample_every,
                             horizon=horizon, dx=g.dx))
    um = np.empty_like(u)
    consts = spec.f_consts()
    hl = hold_left is not None
    lv = hold_left if hl else 0.0
    worst_clamp = 0.0

    n_samples = int(np.floor((horizon - t0) / sample_every + 1e-9)) + 1
    t = t0
    k = 0
    stopped = False
    while True:
        state = State(t, u)
        sb = support_bounds(state, g, support_tol)
        if sb is None:
            l = r = np.nan
            builder.meta["extinct_at"] = t
        else:
            l, r = sb
        ic = g.center_index
        ucen = float(u[ic])
        umax = float(np.max(u))
        tp = np.nan
        if record_level_set:
            pos = level_set_theta(state, spec, g)
            tp = pos if pos is not None else np.nan
        builder.add(t, l, r, tp, ucen, umax, mass(state, g))
        if snapshot_stride and k % snapshot_stride == 0:
            builder.snapshots.append(Snapshot(t, g.x(), u.copy()))
        if stop_when is not None and stop_when(builder.build(g)) and k > 0:
            stopped = True
            break
        k += 1
        if k >= n_samples:
            break

        if expand and sb is not None:
            need_r = g.x_max - r < expansion_margin * g.dx
            need_l = (not hl) and (l - g.x_min < expansion_margin * g.dx)
            if need_l or need_r:
                g, u = _expand(g, u, need_l, need_r)
                um = np.empty_like(u)

        t_next = t0 + k * sample_every
        K = spec.lipschitz_K if with_reaction else 0.0
        t, status, steps, umax, wrel = kernels.advance(
            u, um, t, t_next, g.dx, spec.m, K, safety, *consts,
            with_reaction, hl, lv, blowup_cap, clamp_rel,
            max_steps_per_interval)
        worst_clamp = max(worst_clamp, wrel)
        if status == kernels.CLAMP_FAIL:
            raise StabilityError(
                f"negative value beyond clamp tolerance at t={t:g}")
        if status == kernels.BLOW_UP:
            raise BlowUpError(f"blow-up guard: max u > {blowup_cap:g} at t={t:g}")
        if status == kernels.STEP_LIMIT:
            raise StabilityError("step budget exhausted within one interval")

    builder.meta["worst_clamp_rel"] = worst_clamp
    builder.meta["stopped_early"] = stopped
    builder.meta["final_dx"] = g.dx
    return builder.build(g, final_state=State(t, u.copy()))
