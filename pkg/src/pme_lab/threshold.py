"""Vanishing/spreading classification and sharp-threshold bisection.

The vanishing certificate is rigorous: once max u < theta the reaction is
off everywhere and the dynamics are mass-dissipating pure diffusion.  No
computable spreading certificate exists, so spreading is a flagged
heuristic: sustained centerline excess above theta + sigma together with
a front advancing well beyond the self-similar rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BracketError, NumericsError
from .pme_solver import FrontTrace, Grid, State, evolve
from .reaction import ReactionSpec
from .selfsimilar import shoot_xi

VANISH_EPS = 1e-10
SPREAD_SPEED_FACTOR = 3.0


@dataclass(frozen=True)
class PsiShape:
    """Symmetric single-bump initial datum (tent or box)."""

    kind: str
    width: float
    height: float

    def __post_init__(self):
        if self.kind not in ("tent", "box"):
            raise ValueError(f"unknown psi shape {self.kind!r}")
        if self.width <= 0.0 or self.height <= 0.0:
            raise ValueError("width and height must be positive")

    def sample(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        half = self.width / 2.0
        if self.kind == "tent":
            return self.height * np.clip(1.0 - np.abs(x) / half, 0.0, None)
        return np.where(np.abs(x) < half, self.height, 0.0)

    @property
    def ident(self) -> str:
        return f"{self.kind}-w{self.width:g}-h{self.height:g}"


@dataclass
class Verdict:
    kind: str                 # vanishing | spreading | undecided
    certificate: str
    horizon_used: float
    t_decided: float | None = None


@dataclass
class ProbeRecord:
    lam: float
    kind: str                 # certified verdict or "undecided"
    side: str                 # "vanishing" | "spreading" (bisection side taken)
    certificate: str
    horizon_used: float
    tie_break: bool


@dataclass
class CriticalBracket:
    lambda_lo: float
    lambda_hi: float
    iterations: int
    psi: PsiShape
    spec: ReactionSpec
    probes: list
    run_params: dict = field(default_factory=dict)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lambda_lo + self.lambda_hi)

    @property
    def rel_width(self) -> float:
        return (self.lambda_hi - self.lambda_lo) / self.midpoint

    def monotone_audit(self) -> bool:
        """Certified vanishing probes must all sit below certified spreading ones."""
        van = [p.lam for p in self.probes if p.kind == "vanishing"]
        spr = [p.lam for p in self.probes if p.kind == "spreading"]
        if not van or not spr:
            return True
        return max(van) < min(spr)


@lru_cache(maxsize=32)
def _y0_for(m: float, theta: float) -> float:
    return shoot_xi(m, theta, tol=1e-9).y0


def classify(trace: FrontTrace, spec: ReactionSpec,
             dwell: float | None = None) -> Verdict:
    """Classify a run as vanishing / spreading / undecided.

    Vanishing fires at the first sample with max u < theta - 1e-10 (then
    the reaction is off for good).  The heuristic spreading certificate
    fires at time T when, over the trailing window [T - dwell, T] with
    T >= 2*dwell, the centerline stays at or above theta + sigma and the
    front advanced by at least SPREAD_SPEED_FACTOR times the self-similar
    advance 2 y0 (sqrt(T) - sqrt(T - dwell)) (and by at least 10 dx).
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    horizon = float(trace.t[-1])
    if dwell is None:
        dwell = 0.1 * (trace.t[-1] - trace.t[0])

    umax = trace.u_max
    if np.all(np.isnan(umax)):
        umax = trace.u_center
    hit = np.nonzero(umax < spec.theta - VANISH_EPS)[0]
    t_vanish = float(trace.t[hit[0]]) if hit.size else np.inf

    t_spread = np.inf
    cert_spread = ""
    y0 = _y0_for(spec.m, spec.theta)
    dx = trace.meta.get("dx", trace.grid.dx)
    ts = trace.t
    ok_center = trace.u_center >= spec.theta + spec.sigma
    for j in range(len(ts)):
        T = ts[j]
        if T < trace.t[0] + 2.0 * dwell or not ok_center[j]:
            continue
        i = int(np.searchsorted(ts, T - dwell))
        if i >= j or np.isnan(trace.r[i]) or np.isnan(trace.r[j]):
            continue
        if not np.all(ok_center[i:j + 1]):
            continue
        advance = trace.r[j] - trace.r[i]
        need = max(SPREAD_SPEED_FACTOR * 2.0 * y0 * (np.sqrt(T) - np.sqrt(ts[i])),
                   10.0 * dx)
        if advance >= need:
            t_spread = float(T)
            cert_spread = (
                f"heuristic: u_center >= theta+sigma on [{ts[i]:.6g}, {T:.6g}] "
                f"and front advanced {advance:.6g} >= {need:.6g}")
            break

    if t_vanish <= t_spread and np.isfinite(t_vanish):
        i = hit[0]
        return Verdict("vanishing",
                       f"max u = {umax[i]:.6g} < theta - {VANISH_EPS:g} "
                       f"at t = {t_vanish:.6g}", horizon, t_vanish)
    if np.isfinite(t_spread):
        return Verdict("spreading", cert_spread, horizon, t_spread)
    return Verdict("undecided", "no certificate fired before the horizon",
                   horizon, None)


def _certificate_stopper(spec: ReactionSpec, dwell: float):
    def stop(trace: FrontTrace) -> bool:
        return classify(trace, spec, dwell).kind != "undecided"

    return stop


def _run_probe(lam: float, psi: PsiShape, spec: ReactionSpec, grid: Grid,
               horizon: float, sample_every: float, dwell: float,
               safety: float, extend_factor: float, tie_break_level: float):
    u0 = State(0.0, lam * psi.sample(grid.x()))
    if lam == 0.0:
        return Verdict("vanishing", "zero datum", 0.0, 0.0), "vanishing"
    trace = evolve(u0, spec, grid, horizon, sample_every, safety=safety,
                   stop_when=_certificate_stopper(spec, dwell))
    verdict = classify(trace, spec, dwell)
    if verdict.kind == "undecided" and extend_factor > 1.0:
        ext = evolve(trace.final_state, spec, trace.grid,
                     trace.t[0] + extend_factor * (horizon - trace.t[0]),
                     sample_every, safety=safety,
                     stop_when=_certificate_stopper(spec, dwell))
        merged = _merge_traces(trace, ext)
        verdict = classify(merged, spec, dwell)
        trace = merged
    if verdict.kind == "undecided":
        umax_end = trace.u_max[-1]
        side = "vanishing" if umax_end < tie_break_level else "spreading"
        verdict = Verdict("undecided",
                          f"tie-break to {side} side: max u = {umax_end:.6g} "
                          f"vs theta + sigma/2 = {tie_break_level:.6g} at horizon",
                          float(trace.t[-1]), None)
        return verdict, side
    return verdict, verdict.kind


def _merge_traces(a: FrontTrace, b: FrontTrace) -> FrontTrace:
    keep = b.t > a.t[-1]
    cat = lambda u, v: np.concatenate([u, v[keep]])
    return FrontTrace(a.spec, b.grid, cat(a.t, b.t), cat(a.l, b.l),
                      cat(a.r, b.r), cat(a.theta_pos, b.theta_pos),
                      cat(a.u_center, b.u_center), cat(a.u_max, b.u_max),
                      cat(a.mass, b.mass), snapshots=a.snapshots + b.snapshots,
                      final_state=b.final_state,
                      meta={**a.meta, **{"extended_to": b.t[-1]}})


def bisect_lambda(psi: PsiShape, spec: ReactionSpec, grid: Grid,
                  horizon: float, tol: float, *, sample_every: float = 1.0,
                  dwell: float | None = None, safety: float = 0.4,
                  extend_factor: float = 4.0, max_probes: int = 80,
                  seed_lambda: float = 1.0) -> CriticalBracket:
    """Bracket the sharp multiplier between vanishing and spreading.

    Seeds by doubling/halving from seed_lambda until both certified
    verdicts are seen, then bisects.  Undecided probes are assigned a side
    by the tie-break rule (max u at horizon end vs theta + sigma/2) and
    recorded as such; the bracket endpoints in the record keep their
    certified/tie-break provenance.
    """
    if dwell is None:
        dwell = 0.1 * horizon
    tie_level = spec.theta + spec.sigma / 2.0
    probes: list[ProbeRecord] = []

    def probe(lam: float) -> str:
        verdict, side = _run_probe(lam, psi, spec, grid, horizon, sample_every,
                                   dwell, safety, extend_factor, tie_level)
        probes.append(ProbeRecord(lam=lam, kind=verdict.kind, side=side,
                                  certificate=verdict.certificate,
                                  horizon_used=verdict.horizon_used,
                                  tie_break=verdict.kind == "undecided"))
        return side

    lam = seed_lambda
    side0 = probe(lam)
    lo = hi = None
    if side0 == "vanishing":
        lo = lam
        for _ in range(60):
            lam *= 2.0
            if probe(lam) == "spreading":
                hi = lam
                break
            lo = lam
    else:
        hi = lam
        for _ in range(60):
            lam *= 0.5
            if probe(lam) == "vanishing":
                lo = lam
                break
            hi = lam
    if lo is None or hi is None:
        raise BracketError("bracket seeding failed after 60 doublings")

    while (hi - lo) / (0.5 * (hi + lo)) > tol:
        if len(probes) >= max_probes:
            raise BracketError(f"probe budget {max_probes} exhausted at "
                               f"relative width {(hi - lo) / hi:.3g}")
        mid = 0.5 * (lo + hi)
        if probe(mid) == "vanishing":
            lo = mid
        else:
            hi = mid

    return CriticalBracket(lambda_lo=lo, lambda_hi=hi, iterations=len(probes),
                           psi=psi, spec=spec, probes=probes,
                           run_params=dict(horizon=horizon,
                                           sample_every=sample_every,
                                           dwell=dwell, safety=safety,
                                           grid=(grid.x_min, grid.x_max, grid.n),
                                           extend_factor=extend_factor))


def near_critical_run(bracket: CriticalBracket, side: str, offset: float,
                      horizon: float, *, sample_every: float | None = None,
                      snapshot_stride: int = 0) -> FrontTrace:
    """Run at lambda_mid*(1 +/- offset): the best available transition proxy.

    Stops at the first definitive certificate so the returned trace is
    transition-like throughout.  Raises if the verdict fires before 10% of
    the horizon (offset too large for this bracket).
    """
    if side not in ("above", "below"):
        raise ValueError("side must be 'above' or 'below'")
    if bracket.rel_width > offset / 10.0:
        raise ValueError("bracket not resolved to tol <= offset/10")
    lam = bracket.midpoint * (1.0 + offset if side == "above" else 1.0 - offset)
    gx = bracket.run_params["grid"]
    grid = Grid(gx[0], gx[1], gx[2])
    se = sample_every if sample_every is not None else bracket.run_params["sample_every"]
    dwell = bracket.run_params["dwell"]
    spec = bracket.spec
    u0 = State(0.0, lam * bracket.psi.sample(grid.x()))
    trace = evolve(u0, spec, grid, horizon, se,
                   safety=bracket.run_params["safety"],
                   snapshot_stride=snapshot_stride,
                   stop_when=_certificate_stopper(spec, dwell))
    verdict = classify(trace, spec, dwell)
    t_end = float(trace.t[-1])
    if verdict.kind != "undecided" and t_end < 0.1 * horizon:
        raise NumericsError(
            f"verdict {verdict.kind!r} fired at t={t_end:g} before 10% of the "
            f"horizon: offset {offset:g} too large")
    trace.meta.update(side=side, offset=offset, lam=lam,
                      verdict=verdict.kind, decided_at=verdict.t_decided)
    return trace
