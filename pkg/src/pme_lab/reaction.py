"""Ignition-type reaction nonlinearity and its pressure-side counterpart.

The reaction f vanishes on [0, theta], equals (x - theta)**p on the plateau
[theta, theta + sigma], is brought back to zero at x = 1 by a C1 cubic
blend, and continues with a linear negative tail beyond 1.  The pressure
counterpart g is the same source seen by v = m/(m-1) * u**(m-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from numba import njit


@njit(cache=True)
def _f_scalar(x, theta, sigma, p, delta, k1):
    if x <= theta:
        return 0.0
    if x <= theta + sigma:
        return (x - theta) ** p
    if x <= 1.0:
        # cubic blend h with h(theta+sigma)=1, h'(theta+sigma)=0, h(1)=0,
        # h'(1) = -1/delta; strictly positive on the open interval
        tau = (x - theta - sigma) / delta
        h = (1.0 - tau) * (1.0 + tau - tau * tau)
        return (x - theta) ** p * h
    return -k1 * (x - 1.0)


@njit(cache=True)
def _f_fill(x, out, theta, sigma, p, delta, k1):
    for i in range(x.shape[0]):
        out[i] = _f_scalar(x[i], theta, sigma, p, delta, k1)


@dataclass(frozen=True)
class ReactionSpec:
    """Parameters of the ignition reaction; immutable once validated.

    theta: ignition level in (0, 1).
    sigma: width of the pure power plateau, in (0, 1 - theta).
    p: plateau exponent, > 1.
    m: diffusion exponent of u_t = (u^m)_xx, > 1 (carried here because the
       pressure-side reaction depends on it).
    u_cap: upper state bound used for the Lipschitz estimate.
    """

    theta: float
    sigma: float
    p: float
    m: float
    u_cap: float = 2.0
    lipschitz_K: float = field(init=False, default=0.0, compare=False)

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must be in (0,1), got {self.theta}")
        if not 0.0 < self.sigma < 1.0 - self.theta:
            raise ValueError(f"sigma must be in (0, 1-theta), got {self.sigma}")
        if not self.p > 1.0:
            raise ValueError(f"p must be > 1, got {self.p}")
        if not self.m > 1.0:
            raise ValueError(f"m must be > 1, got {self.m}")
        if not self.u_cap > 1.0:
            raise ValueError(f"u_cap must be > 1, got {self.u_cap}")
        object.__setattr__(self, "lipschitz_K", _lipschitz_bound(self))

    @property
    def blend_delta(self) -> float:
        return 1.0 - self.theta - self.sigma

    @property
    def tail_slope(self) -> float:
        # |d/dx (x-theta)^p h(x)| at x=1; makes f C1 across the sign change
        return (1.0 - self.theta) ** self.p / self.blend_delta

    @property
    def pressure_theta(self) -> float:
        """Pressure value corresponding to u = theta."""
        return self.m / (self.m - 1.0) * self.theta ** (self.m - 1.0)

    def f_consts(self):
        return (self.theta, self.sigma, self.p, self.blend_delta, self.tail_slope)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("lipschitz_K")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ReactionSpec":
        return cls(theta=d["theta"], sigma=d["sigma"], p=d["p"], m=d["m"],
                   u_cap=d.get("u_cap", 2.0))


def _lipschitz_bound(spec: ReactionSpec, n: int = 10_000) -> float:
    xs = np.linspace(0.0, spec.u_cap, n)
    fs = np.empty_like(xs)
    _f_fill(xs, fs, *spec.f_consts())
    return float(np.max(np.abs(np.gradient(fs, xs))))


def eval_f(spec: ReactionSpec, x):
    """Reaction value at state x >= 0.  Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("state value must be >= 0")
    out = np.empty_like(arr, shape=arr.size)
    _f_fill(arr.ravel(), out, *spec.f_consts())
    out = out.reshape(arr.shape)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def eval_g(spec: ReactionSpec, v):
    """Pressure-side reaction g(v) = m u^{m-2} f(u) with u = ((m-1)v/m)^{1/(m-1)}.

    The value at v = 0 is 0: f vanishes on [0, theta], which beats the
    (possibly negative) power of u in front.
    """
    arr = np.asarray(v, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("pressure value must be >= 0")
    m = spec.m
    u = ((m - 1.0) / m * arr) ** (1.0 / (m - 1.0))
    fu = eval_f(spec, u)
    fu_arr = np.asarray(fu, dtype=float)
    with np.errstate(divide="ignore"):
        pref = np.where(fu_arr != 0.0, m * np.asarray(u) ** (m - 2.0), 0.0)
    out = pref * fu_arr
    if np.isscalar(v) or arr.ndim == 0:
        return float(out)
    return out


@dataclass
class ValidationReport:
    violations: list
    warnings: list
    lipschitz_K: float | None
    sigma_constraint_lhs: float | None = None
    sigma_constraint_rhs: float | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(theta, sigma, p, m, u_cap=2.0, n_samples=4001) -> ValidationReport:
    """Check the structural conditions of the reaction family.

    Never raises: structural violations ("theta+sigma<1" etc.) and sampled
    sign/monotonicity failures are collected in the report.  The width
    constraint (theta+sigma)^m - theta^m < theta^m m(p-1)/(p(m-1)) required
    by the profile-width monotonicity guarantee is reported as a warning,
    not a violation: the solver does not need it.
    """
    violations: list[str] = []
    warnings: list[str] = []
    if not 0.0 < theta < 1.0:
        violations.append("theta in (0,1)")
    if sigma <= 0.0:
        violations.append("sigma > 0")
    if theta > 0 and sigma > 0 and theta + sigma >= 1.0:
        violations.append("theta+sigma<1")
    if p <= 1.0:
        violations.append("p > 1")
    if m <= 1.0:
        violations.append("m > 1")
    if violations:
        return ValidationReport(violations, warnings, None)

    spec = ReactionSpec(theta=theta, sigma=sigma, p=p, m=m, u_cap=u_cap)
    eps = 1e-9

    xs = np.linspace(0.0, theta, n_samples)
    if np.any(eval_f(spec, xs) != 0.0):
        violations.append("f == 0 on [0, theta]")

    xs = np.linspace(theta + eps, 1.0 - eps, n_samples)
    if not np.all(eval_f(spec, xs) > 0.0):
        violations.append("f > 0 on (theta, 1)")

    xs = np.linspace(1.0, u_cap, n_samples)
    if not np.all(eval_f(spec, xs) <= 0.0):
        violations.append("f <= 0 on [1, u_cap]")

    xs = np.linspace(theta + eps, theta + sigma - eps, n_samples)
    slopes = np.diff(eval_f(spec, xs)) / np.diff(xs)
    if not np.all(slopes > 0.0):
        violations.append("f' > 0 on (theta, theta+sigma)")

    lhs = (theta + sigma) ** m - theta**m
    rhs = theta**m * m * (p - 1.0) / (p * (m - 1.0))
    if not lhs < rhs:
        warnings.append(
            f"width constraint violated: (theta+sigma)^m - theta^m = {lhs:.6g} "
            f">= {rhs:.6g}; l(b), L(b) monotonicity is not guaranteed"
        )

    return ValidationReport(violations, warnings, spec.lipschitz_K, lhs, rhs)
