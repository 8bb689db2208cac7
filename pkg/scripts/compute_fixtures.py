#!/usr/bin/env python3
"""Recompute the frozen oracle values used in the test suite.

Every value asserted against a literal in tests/ comes from one of the
independent routes below: fixed-step classical RK4 integrations and
arbitrary-precision quadrature, none of which share code with the adaptive
production paths.  Run this script to regenerate the numbers.
"""

import numpy as np
from numba import njit

import mpmath as mp


@njit(cache=True)
def _rk4_pressure_centerline(m, h):
    """Backward RK4 along the normalized Darcy pressure profile.

    Integrates zeta'' = -(zeta'^2 + 2 y zeta')/((m-1) zeta) from the front
    seed at y = 1 - d down to y = 0 with fixed step h; returns
    (zeta(0), zeta'(0)).
    """
    d = 1e-10
    y = 1.0 - d
    z = 2.0 * d - d * d / m
    w = -2.0 + 2.0 * d / m
    n = int(y / h)
    hh = y / n
    for _ in range(n):
        k1z = w
        k1w = -(w * w + 2.0 * y * w) / ((m - 1.0) * z)
        z2 = z - 0.5 * hh * k1z
        w2 = w - 0.5 * hh * k1w
        k2z = w2
        k2w = -(w2 * w2 + 2.0 * (y - 0.5 * hh) * w2) / ((m - 1.0) * z2)
        z3 = z - 0.5 * hh * k2z
        w3 = w - 0.5 * hh * k2w
        k3z = w3
        k3w = -(w3 * w3 + 2.0 * (y - 0.5 * hh) * w3) / ((m - 1.0) * z3)
        z4 = z - hh * k3z
        w4 = w - hh * k3w
        k4z = w4
        k4w = -(w4 * w4 + 2.0 * (y - hh) * w4) / ((m - 1.0) * z4)
        z -= hh / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        w -= hh / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        y -= hh
    return z, w


def y0_oracle(m, theta, h=1e-6):
    z0, _ = _rk4_pressure_centerline(m, h)
    Theta = m / (m - 1.0) * theta ** (m - 1.0)
    return float(np.sqrt(Theta / z0))


def l_of_b_oracle_mpmath(theta, sigma, p, m, b, dps=30):
    """Width l(b) by tanh-sinh quadrature in arbitrary precision."""
    mp.mp.dps = dps
    th, pp, mm, bb = (mp.mpf(repr(v)) for v in (theta, p, m, b))

    def inner(q):
        return mp.quad(lambda r: r ** (mm - 1) * (r - th) ** pp, [q, th + bb])

    def outer(q):
        return mm * q ** (mm - 1) / mp.sqrt(2 * mm * inner(q))

    val = mp.quad(outer, [th, th + bb])
    return float(val)


@njit(cache=True)
def _rk4_phi(p, m, theta, gamma, Y, h):
    """Fixed-step RK4 for the semilinear decay profile; returns tables."""
    d = m * theta ** (m - 1.0)
    n = int(Y / h)
    ys = np.empty(n // 1000 + 1)
    ps = np.empty(n // 1000 + 1)
    y = 0.0
    phi = gamma
    dphi = 0.0
    k = 0
    ys[0] = 0.0
    ps[0] = gamma
    for i in range(n):
        def f(yv, a, b):
            return -(a / (p - 1.0) + 0.5 * yv * b + abs(a) ** (p - 1.0) * a) / d
        k1a = dphi
        k1b = f(y, phi, dphi)
        a2 = phi + 0.5 * h * k1a
        b2 = dphi + 0.5 * h * k1b
        k2a = b2
        k2b = f(y + 0.5 * h, a2, b2)
        a3 = phi + 0.5 * h * k2a
        b3 = dphi + 0.5 * h * k2b
        k3a = b3
        k3b = f(y + 0.5 * h, a3, b3)
        a4 = phi + h * k3a
        b4 = dphi + h * k3b
        k4a = b4
        k4b = f(y + h, a4, b4)
        phi += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        dphi += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        y += h
        if (i + 1) % 1000 == 0:
            k += 1
            ys[k] = y
            ps[k] = phi
    return ys[:k + 1], ps[:k + 1]


def A_oracle(p, m, theta, gamma, Y=2000.0, h=2e-4):
    ys, ps = _rk4_phi(p, m, theta, gamma, Y, h)
    sel = ys >= Y / 10.0
    return float(np.mean(ys[sel] ** (2.0 / (p - 1.0)) * ps[sel]))


def main():
    print("# frozen oracle values (see tests/)")
    print("y0(m=2, theta=0.5)  =", repr(y0_oracle(2.0, 0.5)))
    print("y0(m=2, theta=0.3)  =", repr(y0_oracle(2.0, 0.3)))
    print("y0(m=3, theta=0.5)  =", repr(y0_oracle(3.0, 0.5)))
    print("l(b=0.01; th=0.3, sig=0.02, p=2, m=2) =",
          repr(l_of_b_oracle_mpmath(0.3, 0.02, 2.0, 2.0, 0.01)))
    gm4 = ((4.0 - 3.0) / (2 * 4.0 - 2.0)) ** (1.0 / 3.0)
    gm5 = ((5.0 - 3.0) / (2 * 5.0 - 2.0)) ** (1.0 / 4.0)
    print("A(p=4, m=2, th=0.5, gamma=0.3*gmax) =",
          repr(A_oracle(4.0, 2.0, 0.5, 0.3 * gm4)))
    print("A(p=5, m=2, th=0.5, gamma=0.3*gmax) =",
          repr(A_oracle(5.0, 2.0, 0.5, 0.3 * gm5)))


if __name__ == "__main__":
    main()
