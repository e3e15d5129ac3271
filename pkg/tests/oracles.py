"""Independent numerical oracles shared by the test suite.

Nothing in this module calls the closed-form code paths it is used to check:
derivatives come from central finite differences with Richardson (Neville)
extrapolation, quantiles from bisection on erfc, and the Gaussian-mixture
reference values from textbook convolution/moment identities.
"""

from __future__ import annotations

import math

import numpy as np

# 1-D central stencils with O(h^2) leading error, as (offset, weight) pairs;
# weight is divided by h^order at evaluation time.
_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


def _stencil_eval(f, a: float, b: float, i: int, j: int, ha: float, hb: float) -> float:
    total = 0.0
    for oa, wa in _STENCILS[i]:
        for ob, wb in _STENCILS[j]:
            total += wa * wb * f(a + oa * ha, b + ob * hb)
    return total / (ha**i * hb**j)


def fd_partial(f, a: float, b: float, i: int, j: int,
               ha: float, hb: float, levels: int = 5) -> float:
    """Mixed partial d^i_a d^j_b f by central differences with Neville
    extrapolation in h^2 (both steps halved jointly); returns the tableau
    entry with the smallest successive-difference error estimate."""
    estimates = [_stencil_eval(f, a, b, i, j, ha / 2**k, hb / 2**k)
                 for k in range(levels)]
    tableau = [list(estimates)]
    best, best_err = estimates[-1], math.inf
    for m in range(1, levels):
        prev = tableau[-1]
        row = []
        fac = 4.0**m
        for k in range(len(prev) - 1):
            row.append((fac * prev[k + 1] - prev[k]) / (fac - 1.0))
        tableau.append(row)
        for k in range(len(row)):
            err = abs(row[k] - prev[k + 1]) + abs(row[k] - prev[k])
            if err < best_err:
                best, best_err = row[k], err
    return best


def richardson_d1(f, x: float) -> float:
    """First derivative with the documented base step eps^(1/3) * max(1, |x|)
    and two Richardson levels."""
    h = np.finfo(float).eps ** (1.0 / 3.0) * max(1.0, abs(x))

    def central(step):
        return (f(x + step) - f(x - step)) / (2.0 * step)

    d0, d1, d2 = central(h), central(h / 2), central(h / 4)
    r0 = (4 * d1 - d0) / 3
    r1 = (4 * d2 - d1) / 3
    return (16 * r1 - r0) / 15


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF by bisection on the complementary error
    function (upper tail 1 - p = erfc(z/sqrt(2)) / 2)."""
    target = 2.0 * (1.0 - p)
    lo, hi = 0.0, 50.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.erfc(mid / math.sqrt(2.0)) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# heat family with a Gaussian source: everything in closed form.
#
# u(x, t) is the N(mu0, s0^2 + 2t) density in x.  The compound density in xi
# is N(m, V) with m = (x s0^2 + 2 t mu0)/(s0^2 + 2t), V = 2 t s0^2/(s0^2+2t),
# the scores are polynomials in the centered variable, and all expectations
# reduce to Gaussian moments.


def heat_gaussian_u_partials(mu0: float, s0: float, x: float, t: float) -> dict:
    """Exact u-partials (multi-index keyed) of the Gaussian convolution.

    u is the N(mu0, s0^2 + 2t) density in x and solves u_t = u_xx, so every
    d/dt is two d/dx; x-derivatives follow the Hermite recursion
    d^n phi = (-1)^n He_n(z/sqrt(s)) s^(-n/2) phi.
    """
    s = s0 * s0 + 2.0 * t
    z = x - mu0

    def u_deriv_x(n: int) -> float:
        base = math.exp(-z * z / (2 * s)) / math.sqrt(2 * math.pi * s)
        arg = z / math.sqrt(s)
        he = [1.0, arg]
        for k in range(2, n + 1):
            he.append(arg * he[k - 1] - (k - 1) * he[k - 2])
        return (-1) ** n * he[n] * s ** (-n / 2.0) * base

    return {(i, j): u_deriv_x(i + 2 * j)
            for i in range(4) for j in range(4) if i + j <= 3}


def heat_gaussian_lnu_partials(mu0: float, s0: float, x: float, t: float) -> dict:
    """Exact ln u partials for the Gaussian convolution."""
    s = s0 * s0 + 2.0 * t
    z = x - mu0
    return {
        (1, 0): -z / s,
        (0, 1): -1.0 / s + z * z / (s * s),
        (2, 0): -1.0 / s,
        (1, 1): 2.0 * z / (s * s),
        (0, 2): 2.0 / (s * s) - 4.0 * z * z / s**3,
        (3, 0): 0.0,
        (2, 1): 2.0 / (s * s),
        (1, 2): -8.0 * z / s**3,
        (0, 3): -8.0 / s**3 + 24.0 * z * z / s**4,
    }


def heat_gaussian_geometry(mu0: float, s0: float, x: float, t: float) -> dict:
    """Exact direct-route metric and tensor from Gaussian moments."""
    s = s0 * s0 + 2.0 * t
    v = 2.0 * t * s0 * s0 / s          # posterior variance
    d = -2.0 * t * (x - mu0) / s       # posterior mean minus x
    return {
        "g11": v / (4 * t * t),
        "g12": d * v / (4 * t**3),
        "g22": v * v / (8 * t**4) + d * d * v / (4 * t**4),
        "t111": 0.0,
        "t112": -v * v / (16 * t**4),
        "t122": -d * v * v / (8 * t**5),
        "t222": -(v**3) / (16 * t**6) - 3 * d * d * v * v / (16 * t**6),
    }


# ---------------------------------------------------------------------------
# laplace family with a Cauchy source: u is a Cauchy density of scale x+gamma.


def laplace_cauchy_lnu_partials(muc: float, gc: float, x: float, y: float) -> dict:
    """Exact ln u partials; u(x, y) = (1/pi) a / (a^2 + b^2) with a = x + gamma,
    b = y - mu, so ln u = ln a - ln(a^2 + b^2) - ln pi."""
    a, b = x + gc, y - muc
    r = a * a + b * b
    return {
        (1, 0): 1 / a - 2 * a / r,
        (0, 1): -2 * b / r,
        (2, 0): -1 / a**2 - 2 / r + 4 * a * a / (r * r),
        (1, 1): 4 * a * b / (r * r),
        (0, 2): -2 / r + 4 * b * b / (r * r),
        (3, 0): 2 / a**3 + 12 * a / (r * r) - 16 * a**3 / r**3,
        (2, 1): 4 * b / (r * r) - 16 * a * a * b / r**3,
        (1, 2): 4 * a / (r * r) - 16 * a * b * b / r**3,
        (0, 3): 12 * b / (r * r) - 16 * b**3 / r**3,
    }
