"""The mixture field u(theta) and its parameter partials up to total order 3.

u is the kernel/source convolution

    heat:     u(x, t) = int Phi(x - xi, t) f(xi) dxi
    laplace:  u(x, y) = int Phi(x, y - xi) f(xi) dxi

Partials are computed by differentiation under the integral sign using the
closed-form kernel partials, never by finite differences of u: third-order
differences of a quadrature output would amplify noise, while
under-the-integral differentiation keeps every entry at quadrature accuracy.
All ten entries share one truncation window / transform so mixed partials
are mutually consistent.  Finite differences remain a test oracle only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .kernels import MULTI_INDICES, DomainError, Family, fundamental_partial_values
from .quadrature import QuadratureConfig, default_config, integrate
from .sources import ImproperUniform, PointMass, SourceSpec, source_pdf, validate

__all__ = [
    "MIN_SCALE",
    "ParamPoint",
    "DerivBundle",
    "LogDerivBundle",
    "field_derivs",
    "log_derivs",
    "pde_residual",
]

# The closed forms carry 1/t (heat) and 1/x (laplace) singularities; keep the
# scale-like parameter bounded away from the boundary.
MIN_SCALE = 1e-8


@dataclass(frozen=True)
class ParamPoint:
    """A point on the two-parameter manifold: (x, t) for heat, (x, y) for laplace."""

    family: Family
    p1: float
    p2: float

    @property
    def scale(self) -> float:
        """Kernel scale variable: t for heat, x for laplace."""
        return self.p2 if self.family is Family.HEAT else self.p1

    @property
    def location(self) -> float:
        """Location-like variable paired with the integration variable."""
        return self.p1 if self.family is Family.HEAT else self.p2

    def require_valid(self) -> None:
        if not (math.isfinite(self.p1) and math.isfinite(self.p2)):
            raise DomainError(f"parameter point must be finite, got {self}")
        if self.scale < MIN_SCALE:
            name = "t" if self.family is Family.HEAT else "x"
            raise DomainError(
                f"{name} must be >= {MIN_SCALE} for the {self.family.value} family, "
                f"got {self.scale}")


@dataclass(frozen=True)
class DerivBundle:
    """All partials d^i_1 d^j_2 u at theta, keyed by (i, j); err is the worst
    quadrature error estimate across entries."""

    theta: ParamPoint
    values: Mapping[tuple[int, int], float]
    err: float

    def __getitem__(self, idx: tuple[int, int]) -> float:
        return self.values[idx]

    @property
    def u(self) -> float:
        return self.values[(0, 0)]


@dataclass(frozen=True)
class LogDerivBundle:
    """Partials of ln u, same index set; entry (0, 0) is ln u itself."""

    theta: ParamPoint
    values: Mapping[tuple[int, int], float]

    def __getitem__(self, idx: tuple[int, int]) -> float:
        return self.values[idx]


def field_derivs(source: SourceSpec, theta: ParamPoint,
                 cfg: QuadratureConfig | None = None) -> DerivBundle:
    """Evaluate u and all partials up to total order 3 at theta.

    PointMass collapses to a single kernel evaluation; ImproperUniform gives
    the analytic bundle u == 1 (the kernel integrates to one at every theta).
    """
    theta.require_valid()
    validate(source)
    family, scale, loc = theta.family, theta.scale, theta.location
    if isinstance(source, ImproperUniform):
        values = {idx: (1.0 if idx == (0, 0) else 0.0) for idx in MULTI_INDICES}
        return DerivBundle(theta, values, 0.0)
    if isinstance(source, PointMass):
        w = loc - source.xi0
        values = {idx: float(fundamental_partial_values(family, scale, w, idx))
                  for idx in MULTI_INDICES}
        return DerivBundle(theta, values, 0.0)
    cfg = cfg if cfg is not None else default_config(family, source, theta)
    domain = cfg.window if cfg.window is not None else (-math.inf, math.inf)
    values: dict[tuple[int, int], float] = {}
    worst = 0.0
    for idx in MULTI_INDICES:
        def integrand(xi, idx=idx):
            return fundamental_partial_values(family, scale, loc - np.asarray(xi), idx) \
                * source_pdf(source, xi)

        res = integrate(integrand, domain, cfg)
        values[idx] = res.value
        worst = max(worst, res.err_estimate)
    return DerivBundle(theta, values, worst)


def log_derivs(bundle: DerivBundle) -> LogDerivBundle:
    """Convert u-partials to ln(u)-partials by the bivariate chain rule."""
    u = bundle.u
    if not u > 0.0:
        raise DomainError(f"ln u requires u > 0, got u = {u}")
    r = {idx: bundle[idx] / u for idx in MULTI_INDICES}  # v-ratios u_ij / u
    g1, g2 = r[(1, 0)], r[(0, 1)]
    out = {
        (0, 0): math.log(u),
        (1, 0): g1,
        (0, 1): g2,
        (2, 0): r[(2, 0)] - g1 * g1,
        (1, 1): r[(1, 1)] - g1 * g2,
        (0, 2): r[(0, 2)] - g2 * g2,
        (3, 0): r[(3, 0)] - 3.0 * g1 * r[(2, 0)] + 2.0 * g1**3,
        (2, 1): r[(2, 1)] - g2 * r[(2, 0)] - 2.0 * g1 * r[(1, 1)] + 2.0 * g1 * g1 * g2,
        (1, 2): r[(1, 2)] - g1 * r[(0, 2)] - 2.0 * g2 * r[(1, 1)] + 2.0 * g2 * g2 * g1,
        (0, 3): r[(0, 3)] - 3.0 * g2 * r[(0, 2)] + 2.0 * g2**3,
    }
    return LogDerivBundle(bundle.theta, out)


def pde_residual(bundle: DerivBundle, family: Family) -> float:
    """u_t - u_xx (heat) or u_xx + u_yy (laplace); zero for exact solutions."""
    if family is Family.HEAT:
        return bundle[(0, 1)] - bundle[(2, 0)]
    return bundle[(2, 0)] + bundle[(0, 2)]
