"""Residual verification: kernel identities and closed-vs-direct consistency.

Each kernel family satisfies a set of nonlinear identities tying products of
first partials of h to linear combinations of higher partials; these are
what turn raw score moments into field derivatives.  The suite evaluates
every identity as LHS - RHS from the hard-coded kernel partials at seeded
random points and aggregates residuals.

For the heat family the original identity tables are exact.  For the
laplace family most of the original table entries do not hold for the
actual kernel (re-derivation shows coefficient errors); only the mixed
second-order identity survives.  The suite measures the original forms as
given (PRINTED) and the re-derived forms (CORRECTED); a failed identity
never aborts a run, because documenting the failure is the product.

The consistency suite drives the geometry comparison over a parameter grid
and adds normalization, zero-mean-score and index-permutation-symmetry
residuals.  Entries whose PRINTED closed form is known to disagree with the
direct oracle are classified as expected discrepancies, not failures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .field import ParamPoint
from .geometry import (
    METRIC_COMPONENTS,
    TENSOR_COMPONENTS,
    FormulaMode,
    _DirectContext,
    _weight_for_order,
    compare,
)
from .kernels import Family, KernelPoint, kernel_partial_values
from .quadrature import QuadratureConfig
from .sources import PointMass, SourceSpec

__all__ = [
    "Order",
    "IdentityId",
    "ResidualReport",
    "GridSpec",
    "IDENTITY_REL_TOL",
    "CONSISTENCY_ABS_TOL",
    "identity_residual",
    "identity_expected_to_hold",
    "comparison_expected_to_hold",
    "identity_slots",
    "run_identity_suite",
    "run_consistency_suite",
]

# Pass thresholds: true identities evaluate to rounding noise, far below
# 1e-11 relative; closed-vs-direct agreement is limited by quadrature.
IDENTITY_REL_TOL = 1e-11
CONSISTENCY_ABS_TOL = 1e-6
NORMALIZATION_ABS_TOL = 1e-8
SCORE_MEAN_ABS_TOL = 1e-7
SYMMETRY_ABS_TOL = 1e-8

REL_FLOOR = 1e-300  # |LHS| + |RHS| + floor, so both-sides-zero stays finite


class Order(enum.Enum):
    SECOND = "second"
    THIRD = "third"


@dataclass(frozen=True)
class IdentityId:
    family: Family
    order: Order
    slot: int
    mode: FormulaMode

    def __post_init__(self):
        n = 3 if self.order is Order.SECOND else 4
        if not 1 <= self.slot <= n:
            raise ValueError(f"slot must be in 1..{n} for {self.order.value} order")

    @property
    def key(self) -> str:
        return f"{self.family.value}/{self.order.value}/{self.slot}"


@dataclass(frozen=True)
class ResidualReport:
    suite: str
    report_id: str
    label: str
    n_points: int
    max_abs: float
    max_rel: float
    argmax: tuple[float, float]
    tol: float
    passed: bool
    expected_to_hold: bool
    n_failures: int = 0

    @property
    def known_discrepancy(self) -> bool:
        return not self.expected_to_hold


# identity tables -----------------------------------------------------------
# Each entry: label, lhs(d), rhs(d, s) where d(i, j) yields the kernel
# partial arrays and s is the scale variable (t for heat, x for laplace).

_HEAT_SECOND = (
    ("ht*ht/h", lambda d: d(0, 1) ** 2 / d(0, 0),
     lambda d, s: d(0, 2) + 2 / s * d(0, 1)),
    ("hx*hx/h", lambda d: d(1, 0) ** 2 / d(0, 0),
     lambda d, s: d(2, 0) + 1 / (2 * s) * d(0, 0)),
    ("ht*hx/h", lambda d: d(0, 1) * d(1, 0) / d(0, 0),
     lambda d, s: d(1, 1) + 1 / s * d(1, 0)),
)
_HEAT_THIRD = (
    ("hx^3/h^2", lambda d: d(1, 0) ** 3 / d(0, 0) ** 2,
     lambda d, s: d(3, 0) + 3 / (2 * s) * d(1, 0)),
    ("hx^2*ht/h^2", lambda d: d(1, 0) ** 2 * d(0, 1) / d(0, 0) ** 2,
     lambda d, s: d(2, 1) + 2 / s * d(2, 0) + 1 / (2 * s) * d(0, 1)
                  + 1 / (2 * s * s) * d(0, 0)),
    ("ht^3/h^2", lambda d: d(0, 1) ** 3 / d(0, 0) ** 2,
     lambda d, s: d(0, 3) + 6 / s * d(0, 2) + 6 / (s * s) * d(0, 1)),
    ("ht^2*hx/h^2", lambda d: d(0, 1) ** 2 * d(1, 0) / d(0, 0) ** 2,
     lambda d, s: d(1, 2) + 4 / s * d(1, 1) + 2 / (s * s) * d(1, 0)),
)
_LAPLACE_SECOND_PRINTED = (
    ("hx*hx/h", lambda d: d(1, 0) ** 2 / d(0, 0),
     lambda d, s: d(2, 0) - 1 / s * d(1, 0)),
    ("hy*hy/h", lambda d: d(0, 1) ** 2 / d(0, 0),
     lambda d, s: d(0, 2) - 1 / s * d(1, 0)),
    ("hy*hx/h", lambda d: d(0, 1) * d(1, 0) / d(0, 0),
     lambda d, s: 0.5 * d(1, 1)),
)
_LAPLACE_SECOND_CORRECTED = (
    ("hx*hx/h", _LAPLACE_SECOND_PRINTED[0][1],
     lambda d, s: 0.5 * d(2, 0) - 1 / (2 * s) * d(1, 0)),
    ("hy*hy/h", _LAPLACE_SECOND_PRINTED[1][1],
     lambda d, s: 0.5 * d(0, 2) - 1 / (2 * s) * d(1, 0)),
    _LAPLACE_SECOND_PRINTED[2],
)
_LAPLACE_THIRD_PRINTED = (
    ("hx^3/h^2", lambda d: d(1, 0) ** 3 / d(0, 0) ** 2,
     lambda d, s: d(3, 0) - 3 / s * d(2, 0) + 3 / (s * s) * d(1, 0)),
    ("hy^3/h^2", lambda d: d(0, 1) ** 3 / d(0, 0) ** 2,
     lambda d, s: d(0, 3) - 3 / (2 * s) * d(1, 1)),
    ("hy^2*hx/h^2", lambda d: d(0, 1) ** 2 * d(1, 0) / d(0, 0) ** 2,
     lambda d, s: d(1, 2) / 3 - d(1, 1) / (3 * s) + d(1, 0) / (3 * s * s)),
    ("hx^2*hy/h^2", lambda d: d(1, 0) ** 2 * d(0, 1) / d(0, 0) ** 2,
     lambda d, s: d(2, 1) / 3 - d(1, 1) / (3 * s)),
)
_LAPLACE_THIRD_CORRECTED = (
    ("hx^3/h^2", _LAPLACE_THIRD_PRINTED[0][1],
     lambda d, s: d(3, 0) / 6 - d(2, 0) / (2 * s) + d(1, 0) / (2 * s * s)),
    ("hy^3/h^2", _LAPLACE_THIRD_PRINTED[1][1],
     lambda d, s: d(0, 3) / 6 - d(1, 1) / (2 * s)),
    ("hy^2*hx/h^2", _LAPLACE_THIRD_PRINTED[2][1],
     lambda d, s: d(1, 2) / 6 - d(2, 0) / (6 * s) + d(1, 0) / (6 * s * s)),
    ("hx^2*hy/h^2", _LAPLACE_THIRD_PRINTED[3][1],
     lambda d, s: d(2, 1) / 6 - d(1, 1) / (6 * s)),
)


def _identity_table(family: Family, order: Order, mode: FormulaMode):
    if family is Family.HEAT:
        return _HEAT_SECOND if order is Order.SECOND else _HEAT_THIRD
    if mode is FormulaMode.PRINTED:
        return (_LAPLACE_SECOND_PRINTED if order is Order.SECOND
                else _LAPLACE_THIRD_PRINTED)
    return (_LAPLACE_SECOND_CORRECTED if order is Order.SECOND
            else _LAPLACE_THIRD_CORRECTED)


def identity_slots(family: Family, mode: FormulaMode) -> tuple[IdentityId, ...]:
    """All 7 identity ids of a family in fixed order (3 second + 4 third)."""
    out = []
    for order in (Order.SECOND, Order.THIRD):
        n = len(_identity_table(family, order, mode))
        out.extend(IdentityId(family, order, slot, mode) for slot in range(1, n + 1))
    return tuple(out)


def identity_label(ident: IdentityId) -> str:
    table = _identity_table(ident.family, ident.order, ident.mode)
    return table[ident.slot - 1][0]


def identity_expected_to_hold(ident: IdentityId) -> bool:
    """Whether the identity is true for the actual kernel.

    Heat: all hold.  Laplace PRINTED: only the mixed second-order identity
    (slot 3) holds; the rest carry coefficient errors.  CORRECTED: all hold.
    """
    if ident.family is Family.HEAT or ident.mode is FormulaMode.CORRECTED:
        return True
    return ident.order is Order.SECOND and ident.slot == 3


def _identity_lhs_rhs(ident: IdentityId, scale, offset):
    # evaluate in extended precision: true identities cancel lower-order
    # terms exactly, and float64 cancellation noise near w = 0 would exceed
    # the 1e-11 reporting threshold
    scale = np.asarray(scale, dtype=np.longdouble)
    offset = np.asarray(offset, dtype=np.longdouble)
    _, lhs, rhs = _identity_table(ident.family, ident.order, ident.mode)[ident.slot - 1]

    def d(i, j):
        return kernel_partial_values(ident.family, scale, offset, (i, j))

    return np.asarray(lhs(d)), np.asarray(rhs(d, scale))


def identity_residual(ident: IdentityId, pt: KernelPoint) -> float:
    """LHS - RHS at one kernel point; zero up to rounding for a true identity."""
    pt.require_valid()
    lhs, rhs = _identity_lhs_rhs(ident, pt.scale, pt.offset)
    return float(lhs - rhs)


def sample_kernel_points(n_points: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Fixed sampling law: scale log-uniform in [0.1, 10], offset normal with
    deviation 3 * scale.  Fixed so residual magnitudes are comparable across
    runs and machines."""
    rng = np.random.default_rng(seed)
    scales = 10.0 ** rng.uniform(-1.0, 1.0, size=n_points)
    offsets = 3.0 * scales * rng.standard_normal(n_points)
    return scales, offsets


def run_identity_suite(family: Family, mode: FormulaMode, n_points: int,
                       seed: int) -> list[ResidualReport]:
    """Evaluate all 7 identities of the family at seeded random points."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    scales, offsets = sample_kernel_points(n_points, seed)
    reports = []
    for ident in identity_slots(family, mode):
        lhs, rhs = _identity_lhs_rhs(ident, scales, offsets)
        abs_res = np.abs(lhs - rhs)
        rel_res = abs_res / (np.abs(lhs) + np.abs(rhs) + REL_FLOOR)
        k = int(np.argmax(rel_res))
        expected = identity_expected_to_hold(ident)
        max_rel = float(rel_res.max())
        reports.append(ResidualReport(
            suite="identity",
            report_id=ident.key,
            label=identity_label(ident),
            n_points=n_points,
            max_abs=float(abs_res.max()),
            max_rel=max_rel,
            argmax=(float(scales[k]), float(offsets[k])),
            tol=IDENTITY_REL_TOL,
            passed=max_rel < IDENTITY_REL_TOL,
            expected_to_hold=expected,
        ))
    return reports


# consistency suite ---------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Uniform evaluation grid: (lo, hi, count) per parameter; points are
    lo + k (hi - lo)/(count - 1), a single point when count = 1."""

    p1: tuple[float, float, int]
    p2: tuple[float, float, int]

    def __post_init__(self):
        for lo, hi, count in (self.p1, self.p2):
            if count < 1:
                raise ValueError("grid count must be >= 1")
            if lo > hi:
                raise ValueError(f"grid bounds must satisfy lo <= hi, got {lo} > {hi}")

    @staticmethod
    def _axis(lo: float, hi: float, count: int) -> list[float]:
        if count == 1:
            return [lo]
        return [lo + k * (hi - lo) / (count - 1) for k in range(count)]

    def points(self, family: Family) -> list[ParamPoint]:
        """Grid points in deterministic order: p1-major, p2-minor; all must
        lie inside the family domain."""
        pts = [ParamPoint(family, a, b)
               for a in self._axis(*self.p1) for b in self._axis(*self.p2)]
        for p in pts:
            p.require_valid()
        return pts


# PRINTED closed forms known to disagree with the direct oracle, per family:
# heat tensor entries t111/t112 carry spurious (ln u)-slope terms and t222 is
# missing its -1/(2 t^3) constant; every laplace entry except structurally
# zero cases is off.  CORRECTED agrees everywhere by construction.
_PRINTED_MATCHING = {
    Family.HEAT: frozenset(METRIC_COMPONENTS) | {"t122"},
    Family.LAPLACE: frozenset(),
}


def comparison_expected_to_hold(family: Family, mode: FormulaMode,
                                component: str) -> bool:
    if mode is FormulaMode.CORRECTED:
        return True
    return component in _PRINTED_MATCHING[family]


def run_consistency_suite(source: SourceSpec, family: Family, grid: GridSpec,
                          cfg: QuadratureConfig | None = None,
                          mode: FormulaMode = FormulaMode.PRINTED,
                          ) -> list[ResidualReport]:
    """Normalization, zero-mean score, tensor index symmetry and the 7
    closed-vs-direct component residuals, aggregated over a theta grid.

    Per-point numerical failures are counted and the suite continues; the
    report is the product.
    """
    points = grid.points(family)
    agg: dict[str, tuple[float, float, ParamPoint]] = {}
    failures: dict[str, int] = {}
    names = (["normalization", "score_mean/1", "score_mean/2", "tensor_symmetry"]
             + [f"closed_vs_direct/{c}" for c in METRIC_COMPONENTS + TENSOR_COMPONENTS])
    comparison_bounds: dict[str, float] = {}

    def update(name: str, abs_res: float, rel_res: float, theta: ParamPoint):
        cur = agg.get(name)
        if cur is None or abs_res > cur[0]:
            agg[name] = (abs_res, rel_res, theta)

    for theta in points:
        try:
            if isinstance(source, PointMass):
                # expectations collapse to the atom: exactly normalized,
                # exactly zero scores, exactly symmetric zero tensor
                update("normalization", 0.0, 0.0, theta)
                update("score_mean/1", 0.0, 0.0, theta)
                update("score_mean/2", 0.0, 0.0, theta)
                update("tensor_symmetry", 0.0, 0.0, theta)
            else:
                ctx = _DirectContext(source, theta, cfg)
                norm = ctx.expectation(lambda s1, s2: 1.0)
                update("normalization", abs(norm.value - 1.0),
                       abs(norm.value - 1.0), theta)
                m1 = ctx.expectation(lambda s1, s2: s1)
                m2 = ctx.expectation(lambda s1, s2: s2)
                update("score_mean/1", abs(m1.value), abs(m1.value), theta)
                update("score_mean/2", abs(m2.value), abs(m2.value), theta)
                perms = [ctx.expectation(_weight_for_order(o)).value
                         for o in ((1, 1, 2), (1, 2, 1), (2, 1, 1))]
                spread = 0.5 * (max(perms) - min(perms))  # -1/2 prefactor
                update("tensor_symmetry", spread, spread, theta)
            for rep in compare(source, theta, cfg, mode):
                name = f"closed_vs_direct/{rep.component}"
                update(name, rep.abs_residual, rep.rel_residual, theta)
                bound = max(CONSISTENCY_ABS_TOL, 10.0 * rep.direct_err)
                comparison_bounds[name] = max(comparison_bounds.get(name, 0.0), bound)
        except Exception:
            for name in names:
                failures[name] = failures.get(name, 0) + 1

    tols = {
        "normalization": NORMALIZATION_ABS_TOL,
        "score_mean/1": SCORE_MEAN_ABS_TOL,
        "score_mean/2": SCORE_MEAN_ABS_TOL,
        "tensor_symmetry": SYMMETRY_ABS_TOL,
    }
    reports = []
    for name in names:
        max_abs, max_rel, theta = agg.get(name, (0.0, 0.0, points[0]))
        if name.startswith("closed_vs_direct/"):
            component = name.split("/", 1)[1]
            tol = comparison_bounds.get(name, CONSISTENCY_ABS_TOL)
            expected = comparison_expected_to_hold(family, mode, component)
        else:
            tol = tols[name]
            expected = True
        n_fail = failures.get(name, 0)
        reports.append(ResidualReport(
            suite="consistency",
            report_id=name,
            label=name,
            n_points=len(points),
            max_abs=max_abs,
            max_rel=max_rel,
            argmax=(theta.p1, theta.p2),
            tol=tol,
            passed=(max_abs <= tol) and n_fail == 0,
            expected_to_hold=expected,
            n_failures=n_fail,
        ))
    return reports
