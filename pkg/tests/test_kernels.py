import math

import numpy as np
import pytest

from oracles import fd_partial

from pdefisher import (
    MULTI_INDICES,
    DomainError,
    Family,
    KernelPoint,
    fundamental_solution,
    heat_kernel_partial,
    poisson_kernel_partial,
)
from pdefisher.kernels import (
    fundamental_partial,
    heat_partial_values,
    kernel_partial_values,
    poisson_partial_values,
)


class TestHeatKernelValues:
    def test_center_value(self):
        assert heat_kernel_partial(KernelPoint(1.0, 0.0), (0, 0)) == 1.0

    def test_plain_substitution(self):
        val = heat_kernel_partial(KernelPoint(1.0, 2.0), (0, 0))
        assert val == pytest.approx(math.exp(-1.0), abs=1e-15)

    def test_first_x_partial(self):
        # frozen from the finite-difference oracle; analytically -1/2 e^{-1/4}
        val = heat_kernel_partial(KernelPoint(1.0, 1.0), (1, 0))
        assert val == pytest.approx(-0.3894003915357024, abs=1e-12)
        fd = fd_partial(lambda w, t: float(heat_partial_values(t, w, (0, 0))),
                        1.0, 1.0, 1, 0, 0.25, 0.3)
        assert val == pytest.approx(fd, rel=1e-9)


class TestPoissonKernelValues:
    def test_unit_point(self):
        assert poisson_kernel_partial(KernelPoint(1.0, 0.0), (0, 0)) == 1.0

    def test_off_axis(self):
        assert poisson_kernel_partial(KernelPoint(1.0, 1.0), (0, 0)) == 0.5

    def test_first_x_partial(self):
        # analytically -2 x h^2 = -2; cross-checked by finite differences
        val = poisson_kernel_partial(KernelPoint(1.0, 0.0), (1, 0))
        assert val == pytest.approx(-2.0, abs=1e-13)
        fd = fd_partial(lambda x, w: float(poisson_partial_values(x, w, (0, 0))),
                        1.0, 0.0, 1, 0, 0.2, 0.2)
        assert val == pytest.approx(fd, rel=1e-9)


class TestFundamentalSolution:
    def test_heat_normalizer(self):
        # 1/(2 sqrt(pi t)) = 1 at t = 1/(4 pi)
        val = fundamental_solution(Family.HEAT, KernelPoint(1.0 / (4 * math.pi), 0.0))
        assert val == pytest.approx(1.0, abs=1e-14)

    def test_laplace_center(self):
        val = fundamental_solution(Family.LAPLACE, KernelPoint(1.0, 0.0))
        assert val == pytest.approx(1.0 / math.pi, abs=1e-15)

    @pytest.mark.parametrize("family,scale", [(Family.HEAT, 0.7), (Family.LAPLACE, 1.3)])
    def test_integrates_to_one(self, family, scale):
        from pdefisher import QuadratureConfig, Tangent, integrate

        cfg = QuadratureConfig(transform=Tangent(0.0, max(scale, 1.0)))
        res = integrate(
            lambda w: np.array([fundamental_solution(family, KernelPoint(scale, wi))
                                for wi in np.atleast_1d(w)]),
            (-math.inf, math.inf), cfg)
        assert res.value == pytest.approx(1.0, abs=1e-10)


def _sample_points(family, n, seed):
    rng = np.random.default_rng(seed)
    scales = 10.0 ** rng.uniform(-1.0, 1.0, size=n)
    offsets = 3.0 * scales * rng.standard_normal(n)
    return scales, offsets


@pytest.mark.parametrize("family", [Family.HEAT, Family.LAPLACE])
@pytest.mark.parametrize("idx", MULTI_INDICES)
def test_partials_match_finite_differences(family, idx):
    """Every hard-coded partial agrees with Richardson-extrapolated central
    differences of the (0, 0) value at 200 seeded points, to 1e-6 relative."""
    scales, offsets = _sample_points(family, 200, seed=20240 + idx[0] * 4 + idx[1])

    closed = np.array([float(kernel_partial_values(family, s, w, idx))
                       for s, w in zip(scales, offsets)])
    fd = np.empty_like(closed)
    for k, (s, w) in enumerate(zip(scales, offsets)):
        if family is Family.HEAT:
            # index order (i, j) = (d/dw, d/dt); steps follow the local
            # variation scales sqrt(t) and t, capped to keep t positive
            fd[k] = fd_partial(
                lambda a, b: float(heat_partial_values(b, a, (0, 0))),
                w, s, idx[0], idx[1],
                ha=0.25 * math.sqrt(s), hb=0.3 * s)
        else:
            step = 0.2 * math.hypot(s, w)
            fd[k] = fd_partial(
                lambda a, b: float(poisson_partial_values(a, b, (0, 0))),
                s, w, idx[0], idx[1],
                ha=min(step, 0.3 * s), hb=step)
    scale_ref = np.abs(closed).max()
    np.testing.assert_allclose(fd, closed, rtol=1e-6, atol=1e-9 * max(scale_ref, 1e-6))


@pytest.mark.parametrize("family", [Family.HEAT, Family.LAPLACE])
def test_evenness_and_odd_partials_vanish(family):
    """Both kernels are even in the offset; odd-order-in-offset partials are
    exactly zero at w = 0."""
    rng = np.random.default_rng(7)
    scales = 10.0 ** rng.uniform(-1, 1, 40)
    offsets = rng.normal(0, 2, 40)
    for idx in MULTI_INDICES:
        plus = kernel_partial_values(family, scales, offsets, idx)
        minus = kernel_partial_values(family, scales, -offsets, idx)
        offset_order = idx[0] if family is Family.HEAT else idx[1]
        sign = -1.0 if offset_order % 2 else 1.0
        np.testing.assert_allclose(plus, sign * minus, rtol=0, atol=0)
        at_zero = kernel_partial_values(family, scales, 0.0, idx)
        if offset_order % 2:
            assert np.all(at_zero == 0.0)


@pytest.mark.parametrize("family", [Family.HEAT, Family.LAPLACE])
def test_positivity(family):
    scales, offsets = _sample_points(family, 300, seed=99)
    h = kernel_partial_values(family, scales, offsets, (0, 0))
    assert np.all(h > 0.0)


@pytest.mark.parametrize("family", [Family.HEAT, Family.LAPLACE])
def test_fundamental_solution_solves_pde(family):
    """Phi_t - Phi_ww = 0 (heat) and Phi_xx + Phi_ww = 0 (laplace) to 1e-10
    relative at every test point."""
    scales, offsets = _sample_points(family, 200, seed=4)
    for s, w in zip(scales, offsets):
        pt = KernelPoint(float(s), float(w))
        if family is Family.HEAT:
            resid = fundamental_partial(family, pt, (0, 1)) \
                - fundamental_partial(family, pt, (2, 0))
        else:
            resid = fundamental_partial(family, pt, (2, 0)) \
                + fundamental_partial(family, pt, (0, 2))
        ref = max(abs(fundamental_partial(family, pt, (2, 0))),
                  abs(fundamental_partial(family, pt, (0, 0))))
        assert abs(resid) <= 1e-10 * max(ref, 1e-30)


class TestDomainErrors:
    def test_nonpositive_scale(self):
        with pytest.raises(DomainError):
            heat_kernel_partial(KernelPoint(0.0, 1.0), (0, 0))
        with pytest.raises(DomainError):
            poisson_kernel_partial(KernelPoint(-1.0, 1.0), (0, 0))

    def test_bad_index(self):
        with pytest.raises(ValueError):
            heat_kernel_partial(KernelPoint(1.0, 0.0), (2, 2))

    def test_nonfinite_offset(self):
        with pytest.raises(DomainError):
            heat_kernel_partial(KernelPoint(1.0, math.inf), (0, 0))
