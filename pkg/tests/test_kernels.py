import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from mollikit.kernels import (bump_kernel, bump_normalizer, gaussian_kernel,
                              kernel_abs_moment, kernel_cdf, kernel_derivative,
                              kernel_partial_moment, kernel_value, parse_kernel)
from mollikit.quadrature import integrate

BUMP = bump_kernel()
GAUSS = gaussian_kernel()

# golden values, frozen from a 40-digit quadrature oracle
C_BUMP = 2.252283621043581
MU1_BUMP = 0.3344539977099753
MU2_BUMP = 0.1581136362637982
INV_SQRT_2PI = 0.3989422804014327


def test_normalizer_golden_value():
    assert bump_normalizer() == pytest.approx(C_BUMP, abs=1e-12)
    assert 2.0 < bump_normalizer() < 3.0


def test_normalizer_against_independent_oracle():
    raw, _ = quad(lambda v: np.exp(-1.0 / (1.0 - v * v)), -1, 1,
                  points=[-0.99, 0.0, 0.99], epsabs=1e-14, limit=200)
    assert bump_normalizer() == pytest.approx(1.0 / raw, abs=1e-11)


def test_bump_density_integrates_to_one():
    mass = integrate(lambda v: kernel_value(BUMP, v),
                     [-1.0, -0.99, 0.0, 0.99, 1.0], target=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_gaussian_density_integrates_to_one():
    mass = integrate(lambda v: kernel_value(GAUSS, v),
                     [-8.0, -2.0, 0.0, 2.0, 8.0], target=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_value_examples():
    assert kernel_value(BUMP, 1.0) == 0.0
    assert kernel_value(BUMP, -1.2) == 0.0
    assert kernel_value(BUMP, 0.0) == pytest.approx(C_BUMP * np.exp(-1.0), rel=1e-12)
    assert kernel_value(GAUSS, 0.0) == pytest.approx(INV_SQRT_2PI, rel=1e-12)


def test_symmetry_bulk():
    rng = np.random.default_rng(1)
    v = rng.uniform(-5, 5, 1000)
    for kern in (BUMP, GAUSS):
        assert np.array_equal(kernel_value(kern, v), kernel_value(kern, -v))


@given(st.floats(min_value=-3, max_value=3))
def test_symmetry_pointwise(v):
    for kern in (BUMP, GAUSS):
        assert kernel_value(kern, v) == kernel_value(kern, -v)


def test_derivative_examples():
    assert kernel_derivative(BUMP, 0.0, 1) == 0.0
    assert kernel_derivative(GAUSS, 0.0, 1) == 0.0
    assert abs(kernel_derivative(BUMP, 0.999999, 2)) < 1e-6
    assert kernel_derivative(GAUSS, 1.0, 1) == pytest.approx(
        -kernel_value(GAUSS, 1.0), rel=1e-13)


def test_derivative_order_zero_is_value():
    v = np.linspace(-1.5, 1.5, 7)
    for kern in (BUMP, GAUSS):
        assert np.array_equal(kernel_derivative(kern, v, 0), kernel_value(kern, v))


def test_derivative_order_validation():
    with pytest.raises(ValueError):
        kernel_derivative(BUMP, 0.0, 3)


@pytest.mark.parametrize("kern,vmax", [(BUMP, 0.9), (GAUSS, 4.0)])
def test_derivatives_match_finite_differences(kern, vmax):
    rng = np.random.default_rng(2)
    v = rng.uniform(-vmax, vmax, 60)
    h = 1e-5
    for order in (1, 2):
        lower = lambda x: kernel_derivative(kern, x, order - 1)
        fd = (lower(v + h) - lower(v - h)) / (2 * h)
        exact = kernel_derivative(kern, v, order)
        scale = np.maximum(np.abs(exact), np.abs(fd))
        mask = scale > 1e-9
        assert np.all(np.abs(fd - exact)[mask] <= 1e-6 * scale[mask] + 1e-10)


def test_boundary_flatness():
    # all derivatives vanish approaching the support edge
    v = np.array([0.9999, 0.99999, 1.0, 1.0001])
    for order in (0, 1, 2):
        assert np.all(np.abs(kernel_derivative(BUMP, v, order)) < 1e-8)


def test_abs_moment_examples():
    for kern in (BUMP, GAUSS):
        assert kernel_abs_moment(kern, 0) == pytest.approx(1.0, abs=1e-10)
    assert kernel_abs_moment(GAUSS, 1) == pytest.approx(np.sqrt(2 / np.pi), rel=1e-12)
    assert kernel_abs_moment(GAUSS, 2) == pytest.approx(1.0, rel=1e-12)
    assert kernel_abs_moment(BUMP, 1) == pytest.approx(MU1_BUMP, abs=1e-12)
    assert kernel_abs_moment(BUMP, 2) == pytest.approx(MU2_BUMP, abs=1e-12)


def test_gaussian_moments_against_quadrature():
    for k in (1, 2):
        val = integrate(lambda v: np.abs(v) ** k * kernel_value(GAUSS, v),
                        [-8.0, -2.0, 0.0, 2.0, 8.0], target=1e-13)
        assert val == pytest.approx(kernel_abs_moment(GAUSS, k), abs=1e-10)


def test_abs_moment_validation():
    with pytest.raises(ValueError):
        kernel_abs_moment(BUMP, 3)


@pytest.mark.parametrize("kern", [BUMP, GAUSS])
@pytest.mark.parametrize("m", [1.0, 5.0, 25.0])
def test_scaled_first_moment(kern, m):
    # int |v| * m*phi(m v) dv = mu1 / m, by change of variables
    window = 1.0 if kern.kind == "bump" else 8.0
    lim = window / m
    val = integrate(lambda v: np.abs(v) * m * kernel_value(kern, m * v),
                    [-lim, 0.0, lim], target=1e-13)
    assert val == pytest.approx(kernel_abs_moment(kern, 1) / m, abs=1e-10)


def test_cdf_and_partial_moments_against_quadrature():
    rng = np.random.default_rng(3)
    for t in rng.uniform(-0.999, 0.999, 12):
        breaks = sorted({-1.0, -0.99, min(t, 0.99), t})
        direct = integrate(lambda v: kernel_value(BUMP, v), breaks, target=1e-14)
        assert kernel_cdf(BUMP, t) == pytest.approx(direct, abs=1e-12)
        for k in (1, 2):
            direct_k = integrate(lambda v: v**k * kernel_value(BUMP, v),
                                 breaks, target=1e-14)
            assert kernel_partial_moment(BUMP, t, k) == pytest.approx(
                direct_k, abs=1e-12)


def test_cdf_limits_and_symmetry():
    for kern in (BUMP, GAUSS):
        assert kernel_cdf(kern, np.inf) == pytest.approx(1.0, abs=1e-14)
        assert kernel_cdf(kern, -np.inf) == pytest.approx(0.0, abs=1e-14)
        t = np.linspace(-0.9, 0.9, 9)
        assert np.allclose(kernel_cdf(kern, t) + kernel_cdf(kern, -t), 1.0,
                           atol=1e-12)
    assert kernel_partial_moment(GAUSS, np.inf, 2) == pytest.approx(1.0)
    assert kernel_partial_moment(BUMP, np.inf, 2) == pytest.approx(MU2_BUMP,
                                                                   abs=1e-12)


def test_parse_kernel():
    assert parse_kernel("gaussian").kind == "gaussian"
    assert parse_kernel("bump").kind == "bump"
    with pytest.raises(ValueError):
        parse_kernel("uniform")
