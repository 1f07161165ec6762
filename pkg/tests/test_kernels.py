import math

import numpy as np
import pytest

from rkreg import KernelSpec, gaussian_kernel, kernel_functional


@pytest.fixture(scope="module")
def gaussian():
    return gaussian_kernel()


def test_density_at_zero(gaussian):
    assert gaussian.eval(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-12)
    assert gaussian.eval(0.0) == pytest.approx(0.398942, abs=1e-6)


def test_second_derivative_at_zero(gaussian):
    assert gaussian.second_derivative(0.0) == pytest.approx(-gaussian.eval(0.0), abs=1e-15)


def test_normalisation(gaussian):
    assert kernel_functional(gaussian, "mu0") == pytest.approx(1.0, abs=1e-9)


def test_squared_integral(gaussian):
    analytic = 1.0 / (2.0 * math.sqrt(math.pi))
    assert gaussian.R == pytest.approx(analytic, abs=1e-9)
    assert kernel_functional(gaussian, "R") == pytest.approx(analytic, abs=1e-9)


def test_second_moment(gaussian):
    assert gaussian.mu2 == pytest.approx(1.0, abs=1e-9)


def test_first_moment_vanishes(gaussian):
    assert kernel_functional(gaussian, "mu1") == pytest.approx(0.0, abs=1e-9)


def test_second_derivative_integrates_to_zero(gaussian):
    from scipy.integrate import quad

    total, _ = quad(gaussian.second_derivative, -12, 12, epsabs=1e-10)
    assert abs(total) < 1e-6


def test_theta_definition(gaussian):
    assert gaussian.theta == gaussian.R ** 0.8 * gaussian.mu2 ** 0.4
    # frozen value of (2*sqrt(pi))**(-4/5)
    assert gaussian.theta == pytest.approx(0.3633424, abs=1e-6)
    assert kernel_functional(gaussian, "theta") == pytest.approx(gaussian.theta, rel=1e-12)


def test_vectorised_evaluation(gaussian):
    u = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(gaussian.eval(u), [gaussian.eval(v) for v in u])
    np.testing.assert_allclose(
        gaussian.second_derivative(u), (u * u - 1) * gaussian.eval(u)
    )


def test_unknown_functional_rejected(gaussian):
    with pytest.raises(ValueError):
        kernel_functional(gaussian, "mu7")


class TestCustomKernel:
    def test_uniform_kernel_accepted(self):
        def uniform(u):
            u = np.asarray(u, dtype=float)
            return np.where(np.abs(u) <= 0.5, 1.0, 0.0)

        spec = KernelSpec.from_functions(uniform, lambda u: 0.0 * np.asarray(u),
                                         radius=1.0, name="uniform")
        assert spec.mu2 == pytest.approx(1.0 / 12.0, abs=1e-8)

    def test_unnormalised_kernel_rejected(self):
        def double(u):
            u = np.asarray(u, dtype=float)
            return 2.0 * np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)

        with pytest.raises(ValueError, match="integrate to 1"):
            KernelSpec.from_functions(double, double)

    def test_asymmetric_kernel_rejected(self):
        def shifted(u):
            u = np.asarray(u, dtype=float)
            return np.exp(-0.5 * (u - 1.0) ** 2) / math.sqrt(2 * math.pi)

        with pytest.raises(ValueError, match="first moment"):
            KernelSpec.from_functions(shifted, shifted)
