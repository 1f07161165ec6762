"""Kernel functions, their second derivatives and moment functionals.

The risk formulas only touch a kernel through ``R = int K^2``,
``mu2 = int u^2 K(u) du`` and ``theta = R**(4/5) * mu2**(2/5)``, so these are
computed once by quadrature and cached on the spec.  The second derivative
is needed by the pilot estimators of the curvature functionals.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

__all__ = ["KernelSpec", "QuadratureError", "gaussian_kernel", "kernel_functional"]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class QuadratureError(RuntimeError):
    """A kernel functional could not be integrated to the required accuracy."""


def _integrate(fn: Callable, radius: float, atol: float = 1e-9) -> float:
    value, err = quad(fn, -radius, radius, epsabs=1e-13, epsrel=1e-13, limit=300)
    if err > atol:
        raise QuadratureError(
            f"functional quadrature did not converge: estimated error {err:.3e} > {atol:.0e}"
        )
    return value


@dataclass(frozen=True)
class KernelSpec:
    """A smoothing kernel with cached moment functionals.

    ``eval`` and ``second_derivative`` must accept ndarray input.  Valid
    kernels are continuous, bounded, integrate to one, have vanishing first
    moment and finite second moment; this is verified numerically when the
    spec is built through :meth:`from_functions`.
    """

    eval: Callable
    second_derivative: Callable
    R: float
    mu2: float
    theta: float
    radius: float = 12.0
    name: str = "custom"

    @classmethod
    def from_functions(
        cls,
        eval: Callable,
        second_derivative: Callable,
        radius: float = 12.0,
        name: str = "custom",
        atol: float = 1e-6,
    ) -> "KernelSpec":
        mu0 = _integrate(eval, radius)
        mu1 = _integrate(lambda u: u * eval(u), radius)
        mu2 = _integrate(lambda u: u * u * eval(u), radius)
        r = _integrate(lambda u: eval(u) ** 2, radius)
        if abs(mu0 - 1.0) > atol:
            raise ValueError(f"kernel must integrate to 1, got {mu0:.8f}")
        if abs(mu1) > atol:
            raise ValueError(f"kernel first moment must vanish, got {mu1:.3e}")
        if not (np.isfinite(mu2) and mu2 > 0):
            raise ValueError(f"kernel second moment must be finite and positive, got {mu2}")
        theta = r ** 0.8 * mu2 ** 0.4
        return cls(eval, second_derivative, R=r, mu2=mu2, theta=theta, radius=radius, name=name)


def kernel_functional(kernel: KernelSpec, which: str) -> float:
    """Recompute one functional by quadrature; ``theta`` derives from R, mu2.

    ``which`` is one of ``"R"``, ``"mu0"``, ``"mu1"``, ``"mu2"``, ``"theta"``.
    """
    if which == "theta":
        return kernel.R ** 0.8 * kernel.mu2 ** 0.4
    if which == "R":
        return _integrate(lambda u: kernel.eval(u) ** 2, kernel.radius)
    if which in ("mu0", "mu1", "mu2"):
        power = int(which[2])
        return _integrate(lambda u: u**power * kernel.eval(u), kernel.radius)
    raise ValueError(f"unknown functional {which!r}")


def _normal_pdf(u):
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5 * u * u) / _SQRT_2PI


def _normal_pdf_dd(u):
    u = np.asarray(u, dtype=float)
    return (u * u - 1.0) * np.exp(-0.5 * u * u) / _SQRT_2PI


@functools.lru_cache(maxsize=1)
def gaussian_kernel() -> KernelSpec:
    """Standard normal kernel, the only built-in.

    Tails beyond |u| = 12 are below 1e-30, so the quadrature window loses
    nothing.
    """
    return KernelSpec.from_functions(_normal_pdf, _normal_pdf_dd, radius=12.0, name="gaussian")
