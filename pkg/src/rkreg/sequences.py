"""Power-law sequences, stepsize schedules and running product ratios.

Everything downstream (recursions, plug-in weights, asymptotic constants)
is driven by sequences of the form ``v(n) = c * n**(-e)`` and by ratios of
the running products ``prod_j (1 - v(j))``.  The first stepsize of the
shipped schedules equals 1, which makes the full product vanish, so ratios
are never formed as quotients of prefix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PowerSequence",
    "ProductRatios",
    "StepsizeConfig",
    "product_ratio",
    "product_series",
    "xi_limit",
]


@dataclass(frozen=True)
class PowerSequence:
    """A positive sequence ``v(n) = coefficient * n**(-exponent)``.

    These are the canonical regularly varying sequences: the finite-n index
    ``n * (1 - v(n-1)/v(n))`` converges to ``-exponent``.
    """

    coefficient: float
    exponent: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.coefficient) and self.coefficient > 0):
            raise ValueError(f"coefficient must be a positive real, got {self.coefficient}")
        if not np.isfinite(self.exponent):
            raise ValueError(f"exponent must be finite, got {self.exponent}")

    def value(self, n: int) -> float:
        if n < 1:
            raise ValueError(f"sequence index must be >= 1, got {n}")
        return self.coefficient * float(n) ** (-self.exponent)

    def values(self, n: int) -> np.ndarray:
        """The vector ``[v(1), ..., v(n)]``."""
        if n < 1:
            raise ValueError(f"sequence length must be >= 1, got {n}")
        return self.coefficient * np.arange(1, n + 1, dtype=float) ** (-self.exponent)

    @property
    def index(self) -> float:
        """Regular-variation index: the limit of ``n * (1 - v(n-1)/v(n))``."""
        return -self.exponent

    def variation_index(self, n: int) -> float:
        """Finite-n value of ``n * (1 - v(n-1)/v(n))``; tends to ``index``."""
        if n < 2:
            raise ValueError(f"need n >= 2, got {n}")
        return n * (1.0 - self.value(n - 1) / self.value(n))


def xi_limit(stepsize: PowerSequence) -> float:
    """Limit of ``1 / (n * v(n))``: ``1/c`` for exponent 1, 0 below, inf above."""
    if stepsize.exponent == 1.0:
        return 1.0 / stepsize.coefficient
    if stepsize.exponent < 1.0:
        return 0.0
    return math.inf


class ProductRatios:
    """Ratios ``prod_{j=k+1..n} (1 - v(j))`` for a stepsize sequence.

    Factors are accumulated in log space with explicit bookkeeping of zero
    and negative factors, so a first stepsize equal to 1 never forces a
    division by zero and ratios stay accurate out to n around 1e6.
    """

    def __init__(self, stepsize: PowerSequence, n_max: int):
        if n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {n_max}")
        factors = 1.0 - stepsize.values(n_max)
        self.stepsize = stepsize
        self.n_max = n_max
        # prefix counts/log-sums indexed so that entry j covers factors 1..j
        self._zeros = np.concatenate(([0], np.cumsum(factors == 0.0)))
        self._negs = np.concatenate(([0], np.cumsum(factors < 0.0)))
        logs = np.zeros(n_max)
        nonzero = factors != 0.0
        logs[nonzero] = np.log(np.abs(factors[nonzero]))
        self._logs = np.concatenate(([0.0], np.cumsum(logs)))

    def ratio(self, k: int, n: int) -> float:
        """``prod_{j=k+1..n} (1 - v(j))``; the empty product (k == n) is 1."""
        if not 0 <= k <= n <= self.n_max:
            raise ValueError(f"need 0 <= k <= n <= {self.n_max}, got k={k}, n={n}")
        if self._zeros[n] > self._zeros[k]:
            return 0.0
        sign = -1.0 if (self._negs[n] - self._negs[k]) % 2 else 1.0
        return sign * math.exp(self._logs[n] - self._logs[k])

    def ratios_to(self, n: int) -> np.ndarray:
        """The vector ``[ratio(1, n), ..., ratio(n, n)]``."""
        if not 1 <= n <= self.n_max:
            raise ValueError(f"need 1 <= n <= {self.n_max}, got {n}")
        logs = self._logs[n] - self._logs[1 : n + 1]
        signs = np.where((self._negs[n] - self._negs[1 : n + 1]) % 2, -1.0, 1.0)
        out = signs * np.exp(logs)
        out[self._zeros[n] > self._zeros[1 : n + 1]] = 0.0
        return out


def product_ratio(stepsize: PowerSequence, k: int, n: int) -> float:
    """``prod_{j=k+1..n} (1 - stepsize(j))`` computed through a ratio table."""
    if k > n:
        raise ValueError(f"need k <= n, got k={k}, n={n}")
    if n == 0:
        return 1.0
    return ProductRatios(stepsize, n).ratio(k, n)


def product_series(v: PowerSequence, stepsize: PowerSequence, m: float, n: int) -> float:
    """Finite-n value of ``v(n) * sum_k ratio(k, n)**m * stepsize(k) / v(k)``.

    With ``ratio(k, n) = prod_{j=k+1..n} (1 - stepsize(j))`` this converges,
    as n grows, to ``1 / (m - index(v) * xi)`` where ``xi`` is the limit of
    ``1 / (n * stepsize(n))``.

    Raises
    ------
    ValueError
        If ``m - index(v) * xi <= 0`` (the limit does not exist) or n < 1.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    xi = xi_limit(stepsize)
    gap = m - v.index * xi
    if not gap > 0:
        raise ValueError(
            f"series diverges: m - index*xi = {gap:.6g} must be positive "
            f"(m={m}, index={v.index}, xi={xi})"
        )
    ratios = ProductRatios(stepsize, n).ratios_to(n)
    terms = ratios**m * stepsize.values(n) * (v.value(n) / v.values(n))
    return float(np.sum(terms))


@dataclass(frozen=True)
class StepsizeConfig:
    """A named estimator configuration.

    ``gamma`` drives the density recursion and ``beta`` the response-weighted
    recursion; both are None for the non-recursive Nadaraya-Watson baseline.
    ``bandwidth_exponent`` is the decay rate ``a`` of the bandwidth sequence
    ``h(n) = C * n**(-a)``; every shipped configuration uses a = 1/5 because
    the optimal bandwidth decays at that rate, but it stays a parameter.
    """

    name: str
    gamma: PowerSequence | None
    beta: PowerSequence | None
    bandwidth_exponent: float = 0.2

    def __post_init__(self) -> None:
        a = self.bandwidth_exponent
        if not 0.0 < a < 1.0:
            raise ValueError(f"bandwidth exponent must lie in (0, 1), got {a}")
        if (self.gamma is None) != (self.beta is None):
            raise ValueError("gamma and beta must both be set or both be absent")
        if self.beta is not None:
            if not 0.5 < self.beta.exponent <= 1.0:
                raise ValueError(
                    f"beta stepsize must decay with exponent in (1/2, 1], got {self.beta.exponent}"
                )
            floor = max(2.0 * a, (self.beta.exponent - a) / 2.0)
            if not self.beta0 > floor:
                raise ValueError(
                    f"limit of n*beta(n) must exceed {floor:.4g}, got {self.beta0:.4g}"
                )

    @property
    def is_recursive(self) -> bool:
        return self.gamma is not None

    @property
    def xi(self) -> float:
        """Limit of ``1 / (n * beta(n))``."""
        if self.beta is None:
            raise ValueError("xi is undefined for the non-recursive baseline")
        return xi_limit(self.beta)

    @property
    def beta0(self) -> float:
        """Limit of ``n * beta(n)``."""
        if self.beta is None:
            raise ValueError("beta0 is undefined for the non-recursive baseline")
        if self.beta.exponent == 1.0:
            return self.beta.coefficient
        return math.inf if self.beta.exponent < 1.0 else 0.0

    @staticmethod
    def recursive1(a: float = 0.2) -> "StepsizeConfig":
        """gamma(n) = 1/n, beta(n) = 1/n."""
        return StepsizeConfig("Recursive1", PowerSequence(1.0, 1.0), PowerSequence(1.0, 1.0), a)

    @staticmethod
    def recursive2(a: float = 0.2) -> "StepsizeConfig":
        """gamma(n) = 1/n, beta(n) = (1-a)/n."""
        return StepsizeConfig("Recursive2", PowerSequence(1.0, 1.0), PowerSequence(1.0 - a, 1.0), a)

    @staticmethod
    def recursive3(a: float = 0.2) -> "StepsizeConfig":
        """gamma(n) = (1-a)/n, beta(n) = 1/n."""
        return StepsizeConfig("Recursive3", PowerSequence(1.0 - a, 1.0), PowerSequence(1.0, 1.0), a)

    @staticmethod
    def recursive4(a: float = 0.2) -> "StepsizeConfig":
        """gamma(n) = (1-a)/n, beta(n) = (1-a)/n."""
        return StepsizeConfig(
            "Recursive4", PowerSequence(1.0 - a, 1.0), PowerSequence(1.0 - a, 1.0), a
        )

    @staticmethod
    def nadaraya_watson(a: float = 0.2) -> "StepsizeConfig":
        """The non-recursive baseline; carries no stepsizes."""
        return StepsizeConfig("NW", None, None, a)

    @staticmethod
    def by_name(name: str, a: float = 0.2) -> "StepsizeConfig":
        factories = {
            "recursive1": StepsizeConfig.recursive1,
            "recursive2": StepsizeConfig.recursive2,
            "recursive3": StepsizeConfig.recursive3,
            "recursive4": StepsizeConfig.recursive4,
            "nw": StepsizeConfig.nadaraya_watson,
        }
        key = name.strip().lower()
        if key not in factories:
            raise ValueError(f"unknown configuration {name!r}; expected one of "
                             "NW, Recursive1, Recursive2, Recursive3, Recursive4")
        return factories[key](a)
