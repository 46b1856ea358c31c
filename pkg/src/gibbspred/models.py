"""Gibbs-type prior specifications and closed-form V weights.

A model is the stable index ``alpha`` plus a tilting function h.  The
predictive weights only involve h through phi_h(t) = -t h'(t) / h(t).

The tilting functions are normalised so that E[h(T_alpha)] = 1:

* PD(theta):   h(t) = Gamma(theta + 1) / Gamma(theta/alpha + 1) * t**(-theta)
* NGG(tau):    h(t) = exp(tau**alpha - tau t)
* Stable:      h(t) = 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .stable import check_alpha


@dataclass(frozen=True)
class LogValue:
    """sign * exp(log_magnitude); keeps tiny V_{n,k} off the linear scale."""

    log_magnitude: float
    sign: int = 1

    @property
    def value(self):
        return self.sign * math.exp(self.log_magnitude)

    def ratio(self, other: LogValue) -> float:
        return self.sign * other.sign * math.exp(self.log_magnitude - other.log_magnitude)


def _constant_like(t, value):
    if np.ndim(t):
        return np.full(np.shape(t), float(value))
    return float(value)


@dataclass(frozen=True)
class GibbsModel:
    alpha: float

    def __post_init__(self):
        check_alpha(self.alpha)

    def phi(self, t):
        raise NotImplementedError

    def log_h(self, t):
        raise NotImplementedError

    @property
    def family(self) -> str:
        return type(self).__name__.lower()

    @property
    def parameter(self):
        return None


@dataclass(frozen=True)
class PD(GibbsModel):
    """Two-parameter Poisson-Dirichlet (Pitman-Yor) prior."""

    theta: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not self.theta > -self.alpha:
            raise DomainError(f"PD needs theta > -alpha, got theta={self.theta}")

    def phi(self, t):
        return _constant_like(t, self.theta)

    def log_h(self, t):
        a, th = self.alpha, self.theta
        return math.lgamma(th + 1.0) - math.lgamma(th / a + 1.0) - th * np.log(t)

    @property
    def parameter(self):
        return self.theta


@dataclass(frozen=True)
class NGG(GibbsModel):
    """Normalized generalized Gamma prior."""

    tau: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not self.tau >= 0.0:
            raise DomainError(f"NGG needs tau >= 0, got tau={self.tau}")

    def phi(self, t):
        return self.tau * t

    def log_h(self, t):
        return self.tau ** self.alpha - self.tau * np.asarray(t, dtype=float)

    @property
    def parameter(self):
        return self.tau


@dataclass(frozen=True)
class Stable(GibbsModel):
    """Normalized alpha-stable process (h = 1)."""

    def phi(self, t):
        return _constant_like(t, 0.0)

    def log_h(self, t):
        return 0.0 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class Generic(GibbsModel):
    """Arbitrary positive, continuously differentiable tilt h with derivative h_prime.

    h is not required to be normalised; V values then carry the constant
    factor E[h(T_alpha)], which cancels in every predictive weight.
    """

    h: Callable[[float], float] = None
    h_prime: Callable[[float], float] = None

    def __post_init__(self):
        super().__post_init__()
        if self.h is None or self.h_prime is None:
            raise DomainError("Generic model needs both h and h_prime")

    def _h(self, t):
        value = self.h(t)
        if np.any(np.asarray(value) <= 0):
            raise DomainError(f"h must be positive, got h({t!r}) = {value!r}")
        return value

    def phi(self, t):
        return -t * self.h_prime(t) / self._h(t)

    def log_h(self, t):
        return np.log(self._h(t))


def phi_h(model: GibbsModel, t):
    """phi_h(t) = -t h'(t) / h(t) for t > 0."""
    positive = t > 0 if isinstance(t, (int, float)) else np.all(np.asarray(t) > 0)
    if not positive:
        raise DomainError("phi_h needs t > 0")
    return model.phi(t)


def check_nk(n, k):
    if int(n) != n or int(k) != k:
        raise DomainError("n and k must be integers")
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")
    return int(n), int(k)


def pd_log_V(n, k, alpha, theta) -> LogValue:
    """log V_{n,k} = log prod_{i<k}(theta + i alpha) - log (theta)_n for the PD prior.

    The leading factor theta is common to numerator and denominator and is
    cancelled before taking logs, so theta in (-alpha, 0] needs no special
    casing and every remaining factor is positive.
    """
    n, k = check_nk(n, k)
    check_alpha(alpha)
    if not theta > -alpha:
        raise DomainError(f"PD needs theta > -alpha, got theta={theta}")
    num = math.fsum(math.log(theta + i * alpha) for i in range(1, k))
    den = math.fsum(math.log(theta + i) for i in range(1, n))
    return LogValue(num - den)


def stable_log_V(n, k, alpha) -> LogValue:
    """V_{n,k} = alpha**(k-1) Gamma(k) / Gamma(n) for h = 1."""
    n, k = check_nk(n, k)
    return LogValue((k - 1) * math.log(alpha) + math.lgamma(k) - math.lgamma(n))
