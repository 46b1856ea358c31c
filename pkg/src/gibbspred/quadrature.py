"""Deterministic quadrature of the V_{n,k} integral for any Gibbs model.

    V_{n,k} = alpha**k / Gamma(n - k alpha)
              int_0^inf int_0^1 t**(-k alpha) p**(n - k alpha - 1) h(t) f_alpha((1-p) t) dp dt

is integrated after the change of variables y = 1 - p, x = (1 - p) t
(Jacobian 1/y), which moves the stable density onto a single axis:

    V_{n,k} = alpha**k / Gamma(n - k alpha)
              int_0^inf x**(-k alpha) f_alpha(x)
                  [ int_0^1 y**(k alpha - 1) (1 - y)**(n - k alpha - 1) h(x / y) dy ] dx.

The inner integral carries both algebraic endpoint singularities as
QUADPACK weights (QAWS); the outer one runs over log x with the bulk of the
integrand located first, so that f_alpha is evaluated only O(10**3) times.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError
from .models import GibbsModel, LogValue, check_nk
from .stable import log_stable_pdf

DESK_MAX_N = 30
_DROP = 50.0  # integrand cut-off, in log units below the maximum


def _inner_log(x, n, k, model, tol):
    a = model.alpha
    shift = float(model.log_h(x))

    def g(y):
        return math.exp(float(model.log_h(x / y)) - shift) if y > 0 else 0.0

    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        val, err = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(k * a - 1.0, n - k * a - 1.0),
                                  epsabs=0.0, epsrel=tol, limit=200)
    if val <= 0.0:
        return -math.inf
    return shift + math.log(val)


def quadrature_V(n, k, model: GibbsModel, rel_tol=1e-8, max_n=DESK_MAX_N) -> LogValue:
    """log V_{n,k} by adaptive quadrature; raises NumericalError if rel_tol is missed."""
    n, k = check_nk(n, k)
    if n > max_n:
        raise DomainError(f"quadrature_V is a desk-scale oracle limited to n <= {max_n}, got n={n}")
    a = model.alpha
    inner_tol = max(rel_tol * 1e-2, 1e-13)

    def log_integrand(s):
        x = math.exp(s)
        return (1.0 - k * a) * s + log_stable_pdf(x, a) + _inner_log(x, n, k, model, inner_tol)

    # walk outwards on a coarse grid until the integrand is negligible on both sides
    step = 0.5
    grid = {0.0: log_integrand(0.0)}
    best = grid[0.0]
    for direction in (-1.0, 1.0):
        s = 0.0
        for _ in range(1500):
            s += direction * step
            grid[s] = log_integrand(s)
            best = max(best, grid[s])
            if grid[s] < best - _DROP and grid[s] < grid[s - direction * step]:
                break
        else:
            raise NumericalError("could not bracket the V integrand", achieved=math.inf)
    peak_s = max(grid, key=grid.get)
    alive = [s for s, v in grid.items() if v >= best - _DROP]
    lo, hi = min(alive) - step, max(alive) + step

    def f(s):
        return math.exp(log_integrand(s) - best)

    val, err = integrate.quad(f, lo, hi, points=[peak_s], epsabs=0.0,
                              epsrel=rel_tol * 0.1, limit=400)
    if not val > 0.0 or err > rel_tol * val:
        raise NumericalError(
            f"quadrature_V missed rel_tol={rel_tol:g} at n={n}, k={k}",
            achieved=err / val if val > 0 else math.inf)
    return LogValue(k * math.log(a) - math.lgamma(n - k * a) + best + math.log(val))
