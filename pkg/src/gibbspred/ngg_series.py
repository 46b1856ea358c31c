"""Exact V_{n,k} for the normalized generalized Gamma prior.

With h(t) = exp(tau**alpha - tau t) and the exp(-s**alpha) stable
normalisation, expanding (u + tau - tau)**(n-1) in

    V_{n,k} = alpha**k / Gamma(n) int_0^inf u**(n-1) (u + tau)**(k alpha - n)
              exp(tau**alpha - (u + tau)**alpha) du

gives the alternating series

    V_{n,k} = alpha**(k-1) exp(tau**alpha) / Gamma(n)
              * sum_{i<n} C(n-1, i) (-tau)**i Gamma(k - i/alpha, tau**alpha).

At tau = 0 only i = 0 survives and V_{n,k} = alpha**(k-1) Gamma(k) / Gamma(n).
The summands are huge and of alternating sign, so the sum is evaluated in
mpmath at a caller-chosen number of decimal digits and checked for
catastrophic cancellation.
"""
from __future__ import annotations

import math

import mpmath
from scipy import special

from .errors import DomainError, OutOfRangeError, PrecisionError
from .models import LogValue, check_nk
from .stable import check_alpha

DEFAULT_DIGITS = 50


def incomplete_gamma(a, b):
    """Upper incomplete gamma Gamma(a, b) = int_b^inf x**(a-1) e**(-x) dx for real a, b > 0.

    For a <= 0 the value is obtained from the fractional part of a by the
    downward recurrence Gamma(a, b) = (Gamma(a + 1, b) - b**a e**(-b)) / a,
    starting from E_1(b) = Gamma(0, b) when a is an integer.
    """
    if not b > 0:
        raise DomainError(f"incomplete gamma needs b > 0, got {b!r}")
    if a > 0:
        return _upper_gamma_positive(a, b)
    steps = math.ceil(-a)
    a0 = a + steps
    if a0 == 0.0 or a0 == 1.0:
        a0, steps = 0.0, -round(a)
        value = float(special.exp1(b))
    else:
        value = _upper_gamma_positive(a0, b)
    log_b, eb = math.log(b), math.exp(-b)
    s = a0
    for _ in range(steps):
        s -= 1.0
        value = (value - math.exp(s * log_b) * eb) / s
    return value


def _upper_gamma_positive(a, b):
    # Gamma(a) overflows as a -> 0+ while the product stays near E_1(b)
    if a < 1e-5:
        return float(mpmath.gammainc(a, b))
    return float(special.gammaincc(a, b) * special.gamma(a))


def _upper_gamma_values(ctx, exponents, b):
    """Gamma(a, b) for every a in ``exponents`` (mpf), one downward sweep per residue class."""
    out = [None] * len(exponents)
    ladders = {}
    tiny = ctx.mpf(10) ** (-(ctx.dps - 5))
    for idx, a in enumerate(exponents):
        if a > 0:
            out[idx] = ctx.gammainc(a, b)
            continue
        nearest = ctx.nint(a)
        if abs(a - nearest) < tiny:
            start, steps = ctx.zero, int(-nearest)
        else:
            steps = int(ctx.ceil(-a))
            start = a + steps
        key = ctx.nstr(start, 12)
        ladders.setdefault(key, [start, 0, []])
        entry = ladders[key]
        entry[1] = max(entry[1], steps)
        entry[2].append((idx, steps))

    eb = ctx.exp(-b)
    for start, depth, wanted in ladders.values():
        value = ctx.e1(b) if start == 0 else ctx.gammainc(start, b)
        chain = [value]
        s = start
        for _ in range(depth):
            s -= 1
            value = (value - ctx.power(b, s) * eb) / s
            chain.append(value)
        for idx, steps in wanted:
            out[idx] = chain[steps]
    return out


def _log_V_mp(ctx, n, k, alpha, tau):
    a = ctx.mpf(alpha)
    t = ctx.mpf(tau)
    prefix = (k - 1) * ctx.log(a) - ctx.loggamma(n)
    if tau == 0:
        return prefix + ctx.loggamma(k)
    b = ctx.power(t, a)
    exps = [k - ctx.mpf(i) / a for i in range(n)]
    gammas = _upper_gamma_values(ctx, exps, b)
    total = ctx.zero
    largest = ctx.zero
    for i in range(n):
        term = ctx.binomial(n - 1, i) * ctx.power(-t, i) * gammas[i]
        total += term
        largest = max(largest, abs(term))
    threshold = ctx.power(10, -ctx.mpf(ctx.dps) / 2)
    if total <= 0 or total < threshold * largest:
        raise PrecisionError(
            f"NGG series cancels beyond {ctx.dps} digits at n={n}, k={k}, "
            f"alpha={alpha}, tau={tau}; raise precision_digits or use the MC backend",
            achieved=float(abs(largest / total)) if total != 0 else math.inf)
    return prefix + b + ctx.log(total)


def _context(precision_digits):
    if int(precision_digits) < 5:
        raise DomainError("precision_digits must be at least 5")
    ctx = mpmath.MPContext()
    ctx.dps = int(precision_digits)
    return ctx


def _check_ngg(n, k, alpha, tau):
    n, k = check_nk(n, k)
    check_alpha(alpha)
    if not tau >= 0:
        raise DomainError(f"NGG needs tau >= 0, got {tau!r}")
    return n, k


def ngg_log_V_series(n, k, alpha, tau, precision_digits=DEFAULT_DIGITS) -> LogValue:
    """log V_{n,k} for NGG(alpha, tau) from the incomplete-gamma series.

    Raises PrecisionError when |sum| < 10**(-precision_digits/2) * max|term|.
    """
    n, k = _check_ngg(n, k, alpha, tau)
    ctx = _context(precision_digits)
    return LogValue(float(_log_V_mp(ctx, n, k, alpha, tau)))


def ngg_predictive_weight_exact(n, k, alpha, tau, precision_digits=DEFAULT_DIGITS):
    """New-type probability 1 - (n - alpha k) V_{n+1,k} / V_{n,k} from the series.

    Raises PrecisionError (series cancellation) or OutOfRangeError (result
    outside (0, 1)); the caller may retry with more digits or use MC.
    """
    n, k = _check_ngg(n, k, alpha, tau)
    if tau == 0:
        return k * alpha / n
    ctx = _context(precision_digits)
    log_ratio = _log_V_mp(ctx, n + 1, k, alpha, tau) - _log_V_mp(ctx, n, k, alpha, tau)
    weight = 1 - (n - ctx.mpf(alpha) * k) * ctx.exp(log_ratio)
    if not 0 < weight < 1:
        raise OutOfRangeError(
            f"NGG weight {ctx.nstr(weight, 8)} outside (0, 1) at n={n}, k={k}; "
            "increase precision_digits or use the MC backend", value=float(weight))
    return float(weight)
