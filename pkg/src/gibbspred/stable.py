"""Positive alpha-stable laws and their exponential / polynomial tilts.

Normalisation: the positive stable variable T has Laplace transform
E[exp(-s T)] = exp(-s**alpha).  Everything downstream assumes this.

The density uses Zolotarev's single-integral representation

    f(x) = alpha / ((1 - alpha) * pi) * x**(-1/(1-alpha))
           * int_0^pi A(u) exp(-A(u) x**(-alpha/(1-alpha))) du

with A(u) = (sin(alpha u)**alpha sin((1-alpha) u)**(1-alpha) / sin u)**(1/(1-alpha)),
and the unit sampler is Kanter's transform T = (A(U) / E)**((1-alpha)/alpha).
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, NumericalError
from .rng import as_generator

MAX_TILT_SCALE = 1e8
_CUT = 60.0


def check_alpha(alpha):
    if not (0.0 < alpha < 1.0) or not math.isfinite(alpha):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def _log_sinc(v):
    return math.log(math.sin(v) / v) if v != 0.0 else 0.0


def _log_zolotarev(u, alpha):
    # Written with sin(v)/v so that u -> 0 is exact: A(0) = alpha**(alpha/(1-alpha)) (1-alpha).
    beta = 1.0 - alpha
    head = alpha * math.log(alpha) + beta * math.log(beta)
    if u == 0.0:
        return head / beta
    s = math.sin(u)
    if s <= 0.0:
        return math.inf
    tail = alpha * _log_sinc(alpha * u) + beta * _log_sinc(beta * u) - math.log(s / u)
    return (head + tail) / beta


def _log_zolotarev_vec(u, alpha):
    beta = 1.0 - alpha
    head = alpha * np.log(alpha) + beta * np.log(beta)
    with np.errstate(divide="ignore"):
        tail = (alpha * np.log(np.sinc(alpha * u / np.pi))
                + beta * np.log(np.sinc(beta * u / np.pi))
                - np.log(np.sinc(u / np.pi)))
    return (head + tail) / beta


def log_stable_pdf(x, alpha, tol=1e-10):
    """Logarithm of the positive stable density, see :func:`stable_pdf`."""
    alpha = check_alpha(alpha)
    if not x > 0.0:
        raise DomainError(f"stable density needs x > 0, got {x!r}")
    if math.isinf(x):
        return -math.inf
    beta = 1.0 - alpha
    if x ** -alpha < 1e-2:
        return _log_stable_pdf_tail(x, alpha)
    log_z = -alpha / beta * math.log(x)
    log_a0 = _log_zolotarev(0.0, alpha)

    # log A(u) - A(u) z is maximal where A(u) = 1/z (A increases on (0, pi)).
    top = math.pi * (1.0 - 1e-15)
    if log_a0 + log_z >= 0.0:
        u_star = 0.0
        peak = log_a0 - math.exp(log_a0 + log_z)
    else:
        u_star = optimize.brentq(lambda u: _log_zolotarev(u, alpha) + log_z,
                                 0.0, top, xtol=1e-15)
        peak = -log_z - 1.0

    def log_integrand(u):
        la = _log_zolotarev(u, alpha)
        if la == math.inf:
            return -math.inf
        return la - math.exp(la + log_z) - peak

    def integrand(u):
        return math.exp(log_integrand(u))

    # Far in the left tail the integrand is a spike of width ~ z**-1/2, too
    # narrow for quad to find unaided; integrate only where it exceeds e**-60.
    def edge(a, b):
        return optimize.brentq(lambda u: log_integrand(u) + _CUT, a, b, xtol=1e-14 * (b - a))

    lo = edge(0.0, u_star) if u_star > 0.0 and log_integrand(0.0) < -_CUT else 0.0
    hi = edge(u_star, top) if log_integrand(top) < -_CUT else math.pi
    points = [u_star] if lo < u_star < hi else None
    # the exponent is computed with absolute error ~ eps |peak|, which bounds
    # the attainable relative accuracy deep in the left tail (f < e**-1000 there)
    tol = max(tol, 100.0 * sys.float_info.epsilon * abs(peak))
    val, err, info, *msg = integrate.quad(integrand, lo, hi, points=points,
                                          epsabs=tol * 1e-3, epsrel=tol, limit=400,
                                          full_output=1)
    if val <= 0.0 or err > 1e3 * tol * val:
        raise NumericalError(f"stable density quadrature did not converge at x={x}",
                             achieved=err / val if val > 0 else math.inf)
    return (math.log(alpha / beta) - math.log(x) / beta - math.log(math.pi)
            + peak + math.log(val))


def _log_stable_pdf_tail(x, alpha):
    # Convergent series in x**(-alpha); used far in the right tail where the
    # Zolotarev integrand collapses onto u = pi.
    log_x = math.log(x)
    lead = math.lgamma(alpha + 1) - (alpha + 1) * log_x
    terms = []
    for j in range(1, 80):
        rel = math.lgamma(alpha * j + 1) - math.lgamma(j + 1) - (alpha * j + 1) * log_x - lead
        terms.append((-1) ** (j + 1) * math.sin(math.pi * alpha * j) * math.exp(rel))
        if rel < -40.0:
            break
    return lead + math.log(math.fsum(terms) / math.pi)


def stable_pdf(x, alpha, tol=1e-10):
    """Density of the positive alpha-stable law with Laplace transform exp(-s**alpha).

    Raises DomainError for ``x <= 0`` and NumericalError (carrying the
    achieved relative accuracy) if the quadrature fails.
    """
    return math.exp(log_stable_pdf(x, alpha, tol))


def poly_tilted_pdf(x, alpha, k):
    """Density Gamma(k alpha + 1)/Gamma(k + 1) x**(-k alpha) f_alpha(x)."""
    return math.exp(special.gammaln(k * alpha + 1) - special.gammaln(k + 1)
                    - k * alpha * math.log(x) + log_stable_pdf(x, alpha))


@dataclass
class RejectionCounter:
    """Accumulates proposal / acceptance counts across sampler calls."""

    draws: int = 0
    proposals: int = 0

    @property
    def rejections(self):
        return self.proposals - self.draws

    @property
    def acceptance_rate(self):
        return self.draws / self.proposals if self.proposals else math.nan

    def add(self, draws, proposals):
        self.draws += int(draws)
        self.proposals += int(proposals)


def sample_positive_stable(alpha, rng, size=None):
    """Exact draws with Laplace transform exp(-s**alpha) (Kanter's method)."""
    alpha = check_alpha(alpha)
    gen = as_generator(rng)
    u = gen.uniform(0.0, math.pi, size)
    e = gen.standard_exponential(size)
    return np.exp((1.0 - alpha) / alpha * (_log_zolotarev_vec(u, alpha) - np.log(e)))


def _tilted_by_splitting(alpha, c, gen):
    # The tilted law is the m-fold convolution of the tilt-c law of T / m**(1/alpha).
    # Each piece is drawn by plain rejection (accept w.p. exp(-c S)), which
    # succeeds with probability exp(-c**alpha / m); m ~ c**alpha keeps that near 1/e.
    m = np.maximum(1, np.rint(c ** alpha)).astype(np.int64)
    owner = np.repeat(np.arange(c.size), m)
    piece_tilt = c[owner]
    piece_scale = m[owner].astype(float) ** (-1.0 / alpha)
    pieces = np.empty(owner.size)
    pending = np.arange(owner.size)
    proposals = 0
    while pending.size:
        s = piece_scale[pending] * sample_positive_stable(alpha, gen, pending.size)
        ok = gen.standard_exponential(pending.size) >= piece_tilt[pending] * s
        proposals += pending.size
        pieces[pending[ok]] = s[ok]
        pending = pending[~ok]
    starts = np.cumsum(m) - m
    return np.add.reduceat(pieces, starts) if c.size else pieces, proposals, int(m.sum())


def _sinc(x):
    return math.sin(x) / x if x != 0.0 else 1.0


def _double_rejection_one(alpha, lam, gen):
    # Devroye's double-rejection sampler for density exp(lam**alpha - lam x) f(x),
    # lam > 0; expected cost is bounded uniformly in lam.  Returns (x, iterations).
    b = (1.0 - alpha) / alpha
    lam_alpha = lam ** alpha
    gamma = lam_alpha * alpha * (1.0 - alpha)
    sqrt_gamma = math.sqrt(gamma)
    c1 = math.sqrt(math.pi / 2.0)
    c2 = 2.0 + c1
    c3 = c2 * sqrt_gamma
    xi = (1.0 + math.sqrt(2.0) * c3) / math.pi
    psi = c3 * math.exp(-gamma * math.pi * math.pi / 8.0) / math.sqrt(math.pi)
    w1 = c1 * xi / sqrt_gamma
    w2 = 2.0 * math.sqrt(math.pi) * psi
    w3 = xi * math.pi

    def b_ratio(u):
        return _sinc(u) / (_sinc(alpha * u) ** alpha * _sinc((1.0 - alpha) * u) ** (1.0 - alpha))

    def a3(u):
        return ((alpha * _sinc(alpha * u)) ** alpha
                * ((1.0 - alpha) * _sinc((1.0 - alpha) * u)) ** (1.0 - alpha) / _sinc(u))

    iterations = 0
    while True:
        iterations += 1
        # inner rejection for the auxiliary angle U
        while True:
            v = gen.random()
            if gamma >= 1.0:
                if v < w1 / (w1 + w2):
                    u = abs(gen.standard_normal()) / sqrt_gamma
                else:
                    w = gen.random()
                    u = math.pi * (1.0 - w * w)
            else:
                w = gen.random()
                u = math.pi * w if v < w3 / (w2 + w3) else math.pi * (1.0 - w * w)
            if not u < math.pi:
                gen.random()
                continue
            zeta = math.sqrt(b_ratio(u))
            z = 1.0 / (1.0 - (1.0 + alpha * zeta / sqrt_gamma) ** (-1.0 / alpha))
            expo = -lam_alpha * (1.0 - 1.0 / (zeta * zeta))
            if expo > 700.0:
                # acceptance probability underflows to zero
                gen.random()
                continue
            rho = math.pi * math.exp(expo) / ((1.0 + c1) * sqrt_gamma / zeta + z)
            d = 0.0
            if u >= 0.0 and gamma >= 1.0:
                d += xi * math.exp(-gamma * u * u / 2.0)
            if 0.0 < u < math.pi:
                d += psi / math.sqrt(math.pi - u)
            if 0.0 <= u <= math.pi and gamma < 1.0:
                d += xi
            rho *= d
            zz = gen.random() * rho
            if zz <= 1.0:
                break
        a = a3(u) ** (1.0 / (1.0 - alpha))
        m = (b / a) ** alpha * lam_alpha
        delta = math.sqrt(m * alpha / a)
        a1 = delta * c1
        a3v = z / a
        s = a1 + delta + a3v
        v2 = gen.random()
        nrm = 0.0
        e1 = 0.0
        if v2 < a1 / s:
            nrm = gen.standard_normal()
            x = m - delta * abs(nrm)
        elif v2 < (a1 + delta) / s:
            x = m + delta * gen.random()
        else:
            e1 = gen.standard_exponential()
            x = m + delta + e1 * a3v
        if x <= 0.0:
            continue
        e2 = -math.log(zz)
        c = a * (x - m) + math.exp(math.log(lam_alpha) / alpha - b * math.log(m)) * ((m / x) ** b - 1.0)
        if x < m:
            c -= nrm * nrm / 2.0
        elif x > m + delta:
            c -= e1
        if c <= e2:
            return x ** (-b), iterations


def sample_exp_tilted_stable(alpha, tilt, rng, size=None, *, method="rejection", counter=None):
    """Draws from the density exp(c**alpha - c x) f_alpha(x).

    ``tilt`` may be a scalar or an array (one tilt per draw).  ``method``
    selects the algorithm:

    * ``"rejection"``: proposals from the untilted law accepted with
      probability exp(-c x), after splitting the variable into ~c**alpha
      independent pieces.  Work grows linearly in c**alpha.
    * ``"double_rejection"``: Devroye's scheme, bounded work for all c.

    Pass a :class:`RejectionCounter` to accumulate proposal counts.
    """
    alpha = check_alpha(alpha)
    gen = as_generator(rng)
    c = np.asarray(tilt, dtype=float)
    if size is not None:
        c = np.broadcast_to(c, size)
    shape = c.shape
    c = np.ascontiguousarray(c).ravel()
    if np.any(c < 0) or np.any(~np.isfinite(c)):
        raise DomainError("tilt must be finite and non-negative")
    if c.size and float(c.max()) ** alpha > MAX_TILT_SCALE:
        raise DomainError(f"tilt**alpha exceeds {MAX_TILT_SCALE:g}; refusing a pathological draw")

    if method == "rejection":
        x, proposals, _ = _tilted_by_splitting(alpha, c, gen)
    elif method == "double_rejection":
        x = np.empty(c.size)
        proposals = 0
        for i, ci in enumerate(c):
            if ci == 0.0:
                x[i] = sample_positive_stable(alpha, gen)
                proposals += 1
            else:
                x[i], it = _double_rejection_one(alpha, float(ci), gen)
                proposals += it
    else:
        raise DomainError(f"unknown method {method!r}")

    if counter is not None:
        counter.add(c.size, proposals)
    if size is None and shape == ():
        return float(x[0])
    return x.reshape(shape)


def sample_poly_tilted_stable(alpha, k, rng, size=None, *, method="rejection", counter=None):
    """Draws from Gamma(k alpha + 1)/Gamma(k + 1) x**(-k alpha) f_alpha(x).

    Gamma augmentation: G ~ Gamma(k, 1), C = G**(1/alpha), then an
    exponentially tilted draw with tilt C.
    """
    alpha = check_alpha(alpha)
    if not k > 0:
        raise DomainError(f"k must be positive, got {k!r}")
    gen = as_generator(rng)
    g = gen.gamma(k, 1.0, size)
    return sample_exp_tilted_stable(alpha, np.asarray(g) ** (1.0 / alpha), gen,
                                    method=method, counter=counter)


def sample_zeta(sigma, rng, size=None):
    """Exact Zeta(sigma) draws, P(Z = z) proportional to z**(-sigma), z = 1, 2, ...

    numpy's Zipf generator is Devroye's rejection from a Pareto envelope,
    which is exact and has unbounded support.
    """
    if not sigma > 1.0:
        raise DomainError(f"Zeta law needs sigma > 1, got {sigma!r}")
    return as_generator(rng).zipf(sigma, size)
