"""Monte Carlo evaluation of V_{n,k} and of the new-type weight.

V_{n,k} = alpha**(k-1) Gamma(k) / Gamma(n) * E[h(X / Y)]
with Y ~ Beta(k alpha, n - k alpha) and X polynomially tilted stable of
order k, independent, and h normalised so that E[h(T_alpha)] = 1.  For NGG
h(X / Y) = exp(tau**alpha - tau X / Y).

Replicates are generated in fixed-size chunks, each on its own sub-stream,
and reduced in chunk order, so the estimate does not depend on how many
workers produced the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .models import NGG, GibbsModel, Stable, check_nk
from .rng import as_stream
from .stable import RejectionCounter, check_alpha, sample_exp_tilted_stable

DEFAULT_M = 10_000
CHUNK_SIZE = 10_000


@dataclass(frozen=True)
class VEstimate:
    log_value: float
    log_std_error: float
    M: int
    rejection_count: int = 0


@dataclass(frozen=True)
class MCWeight:
    """MC new-type weight 1 - (n - alpha k) V_{n+1,k}/V_{n,k} and its delta-method SE."""

    estimate: float
    std_error: float
    existing_factor: float
    in_range: bool
    rejection_count: int

    def __iter__(self):
        yield self.estimate
        yield self.std_error


def log_mean_exp(v):
    """(log mean exp(v), delta-method SE of that log) without leaving log scale."""
    v = np.asarray(v, dtype=float)
    if v.size < 2:
        raise DomainError("need at least two replicates for a standard error")
    top = v.max()
    if not np.isfinite(top):
        raise DomainError("all replicates are -inf" if top < 0 else "non-finite replicate")
    w = np.exp(v - top)
    mean = w.mean()
    return float(top + math.log(mean)), float(w.std(ddof=1) / (math.sqrt(v.size) * mean))


def _chunk_sizes(M, chunk_size):
    full, rest = divmod(M, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _log_replicates(n, k, model, size, stream, method):
    alpha = model.alpha
    gen = stream.generator()
    counter = RejectionCounter()
    y = gen.beta(k * alpha, n - k * alpha, size)
    g = gen.gamma(k, 1.0, size)
    x = sample_exp_tilted_stable(alpha, g ** (1.0 / alpha), gen, method=method, counter=counter)
    return np.asarray(model.log_h(x / y), dtype=float), counter.rejections


def _is_constant(model):
    return isinstance(model, Stable) or (isinstance(model, NGG) and model.tau == 0)


def mc_log_V(n, k, model: GibbsModel, M=DEFAULT_M, rng=0, *, chunk_size=CHUNK_SIZE,
             workers=1, method="rejection") -> VEstimate:
    """Monte Carlo estimate of log V_{n,k} for any model with a normalised h."""
    n, k = check_nk(n, k)
    if M < 2:
        raise DomainError("M must be at least 2")
    stream = as_stream(rng)
    alpha = model.alpha
    const = (k - 1) * math.log(alpha) + math.lgamma(k) - math.lgamma(n)
    if _is_constant(model):
        # integrand is identically 1
        return VEstimate(const, 0.0, int(M), 0)

    sizes = _chunk_sizes(int(M), int(chunk_size))
    jobs = [(n, k, model, size, stream.substream(j), method) for j, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _log_replicates(*job), jobs))
    else:
        parts = [_log_replicates(*job) for job in jobs]
    v = np.concatenate([p[0] for p in parts])
    log_mean, log_se = log_mean_exp(v)
    return VEstimate(const + log_mean, log_se, int(M), sum(p[1] for p in parts))


def _ngg(alpha, tau):
    check_alpha(alpha)
    if not tau >= 0:
        raise DomainError(f"NGG needs tau >= 0, got {tau!r}")
    return NGG(alpha, tau)


def mc_log_V_ngg(n, k, alpha, tau, M=DEFAULT_M, rng=0, **kwargs) -> VEstimate:
    """Monte Carlo estimate of log V_{n,k} for NGG(alpha, tau)."""
    return mc_log_V(n, k, _ngg(alpha, tau), M, rng, **kwargs)


def mc_weight(n, k, model: GibbsModel, M=DEFAULT_M, rng=0, **kwargs) -> MCWeight:
    """MC estimate of the probability that observation n+1 is a new type.

    Numerator and denominator use independent sub-streams.  The estimate is
    returned even when it leaves (0, 1); ``in_range`` reports that.
    """
    n, k = check_nk(n, k)
    alpha = model.alpha
    if _is_constant(model):
        return MCWeight(k * alpha / n, 0.0, 1.0 / n, True, 0)
    stream = as_stream(rng)
    den = mc_log_V(n, k, model, M, stream.substream(0), **kwargs)
    num = mc_log_V(n + 1, k, model, M, stream.substream(1), **kwargs)
    factor = math.exp(num.log_value - den.log_value)
    estimate = 1.0 - (n - alpha * k) * factor
    se = (n - alpha * k) * factor * math.hypot(num.log_std_error, den.log_std_error)
    return MCWeight(estimate, se, factor, 0.0 < estimate < 1.0,
                    num.rejection_count + den.rejection_count)


def mc_new_type_weight(n, k, alpha, tau, M=DEFAULT_M, rng=0, **kwargs) -> MCWeight:
    """``mc_weight`` for NGG(alpha, tau); tau = 0 gives exactly k alpha / n with zero SE."""
    return mc_weight(n, k, _ngg(alpha, tau), M, rng, **kwargs)
