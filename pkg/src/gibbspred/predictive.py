"""Partition bookkeeping, predictive weights by backend, and sequential trajectories.

Given n observations with k distinct types and frequencies n_1, ..., n_k,
observation n+1 is a new type with probability ``new_mass`` and equals
type i with probability ``existing_factor * (n_i - alpha)``.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .approximation import Form, PredictiveWeights, first_order_weights, second_order_weights
from .errors import DomainError, NumericalError
from .models import NGG, PD, GibbsModel, Stable, check_nk
from .montecarlo import DEFAULT_M, mc_weight
from .ngg_series import DEFAULT_DIGITS, ngg_predictive_weight_exact
from .quadrature import DESK_MAX_N, quadrature_V
from .rng import as_generator, as_stream
from .stable import sample_zeta

NORMALISATION_TOL = 1e-9


@dataclass(frozen=True)
class PartitionState:
    """Sufficient statistics of a sample: sizes of the distinct types, in order of appearance."""

    frequencies: tuple[int, ...] = ()
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(int(f) for f in self.frequencies))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.frequencies) != len(self.labels):
            raise DomainError("frequencies and labels must have the same length")
        if any(f < 1 for f in self.frequencies):
            raise DomainError("frequencies must be positive")
        if len(set(self.labels)) != len(self.labels):
            raise DomainError("labels must be distinct")

    @property
    def n(self) -> int:
        return sum(self.frequencies)

    @property
    def k(self) -> int:
        return len(self.frequencies)

    @classmethod
    def from_labels(cls, labels: Iterable) -> PartitionState:
        state = cls()
        for label in labels:
            state = observe(state, label)
        return state


def observe(state: PartitionState, label) -> PartitionState:
    """State after one more observation carrying ``label``."""
    try:
        i = state.labels.index(label)
    except ValueError:
        return PartitionState(state.frequencies + (1,), state.labels + (label,))
    freq = list(state.frequencies)
    freq[i] += 1
    return PartitionState(tuple(freq), state.labels)


class Backend(enum.Enum):
    EXACT = "exact"
    FIRST = "first"
    SECOND_RATIONAL = "second_rational"
    SECOND_EXPANDED = "second_expanded"
    MC = "mc"


@dataclass(frozen=True)
class MC:
    """MC backend with its replicate count; ``rng`` must then be passed to predictive_weights."""

    M: int = DEFAULT_M

    @property
    def name(self) -> str:
        return Backend.MC.value


def _backend(backend):
    if isinstance(backend, (Backend, MC)):
        return backend
    if isinstance(backend, str) and backend.lower() == "mc":
        return MC()
    return Backend(str(backend).lower())


def backend_name(backend) -> str:
    b = _backend(backend)
    return b.name if isinstance(b, MC) else b.value


def exact_weights(model: GibbsModel, n, k, precision_digits=DEFAULT_DIGITS) -> PredictiveWeights:
    """Exact weights: closed forms for PD and Stable, the series for NGG, quadrature otherwise."""
    n, k = check_nk(n, k)
    ka = k * model.alpha
    if isinstance(model, PD):
        return PredictiveWeights((model.theta + ka) / (model.theta + n), 1.0 / (model.theta + n),
                                 Form.EXACT)
    if isinstance(model, Stable):
        return PredictiveWeights(ka / n, 1.0 / n, Form.EXACT)
    if isinstance(model, NGG):
        # a PrecisionError or OutOfRangeError here already points to the MC backend
        new = ngg_predictive_weight_exact(n, k, model.alpha, model.tau, precision_digits)
        return PredictiveWeights(new, (1.0 - new) / (n - ka), Form.EXACT)
    if n + 1 > DESK_MAX_N:
        raise DomainError(f"exact weights for a generic h use quadrature, limited to n < {DESK_MAX_N}")
    factor = quadrature_V(n + 1, k, model).ratio(quadrature_V(n, k, model))
    return PredictiveWeights(1.0 - (n - ka) * factor, factor, Form.EXACT)


def predictive_weights(model: GibbsModel, state, backend=Backend.SECOND_RATIONAL, *, rng=None,
                       precision_digits=DEFAULT_DIGITS, mc_options=None) -> PredictiveWeights:
    """Predictive weights after ``state`` (a PartitionState or an (n, k) pair)."""
    n, k = (state.n, state.k) if isinstance(state, PartitionState) else state
    if k < 1:
        raise DomainError("predictive weights need at least one observation")
    b = _backend(backend)
    if isinstance(b, MC):
        if rng is None:
            raise DomainError("the MC backend needs an rng")
        w = mc_weight(n, k, model, b.M, rng, **(mc_options or {}))
        return PredictiveWeights(w.estimate, w.existing_factor, Form.MC, w.std_error,
                                 flagged=not w.in_range, rejection_count=w.rejection_count)
    if b is Backend.EXACT:
        return exact_weights(model, n, k, precision_digits)
    if b is Backend.FIRST:
        return first_order_weights(model, n, k)
    if b is Backend.SECOND_RATIONAL:
        return second_order_weights(model, n, k, Form.SECOND_ORDER_RATIONAL)
    return second_order_weights(model, n, k, Form.SECOND_ORDER_EXPANDED)


def _fresh_label(state: PartitionState):
    taken = set(state.labels)
    label = state.k
    while label in taken:
        label += 1
    return label


def sample_next(state: PartitionState, weights: PredictiveWeights, alpha, rng):
    """Label of observation n+1: a fresh label, or an existing one w.p. factor * (n_i - alpha)."""
    gen = as_generator(rng)
    freq = np.asarray(state.frequencies, dtype=float)
    if np.any(freq <= alpha):
        raise DomainError("every frequency must exceed alpha")
    total = weights.new_mass + weights.existing_factor * (state.n - state.k * alpha)
    if abs(total - 1.0) > NORMALISATION_TOL:
        raise DomainError(f"predictive weights sum to {total!r}, not 1")
    if state.k == 0 or gen.random() < weights.new_mass:
        return _fresh_label(state)
    i = gen.choice(state.k, p=(freq - alpha) / (state.n - state.k * alpha))
    return state.labels[i]


# ---- data sources -----------------------------------------------------------


@dataclass(frozen=True)
class ZetaSource:
    """i.i.d. Zeta(sigma) integers."""

    sigma: float = 1.5
    batch: int = 256

    def labels(self, state_fn, rng) -> Iterator:
        gen = as_generator(rng)
        while True:
            yield from (int(z) for z in sample_zeta(self.sigma, gen, self.batch))


@dataclass(frozen=True)
class UrnSource:
    """Self-generated sequence from the predictive rule of ``model`` (the trajectory model if None)."""

    model: GibbsModel | None = None
    backend: object = Backend.EXACT

    def labels(self, state_fn, rng) -> Iterator:
        gen = as_generator(rng)
        while True:
            state, model = state_fn()
            model = self.model or model
            if state.k == 0:
                yield 0
                continue
            w = predictive_weights(model, state, self.backend)
            yield sample_next(state, w, model.alpha, gen)


@dataclass(frozen=True)
class FileSource:
    """One label per line; blank lines are skipped."""

    path: str

    def labels(self, state_fn, rng) -> Iterator:
        with open(self.path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield int(line) if line.lstrip("-").isdigit() else line


@dataclass(frozen=True)
class SequenceSource:
    values: tuple

    def labels(self, state_fn, rng) -> Iterator:
        return iter(self.values)


def _source(source):
    if hasattr(source, "labels"):
        return source
    return SequenceSource(tuple(source))


# ---- trajectories -----------------------------------------------------------


@dataclass
class Trajectory:
    """Column-oriented table, one row per recorded n."""

    columns: dict = field(default_factory=dict)

    def append(self, row: dict):
        if not self.columns:
            self.columns = {key: [] for key in row}
        for key, value in row.items():
            self.columns[key].append(value)

    def __len__(self):
        return len(self.columns.get("n", ()))

    def __getitem__(self, key):
        return self.columns[key]

    def rows(self) -> Iterator[dict]:
        keys = list(self.columns)
        for values in zip(*(self.columns[key] for key in keys)):
            yield dict(zip(keys, values))


def run_trajectory(model: GibbsModel, source, n_max, backends=(Backend.EXACT,), rng=0, *,
                   n_min=1, n_step=1, precision_digits=DEFAULT_DIGITS, mc_options=None,
                   exact_max_n=None, on_error="raise", data_rng=None) -> Trajectory:
    """Feed observations one at a time and record k_n and new-type weights.

    For each backend ``b`` the table has columns ``b`` (new-type weight) and
    ``b_time`` (seconds); MC adds ``mc_se``, ``range_flag`` and
    ``rejection_count``.  The data come from ``data_rng`` (default: sub-stream
    0 of ``rng``) and the MC step at size n from sub-stream (1, n) of
    ``rng``, so recorded rows do not depend on n_min or n_step.

    ``exact_max_n`` leaves the exact column empty (NaN) above that n.  With
    ``on_error="record"`` a NumericalError from a backend gives NaN and an
    ``{b}_error`` entry instead of propagating.
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    if on_error not in ("raise", "record"):
        raise DomainError("on_error must be 'raise' or 'record'")
    stream = as_stream(rng)
    backends = [_backend(b) for b in backends]
    names = [backend_name(b) for b in backends]
    state = PartitionState()
    data_stream = stream.substream(0) if data_rng is None else as_stream(data_rng)
    labels = _source(source).labels(lambda: (state, model), data_stream)
    table = Trajectory()
    for n in range(1, n_max + 1):
        try:
            label = next(labels)
        except StopIteration:
            break
        state = observe(state, label)
        if n < n_min or (n - n_min) % n_step:
            continue
        row = {"n": n, "k_n": state.k}
        for b, name in zip(backends, names):
            if b is Backend.EXACT and exact_max_n is not None and n > exact_max_n:
                row[name], row[f"{name}_time"] = math.nan, math.nan
                if on_error == "record":
                    row[f"{name}_error"] = ""
                continue
            start = time.perf_counter()
            error = ""
            try:
                w = predictive_weights(model, state, b, rng=stream.substream(1, n),
                                       precision_digits=precision_digits, mc_options=mc_options)
            except NumericalError as exc:
                if on_error == "raise":
                    raise
                w, error = None, type(exc).__name__
            row[f"{name}_time"] = time.perf_counter() - start
            row[name] = w.new_mass if w is not None else math.nan
            if isinstance(b, MC):
                row["mc_se"] = w.std_error if w is not None else math.nan
                row["range_flag"] = int(w is None or w.flagged)
                row["rejection_count"] = w.rejection_count if w is not None else 0
            if on_error == "record" and not isinstance(b, MC):
                row[f"{name}_error"] = error
        table.append(row)
    return table
