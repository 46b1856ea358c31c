"""Comparison experiments over a parameter grid, with CSV and SVG output.

Every configuration (alpha, parameter) replays one observation stream and
records new-type weights along it.  By default all configurations share a
single data realisation per seed, so curves are comparable across panels;
``independent_data`` gives each configuration its own stream.

CSV files carry only deterministic quantities and are byte-identical for a
fixed configuration and seed.  Wall-clock columns go to a separate
``*.runtime.csv`` next to the NGG comparison files.
"""
from __future__ import annotations

import csv
import dataclasses
import itertools
import math
import os
import timeit
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from . import stable
from .errors import DomainError
from .models import NGG, PD, GibbsModel
from .montecarlo import DEFAULT_M, mc_log_V_ngg
from .ngg_series import DEFAULT_DIGITS, ngg_log_V_series
from .predictive import (MC, FileSource, UrnSource, ZetaSource, predictive_weights,
                         run_trajectory)
from .quadrature import quadrature_V
from .rng import RngStream

DEFAULT_SEED = 1
GRID_ALPHAS = (0.25, 0.5, 0.75)
GRID_PARAMS = (1.0, 3.0, 10.0)
DESK_N_MAX = 100
DESK_M = 1_000


@dataclass
class ExperimentConfig:
    family: str = "pd"
    alphas: tuple = GRID_ALPHAS
    params: tuple = GRID_PARAMS
    source: str = "zeta"
    sigma: float = 1.5
    data_file: str | None = None
    n_min: int = 1
    n_max: int = 500
    n_step: int = 1
    M: int = DEFAULT_M
    precision_digits: int = DEFAULT_DIGITS
    series_max_n: int = 100
    seed: int = DEFAULT_SEED
    out: str = "results"
    plot: bool = True
    independent_data: bool = False
    jobs: int = 1

    def validate(self):
        if self.family not in ("pd", "ngg"):
            raise DomainError(f"family must be 'pd' or 'ngg', got {self.family!r}")
        for a, p in self.grid():
            # constructing the model checks its domain
            self.model(a, p)
        if self.n_max < 1 or self.n_min < 1 or self.n_step < 1:
            raise DomainError("n_min, n_max and n_step must be positive")
        if self.M < 2:
            raise DomainError("M must be at least 2")
        if self.source not in ("zeta", "file", "urn"):
            raise DomainError(f"source must be zeta, file or urn, got {self.source!r}")
        if self.source == "file" and not self.data_file:
            raise DomainError("source=file needs data_file")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        return self

    def grid(self):
        return list(itertools.product(self.alphas, self.params))

    def model(self, alpha, param) -> GibbsModel:
        return PD(alpha, theta=param) if self.family == "pd" else NGG(alpha, tau=param)

    def data_source(self):
        if self.source == "zeta":
            return ZetaSource(self.sigma)
        if self.source == "file":
            return FileSource(self.data_file)
        return UrnSource()


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
_ALIASES = {"m": "M", "precision": "precision_digits", "nmax": "n_max", "alpha": "alphas",
            "theta": "params", "tau": "params", "output": "out"}


def _parse_value(name, text):
    kind = _FIELD_TYPES[name]
    text = text.strip()
    if kind == "tuple":
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    if kind == "bool":
        if text.lower() not in ("1", "0", "true", "false", "yes", "no"):
            raise DomainError(f"{name}: expected a boolean, got {text!r}")
        return text.lower() in ("1", "true", "yes")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text or None


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, lists are comma separated."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            key, text = (part.strip() for part in line.split("=", 1))
            key = _ALIASES.get(key.lower(), key.lower())
            if key not in _FIELD_TYPES:
                raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _parse_value(key, text)
    return values


def make_config(family, file_values=None, **overrides) -> ExperimentConfig:
    """Defaults, then the config file, then explicit overrides (None means unset)."""
    values = {"family": family}
    values.update(file_values or {})
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values).validate()


def desk(config: ExperimentConfig) -> ExperimentConfig:
    """Cap an MC-heavy run at desk scale."""
    return dataclasses.replace(config, n_max=min(config.n_max, DESK_N_MAX), M=min(config.M, DESK_M))


# ---- output -----------------------------------------------------------------


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    if math.isnan(value):
        return ""
    return format(float(value), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(row.get(key)) for key in header])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def file_stem(family, alpha, param):
    return f"{family}_{alpha:g}_{param:g}"


def plot_curves(csv_path, svg_path, curves, title, n_from=50):
    """Vector plot of the chosen CSV columns against n on a log axis."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(csv_path)
    if rows and int(rows[-1]["n"]) > n_from:
        rows = [r for r in rows if int(r["n"]) >= n_from]
    n = [int(r["n"]) for r in rows]
    with matplotlib.rc_context({"svg.hashsalt": "gibbspred", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for column, label in curves:
            y = [float(r[column]) if r.get(column) else math.nan for r in rows]
            ax.plot(n, y, label=label, lw=1)
        if n and max(n) > 1:
            ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("probability of a new type")
        ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        plt.close(fig)


# ---- commands -----------------------------------------------------------------


def _streams(config, index):
    root = RngStream(int(config.seed))
    data = root.substream(0, index) if config.independent_data else root.substream(0)
    return data, root.substream(1, index)


def _plot_all(config, results, curves):
    # pyplot is not thread-safe, so plotting waits until every configuration is done
    if config.plot:
        for path, title in results:
            plot_curves(path, path[:-4] + ".svg", curves, title)
    return [path for path, _ in results]


def _map_configs(config, fn: Callable):
    tasks = list(enumerate(config.grid()))
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(lambda t: fn(t[0], *t[1]), tasks))
    return [fn(i, a, p) for i, (a, p) in tasks]


PD_COLUMNS = ["n", "k_n", "exact", "first", "second_expanded", "second_rational",
              "err_first", "err_second"]


def cmd_pd_compare(config: ExperimentConfig) -> list[str]:
    """Exact PD weights against both approximations along a trajectory; returns CSV paths."""
    os.makedirs(config.out, exist_ok=True)

    def one(index, alpha, theta):
        data_rng, mc_rng = _streams(config, index)
        table = run_trajectory(config.model(alpha, theta), config.data_source(), config.n_max,
                               ["exact", "first", "second_expanded", "second_rational"], mc_rng,
                               n_min=config.n_min, n_step=config.n_step, data_rng=data_rng)
        rows = []
        for r in table.rows():
            r["err_first"] = r["exact"] - r["first"]
            r["err_second"] = r["exact"] - r["second_expanded"]
            rows.append(r)
        path = os.path.join(config.out, file_stem("pd", alpha, theta) + ".csv")
        write_csv(path, PD_COLUMNS, rows)
        return path, f"PD  alpha={alpha:g}  theta={theta:g}"

    return _plot_all(config, _map_configs(config, one),
                     [("exact", "exact"), ("first", "first order"),
                      ("second_expanded", "second order")])


NGG_COLUMNS = ["n", "k_n", "mc_estimate", "mc_se", "range_flag", "first", "second_expanded",
               "second_rational", "exact_series", "exact_status"]
RUNTIME_COLUMNS = ["n", "runtime_s", "rejection_count", "approx_time_s"]


def _ngg_table(config, index, alpha, tau, backends, exact=True):
    data_rng, mc_rng = _streams(config, index)
    return run_trajectory(config.model(alpha, tau), config.data_source(), config.n_max,
                          backends, mc_rng, n_min=config.n_min, n_step=config.n_step,
                          precision_digits=config.precision_digits,
                          exact_max_n=config.series_max_n if exact else None,
                          on_error="record", data_rng=data_rng)


def cmd_ngg_compare(config: ExperimentConfig) -> list[str]:
    """MC NGG weights against both approximations (and the series at small n)."""
    os.makedirs(config.out, exist_ok=True)

    def one(index, alpha, tau):
        backends = [MC(config.M), "first", "second_expanded", "second_rational", "exact"]
        table = _ngg_table(config, index, alpha, tau, backends)
        rows, timings = [], []
        for r in table.rows():
            rows.append({**r, "mc_estimate": r["mc"], "exact_series": r["exact"],
                         "exact_status": r["exact_error"]})
            timings.append({"n": r["n"], "runtime_s": r["mc_time"],
                            "rejection_count": r["rejection_count"],
                            "approx_time_s": r["first_time"] + r["second_expanded_time"]})
        stem = os.path.join(config.out, file_stem("ngg", alpha, tau))
        write_csv(stem + ".csv", NGG_COLUMNS, rows)
        write_csv(stem + ".runtime.csv", RUNTIME_COLUMNS, timings)
        return stem + ".csv", f"NGG  alpha={alpha:g}  tau={tau:g}"

    return _plot_all(config, _map_configs(config, one),
                     [("mc_estimate", "Monte Carlo"), ("first", "first order"),
                      ("second_expanded", "second order")])


TIMING_COLUMNS = ["n", "k_n", "step_time_s", "cumulative_time_s", "rejection_count",
                  "approx_time_s"]
APPROX_REPEATS = 200


def approx_time_per_weight(model, n, k, repeats=APPROX_REPEATS):
    """Mean seconds per approximate weight (first and expanded second order alternated).

    A single call takes microseconds, below what one timer reading resolves
    reliably, so the pair is evaluated ``repeats`` times.
    """
    def pair():
        predictive_weights(model, (n, k), "first")
        predictive_weights(model, (n, k), "second_expanded")

    return timeit.timeit(pair, number=repeats) / (2 * repeats)


def cmd_timing(config: ExperimentConfig) -> list[str]:
    """Per-step and cumulative MC wall-clock along a trajectory, run single-threaded."""
    os.makedirs(config.out, exist_ok=True)
    config = dataclasses.replace(config, jobs=1)
    paths, per_config = [], []
    for index, (alpha, tau) in enumerate(config.grid()):
        model = config.model(alpha, tau)
        table = _ngg_table(config, index, alpha, tau, [MC(config.M)], exact=False)
        steps = table["mc_time"]
        rows = [{"n": n, "k_n": k, "step_time_s": s, "cumulative_time_s": c,
                 "rejection_count": r, "approx_time_s": approx_time_per_weight(model, n, k)}
                for n, k, s, c, r in zip(table["n"], table["k_n"], steps,
                                         itertools.accumulate(steps), table["rejection_count"])]
        path = os.path.join(config.out, "timing_" + file_stem("ngg", alpha, tau) + ".csv")
        write_csv(path, TIMING_COLUMNS, rows)
        paths.append(path)
        per_config.append(rows)
        if config.plot:
            _plot_timing(path, f"NGG  alpha={alpha:g}  tau={tau:g}")

    average = []
    for group in zip(*per_config):
        average.append({key: (group[0][key] if key == "n" else
                              sum(r[key] for r in group) / len(group))
                        for key in ("n", "step_time_s", "cumulative_time_s", "rejection_count",
                                    "approx_time_s")})
    path = os.path.join(config.out, "timing_average.csv")
    write_csv(path, ["n", "step_time_s", "cumulative_time_s", "rejection_count", "approx_time_s"],
              average)
    paths.append(path)
    return paths


def _plot_timing(csv_path, title):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(csv_path)
    n = [int(r["n"]) for r in rows]
    with matplotlib.rc_context({"svg.hashsalt": "gibbspred", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(n, [float(r["step_time_s"]) for r in rows], lw=1)
        ax.set_xlabel("n")
        ax.set_ylabel("running time per step (s)")
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(csv_path[:-4] + ".svg", format="svg", metadata={"Date": None})
        plt.close(fig)


# ---- validation -----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _levy(x):
    return x ** -1.5 * math.exp(-1.0 / (4.0 * x)) / (2.0 * math.sqrt(math.pi))


def check_stable_pdf():
    xs = np.geomspace(0.05, 20.0, 40)
    worst = max(abs(stable.stable_pdf(x, 0.5) / _levy(x) - 1.0) for x in xs)
    return Check("stable density vs Levy closed form", worst <= 1e-8, f"max rel err {worst:.2e}")


def check_laplace(alphas, tilts, ss, N, rng, method="rejection"):
    gen = rng.generator()
    worst = 0.0
    for a, c in itertools.product(alphas, tilts):
        x = stable.sample_exp_tilted_stable(a, c, gen, N, method=method)
        for s in ss:
            e = np.exp(-s * x)
            z = abs(e.mean() - math.exp(c ** a - (c + s) ** a)) / (e.std(ddof=1) / math.sqrt(N))
            worst = max(worst, z)
    return Check(f"exp-tilted Laplace transforms ({method})", worst <= 4.0,
                 f"max |z| {worst:.2f} over {len(alphas) * len(tilts) * len(ss)} cells")


def poly_tilted_moment(alpha, k):
    """E[X**(-alpha)] for the order-k polynomially tilted stable law."""
    return (k + 1) * math.exp(math.lgamma(k * alpha + 1) - math.lgamma((k + 1) * alpha + 1))


def check_poly_moment(alphas, ks, N, rng):
    gen = rng.generator()
    worst = 0.0
    for a, k in itertools.product(alphas, ks):
        m = stable.sample_poly_tilted_stable(a, k, gen, N) ** -a
        worst = max(worst, abs(m.mean() - poly_tilted_moment(a, k)) / (m.std(ddof=1) / math.sqrt(N)))
    return Check("poly-tilted E[X^-alpha]", worst <= 4.0, f"max |z| {worst:.2f}")


def familywise_z(cells, level=0.01, floor=3.0):
    """Two-sided per-cell z bound keeping the chance of any false alarm below ``level``."""
    return max(floor, float(special.ndtri(1.0 - level / (2 * cells))))


def check_triangle(cells, M, rng, rel_tol=1e-6, z_bound=None):
    """Series vs quadrature (relative) and MC vs quadrature (in SEs) for NGG log V."""
    z_bound = familywise_z(len(cells)) if z_bound is None else z_bound
    worst_rel, worst_z = 0.0, 0.0
    for j, (a, tau, n, k) in enumerate(cells):
        model = NGG(a, tau)
        q = quadrature_V(n, k, model).log_magnitude
        s = ngg_log_V_series(n, k, a, tau).log_magnitude
        worst_rel = max(worst_rel, abs(math.expm1(s - q)))
        e = mc_log_V_ngg(n, k, a, tau, M, rng.substream(j))
        worst_z = max(worst_z, abs(e.log_value - q) / e.log_std_error)
    return [Check("NGG series vs quadrature", worst_rel <= rel_tol, f"max rel err {worst_rel:.2e}"),
            Check("NGG MC vs quadrature", worst_z <= z_bound,
                  f"max |z| {worst_z:.2f} over {len(cells)} cells (bound {z_bound:.2f})")]


def trajectory_ks(n_values, seed=DEFAULT_SEED, sigma=1.5):
    """k_n at the requested n on the shared Zeta data realisation of ``seed``."""
    data = RngStream(int(seed)).substream(0)
    labels = ZetaSource(sigma).labels(None, data)
    seen, ks, wanted = set(), {}, set(n_values)
    for n in range(1, max(n_values) + 1):
        seen.add(next(labels))
        if n in wanted:
            ks[n] = len(seen)
    return [ks[n] for n in n_values]


def cmd_validate(quick=False, seed=DEFAULT_SEED, report=print) -> bool:
    """Cross-backend agreement and sampler checks; True when everything passes."""
    rng = RngStream(int(seed), (7,))
    alphas = (0.25, 0.5, 0.75)
    n_values = (10, 20) if quick else (10, 20, 30)
    taus = (1.0,) if quick else (1.0, 3.0)
    ks = trajectory_ks(n_values, seed)
    cells = [(a, t, n, k) for a in alphas for t in taus for n, k in zip(n_values, ks)]
    N = 20_000 if quick else 100_000
    checks = [check_stable_pdf(),
              check_laplace(alphas, (0.0, 1.0, 3.0), (0.5, 1.0, 2.0), N, rng.substream(1)),
              check_poly_moment(alphas, (1, 2, 5), N, rng.substream(2)),
              *check_triangle(cells, 10_000 if quick else 100_000, rng.substream(3))]
    for c in checks:
        report(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return all(c.passed for c in checks)
