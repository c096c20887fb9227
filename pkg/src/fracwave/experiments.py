"""Monte-Carlo harness: estimator studies and distributional diagnostics.

Kolmogorov-Smirnov p-values use the asymptotic Kolmogorov series
``P(K > lam) = 2 sum_{j=1}^{20} (-1)**(j-1) exp(-2 j**2 lam**2)`` evaluated
at Stephens' finite-sample argument ``lam = (sqrt(M) + 0.12 + 0.11/sqrt(M)) D``.
Histograms use Freedman-Diaconis bins on the pooled sample.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .covariance import WaveModel
from .errors import FracwaveError, OutOfRegime, ValidationError
from .estimators import METHODS, estimate
from .filters import Filter, as_filter, parse_filter
from .limits import (
    CUMULANT_MAX_N,
    INCREMENT,
    cumulant_finite_N,
    cumulant_limit,
    exact_vN,
    sigma_total,
)
from .sampler import sample_batch
from .variations import g_stats

SCHEMA = 1
KS_TERMS = 20


# ---------------------------------------------------------------------------
# statistics helpers


def ks_pvalue(D: float, M: int) -> float:
    """Kolmogorov tail probability for statistic ``D`` from ``M`` points."""
    sq = math.sqrt(M)
    lam = (sq + 0.12 + 0.11 / sq) * D
    if lam < 0.2:
        return 1.0
    j = np.arange(1, KS_TERMS + 1)
    p = 2.0 * np.sum((-1.0) ** (j - 1) * np.exp(-2.0 * j**2 * lam**2))
    return float(min(max(p, 0.0), 1.0))


def ks_test(sample, cdf) -> tuple[float, float]:
    """One-sample KS statistic against a fully specified ``cdf``; returns ``(D, p)``."""
    x = np.sort(np.asarray(sample, dtype=float))
    M = x.size
    if M == 0:
        raise ValidationError("KS test needs a non-empty sample")
    F = cdf(x)
    i = np.arange(1, M + 1)
    D = float(max(np.max(i / M - F), np.max(F - (i - 1) / M)))
    return D, ks_pvalue(D, M)


def histogram(sample) -> dict:
    x = np.asarray(sample, dtype=float)
    edges = np.histogram_bin_edges(x, bins="fd")
    counts, _ = np.histogram(x, bins=edges)
    return {"edges": edges.tolist(), "counts": counts.tolist()}


def histogram_csv(hist: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["left", "right", "count"])
    e = hist["edges"]
    for a, b, c in zip(e[:-1], e[1:], hist["counts"]):
        w.writerow([repr(a), repr(b), c])
    return buf.getvalue()


def _mean(x) -> float:
    return math.fsum(x) / len(x)


def summarize(values, H_true: float) -> dict:
    """Mean, bias, sd (ddof=1) and MSE of a list of estimates.

    ``mse == bias**2 + sd**2 * (M - 1) / M`` up to rounding.
    """
    M = len(values)
    if M == 0:
        return {"M": 0, "mean": None, "bias": None, "sd": None, "mse": None}
    m = _mean(values)
    ss = math.fsum((v - m) ** 2 for v in values)
    sd = math.sqrt(ss / (M - 1)) if M > 1 else 0.0
    bias = m - H_true
    mse = bias**2 + ss / M
    return {"M": M, "mean": m, "bias": bias, "sd": sd, "mse": mse}


# ---------------------------------------------------------------------------
# configuration and report


@dataclass(frozen=True)
class ExperimentConfig:
    H_true: float
    t: float = 3.0
    N: int = 1000
    M: int = 100
    seed: int = 0
    estimators: tuple[str, ...] = ("bar",)
    filters: tuple[tuple[float, ...], ...] = ((1.0, -1.0),)
    k: int = 2
    cells: tuple[tuple[str, tuple[float, ...]], ...] | None = None
    workers: int = 1

    def __post_init__(self):
        if not 0.5 < self.H_true < 1.0:
            raise ValidationError(f"H_true must lie in (1/2, 1), got {self.H_true}")
        if self.M < 1:
            raise ValidationError("iterations M must be >= 1")
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        for method, f in self.cell_list():
            if method not in METHODS:
                raise ValidationError(f"unknown estimator {method!r}")
            span = 2 * f.l if method == "tilde" else f.l
            if self.N <= span:
                raise ValidationError(f"N={self.N} must exceed the filter span {span} of {f}")

    def cell_list(self) -> list[tuple[str, Filter]]:
        if self.cells is not None:
            return [(m, as_filter(f)) for m, f in self.cells]
        return [(m, as_filter(f)) for m, f in itertools.product(self.estimators, self.filters)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cells"] = [[m, f.label] for m, f in self.cell_list()]
        d.pop("estimators")
        d.pop("filters")
        d.pop("workers")
        return d


def cell_name(method: str, f: Filter) -> str:
    return f"{method}{f}"


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    estimates: dict[str, list[float | None]]
    raw: dict[str, list[float | None]]
    clamped: dict[str, list[bool]]
    failures: dict[str, list[str]]
    summary: dict[str, dict]
    summary_raw: dict[str, dict]
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "schema": SCHEMA,
            "kind": "experiment",
            "config": self.config.to_dict(),
            "summary": self.summary,
            "summary_raw": self.summary_raw,
            "n_failed": {c: len(v) for c, v in self.failures.items()},
            "n_clamped": {c: int(sum(v)) for c, v in self.clamped.items()},
            "failures": self.failures,
            "estimates": self.estimates,
            "raw": self.raw,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        """One row per replicate and cell."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replicate", "cell", "H_est", "raw", "clamped", "H_true"])
        for cell, vals in self.estimates.items():
            for i, (v, r, c) in enumerate(zip(vals, self.raw[cell], self.clamped[cell])):
                w.writerow([i, cell, "" if v is None else repr(v), "" if r is None else repr(r),
                            int(c), repr(self.config.H_true)])
        return buf.getvalue()


def run_mc(config: ExperimentConfig) -> ExperimentReport:
    """Simulate ``M`` slices from one factorisation and apply every configured cell."""
    t0 = time.perf_counter()
    model = WaveModel(config.H_true, config.t)
    slices = sample_batch(model, config.N, config.M, config.seed, config.workers)
    cells = config.cell_list()
    est, raw, clamped, failures = {}, {}, {}, {}
    for method, f in cells:
        name = cell_name(method, f)
        est[name], raw[name], clamped[name], failures[name] = [], [], [], []
        for i, s in enumerate(slices):
            try:
                r = estimate(method, s, f, config.k, config.t)
            except FracwaveError as exc:
                est[name].append(None)
                raw[name].append(None)
                clamped[name].append(False)
                failures[name].append(f"replicate {i}: {type(exc).__name__}: {exc}")
                continue
            est[name].append(r.H_est)
            raw[name].append(r.raw)
            clamped[name].append(r.clamped)
    summary = {c: summarize([v for v in vals if v is not None], config.H_true) for c, vals in est.items()}
    summary_raw = {c: summarize([v for v in vals if v is not None], config.H_true) for c, vals in raw.items()}
    return ExperimentReport(config, est, raw, clamped, failures, summary, summary_raw,
                            time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# distributional diagnostics


def _simulate_G(model: WaveModel, N: int, M: int, f: Filter, k: int, seed: int, workers: int = 1):
    slices = sample_batch(model, N, M, seed, workers)
    return g_stats(np.stack([s.values for s in slices]), model, f, k)


def clt_diagnostic(H: float, t: float, N: int, M: int, f, k: int, seed: int,
                   tol: float = 1e-10, workers: int = 1) -> dict:
    """Sample variance and Gaussian KS test of ``G = sqrt(N-l) V_N``."""
    f = as_filter(f) if not isinstance(f, str) else parse_filter(f)
    if not f.order > H + 0.25:
        raise OutOfRegime(f"the central limit needs p > H + 1/4; p={f.order}, H={H}")
    model = WaveModel(H, t)
    G = _simulate_G(model, N, M, f, k, seed, workers)
    s2 = sigma_total(H, f, k, tol)
    D, p = ks_test(G, lambda x: stats.norm.cdf(x, scale=math.sqrt(s2)))
    var = float(np.var(G, ddof=1))
    return {
        "schema": SCHEMA,
        "kind": "clt-check",
        "H": H, "t": t, "N": N, "M": M, "k": k, "filter": f.label, "seed": seed,
        "sigma2": s2,
        "sample_mean": _mean(G.tolist()),
        "sample_variance": var,
        "variance_rel_error": var / s2 - 1.0,
        "ks_statistic": D,
        "ks_pvalue": p,
        "histogram": histogram(G),
    }


def noncentral_diagnostic(H: float, t: float, N: int, M: int, seed: int, workers: int = 1) -> dict:
    """Cumulants and Gaussian KS test of ``F_N = V_N / sqrt(v_N)`` for ``H > 3/4``."""
    if not H > 0.75:
        raise OutOfRegime(f"the non-central regime needs H > 3/4, got {H}")
    model = WaveModel(H, t)
    f = INCREMENT
    G = _simulate_G(model, N, M, f, 2, seed, workers)
    F = G / math.sqrt(N - f.l) / math.sqrt(exact_vN(model, f, N))
    theory = {m: cumulant_finite_N(model, N, m) if N <= CUMULANT_MAX_N[m] else None for m in (3, 4)}
    D, p = ks_test(F, stats.norm.cdf)
    return {
        "schema": SCHEMA,
        "kind": "noncentral-check",
        "H": H, "t": t, "N": N, "M": M, "seed": seed,
        "sample_k2": float(stats.kstat(F, 2)),
        "sample_k3": float(stats.kstat(F, 3)),
        "sample_k4": float(stats.kstat(F, 4)),
        "finite_N_k3": theory[3],
        "finite_N_k4": theory[4],
        "limit_k3": cumulant_limit(H, t, 3).value,
        "ks_statistic": D,
        "ks_pvalue": p,
        "histogram": histogram(F),
    }
