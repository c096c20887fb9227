"""Filtered increments, k-variation statistics and Hermite helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .covariance import WaveModel, pi_alpha
from .errors import FilterTooLong
from .filters import Filter, as_filter
from .sampler import FieldSlice

CSV_HEADER = ("k", "filter", "N", "V", "S", "G")


@dataclass(frozen=True)
class VariationResult:
    k: int
    filter: str
    N: int
    V: float
    S: float
    G: float

    def row(self) -> tuple:
        return (self.k, self.filter, self.N, self.V, self.S, self.G)


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, FieldSlice) else np.asarray(x, dtype=float)


def filtered_increments(x, f: Filter) -> np.ndarray:
    """``U(i/N) = sum_r a_r u((i - r)/N)`` for ``i = l..N``.

    ``x`` is a :class:`FieldSlice`, a vector of grid values, or a 2-D array
    holding one slice per row.
    """
    f = as_filter(f)
    u = _values(x)
    n = u.shape[-1] - 1
    if f.l >= n:
        raise FilterTooLong(f"filter span l={f.l} needs N > l, got N={n}")
    out = np.zeros(u.shape[:-1] + (n - f.l + 1,))
    for r, a in enumerate(f.coeffs):
        if a != 0.0:
            out += a * u[..., f.l - r : n + 1 - r]
    return out


def gaussian_abs_moment(k: float) -> float:
    """``E|Z|**k = 2**(k/2) Gamma((k+1)/2) / Gamma(1/2)`` for standard normal ``Z``."""
    return float(np.exp(k / 2 * np.log(2.0) + gammaln((k + 1) / 2) - gammaln(0.5)))


def hermite(j: int, x):
    """Probabilists' Hermite polynomial ``He_j`` from its explicit finite sum."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for a in range(j // 2 + 1):
        c = (-1) ** a * math.factorial(j) / (math.factorial(j - 2 * a) * math.factorial(a) * 2**a)
        out = out + c * x ** (j - 2 * a)
    return float(out) if out.ndim == 0 else out


def hermite_coeff(k: int, j: int) -> float:
    """Coefficient ``c^k_{2j}`` of ``He_{2j}`` in ``|x|**k / E_k - 1``.

    ``c^k_{2j} = prod_{i<j} (k - 2i) / (2j)!``; ``j = 0`` gives 0 because the
    expanded function is centred. Odd-degree coefficients are identically 0.
    """
    if j == 0:
        return 0.0
    num = math.prod(k - 2 * i for i in range(j))
    return num / math.factorial(2 * j)


def v_stat(x: FieldSlice, f: Filter, k: int, model: WaveModel | None = None) -> VariationResult:
    """Centred k-variation ``V``, empirical moment ``S`` and ``G = sqrt(N-l) V``.

    ``V`` is normalised by the theoretical ``E|U|**k`` at the model's true
    ``H`` and averages over ``i = l..N`` (divisor ``N - l``); ``S`` sums
    ``i = l..N-1`` with the same divisor.
    """
    model = model or x.model
    f = as_filter(f)
    U = filtered_increments(x, f)
    N = U.shape[-1] + f.l - 1
    n = N - f.l
    absk = np.abs(U) ** k
    pi0 = pi_alpha(model, f, N, 0)
    V = float(np.sum(absk / (gaussian_abs_moment(k) * pi0 ** (k / 2)) - 1.0) / n)
    S = float(np.sum(absk[:-1]) / n)
    return VariationResult(int(k), f.label, int(N), V, S, math.sqrt(n) * V)


def s_stat(x, f: Filter, k: int) -> float | np.ndarray:
    """Empirical k-th absolute moment ``S`` (vectorised over leading axes)."""
    U = filtered_increments(x, f)
    n = U.shape[-1] - 1
    return np.sum(np.abs(U[..., :-1]) ** k, axis=-1) / n


def g_stats(values: np.ndarray, model: WaveModel, f: Filter, k: int) -> np.ndarray:
    """``G = sqrt(N-l) V`` for every row of ``values``."""
    f = as_filter(f)
    U = filtered_increments(values, f)
    N = U.shape[-1] + f.l - 1
    n = N - f.l
    pi0 = pi_alpha(model, f, N, 0)
    V = np.sum(np.abs(U) ** k / (gaussian_abs_moment(k) * pi0 ** (k / 2)) - 1.0, axis=-1) / n
    return math.sqrt(n) * V
