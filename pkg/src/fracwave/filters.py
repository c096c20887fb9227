"""Discrete filters and the filtered power sums built from them.

A filter ``a = (a_0, ..., a_l)`` of order ``p`` annihilates polynomials of
degree ``< p``::

    sum_q a_q q**r == 0   for 0 <= r <= p - 1,   sum_q a_q q**p != 0

Everything downstream is expressed through the filtered power sum::

    Phi(H, j; a, b) = sum_{q, r} a_q b_r |j + q - r|**(2H)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import binom

from .errors import AllMomentsVanish, DegenerateFilter, NotAFilter, ValidationError

MOMENT_TOL = 1e-12

# Lags beyond SERIES_FACTOR * span use the binomial expansion of Phi; the
# direct sum loses all significant digits to cancellation there when p >= 2.
SERIES_FACTOR = 2
_SERIES_EPS = 1e-18
_SERIES_MAX_TERMS = 200


@dataclass(frozen=True)
class Filter:
    coeffs: tuple[float, ...]
    order: int

    @property
    def length(self) -> int:
        return len(self.coeffs)

    @property
    def l(self) -> int:  # noqa: E743 - matches the usual notation for the lag span
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    @property
    def label(self) -> str:
        return ",".join(_fmt(c) for c in self.coeffs)

    def __str__(self) -> str:
        return f"({self.label})"


def _fmt(c: float) -> str:
    return str(int(c)) if float(c).is_integer() else repr(float(c))


def moments(coeffs: Sequence[float], upto: int) -> np.ndarray:
    """Discrete moments ``sum_q a_q q**r`` for ``r = 0..upto`` (``0**0 = 1``)."""
    a = np.asarray(coeffs, dtype=float)
    q = np.arange(a.size, dtype=float)
    return np.array([np.sum(a * q**r) for r in range(upto + 1)])


def validate_filter(coeffs: Sequence[float]) -> Filter:
    """Check the vanishing-moment conditions and return a :class:`Filter`.

    Each moment is compared with zero using a tolerance of ``1e-12`` scaled
    by ``max_q |a_q| q**r``.

    >>> validate_filter([1, -2, 1]).order
    2
    """
    a = np.asarray(coeffs, dtype=float).ravel()
    if a.size == 0:
        raise ValidationError("filter must have at least one coefficient")
    if not np.all(np.isfinite(a)):
        raise ValidationError("filter coefficients must be finite")
    q = np.arange(a.size, dtype=float)
    for r in range(a.size + 1):
        terms = a * q**r
        scale = max(np.max(np.abs(terms)), np.finfo(float).tiny)
        if abs(np.sum(terms)) > MOMENT_TOL * scale:
            if r == 0:
                raise NotAFilter(f"coefficients sum to {np.sum(a):g}, not 0")
            return Filter(tuple(float(c) for c in a), r)
    raise AllMomentsVanish("all moments vanish up to the filter length")


def parse_filter(text: str) -> Filter:
    """Parse ``"1,-2,1"`` or a JSON array into a validated filter."""
    text = text.strip()
    if text.startswith("["):
        values = json.loads(text)
    else:
        try:
            values = [float(tok) for tok in text.split(",") if tok.strip()]
        except ValueError as exc:
            raise ValidationError(f"cannot parse filter {text!r}") from exc
    return validate_filter(values)


def as_filter(f: Filter | Sequence[float]) -> Filter:
    return f if isinstance(f, Filter) else validate_filter(f)


def thin(f: Filter) -> Filter:
    """Insert a zero between consecutive coefficients (lag doubling)."""
    out = np.zeros(2 * f.l + 1)
    out[::2] = f.array
    return Filter(tuple(float(c) for c in out), f.order)


def c_h(H: float) -> float:
    return (4.0 * H - 1.0) / (4.0 * (2.0 * H + 1.0))


def _lag_moments(a: np.ndarray, b: np.ndarray, nmax: int) -> np.ndarray:
    d = np.subtract.outer(np.arange(a.size), np.arange(b.size)).astype(float)
    w = np.outer(a, b)
    return np.array([np.sum(w * d**n) for n in range(nmax + 1)])


def _phi_series(H: float, j: np.ndarray, a: np.ndarray, b: np.ndarray, span: int) -> np.ndarray:
    # |j + d|**(2H) = |j|**(2H) * sum_n binom(2H, n) (sign(j) d / |j|)**n
    jmin = float(np.min(np.abs(j)))
    ratio = span / jmin
    nmax = _SERIES_MAX_TERMS
    if ratio > 0:
        nmax = min(nmax, int(np.ceil(np.log(_SERIES_EPS) / np.log(ratio))) + 2)
    m = _lag_moments(a, b, nmax)
    s = np.sign(j)
    aj = np.abs(j).astype(float)
    out = np.zeros(aj.shape)
    # smallest terms first
    for n in range(nmax, -1, -1):
        if m[n] != 0.0:
            out += binom(2 * H, n) * m[n] * s**n * aj ** (2 * H - n)
    return out


def phi_alpha(H: float, j, f1: Filter, f2: Filter | None = None):
    """Filtered power sum ``sum_{q,r} f1_q f2_r |j + q - r|**(2H)``.

    ``j`` may be an integer or an integer array (negative lags allowed). With
    ``f2`` omitted this is the single-filter sum; pass ``H + 1/2`` to get the
    ``|.|**(2H+1)`` companion.
    """
    f2 = f1 if f2 is None else f2
    a, b = f1.array, f2.array
    jj = np.asarray(j)
    scalar = jj.ndim == 0
    jj = np.atleast_1d(jj).astype(np.int64)
    out = np.empty(jj.shape, dtype=float)
    span = max(f1.l, f2.l, 1)
    far = np.abs(jj) > SERIES_FACTOR * span
    near = ~far
    if np.any(near):
        jn = jj[near].astype(float)
        acc = np.zeros(jn.shape)
        for q, aq in enumerate(a):
            if aq == 0.0:
                continue
            for r, br in enumerate(b):
                if br != 0.0:
                    acc += aq * br * np.abs(jn + q - r) ** (2 * H)
        out[near] = acc
    if np.any(far):
        out[far] = _phi_series(H, jj[far], a, b, span)
    return float(out[0]) if scalar else out


def phi_ratio(H: float, v, f: Filter):
    """Normalised power sum ``Phi(v) / Phi(0)``."""
    phi0 = phi_alpha(H, 0, f)
    if phi0 == 0.0:
        raise DegenerateFilter(f"Phi(0) vanishes for filter {f} at H={H}")
    return phi_alpha(H, np.abs(np.asarray(v)) if np.ndim(v) else abs(int(v)), f) / phi0


def kappa_asymptotic(H: float, f1: Filter, f2: Filter | None = None) -> float:
    """Leading constant of ``Phi(k) ~ kappa * k**(2H - 2p)`` as ``k -> inf``."""
    f2 = f1 if f2 is None else f2
    p = min(f1.order, f2.order)
    falling = np.prod([2 * H - i for i in range(2 * p)])
    fact = float(np.prod(np.arange(1, 2 * p + 1, dtype=float)))
    m2p = _lag_moments(f1.array, f2.array, 2 * p)[2 * p]
    return float(falling / fact * m2p)


def c1_c2(H: float, t: float, f: Filter) -> tuple[float, float]:
    """Coefficients of ``pi(0) = c1 N**(-2H) + c2 N**(-2H-1)``.

    Only the ``-(t/4) sum a_q a_r |q - r|**(2H)`` convention is exposed for
    ``c1``.
    """
    c1 = -t / 4.0 * phi_alpha(H, 0, f)
    c2 = c_h(H) / 2.0 * phi_alpha(H + 0.5, 0, f)
    return c1, c2
