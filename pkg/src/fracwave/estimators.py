"""Hurst-index estimators from the empirical k-th absolute moment ``S_N``.

``estimate_hat`` inverts the exact moment function
``g(x) = pi_x(0) = c1(x) N**(-2x) + c2(x) N**(-2x-1)``, ``estimate_bar``
inverts only its dominant term ``c1(x) N**(-2x)`` and ``estimate_tilde``
compares a filter with its thinned version and needs no knowledge of ``t``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .covariance import WaveModel, pi_alpha
from .errors import DegenerateRatio, NotMonotone, OutOfRegime, ValidationError
from .filters import Filter, as_filter, phi_alpha, thin
from .limits import exact_vN
from .variations import gaussian_abs_moment, s_stat

BRACKET = (0.5 + 1e-6, 1.0 - 1e-6)
XTOL = 1e-10
# Wider bracket used only to report the unclamped root. For p >= 2 the
# leading coefficient c1(x) changes sign at x = 1, so the upper end stays put.
RAW_BRACKET_P1 = (0.26, 1.5)
RAW_BRACKET = (0.26, 1.0 - 1e-6)

METHODS = ("hat", "bar", "tilde")


@dataclass(frozen=True)
class EstimateResult:
    method: str
    H_est: float
    clamped: bool
    raw: float
    se_asymptotic: float | None
    inputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _bisect(fun, lo: float, hi: float, xtol: float = XTOL) -> float:
    flo = fun(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _invert(g, target: float, what: str, raw_bracket) -> tuple[float, bool, float]:
    """Root of ``g(x) = target`` for decreasing ``g``; returns ``(H, clamped, raw)``."""
    lo, hi = BRACKET
    glo, ghi = g(lo), g(hi)
    if not glo > ghi:
        raise NotMonotone(
            f"{what}: g({lo}) = {glo:.6g} <= g({hi}) = {ghi:.6g}; N is too small to invert"
        )
    if ghi <= target <= glo:
        h = _bisect(lambda x: g(x) - target, lo, hi)
        return h, False, h
    # outside the regime: report the clamped headline and the wider root
    rlo, rhi = raw_bracket
    if target > glo:
        a, b, clamp_to = rlo, lo, 0.5
    else:
        a, b, clamp_to = hi, rhi, 1.0
    ga, gb = g(a) - target, g(b) - target
    raw = _bisect(lambda x: g(x) - target, a, b) if ga * gb <= 0 else (a if target > glo else b)
    return clamp_to, True, raw


def _target(S: float, k: int) -> float:
    if not S > 0:
        raise DegenerateRatio(f"empirical moment S = {S:g} must be positive")
    return (S / gaussian_abs_moment(k)) ** (2.0 / k)


def _raw_bracket(f: Filter):
    return RAW_BRACKET_P1 if f.order == 1 else RAW_BRACKET


def _values(x):
    return x.values if hasattr(x, "values") else np.asarray(x, dtype=float)


def _grid_N(x) -> int:
    return _values(x).shape[-1] - 1


def hat_from_S(S: float, f, k: int, t: float, N: int) -> tuple[float, bool, float]:
    """Invert the exact moment function at a given ``S``; returns ``(H, clamped, raw)``."""
    f = as_filter(f)
    model = WaveModel(0.75, t)
    model.require_t_above_one()
    return _invert(lambda x: pi_alpha(model, f, N, 0, H=x), _target(S, k), "hat", _raw_bracket(f))


def bar_from_S(S: float, f, k: int, t: float, N: int) -> tuple[float, bool, float]:
    f = as_filter(f)
    if not t > 1:
        raise OutOfRegime(f"t must exceed 1, got {t}")
    if N <= f.l:
        raise ValidationError(f"N={N} must exceed the filter span l={f.l}")
    return _invert(
        lambda x: -t / 4.0 * phi_alpha(x, 0, f) * N ** (-2.0 * x), _target(S, k), "bar", _raw_bracket(f)
    )


def tilde_from_S(S1: float, S2: float, k: int) -> tuple[float, bool, float]:
    if not (S1 > 0 and S2 > 0):
        raise DegenerateRatio(f"moments must be positive, got S={S1:g}, S_thin={S2:g}")
    raw = math.log2(S2 / S1) / k
    h = min(max(raw, 0.5), 1.0)
    return h, not (0.5 < raw < 1.0), raw


def asymptotic_se(method: str, H_est: float, f, k: int, N: int, t: float) -> float:
    """``sqrt(v_N) / (k log N)`` with ``v_N`` evaluated at ``H_est``.

    Valid in the central regime ``H_est < p - 1/4``. ``method`` is ``"hat"``
    or ``"bar"`` (both share the limit law).
    """
    f = as_filter(f)
    if method not in ("hat", "bar"):
        raise ValidationError(f"no closed-form standard error for method {method!r}")
    if not H_est < f.order - 0.25:
        raise OutOfRegime(f"standard error needs H < p - 1/4 = {f.order - 0.25}, got {H_est}")
    if not 0.5 < H_est:
        raise OutOfRegime(f"standard error needs H > 1/2, got {H_est}")
    vN = exact_vN(WaveModel(H_est, t), f, N, k)
    return math.sqrt(vN) / (k * math.log(N))


def _se_or_none(method, H, f, k, N, t):
    try:
        return asymptotic_se(method, H, f, k, N, t)
    except (OutOfRegime, ValidationError):
        return None


def estimate_hat(x, f, k: int, t: float) -> EstimateResult:
    """Exact inversion of ``pi_x(0) = (S_N / E_k)**(2/k)`` (needs ``t``)."""
    f = as_filter(f)
    N = _grid_N(x)
    S = float(s_stat(_values(x), f, k))
    h, clamped, raw = hat_from_S(S, f, k, t, N)
    return EstimateResult(
        "hat", h, clamped, raw, _se_or_none("hat", h, f, k, N, t),
        {"k": k, "filter": f.label, "N": N, "t": t},
    )


def estimate_bar(x, f, k: int, t: float) -> EstimateResult:
    """Inversion of the dominant term ``c1(x) N**(-2x)`` only (needs ``t``)."""
    f = as_filter(f)
    N = _grid_N(x)
    S = float(s_stat(_values(x), f, k))
    h, clamped, raw = bar_from_S(S, f, k, t, N)
    return EstimateResult(
        "bar", h, clamped, raw, _se_or_none("bar", h, f, k, N, t),
        {"k": k, "filter": f.label, "N": N, "t": t},
    )


def estimate_tilde(x, f, k: int) -> EstimateResult:
    """``(1/k) log2(S_N(thin f) / S_N(f))``; ``t`` is not needed."""
    f = as_filter(f)
    u = _values(x)
    N = u.shape[-1] - 1
    g = thin(f)
    if g.l >= N:
        raise ValidationError(f"the thinned filter needs N > {g.l}, got N={N}")
    h, clamped, raw = tilde_from_S(float(s_stat(u, f, k)), float(s_stat(u, g, k)), k)
    return EstimateResult("tilde", h, clamped, raw, None, {"k": k, "filter": f.label, "N": N})


def estimate(method: str, x, f, k: int, t: float | None = None) -> EstimateResult:
    if method == "hat":
        return estimate_hat(x, f, k, _need_t(t))
    if method == "bar":
        return estimate_bar(x, f, k, _need_t(t))
    if method == "tilde":
        return estimate_tilde(x, f, k)
    raise ValidationError(f"unknown estimator {method!r}; choose from {METHODS}")


def _need_t(t):
    if t is None:
        raise ValidationError("this estimator needs the observation time t")
    return float(t)


def expected_S(model: WaveModel, f, N: int, k: int) -> float:
    """``E[S_N] = E_k pi(0)**(k/2)``."""
    return gaussian_abs_moment(k) * pi_alpha(model, as_filter(f), N, 0) ** (k / 2)


__all__ = [
    "EstimateResult",
    "asymptotic_se",
    "bar_from_S",
    "estimate",
    "estimate_bar",
    "estimate_hat",
    "estimate_tilde",
    "expected_S",
    "hat_from_S",
    "tilde_from_S",
]
