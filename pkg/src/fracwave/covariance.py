"""Spatial law of the wave-equation solution at a fixed time.

For fixed ``t`` the field ``x -> u(t, x)`` is a centred stationary Gaussian
process whose covariance depends on ``d = |x - y|`` only::

    C(d) = (c_H d**(2H+1) - t d**(2H) / 2 + t**(2H+1) / (2H+1)) / 2     d < t
         = (2t - d)**(2H+1) / (8 (2H+1))                                 t <= d < 2t
         = 0                                                             d >= 2t

with ``c_H = (4H - 1) / (4 (2H + 1))``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .errors import DegenerateVariance, NotPSD, OutOfRegime, ValidationError
from .filters import Filter, c_h, phi_alpha

log = logging.getLogger(__name__)

JITTER_START = 1e-12
JITTER_STOP = 1e-8


@dataclass(frozen=True)
class WaveModel:
    H: float
    t: float

    def __post_init__(self):
        if not 0.5 < self.H < 1.0:
            raise OutOfRegime(f"H must lie in (1/2, 1), got {self.H}")
        if not self.t > 0:
            raise ValidationError(f"t must be positive, got {self.t}")

    @property
    def c_H(self) -> float:
        return c_h(self.H)

    @property
    def k1(self) -> float:
        return -self.t / 4.0

    @property
    def k2(self) -> float:
        return self.c_H / 2.0

    def require_t_above_one(self):
        if not self.t > 1:
            raise OutOfRegime(f"the grid covariance on [0, 1] needs t > 1, got t={self.t}")


def cov_lag(model: WaveModel, d):
    """Covariance as a function of the distance ``d = |x - y|`` (vectorised)."""
    H, t = model.H, model.t
    d = np.abs(np.asarray(d, dtype=float))
    near = (
        model.c_H * d ** (2 * H + 1) - t * d ** (2 * H) / 2 + t ** (2 * H + 1) / (2 * H + 1)
    ) / 2
    far = np.clip(2 * t - d, 0.0, None) ** (2 * H + 1) / (8 * (2 * H + 1))
    out = np.where(d < t, near, np.where(d < 2 * t, far, 0.0))
    return float(out) if out.ndim == 0 else out


def cov(model: WaveModel, x: float, y: float) -> float:
    return cov_lag(model, y - x)


def cov_first_row(model: WaveModel, N: int) -> np.ndarray:
    return cov_lag(model, np.arange(N + 1) / N)


def cov_matrix(model: WaveModel, N: int) -> np.ndarray:
    """Covariance of ``u(t, i/N)``, ``i = 0..N`` (symmetric Toeplitz)."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    model.require_t_above_one()
    return linalg.toeplitz(cov_first_row(model, N))


@lru_cache(maxsize=8)
def _factor(H: float, t: float, N: int) -> np.ndarray:
    M = cov_matrix(WaveModel(H, t), N)
    scale = np.trace(M) / (N + 1)
    eps = 0.0
    while True:
        try:
            L = linalg.cholesky(M + eps * scale * np.eye(N + 1), lower=True, check_finite=False)
        except linalg.LinAlgError:
            eps = JITTER_START if eps == 0.0 else eps * 10
            if eps > JITTER_STOP * (1 + 1e-9):
                raise NotPSD(f"Cholesky failed for H={H}, t={t}, N={N} even with jitter") from None
            continue
        if eps:
            log.info("Cholesky needed jitter %.0e for H=%s t=%s N=%s", eps, H, t, N)
        L.setflags(write=False)
        return L


def cholesky_factor(model: WaveModel, N: int) -> np.ndarray:
    """Lower Cholesky factor of :func:`cov_matrix`, cached per ``(H, t, N)``.

    A diagonal jitter ``eps * trace / (N + 1)`` is added only if the plain
    factorisation fails, escalating from 1e-12 to 1e-8.
    """
    return _factor(float(model.H), float(model.t), int(N))


def _check_grid(model: WaveModel, f: Filter, N: int):
    model.require_t_above_one()
    if N <= f.l:
        raise ValidationError(f"N={N} must exceed the filter span l={f.l}")


def pi_alpha(model: WaveModel, f: Filter, N: int, j, H: float | None = None):
    """Covariance of filtered increments ``E[U(i/N) U((i+j)/N)]``.

    ``k1 N**(-2H) Phi_H(j) + k2 N**(-2H-1) Phi_{H+1/2}(j)`` with ``k1 = -t/4``
    and ``k2 = c_H / 2``. ``H`` overrides the model's Hurst index, which is
    how the estimators evaluate the moment function at trial values; it may
    then leave (1/2, 1).
    """
    _check_grid(model, f, N)
    H = model.H if H is None else H
    k1, k2 = -model.t / 4.0, c_h(H) / 2.0
    return (
        k1 * N ** (-2 * H) * phi_alpha(H, j, f)
        + k2 * N ** (-2 * H - 1) * phi_alpha(H + 0.5, j, f)
    )


def rho_alpha(model: WaveModel, f: Filter, N: int, v):
    """Correlation ``pi(|v|) / pi(0)`` of filtered increments."""
    pi0 = pi_alpha(model, f, N, 0)
    if not pi0 > 0:
        raise DegenerateVariance(f"pi(0) = {pi0:g} is not positive")
    out = pi_alpha(model, f, N, np.abs(np.asarray(v))) / pi0
    return float(out) if np.ndim(out) == 0 else out
