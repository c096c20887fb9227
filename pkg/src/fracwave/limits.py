"""Limit-theorem constants for the k-variations.

Chaos weights follow the Hermite isometry ``E[He_n(X) He_n(Y)] = n! rho**n``:
the ``2q``-th chaos of ``G_N`` has variance ``(c^k_{2q})**2 (2q)! sum_v rho(v)**(2q)``.

Infinite lag series ``sum_v Phi(v)**power`` are summed directly up to a
cut-off ``V`` and the remainder is added from the large-lag expansion::

    Phi(v) = sum_n binom(2H, n) m_n sign(v)**n |v|**(2H - n),
    m_n = sum_{q,r} a_q b_r (q - r)**n

raised to ``power`` and summed term by term with Hurwitz zeta functions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.integrate import quad

from .covariance import WaveModel, rho_alpha
from .errors import (
    DivergentSeries,
    OutOfRegime,
    QuadratureNotConverged,
    TooLarge,
    ValidationError,
)
from .filters import Filter, _lag_moments, as_filter, c_h, phi_alpha, validate_filter
from .variations import gaussian_abs_moment

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
_EXPANSION_TERMS = 24
_V_START = 32
_V_MAX = 1 << 22
_Q_MAX = 200_000

INCREMENT = validate_filter((1, -1))

# cost guards for the direct cyclic sums
CUMULANT_MAX_N = {3: 200, 4: 80}


@dataclass
class LimitConstants:
    H: float
    k: int
    filters: list[str]
    sigma2_by_chaos: dict[int, float]
    sigma2_total: float
    c_qq: dict[int, float]
    theta: list[list[float]] | None = None
    k0: float | None = None
    cumulants: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "H": self.H,
            "k": self.k,
            "filters": self.filters,
            "sigma2_by_chaos": {str(q): v for q, v in self.sigma2_by_chaos.items()},
            "sigma2_total": self.sigma2_total,
            "c_qq": {str(q): v for q, v in self.c_qq.items()},
            "theta": self.theta,
            "k0": self.k0,
            "cumulants": {str(m): v for m, v in self.cumulants.items()},
        }


# ---------------------------------------------------------------------------
# lag series


def _poly_pow(c: np.ndarray, power: int, nterms: int) -> np.ndarray:
    out = np.zeros(nterms)
    out[0] = 1.0
    base = c[:nterms].copy()
    e = power
    while e:
        if e & 1:
            out = np.convolve(out, base)[:nterms]
        e >>= 1
        if e:
            base = np.convolve(base, base)[:nterms]
    return out


def _expansion_tail(H, f1, f2, scale, power, V, nterms):
    """``sum_{v > V} + sum_{v < -V}`` of ``(Phi(v)/scale)**power`` from the expansion.

    Returns ``(tail, next_term)`` where ``next_term`` bounds the neglected part.
    """
    m = _lag_moments(f1.array, f2.array, nterms)
    n = np.arange(nterms + 1)
    A = special.binom(2 * H, n) * m / scale
    nz = np.flatnonzero(np.abs(A) > 1e-300)
    if nz.size == 0:
        return 0.0, 0.0
    n0 = nz[0]
    tail, nxt = 0.0, 0.0
    for sgn in (1.0, -1.0):
        coef = A[n0:] * sgn ** n[n0:]
        coef = coef / coef[0]
        d = _poly_pow(coef, power, coef.size)
        lead = (A[n0] * sgn**n0) ** power
        beta = power * (n0 - 2 * H)
        idx = np.arange(d.size - 1)
        z = special.zeta(beta + idx, V + 1.0)
        tail += lead * float(np.sum(d[:-1] * z))
        nxt += abs(lead * d[-1]) * special.zeta(beta + d.size - 1, V + 1.0)
    return tail, nxt


def lag_series(H: float, f1: Filter, f2: Filter, power: int, tol: float = DEFAULT_TOL,
               scale: float = 1.0, start: int | None = None) -> tuple[float, float]:
    """``sum_v (Phi(H, v; f1, f2) / scale)**power`` and an error estimate.

    The sum runs over all integers, or over ``v >= start`` when ``start`` is
    given.
    """
    m = _lag_moments(f1.array, f2.array, 2 * max(f1.order, f2.order) + 2)
    n0 = next((i for i in range(m.size) if abs(m[i]) > 1e-12 * np.max(np.abs(m))), None)
    if n0 is None or power * (n0 - 2 * H) <= 1:
        raise DivergentSeries(
            f"lag series of power {power} diverges for H={H}, filters {f1}, {f2}"
        )
    beta = power * (n0 - 2 * H)
    span = max(f1.l, f2.l, 1)
    V = max(_V_START, 8 * span)
    while True:
        v = np.arange(1, V + 1)
        pos = (phi_alpha(H, v, f1, f2) / scale) ** power
        if start is None:
            neg = pos if f1 == f2 else (phi_alpha(H, -v, f1, f2) / scale) ** power
            direct = (phi_alpha(H, 0, f1, f2) / scale) ** power + math.fsum(pos) + math.fsum(neg)
        else:
            lo = np.arange(start, 1)
            head = (phi_alpha(H, lo, f1, f2) / scale) ** power if lo.size else np.zeros(0)
            direct = math.fsum(head) + math.fsum(pos[max(start, 1) - 1 :])
        # crude bound from the last computed term and the known decay rate
        last = max(abs(pos[-1]), 0.0 if start is not None else abs(neg[-1]))
        crude = 0.0
        if last > 0:
            crude = (1 if start is not None else 2) * math.exp(
                math.log(last) + beta * math.log(V) + math.log(special.zeta(beta, V + 1.0))
            )
        tail, nxt = _expansion_tail(H, f1, f2, scale, power, V, _EXPANSION_TERMS)
        if start is not None:
            tail_pos, nxt_pos = _one_sided_tail(H, f1, f2, scale, power, V)
            tail, nxt = tail_pos, nxt_pos
        if np.isfinite(tail) and nxt < tol and abs(tail) <= 2 * crude + tol:
            return direct + tail, nxt
        if crude < tol:
            return direct, crude
        if V >= _V_MAX:
            raise DivergentSeries(f"lag series did not reach tol={tol:g} by V={V}")
        V *= 2


def _one_sided_tail(H, f1, f2, scale, power, V):
    m = _lag_moments(f1.array, f2.array, _EXPANSION_TERMS)
    n = np.arange(_EXPANSION_TERMS + 1)
    A = special.binom(2 * H, n) * m / scale
    nz = np.flatnonzero(np.abs(A) > 1e-300)
    n0 = nz[0]
    coef = A[n0:] / A[n0]
    d = _poly_pow(coef, power, coef.size)
    lead = A[n0] ** power
    beta = power * (n0 - 2 * H)
    z = special.zeta(beta + np.arange(d.size - 1), V + 1.0)
    return lead * float(np.sum(d[:-1] * z)), abs(lead * d[-1]) * special.zeta(beta + d.size - 1, V + 1.0)


# ---------------------------------------------------------------------------
# chaos variances


def chaos_weight(k: int, q: int) -> float:
    """``(c^k_{2q})**2 (2q)!``, evaluated in log space."""
    factors = [k - 2 * i for i in range(q)]
    if any(fct == 0 for fct in factors):
        return 0.0
    logw = 2 * sum(math.log(abs(fct)) for fct in factors) - math.lgamma(2 * q + 1)
    return math.exp(logw)


def _check_sigma_regime(H: float, f: Filter, q: int):
    if not H < f.order - 1 / (4 * q):
        raise DivergentSeries(
            f"sum_v phi(v)**{2 * q} diverges: need H < p - 1/(4q) = {f.order - 1 / (4 * q):.4f}"
        )


def phi_power_sum(H: float, f: Filter, power: int, tol: float = DEFAULT_TOL) -> float:
    """``sum_{v in Z} phi(v)**power`` with ``phi = Phi(v) / Phi(0)``."""
    f = as_filter(f)
    phi0 = phi_alpha(H, 0, f)
    return lag_series(H, f, f, power, tol, scale=phi0)[0]


def sigma2q(H: float, f, k: int, q: int, tol: float = DEFAULT_TOL) -> float:
    """Asymptotic variance of the ``2q``-th chaos component of ``G_N``."""
    f = as_filter(f)
    _check_sigma_regime(H, f, q)
    w = chaos_weight(k, q)
    if w == 0.0:
        return 0.0
    return w * phi_power_sum(H, f, 2 * q, tol / w if w > 1 else tol)


c_qq = sigma2q


def c_matrix(H: float, f, k: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Diagonal covariance of the chaos vector ``(G^(2), ..., G^(k))`` for even ``k``."""
    if k % 2:
        raise ValidationError("the chaos covariance matrix is defined for even k")
    return np.diag([sigma2q(H, f, k, q, tol) for q in range(1, k // 2 + 1)])


def total_chaos_weight(k: float) -> float:
    """``sum_{q >= 1} (c^k_{2q})**2 (2q)! = E|Z|**(2k) / (E|Z|**k)**2 - 1``."""
    return gaussian_abs_moment(2 * k) / gaussian_abs_moment(k) ** 2 - 1.0


def _odd_chaos_terms(excess, k: int, tol: float):
    # sum_q w_q (1 + e_q) = total_chaos_weight(k) + sum_q w_q e_q, where the
    # off-diagonal lags e_q decay geometrically in q.
    terms = {}
    for q in range(1, _Q_MAX + 1):
        w = chaos_weight(k, q)
        e = excess(q)
        terms[q] = (w, e)
        if abs(w * e) < tol:
            return terms
    raise DivergentSeries(f"chaos sum for k={k} did not converge within {_Q_MAX} terms")


def sigma2_by_chaos(H: float, f, k: int, tol: float = DEFAULT_TOL) -> dict[int, float]:
    """Per-chaos variances ``{q: sigma^2_{2q}}``.

    For odd ``k`` the list stops at the first ``q`` whose off-diagonal part
    is below ``tol``; later chaoses carry ``w_q`` times a sum equal to 1 to
    that accuracy.
    """
    f = as_filter(f)
    _check_sigma_regime(H, f, 1)
    if k % 2 == 0:
        return {q: sigma2q(H, f, k, q, tol) for q in range(1, k // 2 + 1)}
    terms = _odd_chaos_terms(lambda q: phi_power_sum(H, f, 2 * q, tol) - 1.0, k, tol)
    return {q: w * (1.0 + e) for q, (w, e) in terms.items()}


def sigma_total(H: float, f, k: int, tol: float = DEFAULT_TOL) -> float:
    """Asymptotic variance of ``sqrt(N - l) V_N``.

    Even ``k`` has finitely many chaoses. For odd ``k`` the lag-0 parts sum
    to ``E|Z|**(2k) / (E|Z|**k)**2 - 1`` in closed form and the remaining
    parts are added until they drop below ``tol``.
    """
    f = as_filter(f)
    _check_sigma_regime(H, f, 1)
    if k % 2 == 0:
        return math.fsum(sigma2_by_chaos(H, f, k, tol).values())
    terms = _odd_chaos_terms(lambda q: phi_power_sum(H, f, 2 * q, tol) - 1.0, k, tol)
    return total_chaos_weight(k) + math.fsum(w * e for w, e in terms.values())


# ---------------------------------------------------------------------------
# multi-filter covariance


def theta_matrix(H: float, t: float, filters, tol: float = DEFAULT_TOL,
                 lags: str = "integers") -> np.ndarray:
    """Limiting covariance of ``(sqrt(N) V_N(2, a^1), ..., sqrt(N) V_N(2, a^P))``.

    ``Theta[n, m] = t**2 / (8 c1_n c1_m) * sum_v Phi(v; a^n, a^m)**2`` with
    ``c1_n = -(t/4) Phi(0; a^n)``. ``lags="integers"`` sums over every
    integer lag; ``lags="from_l"`` keeps only ``v >= l`` (the larger span of
    the pair), the one-sided variant.
    """
    fs = [as_filter(f) for f in filters]
    if lags not in ("integers", "from_l"):
        raise ValidationError("lags must be 'integers' or 'from_l'")
    for f in fs:
        if not f.order > H + 0.25:
            raise DivergentSeries(f"filter {f} has order {f.order} <= H + 1/4")
    c1 = [-t / 4 * phi_alpha(H, 0, f) for f in fs]
    P = len(fs)
    out = np.zeros((P, P))
    for a in range(P):
        for b in range(a, P):
            fa, fb = fs[a], fs[b]
            if fa != fb:
                log.warning("Theta entry for distinct filters %s, %s uses c1_n * c1_m", fa, fb)
            if lags == "integers":
                s = lag_series(H, fa, fb, 2, tol)[0]
                out[a, b] = out[b, a] = t**2 / (8 * c1[a] * c1[b]) * s
            else:
                start = max(fa.l, fb.l)
                out[a, b] = t**2 / (8 * c1[a] * c1[b]) * lag_series(H, fa, fb, 2, tol, start=start)[0]
                if a != b:
                    out[b, a] = t**2 / (8 * c1[a] * c1[b]) * lag_series(H, fb, fa, 2, tol, start=start)[0]
    return out


# ---------------------------------------------------------------------------
# finite-N quantities


def _rho_lags(model: WaveModel, f: Filter, N: int) -> np.ndarray:
    if N <= f.l:
        raise ValidationError(f"N={N} must exceed the filter span l={f.l}")
    return rho_alpha(model, f, N, np.arange(0, N - f.l + 1))


def _lag_weights(f: Filter, N: int, n_terms: int | None, size: int) -> np.ndarray:
    n = N - f.l
    n_terms = n if n_terms is None else n_terms
    if n_terms not in (n, n + 1):
        raise ValidationError(f"n_terms must be N-l or N-l+1, got {n_terms}")
    return np.clip(n_terms - np.arange(size), 0, None) / n


def exact_variance_chaos(model: WaveModel, f, N: int, k: int, q: int,
                         n_terms: int | None = None) -> float:
    """Exact finite-``N`` variance of the ``2q``-th chaos of ``G_N``::

        (c^k_{2q})**2 (2q)! sum_{|v| <= N-l} rho(v)**(2q) (n_terms - |v|) / (N - l)

    ``n_terms`` is the number of averaged summands. The default ``N - l``
    gives the usual closed form; :func:`v_stat` averages ``N - l + 1``
    summands, for which ``n_terms=N-l+1`` is exact.
    """
    f = as_filter(f)
    w = chaos_weight(k, q)
    if w == 0.0:
        return 0.0
    rho = _rho_lags(model, f, N)
    terms = rho ** (2 * q) * _lag_weights(f, N, n_terms, rho.size)
    return w * (terms[0] + 2 * math.fsum(terms[1:]))


def exact_variance_G(model: WaveModel, f, N: int, k: int, tol: float = DEFAULT_TOL,
                     n_terms: int | None = None) -> float:
    """Exact ``E[G_N**2]`` summed over chaoses (see :func:`exact_variance_chaos`)."""
    f = as_filter(f)
    if k % 2 == 0:
        return math.fsum(
            exact_variance_chaos(model, f, N, k, q, n_terms) for q in range(1, k // 2 + 1)
        )
    rho = _rho_lags(model, f, N)
    wts = _lag_weights(f, N, n_terms, rho.size)

    def excess(q):
        return 2 * math.fsum(rho[1:] ** (2 * q) * wts[1:])

    terms = _odd_chaos_terms(excess, k, tol)
    return total_chaos_weight(k) * wts[0] + math.fsum(w * e for w, e in terms.values())


def exact_vN(model: WaveModel, f, N: int, k: int = 2) -> float:
    """``v_N = E[V_N**2]`` for the statistic of :func:`v_stat` (``N - l + 1`` summands)."""
    f = as_filter(f)
    return exact_variance_G(model, f, N, k, n_terms=N - f.l + 1) / (N - f.l)


# ---------------------------------------------------------------------------
# non-central regime


def _check_noncentral(H: float):
    if not H > 0.75:
        raise OutOfRegime(f"the non-central regime needs H > 3/4, got H={H}")


def _kernel_coeffs(H: float, t: float) -> tuple[float, float]:
    k1, k2 = -t / 4, c_h(H) / 2
    return k1 * H * (2 * H - 1), k2 * H * (2 * H + 1)


def k0_constant(H: float, t: float) -> float:
    """``int_0^1 (k1 H(2H-1) x**(2H-2) + k2 H(2H+1) x**(2H-1))**2 (1 - x) dx`` in closed form."""
    _check_noncentral(H)
    k1, k2 = -t / 4, c_h(H) / 2
    return (
        k1**2 * H**2 * (2 * H - 1) / (2 * (4 * H - 3))
        + 2 * k1 * k2 * H**2 * (2 * H + 1) / (2 * (4 * H - 1))
        + k2**2 * H * (2 * H + 1) ** 2 / (4 * (4 * H - 1))
    )


def vN_noncentral_check(model: WaveModel, N: int, f=INCREMENT) -> float:
    """``N**(4-4H) v_N k1**2 / (4 K0)``, which tends to 1."""
    f = as_filter(f)
    _check_noncentral(model.H)
    if f != INCREMENT:
        raise ValidationError("the non-central normalisation is stated for the filter (1, -1)")
    vN = exact_vN(model, f, N, 2)
    return N ** (4 - 4 * model.H) * vN * model.k1**2 / (4 * k0_constant(model.H, model.t))


def cumulant_finite_N(model: WaveModel, N: int, m: int) -> float:
    """Exact ``m``-th cumulant of ``F_N = V_N / sqrt(v_N)`` for ``k = 2``, filter (1, -1).

    ``F_N`` is a quadratic form in the standardised increments, so with
    ``R_ij = rho(i - j)``::

        k_m(F_N) = 2**(m-1) (m-1)! sum_{j_1..j_m} prod_a R[j_a, j_{a+1}] / (n**m v_N**(m/2))

    with cyclic indices. The cyclic sum equals ``trace(R**m)``.
    """
    if m == 1:
        return 0.0
    if m < 1:
        raise ValidationError("cumulant order must be >= 1")
    f = INCREMENT
    guard = CUMULANT_MAX_N.get(m)
    if guard is not None and N > guard:
        raise TooLarge(f"cumulant of order {m} is limited to N <= {guard}, got N={N}")
    if guard is None and m > 2:
        raise TooLarge(f"cumulant order {m} is not supported by the direct sum")
    rho = _rho_lags(model, f, N)
    R = rho[np.abs(np.subtract.outer(np.arange(rho.size), np.arange(rho.size)))]
    n = N - f.l
    vN = 2 * np.sum(R * R) / n**2
    if m == 2:
        return float(2 * np.sum(R * R) / n**2 / vN)
    Rm = np.linalg.matrix_power(R, m - 1)
    tr = float(np.sum(Rm * R.T))
    return 2 ** (m - 1) * math.factorial(m - 1) * tr / (n**m * vN ** (m / 2))


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


def limit_kernel(H: float, t: float, d):
    """Limit covariance shape of the normalised increments at distance ``d``.

    ``-(k1 H(2H-1) d**(2H-2) + k2 H(2H+1) d**(2H-1))``; the sign makes it the
    continuum counterpart of ``pi(j) > 0`` for the filter (1, -1).
    """
    A, B = _kernel_coeffs(H, t)
    d = np.asarray(d, dtype=float)
    return -(A * d ** (2 * H - 2) + B * d ** (2 * H - 1))


def _trace3_jacobi(H: float, t: float, nodes: int) -> float:
    # Order x1 < x2 < x3 (6 orderings), gaps a = s u, b = s (1 - u):
    #   6 int s**(6H-5) (1-s) u**(2H-2) (1-u)**(2H-2) P(s, u) ds du
    # where P is the polynomial part of the three kernels.
    A, B = _kernel_coeffs(H, t)
    A, B = -A, -B
    xs, ws = special.roots_jacobi(nodes, 1.0, 6 * H - 5)
    s = (xs + 1) / 2
    ws = ws / 2 ** (1.0 + 6 * H - 5 + 1)
    xu, wu = special.roots_jacobi(nodes, 2 * H - 2, 2 * H - 2)
    u = (xu + 1) / 2
    wu = wu / 2 ** (2 * (2 * H - 2) + 1)
    S, U = np.meshgrid(s, u, indexing="ij")
    P = (A + B * S * U) * (A + B * S * (1 - U)) * (A + B * S)
    return float(6 * ws @ P @ wu)


def _galerkin_trace(H: float, t: float, m: int, n: int) -> float:
    # Cell-averaged operator on n equal cells: entries n**(1-2H) (k1 Phi_H(j) + k2 Phi_{H+1/2}(j) / n)
    # with Phi_H(j) = (|j+1|**2H - 2|j|**2H + |j-1|**2H) / 2, times -1 as in limit_kernel.
    j = np.arange(n)
    inc = INCREMENT
    k1, k2 = -t / 4, c_h(H) / 2
    row = -n ** (1 - 2 * H) * (k1 * (-0.5) * phi_alpha(H, j, inc) + k2 * (-0.5) * phi_alpha(H + 0.5, j, inc) / n)
    T = row[np.abs(np.subtract.outer(j, j))]
    lam = np.linalg.eigvalsh(T)
    return float(np.sum(lam**m))


def cyclic_integral(H: float, t: float, m: int, quad_nodes: int = 8,
                    method: str = "auto", tol: float = 1e-6) -> QuadResult:
    """``int_[0,1]^m prod_a K(|x_a - x_{a+1}|) dx`` with cyclic indices.

    ``m = 2`` uses the closed form ``2 K0``. ``m = 3`` reduces to two
    Gauss-Jacobi rules on the simplex; they integrate the remaining
    polynomial exactly, so the error estimate is the change between
    ``quad_nodes`` and ``quad_nodes + 1``. Other ``m`` (or
    ``method="galerkin"``) use traces of the cell-averaged operator on
    ``n, 2n, 4n, 8n`` cells with Aitken extrapolation.
    """
    _check_noncentral(H)
    if m == 2 and method == "auto":
        return QuadResult(2 * k0_constant(H, t), 0.0)
    if m == 3 and method in ("auto", "jacobi"):
        a = _trace3_jacobi(H, t, quad_nodes)
        b = _trace3_jacobi(H, t, quad_nodes + 1)
        return QuadResult(b, abs(b - a) + 1e-15 * abs(b))
    if method not in ("auto", "galerkin"):
        raise ValidationError(f"unknown quadrature method {method!r}")
    n0 = 64 * quad_nodes
    x = [_galerkin_trace(H, t, m, n0 * 2**i) for i in range(4)]

    def aitken(a, b, c):
        den = (c - b) - (b - a)
        return c if den == 0 else c - (c - b) ** 2 / den

    e1, e2 = aitken(*x[:3]), aitken(*x[1:])
    err = abs(e2 - e1)
    if err > tol * max(abs(e2), 1e-300):
        raise QuadratureNotConverged(
            f"Galerkin extrapolation unstable: {e1:.6g} vs {e2:.6g} (relative tol {tol:g})"
        )
    return QuadResult(e2, err)


def cumulant_limit(H: float, t: float, m: int, quad_nodes: int = 8,
                   method: str = "auto", tol: float = 1e-6) -> QuadResult:
    """Cumulants of the non-central limit ``F``.

    ``k_1 = 0``, ``k_2 = 1`` and for ``m >= 3``
    ``2**(m-1) (m-1)! (4 K0)**(-m/2)`` times :func:`cyclic_integral`.
    """
    _check_noncentral(H)
    if m == 1:
        return QuadResult(0.0, 0.0)
    if m == 2:
        return QuadResult(1.0, 0.0)
    r = cyclic_integral(H, t, m, quad_nodes, method, tol)
    c = 2 ** (m - 1) * math.factorial(m - 1) * (4 * k0_constant(H, t)) ** (-m / 2)
    return QuadResult(c * r.value, c * r.error)


def k0_quadrature(H: float, t: float) -> float:
    """Direct numerical quadrature of the ``K0`` integral (independent check)."""
    _check_noncentral(H)
    A, B = _kernel_coeffs(H, t)

    def g(x):
        return (A * x ** (2 * H - 2) + B * x ** (2 * H - 1)) ** 2 * (1 - x)

    val, _ = quad(g, 0, 1, limit=200, points=[1e-6, 1e-3], epsabs=1e-14, epsrel=1e-12)
    return val
