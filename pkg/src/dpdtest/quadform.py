"""Distribution of positively weighted sums of independent noncentral chi-squares.

Every test statistic in this package has an asymptotic null (and local
alternative) law of the form

    Q = sum_i  w_i * Chi2_1(delta_i),        w_i > 0,  delta_i >= 0,

a weighted sum of independent one-degree-of-freedom noncentral chi-square
variables.  Tail probabilities and quantiles of Q are computed with the
central chi-square mixture expansion of Ruben / Kotz-Johnson-Boyd:

    P(Q <= x) = sum_{v>=0} c_v * P(Chi2_{r+2v} <= x / beta),

with beta the smallest retained weight.  The mixture coefficients c_v are
nonnegative, sum to one, and are generated by a stable two-term recursion,
so the truncation error after N terms is bounded by 1 - sum_{v<=N} c_v.
A seeded Monte Carlo estimator is provided as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

__all__ = [
    "QuadFormDist",
    "SeriesControl",
    "TailEstimate",
    "QuadFormError",
    "chisq_cdf",
    "chisq_quantile",
    "qf_upper_tail",
    "qf_quantile",
    "qf_mc_tail",
]

# Relative threshold below which eigenvalue-like weights are treated as zero.
DEFAULT_RANK_TOL = 1e-10

# Poisson mixture for the noncentral chi-square is truncated once the
# remaining Poisson mass falls below this.
_POISSON_TAIL = 1e-14

# Sum of noncentralities beyond which the leading Ruben coefficient
# underflows and the series is replaced by the Monte Carlo oracle.
_MC_FALLBACK_SUM_DELTA = 1200.0
_MC_FALLBACK_DRAWS = 2_000_000
_MC_FALLBACK_SEED = 0x5EEDED


class QuadFormError(ValueError):
    """Invalid input to a quadratic-form distribution routine."""


@dataclass(frozen=True)
class QuadFormDist:
    """Law of ``sum_i weights[i] * Chi2_1(noncentralities[i])``.

    Weights with magnitude below ``rank_tol * max(weights)`` are dropped
    together with their noncentralities; ``rank`` reflects only retained
    components.
    """

    weights: np.ndarray
    noncentralities: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    def __init__(self, weights, noncentralities=None, rank_tol=DEFAULT_RANK_TOL):
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if noncentralities is None:
            d = np.zeros_like(w)
        else:
            d = np.broadcast_to(
                np.asarray(noncentralities, dtype=float), w.shape
            ).astype(float)
        if w.size == 0:
            raise QuadFormError("at least one weight is required")
        if np.any(~np.isfinite(w)) or np.any(~np.isfinite(d)):
            raise QuadFormError("weights and noncentralities must be finite")
        if np.any(w < 0):
            raise QuadFormError("weights must be nonnegative")
        if np.any(d < -1e-12):
            raise QuadFormError("noncentralities must be nonnegative")
        d = np.maximum(d, 0.0)
        keep = w > rank_tol * np.max(w)
        if not np.any(keep):
            raise QuadFormError("all weights fall below the rank tolerance")
        order = np.argsort(w[keep])[::-1]
        object.__setattr__(self, "weights", w[keep][order])
        object.__setattr__(self, "noncentralities", d[keep][order])
        object.__setattr__(self, "rank_tol", float(rank_tol))

    @property
    def rank(self) -> int:
        return self.weights.size

    def scaled(self, c: float) -> "QuadFormDist":
        """Distribution of ``c * Q``."""
        return QuadFormDist(c * self.weights, self.noncentralities, self.rank_tol)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the mixture series."""

    max_terms: int = 10_000
    target_error: float = 1e-8

    def __post_init__(self):
        if self.max_terms < 1:
            raise QuadFormError("max_terms must be positive")
        if not 0 < self.target_error < 1:
            raise QuadFormError("target_error must be in (0, 1)")


@dataclass(frozen=True)
class TailEstimate:
    """Upper-tail probability with an honest truncation bound."""

    probability: float
    residual_bound: float
    converged: bool
    n_terms: int
    mc_fallback: bool = False


def chisq_cdf(x: float, df: int, ncp: float = 0.0) -> float:
    """CDF of the (noncentral) chi-square distribution.

    The central CDF is the regularized lower incomplete gamma function;
    the noncentral case is the Poisson mixture of central chi-squares,
    truncated once the neglected Poisson mass is below 1e-14.

    Parameters
    ----------
    x : float
        Evaluation point, ``x >= 0``.
    df : int
        Degrees of freedom, ``df >= 1``.
    ncp : float
        Noncentrality parameter, ``ncp >= 0``.
    """
    if x < 0:
        raise QuadFormError(f"x must be nonnegative, got {x}")
    if df < 1 or int(df) != df:
        raise QuadFormError(f"df must be a positive integer, got {df}")
    if ncp < 0:
        raise QuadFormError(f"ncp must be nonnegative, got {ncp}")
    if x == 0.0:
        return 0.0
    if ncp == 0.0:
        return float(special.gammainc(df / 2.0, x / 2.0))
    # Poisson(ncp/2) mixture over df + 2k, summed outward from the modal k.
    lam = ncp / 2.0
    k0 = int(lam)
    log_w0 = -lam + k0 * np.log(lam) - special.gammaln(k0 + 1) if lam > 0 else 0.0
    total = 0.0
    acc_mass = 0.0
    # walk down and up from the mode until the Poisson tail is negligible
    for direction in (-1, +1):
        k = k0 if direction < 0 else k0 + 1
        log_w = log_w0
        if direction > 0:
            log_w = log_w0 + np.log(lam) - np.log(k0 + 1)
        while 0 <= k:
            w = np.exp(log_w)
            if w < _POISSON_TAIL and acc_mass > 0.5:
                break
            total += w * special.gammainc(df / 2.0 + k, x / 2.0)
            acc_mass += w
            if direction < 0:
                if k == 0:
                    break
                log_w += np.log(k) - np.log(lam)
                k -= 1
            else:
                k += 1
                log_w += np.log(lam) - np.log(k)
            if w < _POISSON_TAIL and acc_mass > 1.0 - _POISSON_TAIL:
                break
    return float(min(1.0, total))


def chisq_quantile(p: float, df: int, ncp: float = 0.0) -> float:
    """Quantile of the (noncentral) chi-square: inverts :func:`chisq_cdf`.

    Bracketing followed by Brent root finding on ``chisq_cdf(.) - p``.
    """
    if not 0.0 < p < 1.0:
        raise QuadFormError(f"p must be in (0, 1), got {p}")
    if df < 1 or int(df) != df:
        raise QuadFormError(f"df must be a positive integer, got {df}")
    if ncp < 0:
        raise QuadFormError(f"ncp must be nonnegative, got {ncp}")
    if ncp == 0.0:
        start = 2.0 * float(special.gammaincinv(df / 2.0, p))
    else:
        # Patnaik-style moment-matched central approximation as a seed.
        h = df + ncp
        scale = (df + 2.0 * ncp) / h
        start = scale * 2.0 * float(special.gammaincinv(h * h / (df + 2 * ncp) / 2.0, p))
    lo, hi = 0.0, max(start, 1.0)
    while chisq_cdf(hi, df, ncp) < p:
        hi *= 2.0
        if hi > 1e12:
            raise QuadFormError("quantile bracket expansion failed")
    root = optimize.brentq(lambda t: chisq_cdf(t, df, ncp) - p, lo, hi, xtol=1e-12, rtol=1e-14)
    return float(root)


def _ruben_coefficients(dist: QuadFormDist, ctl: SeriesControl):
    """Mixture coefficients c_v and the base scale beta = min weight.

    c_0 = exp(-sum(delta)/2) * prod(beta / w_j)^(1/2)
    h_s = sum_j [ (1 - beta/w_j)^s + s * delta_j * (beta/w_j) * (1 - beta/w_j)^(s-1) ]
    c_v = (1 / (2v)) * sum_{l<v} h_{v-l} c_l
    """
    w = dist.weights
    delta = dist.noncentralities
    beta = float(np.min(w))
    ratio = beta / w
    one_minus = 1.0 - ratio
    c = np.empty(ctl.max_terms + 1)
    c0 = np.exp(-0.5 * np.sum(delta)) * np.sqrt(np.prod(ratio))
    c[0] = c0
    if c0 == 0.0:
        return beta, c[:1], 0.0
    h = np.empty(ctl.max_terms + 1)
    h[0] = 0.0
    pow_prev = np.ones_like(w)  # (1 - ratio)^(s-1)
    csum = c0
    used = 1
    for v in range(1, ctl.max_terms + 1):
        h[v] = float(np.sum(pow_prev * one_minus) + v * np.sum(delta * ratio * pow_prev))
        pow_prev = pow_prev * one_minus
        c[v] = 0.5 / v * float(np.dot(h[1 : v + 1][::-1], c[:v]))
        csum += c[v]
        used = v + 1
        if 1.0 - csum <= ctl.target_error:
            break
    return beta, c[:used], max(0.0, 1.0 - csum)


def qf_upper_tail(dist: QuadFormDist, x: float, ctl: SeriesControl | None = None) -> TailEstimate:
    """Upper tail ``P(Q > x)`` of the weighted noncentral chi-square sum.

    Returns the mixture-series value together with the truncation residual
    bound ``1 - sum_v c_v``; the true tail lies within that bound of the
    reported probability.  When the coefficient recursion would underflow
    (enormous total noncentrality) a seeded Monte Carlo estimate is
    returned instead, with a 4-standard-error residual bound and
    ``mc_fallback`` set.
    """
    ctl = ctl or SeriesControl()
    if x < 0:
        return TailEstimate(1.0, 0.0, True, 0)
    if x == 0.0:
        return TailEstimate(1.0, 0.0, True, 0)
    if np.sum(dist.noncentralities) > _MC_FALLBACK_SUM_DELTA:
        prob, se = qf_mc_tail(dist, x, _MC_FALLBACK_DRAWS, _MC_FALLBACK_SEED)
        return TailEstimate(prob, 4.0 * se, True, 0, mc_fallback=True)
    beta, c, resid = _ruben_coefficients(dist, ctl)
    r = dist.rank
    v = np.arange(c.size)
    # survival of central chi-square with r + 2v dof at x / beta
    sf = special.gammaincc((r + 2 * v) / 2.0, x / (2.0 * beta))
    prob = float(np.dot(c, sf))
    converged = resid <= ctl.target_error
    # the neglected terms contribute between 0 and resid to the tail
    return TailEstimate(min(1.0, prob), resid, converged, int(c.size))


def qf_quantile(dist: QuadFormDist, p: float, ctl: SeriesControl | None = None) -> float:
    """Quantile: x with ``P(Q <= x) = p``, by bracketing and bisection.

    Bisection stops when the bracket collapses or the tail probability at
    the midpoint is within ``ctl.target_error`` of ``1 - p``.
    """
    ctl = ctl or SeriesControl()
    if not 0.0 < p < 1.0:
        raise QuadFormError(f"p must be in (0, 1), got {p}")
    target = 1.0 - p
    mean = float(np.sum(dist.weights * (1.0 + dist.noncentralities)))
    lo, hi = 0.0, max(mean, 1.0)
    it = 0
    while qf_upper_tail(dist, hi, ctl).probability > target:
        hi *= 2.0
        it += 1
        if it > 200:
            raise QuadFormError("quantile bracket expansion exceeded iteration cap")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        tail = qf_upper_tail(dist, mid, ctl).probability
        if abs(tail - target) <= ctl.target_error or (hi - lo) <= 1e-12 * max(1.0, hi):
            return mid
        if tail > target:
            lo = mid
        else:
            hi = mid
    raise QuadFormError("quantile bisection exceeded iteration cap")


def qf_mc_tail(dist: QuadFormDist, x: float, n_draws: int, seed: int) -> tuple[float, float]:
    """Monte Carlo oracle for ``P(Q > x)`` with binomial standard error.

    Deterministic for a fixed seed; the stream is derived solely from the
    passed seed.
    """
    if n_draws < 1000:
        raise QuadFormError("n_draws must be at least 1000")
    rng = np.random.default_rng(seed)
    w = dist.weights
    mu = np.sqrt(dist.noncentralities)
    count = 0
    chunk = 200_000
    done = 0
    while done < n_draws:
        m = min(chunk, n_draws - done)
        z = rng.standard_normal((m, w.size)) + mu
        q = (z * z) @ w
        count += int(np.count_nonzero(q > x))
        done += m
    phat = count / n_draws
    se = float(np.sqrt(phat * (1.0 - phat) / n_draws))
    return float(phat), se
