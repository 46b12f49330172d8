"""Hermite-expansion constants, closed-form identities, and variance series
for stationary Gaussian dice, plus the asymptotic pair-probability
predictors for conditioned i.i.d. dice.

Central objects:

- the odd Hermite coefficients of the sign and CDF maps,
      d_{2q+1} = (-1)^q / (2^q q! (2q+1) sqrt(2*pi)),
      l_{2q+1} = d_{2q+1} * 2^{-q-1/2};
- partial sums of four classical identities tied to those coefficients;
- the fractional-Brownian-increment correlation kernel s_H;
- truncated series for Var(W) and Var(W - n*(F-sum difference)) of
  stationary Gaussian dice;
- per-distribution constants (A, B, cumulants) feeding the 1/n expansions
  of pairwise comparison probabilities for sum-conditioned dice.

Numerical conventions: binomials and factorials in log space, series terms
accumulated with math.fsum, and the exactly-summable lag-zero parts of the
variance series split off in closed form so the remaining tails converge
geometrically (see the respective docstrings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .distributions import FaceDistribution, get_distribution
from .errors import DomainError, InvalidInputError, SizeLimitError

TWO_PI = 2.0 * math.pi

# Limiting value of Var(W)/n^3 for i.i.d.-uniform-like unconditioned dice;
# exposed for reference, no CLT test is attached to it.
ALPHA_LIMIT = 1.0 / 6.0 - 1.0 / TWO_PI

_MAX_SERIES_N = 512


def hermite_coeff(q: int) -> tuple[float, float]:
    """The q-th odd Hermite coefficients (d_{2q+1}, l_{2q+1}).

    Evaluated in log space so large q cannot overflow; the sign is (-1)^q.
    """
    if q < 0:
        raise DomainError("q must be nonnegative")
    sign = -1.0 if q % 2 else 1.0
    log_d = -(q * math.log(2.0) + math.lgamma(q + 1)
              + math.log(2 * q + 1) + 0.5 * math.log(TWO_PI))
    d = sign * math.exp(log_d)
    ell = sign * math.exp(log_d - (q + 0.5) * math.log(2.0))
    return d, ell


def hermite_value(m: int, y) -> np.ndarray:
    """Probabilists' Hermite polynomial He_m evaluated by the three-term
    recurrence He_{k+1}(y) = y*He_k(y) - k*He_{k-1}(y)."""
    if m < 0:
        raise DomainError("polynomial order must be nonnegative")
    y = np.asarray(y, dtype=float)
    prev = np.ones_like(y)
    if m == 0:
        return prev
    cur = y.copy()
    for k in range(1, m):
        prev, cur = cur, y * cur - k * prev
    return cur


def _log_central_binomial(q: np.ndarray) -> np.ndarray:
    """log C(2q, q) via log-gamma."""
    return gammaln(2 * q + 1) - 2 * gammaln(q + 1)


def _coef_d2_factorial(q: np.ndarray) -> np.ndarray:
    """d_{2q+1}^2 * (2q+1)!  ==  C(2q,q) / ((2q+1) * 2^{2q} * 2*pi)."""
    q = np.asarray(q, dtype=float)
    return np.exp(_log_central_binomial(q) - np.log(2 * q + 1)
                  - 2 * q * math.log(2.0) - math.log(TWO_PI))


IDENTITY_KINDS = ("quarter", "ramanujan_pi", "newton_pi", "sixth")


def identity_partial_sum(kind: str, Q: int) -> float:
    """Partial sum (through index Q) of one of four classical series.

    kind:
        quarter      -> 1/4   = sum d_{2q+1}^2 (2q+1)!
        ramanujan_pi -> pi    = sum C(2q,q) / (2^{2q-1} (2q+1))
        newton_pi    -> pi    = sum 3 C(2q,q) / ((2q+1) 2^{4q})
        sixth        -> 1/6   = sum (2q+1)! 2^{-2q} d_{2q+1}^2

    quarter and ramanujan_pi converge like q^{-3/2} (test with a
    tail-aware tolerance ~ Q^{-1/2}); newton_pi and sixth are geometric.
    """
    if Q < 0:
        raise DomainError("Q must be nonnegative")
    q = np.arange(Q + 1, dtype=float)
    logc = _log_central_binomial(q)
    log2 = math.log(2.0)
    if kind == "quarter":
        terms = np.exp(logc - np.log(2 * q + 1) - 2 * q * log2 - math.log(TWO_PI))
    elif kind == "ramanujan_pi":
        terms = np.exp(logc - (2 * q - 1) * log2 - np.log(2 * q + 1))
    elif kind == "newton_pi":
        terms = 3.0 * np.exp(logc - 4 * q * log2 - np.log(2 * q + 1))
    elif kind == "sixth":
        terms = np.exp(logc - np.log(2 * q + 1) - 4 * q * log2 - math.log(TWO_PI))
    else:
        raise InvalidInputError(
            "unknown identity kind %r (choose from %s)" % (kind, IDENTITY_KINDS)
        )
    return math.fsum(terms.tolist())


def phi_product_expectation(rho: float, Q: int = 40) -> float:
    """E[Phi(X) Phi(Y)] for standard Gaussians with correlation rho.

    Computed as 1/4 + sum_{q<=Q} l_{2q+1}^2 (2q+1)! rho^{2q+1}; the series
    coefficient equals C(2q,q) / ((2q+1) 2^{4q} 4*pi). For |rho| <= 1/2 the
    tail beyond Q=40 is below 1e-15; at |rho| = 1 the series still sums
    (to 1/3) but needs the slow q^{-3/2} tail, so large Q is required there.
    """
    if abs(rho) > 1.0:
        raise DomainError("correlation must satisfy |rho| <= 1")
    q = np.arange(Q + 1, dtype=float)
    coeff = np.exp(_log_central_binomial(q) - np.log(2 * q + 1)
                   - 4 * q * math.log(2.0) - math.log(2.0 * TWO_PI))
    powers = np.power(rho, 2 * q + 1)
    return 0.25 + math.fsum((coeff * powers).tolist())


def s_kernel(k, H: float):
    """Correlation of fractional Brownian increments at integer lag k:
    (1/4) (|k+1|^{2H} + |k-1|^{2H} - 2 |k|^{2H}); equals 1/2 at lag 0."""
    if not 0.0 < H < 1.0:
        raise DomainError("Hurst index must lie in (0, 1)")
    k = np.abs(np.asarray(k, dtype=float))
    h2 = 2.0 * H
    value = 0.25 * (np.abs(k + 1) ** h2 + np.abs(k - 1) ** h2 - 2.0 * k ** h2)
    if value.ndim == 0:
        return float(value)
    return value


def c_asymptotic(H: float) -> float:
    """Constant c_H in the tail law s_H(k) ~ c_H |k|^{2H-2}."""
    if not 0.0 < H < 1.0:
        raise DomainError("Hurst index must lie in (0, 1)")
    return H * (2.0 * H - 1.0) / 2.0


def s_lag_partial_sum(n: int, H: float) -> float:
    """Closed form of sum_{|v| <= n} s_H(v): (1/2)((n+1)^{2H} - n^{2H}).

    The sum telescopes; for H < 1/2 it decreases to 0, which is the
    zero-sum property of the negatively correlated regime.
    """
    if not 0.0 < H < 1.0:
        raise DomainError("Hurst index must lie in (0, 1)")
    h2 = 2.0 * H
    return 0.5 * ((n + 1.0) ** h2 - float(n) ** h2)


@dataclass(frozen=True)
class CorrelationKernel:
    """A stationary correlation function on integer lags with rho(0) = 1/2.

    rho must be even in the lag; evaluation is vectorized. The
    absolutely_summable flag gates the series constant beta (for the fBm
    family this means H <= 1/2).
    """

    name: str
    rho: Callable[[np.ndarray], np.ndarray]
    absolutely_summable: bool = True
    hurst: Optional[float] = None

    def __post_init__(self):
        probe = np.asarray(self.rho(np.arange(4)), dtype=float)
        if abs(probe[0] - 0.5) > 1e-12:
            raise InvalidInputError(
                "kernel must have rho(0) = 1/2, got %r" % (probe[0],)
            )
        back = np.asarray(self.rho(-np.arange(4)), dtype=float)
        if not np.allclose(probe, back, atol=1e-12):
            raise InvalidInputError("kernel must be even in the lag")

    def values(self, lags) -> np.ndarray:
        return np.asarray(self.rho(np.asarray(lags)), dtype=float)

    @classmethod
    def fbm(cls, H: float) -> "CorrelationKernel":
        if not 0.0 < H < 1.0:
            raise DomainError("Hurst index must lie in (0, 1)")
        return cls(
            name="fbm(H=%g)" % H,
            rho=lambda k: s_kernel(k, H),
            absolutely_summable=H <= 0.5,
            hurst=H,
        )


def _lag_weights(n: int, kernel: CorrelationKernel):
    """Signed lags |u| < n with multiplicities (n - |u|) and rho values."""
    lags = np.arange(-(n - 1), n)
    weights = (n - np.abs(lags)).astype(float)
    rho = kernel.values(lags)
    return lags, weights, rho


def variance_W_series(kernel: CorrelationKernel, n: int, Q: int = 40) -> float:
    """Truncated series for the variance of the pairwise win count
    #{(i,j): a_i > b_j} between two independent stationary Gaussian dice
    (the signed margin has four times this variance when ties are null).

    The full object is
        sum_{q>=0} d_{2q+1}^2 (2q+1)! sum_{u,v} (n-|u|)(n-|v|)
                                               (rho(u)+rho(v))^{2q+1}
    over lags |u|, |v| < n. The single cell u = v = 0 has rho+rho = 1 and
    its q-series sums to exactly 1/4 (the quarter identity), so it is added
    in closed form as n^2/4; every remaining cell has |rho(u)+rho(v)| <=
    1/2 + max_{u>0}|rho(u)| < 1, making the truncated remainder converge
    geometrically in Q.
    """
    if n < 1:
        raise InvalidInputError("n must be positive")
    if n > _MAX_SERIES_N:
        raise SizeLimitError(
            "variance series limited to n <= %d (O(n^2 Q) cost)" % _MAX_SERIES_N
        )
    _, weights, rho = _lag_weights(n, kernel)
    pair_sum = rho[:, None] + rho[None, :]
    weight2 = weights[:, None] * weights[None, :]
    center = n - 1  # index of lag 0
    weight2[center, center] = 0.0  # handled in closed form

    q = np.arange(Q + 1, dtype=float)
    coef = _coef_d2_factorial(q)
    power = pair_sum.copy()
    square = pair_sum * pair_sum
    parts = []
    for qi in range(Q + 1):
        parts.append(coef[qi] * float((weight2 * power).sum()))
        if qi < Q:
            power *= square
    return float(n) ** 2 / 4.0 + math.fsum(parts)


def variance_diff_series(kernel: CorrelationKernel, n: int, Q: int = 40) -> float:
    """Truncated series equal to one third of the variance of the cyclic
    sum of the three pairwise win counts among three independent
    stationary Gaussian dice (a measure of how far the three comparisons
    are from determining each other).

    The full object is
        sum_{q>=1} d_{2q+1}^2 (2q+1)! sum_{v=1}^{2q} C(2q+1, v) S_v S_{2q+1-v},
    with power sums S_p = sum_{|i|<n} (n-|i|) rho(i)^p. Splitting
    S_p = n 2^{-p} + R_p (R_p excludes lag 0) makes the pure n^2 part sum
    exactly to n^2/12 via the quarter and sixth identities; the cross and
    residual parts converge geometrically in Q because |rho(i)| < 1/2 off
    lag zero.
    """
    if n < 1:
        raise InvalidInputError("n must be positive")
    if n > _MAX_SERIES_N:
        raise SizeLimitError(
            "variance series limited to n <= %d" % _MAX_SERIES_N
        )
    lags, weights, rho = _lag_weights(n, kernel)
    off = lags != 0
    w_off = weights[off]
    rho_off = rho[off]

    max_p = 2 * Q + 1
    # R[p] = sum over nonzero lags of (n-|i|) rho(i)^p, p = 1..max_p.
    R = np.empty(max_p + 1)
    R[0] = float(w_off.sum())
    acc = w_off * rho_off
    for p in range(1, max_p + 1):
        R[p] = float(acc.sum())
        acc = acc * rho_off

    half_pow = 0.5 ** np.arange(max_p + 1)
    coef = _coef_d2_factorial(np.arange(Q + 1, dtype=float))
    parts = [float(n) ** 2 / 12.0]
    for q in range(1, Q + 1):
        m = 2 * q + 1
        v = np.arange(1, m)
        logbin = gammaln(m + 1) - gammaln(v + 1) - gammaln(m - v + 1)
        binom = np.exp(logbin)
        cross = float(n) * (half_pow[v] * R[m - v] + half_pow[m - v] * R[v])
        resid = R[v] * R[m - v]
        parts.append(coef[q] * float(np.dot(binom, cross + resid)))
    return math.fsum(parts)


def beta_constant(kernel: CorrelationKernel, Q: int = 60,
                  lag_cutoff: int = 200_000) -> float:
    """Leading coefficient beta in Var(W) = beta n^3 + o(n^3):

        beta = 2 sum_{q>=0} d_{2q+1}^2 (2q+1)! sum_{i in Z} rho(i)^{2q+1},

    truncated at |i| <= lag_cutoff. Requires an absolutely summable kernel
    (fBm with H <= 1/2). For fBm with H < 1/2 the zero-sum property of the
    lags, sum_{|v|<=L} rho(v) = (1/2)((L+1)^{2H} - L^{2H}), is verified
    against the direct partial sum as a sanity check.
    """
    if not kernel.absolutely_summable:
        raise DomainError(
            "beta requires an absolutely summable kernel "
            "(fBm: H <= 1/2); got %s" % kernel.name
        )
    lags = np.arange(1, lag_cutoff + 1)
    rho_pos = kernel.values(lags)

    if kernel.hurst is not None and kernel.hurst < 0.5:
        direct = 0.5 + 2.0 * float(rho_pos.sum())
        closed = s_lag_partial_sum(lag_cutoff, kernel.hurst)
        if abs(direct - closed) > 1e-8:
            raise FloatingPointError(
                "lag-sum sanity check failed: direct %.3e vs closed %.3e"
                % (direct, closed)
            )

    coef = _coef_d2_factorial(np.arange(Q + 1, dtype=float))
    acc = rho_pos.copy()
    square = rho_pos * rho_pos
    parts = []
    for q in range(Q + 1):
        lag_sum = 0.5 ** (2 * q + 1) + 2.0 * float(acc.sum())
        parts.append(2.0 * coef[q] * lag_sum)
        if q < Q:
            acc = acc * square
    return math.fsum(parts)


@dataclass(frozen=True)
class DistConstants:
    """Integral constants of a face distribution used by the 1/n expansions.

    a = E[x F(x)], b = E[x^2 F(x)], gamma3/gamma4 the third and fourth
    cumulants, alpha1 = 5 gamma3^2/12 - gamma4/8, alpha2 = gamma3/2.
    a^2 <= 1/12 always, with equality only for the symmetric uniform law.
    """

    name: str
    a: float
    b: float
    gamma3: float
    gamma4: float

    @property
    def alpha1(self) -> float:
        return 5.0 * self.gamma3 ** 2 / 12.0 - self.gamma4 / 8.0

    @property
    def alpha2(self) -> float:
        return self.gamma3 / 2.0


def _expectation(dist: FaceDistribution, integrand) -> float:
    lo, hi = dist.support
    value, _ = quad(lambda x: integrand(x) * float(dist.pdf(x)), lo, hi,
                    epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


@lru_cache(maxsize=None)
def _dist_constants_by_name(name: str) -> DistConstants:
    dist = get_distribution(name)
    a = _expectation(dist, lambda x: x * float(dist.cdf(x)))
    b = _expectation(dist, lambda x: x * x * float(dist.cdf(x)))
    m3 = _expectation(dist, lambda x: x ** 3)
    m4 = _expectation(dist, lambda x: x ** 4)
    # Mean 0, variance 1: the third cumulant is m3, the fourth m4 - 3.
    return DistConstants(name=name, a=a, b=b, gamma3=m3, gamma4=m4 - 3.0)


def dist_constants(dist) -> DistConstants:
    """Adaptive-quadrature constants for a built-in face distribution."""
    return _dist_constants_by_name(get_distribution(dist).name)


# The four 1/n-expansion kinds for sum-conditioned dice. Conditioning
# events: "one" = die a's face-sum pinned to zero, "two" = both a and b.
PAIR_PROB_KINDS = {
    # P[a1 > b1 and a2 > b2 | both sums zero]
    "joint_two_conditioned": lambda c, n: 0.25 - 2.0 * c.a ** 2 / n,
    # P[a1 > b1 | a's sum zero]
    "beats_one_conditioned": lambda c, n: (
        0.5 + 1.0 / (4 * n) + c.alpha2 * c.a / n - c.b / (2 * n)),
    # P[a1 > b1 and a2 > b2 | a's sum zero]
    "joint_one_conditioned": lambda c, n: (
        0.25 + 1.0 / (4 * n) + c.alpha2 * c.a / n - c.b / (2 * n)
        - c.a ** 2 / n),
    # P[a1 > b1 and a2 > c1 | a's and b's sums zero]
    "cross_two_conditioned": lambda c, n: (
        0.25 + 1.0 / (8 * n) + c.alpha2 * c.a / (2 * n) - c.b / (4 * n)
        - c.a ** 2 / n),
}


def pair_prob_asymptotic(dist, n: int, which: str) -> float:
    """First-order 1/n expansion of a pairwise comparison probability for
    sum-conditioned i.i.d. dice; see PAIR_PROB_KINDS for the four kinds."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    try:
        formula = PAIR_PROB_KINDS[which]
    except KeyError:
        raise InvalidInputError(
            "unknown expansion kind %r (choose from %s)"
            % (which, sorted(PAIR_PROB_KINDS))
        ) from None
    return formula(dist_constants(dist), float(n))
