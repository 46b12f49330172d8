"""Samplers for the four dice models and for ranked voting profiles.

Dice models:

- iid continuous faces from a built-in distribution;
- continuous faces conditioned on the face-sum being exactly zero
  (rejection on the last face, acceptance rate Theta(1/sqrt(n)));
- integer faces uniform on {1..n}^n conditioned on the face-sum equal to
  n(n+1)/2 (exact rejection for small n, pair-transfer MCMC above that);
- stationary Gaussian faces with variance 1/2 and a prescribed lag
  correlation (circulant embedding, Toeplitz Cholesky fallback/oracle).

All samplers consume a numpy Generator passed by the caller and draw their
randomness in a fixed documented order, so results are reproducible from
the generator state alone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import toeplitz

from . import _accel
from .dice import Die
from .distributions import FaceDistribution, get_distribution
from .errors import (
    InvalidInputError,
    NotPositiveDefiniteError,
    SamplerStallError,
    SizeLimitError,
)
from .gaussian import CorrelationKernel

DISCRETE_REJECTION_LIMIT = 200
CHOLESKY_LIMIT = 4096


def sample_iid(n: int, dist, rng: np.random.Generator) -> Die:
    """n faces drawn i.i.d. from the given face distribution."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    dist = get_distribution(dist)
    faces = dist.sample(rng, n)
    return Die(faces, meta={"model": "iid", "dist": dist.name, "n": n})


def sample_continuous_conditioned(n: int, dist, rng: np.random.Generator,
                                  max_attempts: int = 1_000_000) -> Die:
    """n i.i.d. faces conditioned on their sum being exactly zero.

    Draws the first n-1 faces i.i.d., sets the last face to minus their
    sum, and accepts with probability pdf(last) / sup pdf. The accepted
    law is exactly the conditional law on the zero-sum hyperplane. The
    acceptance rate decays like 1/sqrt(n) because the candidate last face
    has standard deviation sqrt(n-1).
    """
    if n < 2:
        raise InvalidInputError("conditioned dice need n >= 2")
    dist = get_distribution(dist)
    batch = max(8, int(2.0 * math.sqrt(n)))
    attempts = 0
    while attempts < max_attempts:
        take = min(batch, max_attempts - attempts)
        body = dist.sample(rng, (take, n - 1))
        tail = -body.sum(axis=1)
        u = rng.random(take)
        density = np.asarray(dist.pdf(tail), dtype=float)
        hits = np.nonzero(u * dist.sup_pdf <= density)[0]
        attempts += take
        if hits.size:
            i = int(hits[0])
            faces = np.concatenate([body[i], tail[i:i + 1]])
            return Die(faces, meta={"model": "conditioned",
                                    "dist": dist.name, "n": n})
    raise SamplerStallError(
        "conditioned sampler accepted nothing in %d attempts" % max_attempts,
        attempts=max_attempts, accepted=0)


def _discrete_rejection(n: int, rng: np.random.Generator,
                        max_attempts: int) -> np.ndarray:
    target = n * (n + 1) // 2
    batch = max(16, 2 * n)
    attempts = 0
    while attempts < max_attempts:
        take = min(batch, max_attempts - attempts)
        draws = rng.integers(1, n + 1, size=(take, n))
        hits = np.nonzero(draws.sum(axis=1) == target)[0]
        attempts += take
        if hits.size:
            return draws[int(hits[0])].astype(np.int64)
    raise SamplerStallError(
        "discrete rejection accepted nothing in %d attempts" % max_attempts,
        attempts=max_attempts, accepted=0)


def _discrete_mcmc(n: int, rng: np.random.Generator,
                   burn_in: Optional[int]) -> np.ndarray:
    if burn_in is None:
        burn_in = 10 * n * n
    faces = np.arange(1, n + 1, dtype=np.int64)
    # Each move resamples one face pair uniformly given its sum, a Gibbs
    # step whose stationary law is uniform on the constraint set.
    ii = rng.integers(0, n, size=burn_in)
    jj = rng.integers(0, n - 1, size=burn_in)
    jj = np.where(jj >= ii, jj + 1, jj).astype(np.int64)
    uu = rng.random(burn_in)
    _accel.mcmc_pair_transfer(faces, ii.astype(np.int64), jj, uu)
    return faces


def sample_discrete_conditioned(n: int, rng: np.random.Generator, *,
                                rejection_limit: int = DISCRETE_REJECTION_LIMIT,
                                burn_in: Optional[int] = None,
                                max_attempts: int = 50_000_000) -> Die:
    """Faces uniform on {1..n}^n conditioned on face-sum n(n+1)/2.

    Exact rejection sampling up to rejection_limit (the event has
    probability ~ sqrt(12 / (2 pi)) / n^2, manageable for n <= 200);
    beyond that a pair-transfer MCMC run of 10 n^2 Gibbs moves from the
    sorted start 1..n, which is approximate and flagged in Die.meta.
    """
    if n < 1:
        raise InvalidInputError("n must be positive")
    if n <= rejection_limit:
        faces = _discrete_rejection(n, rng, max_attempts)
        meta = {"model": "discrete", "n": n, "exact": True,
                "sampler": "rejection"}
    else:
        faces = _discrete_mcmc(n, rng, burn_in)
        meta = {"model": "discrete", "n": n, "exact": False,
                "sampler": "mcmc",
                "burn_in": 10 * n * n if burn_in is None else burn_in}
    return Die(faces.astype(float), meta=meta)


def _circulant_eigenvalues(n: int, kernel: CorrelationKernel) -> np.ndarray:
    gamma = kernel.values(np.arange(n))
    first_row = np.concatenate([gamma, gamma[-2:0:-1]])
    return np.fft.fft(first_row).real


def _sample_circulant(n: int, kernel: CorrelationKernel,
                      rng: np.random.Generator) -> Optional[np.ndarray]:
    """Davies-Harte synthesis on the circulant extension of size 2(n-1).

    Returns None when the extension has meaningfully negative eigenvalues
    (the embedding is not nonnegative definite), letting the caller fall
    back. Normal draws are consumed as one array of length 2(n-1), indexed
    low k to high k with real before imaginary parts.
    """
    m = 2 * (n - 1)
    lam = _circulant_eigenvalues(n, kernel)
    if lam.min() < -1e-9 * max(lam.max(), 1.0):
        return None
    lam = np.clip(lam, 0.0, None)
    v = rng.standard_normal(m)
    half = m // 2
    w = np.zeros(m, dtype=complex)
    w[0] = math.sqrt(lam[0] / m) * v[0]
    w[half] = math.sqrt(lam[half] / m) * v[m - 1]
    if half > 1:
        k = np.arange(1, half)
        scale = np.sqrt(lam[k] / (2.0 * m))
        w[k] = scale * (v[2 * k - 1] + 1j * v[2 * k])
        w[m - k] = np.conj(w[k])
    x = np.fft.fft(w).real
    return x[:n]


def _sample_cholesky(n: int, kernel: CorrelationKernel,
                     rng: np.random.Generator) -> np.ndarray:
    if n > CHOLESKY_LIMIT:
        raise SizeLimitError(
            "Cholesky path limited to n <= %d" % CHOLESKY_LIMIT
        )
    cov = toeplitz(kernel.values(np.arange(n)))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        order = _first_failing_minor(cov)
        raise NotPositiveDefiniteError(minor_order=order) from None
    return chol @ rng.standard_normal(n)


def _first_failing_minor(cov: np.ndarray) -> int:
    lo, hi = 1, cov.shape[0]
    # Smallest leading minor whose Cholesky fails, by bisection.
    while lo < hi:
        mid = (lo + hi) // 2
        try:
            np.linalg.cholesky(cov[:mid, :mid])
            lo = mid + 1
        except np.linalg.LinAlgError:
            hi = mid
    return lo


def sample_stationary_gaussian(n: int, kernel: CorrelationKernel,
                               rng: np.random.Generator,
                               method: str = "auto") -> Die:
    """A stationary Gaussian die: mean-zero faces with variance 1/2 and
    lag covariance kernel.rho.

    method "circulant" uses the Davies-Harte embedding of size 2(n-1)
    (raises when the embedding is not nonnegative definite), "cholesky"
    factors the n x n Toeplitz covariance (n <= 4096), and "auto" tries
    the embedding first and falls back to Cholesky with a warning.
    """
    if n < 1:
        raise InvalidInputError("n must be positive")
    meta = {"model": "stationary", "kernel": kernel.name, "n": n}
    if n == 1:
        faces = rng.standard_normal(1) * math.sqrt(0.5)
        return Die(faces, meta={**meta, "method": "direct"})
    if method not in ("auto", "circulant", "cholesky"):
        raise InvalidInputError("unknown method %r" % (method,))
    if method in ("auto", "circulant"):
        faces = _sample_circulant(n, kernel, rng)
        if faces is not None:
            return Die(faces, meta={**meta, "method": "circulant"})
        if method == "circulant":
            raise NotPositiveDefiniteError(minor_order=0)
        warnings.warn(
            "circulant extension of %s at n=%d is not nonnegative "
            "definite; falling back to Cholesky" % (kernel.name, n),
            RuntimeWarning,
        )
    faces = _sample_cholesky(n, kernel, rng)
    return Die(faces, meta={**meta, "method": "cholesky"})


@dataclass(frozen=True)
class DiscreteConditioned:
    """Integer faces 1..n, uniform given face-sum n(n+1)/2."""

    n: int

    def sample(self, rng: np.random.Generator) -> Die:
        return sample_discrete_conditioned(self.n, rng)


@dataclass(frozen=True)
class ContinuousConditioned:
    """i.i.d. faces conditioned on a zero face-sum."""

    n: int
    dist: FaceDistribution

    def sample(self, rng: np.random.Generator) -> Die:
        return sample_continuous_conditioned(self.n, self.dist, rng)


@dataclass(frozen=True)
class StationaryGaussian:
    """Stationary Gaussian faces with variance 1/2."""

    n: int
    kernel: CorrelationKernel
    method: str = "auto"

    def sample(self, rng: np.random.Generator) -> Die:
        return sample_stationary_gaussian(self.n, self.kernel, rng,
                                          self.method)


@dataclass(frozen=True)
class IidContinuous:
    """Unconditioned i.i.d. faces."""

    n: int
    dist: FaceDistribution

    def sample(self, rng: np.random.Generator) -> Die:
        return sample_iid(self.n, self.dist, rng)


def lex_pairs(k: int) -> list[tuple[int, int]]:
    """Candidate pairs (i, j), i < j, in lexicographic order."""
    if k < 2:
        raise InvalidInputError("need at least two candidates")
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


@dataclass(frozen=True)
class RankingProfile:
    """Strict ranking positions for n voters over k candidates.

    positions[v, c] is candidate c's rank in voter v's order (0 = top),
    so each row is a permutation of 0..k-1.
    """

    positions: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.int64)
        if pos.ndim != 2:
            raise InvalidInputError("positions must be a 2-D array")
        n, k = pos.shape
        if n < 1 or k < 2:
            raise InvalidInputError("need >= 1 voters and >= 2 candidates")
        expected = np.arange(k)
        if not np.array_equal(np.sort(pos, axis=1),
                              np.broadcast_to(expected, pos.shape)):
            raise InvalidInputError("each row must be a permutation of 0..k-1")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_voters(self) -> int:
        return self.positions.shape[0]

    @property
    def k(self) -> int:
        return self.positions.shape[1]

    def margin(self, a: int, b: int) -> int:
        """Votes preferring a over b minus the reverse; parity matches n."""
        out = _accel.profile_margins(
            self.positions, np.array([a], dtype=np.int64),
            np.array([b], dtype=np.int64))
        return int(np.asarray(out)[0])

    def margins_lex(self) -> np.ndarray:
        """Margins over all candidate pairs in lexicographic order."""
        pairs = lex_pairs(self.k)
        aa = np.array([p[0] for p in pairs], dtype=np.int64)
        bb = np.array([p[1] for p in pairs], dtype=np.int64)
        return np.asarray(_accel.profile_margins(self.positions, aa, bb))

    def pairwise_votes(self) -> np.ndarray:
        """Per-voter pairwise votes, shape (n_voters, K), lex pair order:
        +1 where the voter ranks the pair's first candidate higher. Each
        row is one of the k! transitive sign tuples."""
        pairs = lex_pairs(self.k)
        cols = [
            np.where(self.positions[:, a] < self.positions[:, b], 1, -1)
            for a, b in pairs
        ]
        return np.stack(cols, axis=1).astype(np.int8)


def sample_profile(n_voters: int, k: int,
                   rng: np.random.Generator) -> RankingProfile:
    """Impartial-culture profile: each voter's rank row is an independent
    uniformly random permutation of 0..k-1 (argsort of i.i.d. uniforms)."""
    if n_voters < 1 or k < 2:
        raise InvalidInputError("need >= 1 voters and >= 2 candidates")
    positions = np.argsort(rng.random((n_voters, k)), axis=1).astype(np.int64)
    return RankingProfile(positions, meta={"culture": "impartial"})
