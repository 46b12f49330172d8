"""Registered Monte Carlo experiment families and the statistics layered
on top of them: tournament distributions of close elections, dice-triple
classification, triplet-majority paradox rates, and the small direct
estimators used to cross-check the analytic predictions.

Family params and conditioning descriptors are plain JSON-compatible
dicts so an ExperimentSpec round-trips through its serialized form.
"""

from __future__ import annotations

import math
import time
from typing import Callable, Optional

import numpy as np
from scipy.special import erf as _erf

from . import dice as dice_mod
from .dice import TripleClass, cdf_sum, pair_stats
from .distributions import get_distribution
from .elections import ranking_sign_matrix
from .errors import DomainError, InvalidInputError, ParityError
from .gaussian import CorrelationKernel
from .mc import (
    CategoryCounts,
    ExperimentSpec,
    MonteCarloEstimate,
    register_family,
    substream,
)
from .samplers import (
    ContinuousConditioned,
    DiscreteConditioned,
    IidContinuous,
    StationaryGaussian,
    lex_pairs,
    sample_continuous_conditioned,
)
from .triplets import triplet_cell_tables

TRIPLE_CLASS_ORDER = (TripleClass.TRANSITIVE, TripleClass.INTRANSITIVE,
                      TripleClass.HAS_TIE)

N_DICE_CATEGORIES = 12


def _conditioning_fields(spec: ExperimentSpec):
    """Closeness threshold and margin subset from the spec's conditioning
    descriptor; (None, None) when unconditioned."""
    cond = spec.conditioning
    if cond is None:
        return None, None
    if cond.get("event", "close") != "close":
        raise InvalidInputError(
            "unknown conditioning event %r" % (cond.get("event"),))
    d = cond.get("d")
    if d is None or int(d) < 1:
        raise InvalidInputError("conditioning needs a threshold d >= 1")
    subset = cond.get("subset")
    if subset is not None:
        subset = tuple(int(i) for i in subset)
    return int(d), subset


@register_family("election_outcomes")
def _build_election_outcomes(spec: ExperimentSpec):
    """Tournament outcome of a k-candidate impartial-culture election,
    optionally conditioned on all margins in a pair subset being at most
    d in absolute value.

    Category index: lex pair i contributes bit 2^(K-1-i) when the earlier
    candidate wins that pair, so k=3 has 8 categories.
    """
    n = int(spec.params["n"])
    k = int(spec.params.get("k", 3))
    if n < 1 or n % 2 == 0:
        raise ParityError("voter count must be odd to exclude ties")
    if not 2 <= k <= 5:
        raise InvalidInputError("outcome enumeration supports 2 <= k <= 5")
    d, subset = _conditioning_fields(spec)
    n_pairs = k * (k - 1) // 2
    signs = ranking_sign_matrix(k)
    n_rankings = signs.shape[0]
    pvals = np.full(n_rankings, 1.0 / n_rankings)
    if subset is None:
        check = np.arange(n_pairs)
    else:
        check = np.asarray(sorted(set(subset)), dtype=np.intp)
        if check.size == 0 or check[0] < 0 or check[-1] >= n_pairs:
            raise InvalidInputError("subset indexes lex pairs 0..K-1")
    bit_weights = 1 << np.arange(n_pairs - 1, -1, -1)

    def kernel(trial: int, rng: np.random.Generator):
        counts = rng.multinomial(n, pvals)
        margins = counts @ signs
        if d is not None and np.max(np.abs(margins[check])) > d:
            return False, 0.0
        return True, float((margins > 0) @ bit_weights)

    return kernel, 1 << n_pairs


def outcome_categories(k: int):
    """Metadata matching the election_outcomes category order: for each
    index, (orientation tuple over lex pairs, condorcet winner or None,
    transitive flag)."""
    from .elections import condorcet_winner, is_transitive_outcome
    from .tournaments import Tournament

    n_pairs = k * (k - 1) // 2
    rows = []
    for idx in range(1 << n_pairs):
        bits = [(idx >> (n_pairs - 1 - i)) & 1 for i in range(n_pairs)]
        y = np.array([1 if b else -1 for b in bits], dtype=np.int8)
        t = Tournament(y=y, k=k)
        rows.append((tuple(int(v) for v in y), condorcet_winner(t),
                     is_transitive_outcome(t)))
    return rows


def condorcet_probability(counts: CategoryCounts, k: int,
                          stderr_method: str = "wald"):
    """P[some candidate beats all others] from outcome counts, with the
    stderr of the aggregated proportion."""
    meta = outcome_categories(k)
    hit = sum(int(c) for c, (_, winner, _) in zip(counts.counts, meta)
              if winner is not None)
    return _aggregate_proportion(hit, counts.accepted, stderr_method)


def transitive_probability(counts: CategoryCounts, k: int,
                           stderr_method: str = "wald"):
    meta = outcome_categories(k)
    hit = sum(int(c) for c, (_, _, trans) in zip(counts.counts, meta)
              if trans)
    return _aggregate_proportion(hit, counts.accepted, stderr_method)


def _aggregate_proportion(hits: int, accepted: int, stderr_method: str):
    from .mc import _proportion_stderr

    if accepted < 1:
        raise InvalidInputError("no accepted trials")
    return hits / accepted, _proportion_stderr(hits, accepted,
                                               stderr_method)


def _triplet_margin_kernel(probs: np.ndarray, weights: np.ndarray,
                           m: int, d: Optional[int]):
    """Shared core of the triplet families: per trial, draw the m triplet
    cells, form the three vote margins and the three triplet-majority
    signs, condition on margin closeness, and report whether the three
    cyclically oriented comparisons share one sign."""
    signs = np.sign(weights).astype(np.float64)
    weights_f = weights.astype(np.float64)

    def kernel(trial: int, rng: np.random.Generator):
        counts = rng.multinomial(m, probs).astype(np.float64)
        if d is not None:
            margins = counts @ weights_f
            if np.max(np.abs(margins)) > d:
                return False, 0.0
        f_signs = counts @ signs
        hit = (f_signs > 0).all() or (f_signs < 0).all()
        return True, 1.0 if hit else 0.0

    return kernel


def _triplet_m(spec: ExperimentSpec) -> int:
    n = int(spec.params["n"])
    if n < 3 or n % 3 != 0:
        raise InvalidInputError("vote count must be a positive multiple of 3")
    m = n // 3
    if m % 2 == 0:
        raise ParityError("the number of triplets must be odd")
    return m


@register_family("triplet_paradox")
def _build_triplet_paradox(spec: ExperimentSpec):
    """P[the three triplet-majority outcomes form a cycle] for n
    impartial-culture voters on three candidates, optionally conditioned
    on all three pairwise vote margins being at most d."""
    m = _triplet_m(spec)
    d, subset = _conditioning_fields(spec)
    if subset is not None:
        raise InvalidInputError(
            "triplet conditioning uses all three margins")
    probs, weights = triplet_cell_tables(None)
    return _triplet_margin_kernel(probs, weights, m, d), 0


@register_family("triplet_noise")
def _build_triplet_noise(spec: ExperimentSpec):
    """Same statistic under the correlated-vote model: each voter's three
    votes agree with a hidden uniform sign with probability (1+rho)/2."""
    m = _triplet_m(spec)
    rho = float(spec.params["rho"])
    d, subset = _conditioning_fields(spec)
    if subset is not None:
        raise InvalidInputError(
            "triplet conditioning uses all three margins")
    probs, weights = triplet_cell_tables(rho)
    return _triplet_margin_kernel(probs, weights, m, d), 0


def _face_cdf(model) -> Callable[[np.ndarray], np.ndarray]:
    """Marginal CDF of one face under the model, for the CDF-sum
    comparison statistic."""
    if isinstance(model, (ContinuousConditioned, IidContinuous)):
        return model.dist.cdf
    if isinstance(model, StationaryGaussian):
        var = model.kernel.rho(0)
        scale = 1.0 / math.sqrt(2.0 * var)

        def gauss_cdf(x):
            return 0.5 * (1.0 + _erf(np.asarray(x, dtype=np.float64)
                                     * scale))

        return gauss_cdf
    if isinstance(model, DiscreteConditioned):
        n = model.n

        def lattice_cdf(x):
            return np.clip(np.floor(np.asarray(x, dtype=np.float64)),
                           0.0, n) / n

        return lattice_cdf
    raise InvalidInputError("unsupported dice model %r" % (model,))


def dice_model_from_params(params: dict):
    """Instantiate a triple-sampling model from a params dict with keys
    model, n, and dist or hurst as the model requires."""
    name = params.get("model", "conditioned")
    n = int(params["n"])
    if name == "discrete":
        return DiscreteConditioned(n=n)
    if name == "conditioned":
        return ContinuousConditioned(
            n=n, dist=get_distribution(params.get("dist", "uniform")))
    if name == "iid":
        return IidContinuous(
            n=n, dist=get_distribution(params.get("dist", "uniform")))
    if name == "stationary":
        hurst = params.get("hurst")
        if hurst is None:
            raise InvalidInputError("stationary model needs hurst")
        return StationaryGaussian(n=n,
                                  kernel=CorrelationKernel.fbm(float(hurst)),
                                  method=params.get("method", "auto"))
    raise InvalidInputError("unknown dice model %r" % (name,))


@register_family("dice_triples")
def _build_dice_triples(spec: ExperimentSpec):
    """Class and prediction-agreement profile of an independent dice
    triple. Category = 4 * class + a, where class indexes
    (transitive, intransitive, has_tie) and a in 0..3 counts the pairs
    whose win direction matches the CDF-sum direction."""
    model = dice_model_from_params(spec.params)
    face_cdf = _face_cdf(model)
    class_index = {cls: i for i, cls in enumerate(TRIPLE_CLASS_ORDER)}

    def kernel(trial: int, rng: np.random.Generator):
        dice = [model.sample(rng) for _ in range(3)]
        cls = dice_mod.classify_triple(*dice)
        sums = [cdf_sum(die, face_cdf) for die in dice]
        agree = 0
        for i, j in ((0, 1), (0, 2), (1, 2)):
            margin = pair_stats(dice[i], dice[j]).margin
            v = sums[i] - sums[j]
            if np.sign(margin) == np.sign(v):
                agree += 1
        return True, float(4 * class_index[cls] + agree)

    return kernel, N_DICE_CATEGORIES


def summarize_dice_categories(counts: CategoryCounts) -> dict:
    """Reduce dice_triples counts to the reported statistics. Fractions
    are over all sampled triples (ties stay in the denominator); the
    agreement rate averages per-pair agreement over the 3 pairs of every
    triple. Stderrs treat the counts as one multinomial draw."""
    c = np.asarray(counts.counts, dtype=np.float64)
    total = float(counts.accepted)
    if total < 1:
        raise InvalidInputError("no accepted trials")
    p = c / total
    out = {}
    for name, cls_i in (("transitive", 0), ("intransitive", 1),
                        ("has_tie", 2)):
        frac = float(p[4 * cls_i:4 * cls_i + 4].sum())
        out[name + "_fraction"] = frac
        out[name + "_stderr"] = math.sqrt(
            max(frac * (1.0 - frac), 0.0) / total)
    weights = np.tile(np.arange(4), 3) / 3.0
    rate = float(weights @ p)
    var = float((weights * weights) @ p) - rate * rate
    out["agreement_rate"] = rate
    out["agreement_stderr"] = math.sqrt(max(var, 0.0) / total)
    return out


def orthant3_mc(r: float, draws: int, seed: int,
                chunk: int = 250_000) -> MonteCarloEstimate:
    """All-positive probability of an equicorrelated trivariate standard
    Gaussian, by direct sampling; the independent check of orthant3."""
    if not -0.5 < r <= 1.0:
        raise DomainError("equicorrelation must lie in (-1/2, 1]")
    if draws < 1:
        raise InvalidInputError("need at least one draw")
    cov = np.full((3, 3), r) + (1.0 - r) * np.eye(3)
    # eigendecomposition square root: cov is singular at r = 1, which is
    # inside the documented domain, so Cholesky would reject it
    evals, evecs = np.linalg.eigh(cov)
    chol = evecs * np.sqrt(np.clip(evals, 0.0, None))
    rng = substream(seed, 0)
    hits = 0
    done = 0
    t0 = time.perf_counter()
    while done < draws:
        rows = min(chunk, draws - done)
        z = rng.standard_normal((rows, 3)) @ chol.T
        hits += int(np.count_nonzero((z > 0.0).all(axis=1)))
        done += rows
    p = hits / draws
    return MonteCarloEstimate(
        estimate=p, stderr=math.sqrt(p * (1.0 - p) / draws),
        trials=draws, accepted=draws, seed=seed,
        wall_time_ms=(time.perf_counter() - t0) * 1000.0)


def lag_covariance_mc(kernel: CorrelationKernel, n: int, lags, draws: int,
                      seed: int, method: str = "auto") -> dict:
    """Empirical Cov(X_0, X_lag) of the stationary face sampler with
    per-draw stderr, as {lag: (mean, stderr)}. Uses the product of the
    first face with the lagged face, one sample per draw, so the stderr
    is an honest iid one."""
    lags = [int(v) for v in lags]
    if min(lags) < 0 or max(lags) >= n:
        raise InvalidInputError("lags must lie in [0, n)")
    if draws < 2:
        raise InvalidInputError("need at least two draws")
    model = StationaryGaussian(n=n, kernel=kernel, method=method)
    rng = substream(seed, 0)
    prods = np.empty((draws, len(lags)))
    for it in range(draws):
        faces = model.sample(rng).faces
        prods[it] = faces[0] * faces[lags]
    means = prods.mean(axis=0)
    stderrs = prods.std(axis=0, ddof=1) / math.sqrt(draws)
    return {lag: (float(means[i]), float(stderrs[i]))
            for i, lag in enumerate(lags)}


def w_minus_nv_variance(dist, n: int, pairs: int, seed: int) -> float:
    """Sample variance of W(a, b) - n * (cdf_sum(a) - cdf_sum(b)) over
    independent conditioned pairs, divided by n^3. The analytic claim is
    that this ratio vanishes as n grows; the tests only check decrease."""
    if pairs < 2:
        raise InvalidInputError("need at least two pairs")
    rng = substream(seed, 0)
    vals = np.empty(pairs)
    for it in range(pairs):
        a = sample_continuous_conditioned(n, dist, rng)
        b = sample_continuous_conditioned(n, dist, rng)
        w = dice_mod.w_statistic(a, b)
        v = cdf_sum(a, dist.cdf) - cdf_sum(b, dist.cdf)
        vals[it] = w - n * v
    return float(vals.var(ddof=1)) / float(n) ** 3
