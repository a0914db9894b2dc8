"""Exact small-instance laws and total-variation estimators.

Everything here is an independent verification route: brute-force
enumerations, pmf convolutions and quadratic-divergence identities used by
the test suites to check the bounds the rest of the package computes.
Combinatorial weights go through log-gamma, never factorials.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from subred.sampler import binomial_pmf

__all__ = [
    "FiniteLaw",
    "tv_exact",
    "tv_chain_bound",
    "hypergeometric_pmf",
    "diag_support_law",
    "diag_bound",
    "diag_planted_bound",
    "chi2_mixture_exact",
    "it_impossibility_margin",
    "tv_plugin",
    "chi2_vector_bruteforce",
    "chi2_matrix_bruteforce",
    "vector_embedding_bound",
]


@dataclass(frozen=True)
class FiniteLaw:
    """A finitely supported probability law with hashable outcomes."""

    atoms: tuple  # of (outcome, probability)

    def __post_init__(self):
        total = 0.0
        seen = set()
        for outcome, prob in self.atoms:
            if prob < -1e-15:
                raise ValueError(f"negative probability at {outcome!r}")
            if outcome in seen:
                raise ValueError(f"duplicate outcome {outcome!r}")
            seen.add(outcome)
            total += prob
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def from_dict(cls, d):
        return cls(atoms=tuple(sorted(d.items(), key=lambda kv: kv[0])))

    def as_dict(self):
        return dict(self.atoms)

    def prob(self, outcome):
        return self.as_dict().get(outcome, 0.0)


def tv_exact(a: FiniteLaw, b: FiniteLaw):
    """Total variation distance between two finite laws, exactly."""
    da, db = a.as_dict(), b.as_dict()
    keys = set(da) | set(db)
    return 0.5 * sum(abs(da.get(k, 0.0) - db.get(k, 0.0)) for k in keys)


def tv_chain_bound(step_bounds: Sequence[float]):
    """Triangle-inequality budget over a pipeline of approximate steps."""
    total = 0.0
    for eps in step_bounds:
        if not 0.0 <= eps <= 1.0:
            raise ValueError("each step bound must lie in [0, 1]")
        total += eps
    return min(total, 1.0)


def _log_comb(a, b):
    """log C(a, b); a short log-product when one side is small keeps the
    cancellation error below 1e-12 even at a = 10^4, log-gamma otherwise."""
    b = min(b, a - b)
    if b < 0:
        return -math.inf
    if b <= 64:
        return sum(math.log(a - i) - math.log(i + 1) for i in range(b))
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def hypergeometric_pmf(n, k, draws=None):
    """pmf of |S ∩ T| for independent uniform k-subsets of [n] (equivalently
    Hypergeometric(n, k, draws))."""
    draws = k if draws is None else draws
    if not (0 <= k <= n and 0 <= draws <= n):
        raise ValueError("need 0 <= k, draws <= n")
    lo = max(0, k + draws - n)
    hi = min(k, draws)
    out = np.zeros(hi + 1)
    for h in range(lo, hi + 1):
        out[h] = math.exp(_log_comb(k, h) + _log_comb(n - k, draws - h)
                          - _log_comb(n, draws))
    return out


def _max_pmf(pmf_x, pmf_y_shifted, shift):
    """pmf of max(X, Y - shift) for independent X >= 0 and Y >= 0.

    pmf_y_shifted is the pmf of Y; the law of Y - shift is used.
    """
    nx = len(pmf_x) - 1
    ny = len(pmf_y_shifted) - 1
    hi = max(nx, ny - shift)
    cdf_x = np.cumsum(pmf_x)
    cdf_y = np.cumsum(pmf_y_shifted)

    def cdf_joint(m):
        if m < 0:
            return 0.0
        cx = cdf_x[min(m, nx)]
        ym = m + shift
        cy = cdf_y[min(ym, ny)] if ym >= 0 else 0.0
        return cx * cy

    out = np.zeros(hi + 1)
    prev = 0.0
    for m in range(hi + 1):
        cur = cdf_joint(m)
        out[m] = cur - prev
        prev = cur
    return out


def diag_support_law(n, k, N, P, Q):
    """Exact diagonal-support laws for the principal-minor embedding.

    With independent t1 ~ Bin(k, P), t2 ~ Bin(n-k, P), t3 ~ Bin(N, Q) and
    t4 = max(t3 - t1 - t2, 0), returns the joint law of (t1, t2 + t4) and the
    law of t1 + t2 + t4, both by exact pmf convolution.
    """
    if not (0 <= k <= n <= N):
        raise ValueError("need 0 <= k <= n <= N")
    pt1 = binomial_pmf(k, P)
    pt2 = binomial_pmf(n - k, P)
    pt3 = binomial_pmf(N, Q)
    joint = {}
    for a in range(k + 1):
        if pt1[a] == 0.0:
            continue
        # conditioned on t1 = a, t2 + t4 = max(t2, t3 - a)
        rest = _max_pmf(pt2, pt3, a)
        for m, pm in enumerate(rest):
            if pm > 0.0:
                joint[(a, m)] = joint.get((a, m), 0.0) + pt1[a] * pm
    # total = t1 + t2 + t4 = max(t1 + t2, t3) with t1 + t2 ~ Bin(n, P)
    ps = np.convolve(pt1, pt2)
    total_pmf = _max_pmf(ps, pt3, 0)
    total = {m: p for m, p in enumerate(total_pmf) if p > 0.0}
    return FiniteLaw.from_dict(joint), FiniteLaw.from_dict(total)


def diag_bound(n, N, Q, epsilon):
    """Null-side embedding slack: 4 exp(-Q eps^2 n^2 / 32N)."""
    return 4.0 * math.exp(-Q * epsilon**2 * n**2 / (32.0 * N))


def diag_planted_bound(n, k, N, Q, epsilon):
    """Planted-side embedding slack: the null term plus both binomial-shift
    square roots."""
    return (diag_bound(n, N, Q, epsilon)
            + math.sqrt(k * k * (1.0 - Q) / (2.0 * N * Q))
            + math.sqrt(k * k * Q / (2.0 * N * (1.0 - Q))))


def chi2_mixture_exact(n, k, chi2_entry):
    """chi^2 of the planted-submatrix mixture against the null product law.

    Equals E[(1 + c)^(H^2)] - 1 with H the overlap of two independent uniform
    k-subsets of [n], computed by exact hypergeometric enumeration in log
    space.
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if chi2_entry < 0.0:
        raise ValueError("chi2_entry must be nonnegative")
    if k == 0 or chi2_entry == 0.0:
        return 0.0
    pmf = hypergeometric_pmf(n, k)
    lc = math.log1p(chi2_entry)
    terms = [math.log(pmf[h]) + h * h * lc
             for h in range(len(pmf)) if pmf[h] > 0.0]
    m = max(terms)
    logsum = m + math.log(sum(math.exp(t - m) for t in terms))
    if logsum > 700.0:  # value exceeds the float range; accumulation did not
        return math.inf
    return max(math.expm1(logsum), 0.0)


@dataclass(frozen=True)
class ImpossibilityReport:
    lhs: float
    rhs: float
    satisfied: bool
    tv_bound: float  # nan when the hypothesis fails


def it_impossibility_margin(n, k, pair):
    """Detection-impossibility check: entrywise chi^2 against the
    (1/16e) * min((1/n) log(en/k), n^2/k^4) threshold, with the implied TV
    bound sqrt(mixture-chi^2 / 2) when it holds."""
    lhs = pair.chi2()
    rhs = (1.0 / (16.0 * math.e)) * min(
        math.log(math.e * n / k) / n, n * n / float(k) ** 4)
    satisfied = lhs < rhs
    tv_bound = math.nan
    if satisfied:
        tv_bound = math.sqrt(0.5 * chi2_mixture_exact(n, k, lhs))
    return ImpossibilityReport(lhs=lhs, rhs=rhs, satisfied=satisfied,
                               tv_bound=tv_bound)


def tv_plugin(samples_a, samples_b, bins=64, n_boot=200, rng=None):
    """Histogram plug-in TV estimate with a bootstrap standard error.

    Shared equal-probability bins are cut from the pooled sample; when the
    pooled support has at most `bins` distinct values the exact empirical
    pmfs are compared instead.
    """
    a = np.asarray(samples_a, dtype=float).ravel()
    b = np.asarray(samples_b, dtype=float).ravel()
    if a.size < 1000 or b.size < 1000:
        raise ValueError("need at least 1000 samples on each side")
    rng = np.random.default_rng(0) if rng is None else rng
    pooled = np.concatenate([a, b])
    values = np.unique(pooled)
    if values.size <= bins:
        ca = np.array([(a == v).sum() for v in values], dtype=float)
        cb = np.array([(b == v).sum() for v in values], dtype=float)
    else:
        qs = np.linspace(0.0, 1.0, bins + 1)[1:-1]
        edges = np.unique(np.quantile(pooled, qs))
        ca = np.bincount(np.searchsorted(edges, a), minlength=edges.size + 1
                         ).astype(float)
        cb = np.bincount(np.searchsorted(edges, b), minlength=edges.size + 1
                         ).astype(float)

    def stat(ca_, cb_):
        return 0.5 * np.abs(ca_ / ca_.sum() - cb_ / cb_.sum()).sum()

    estimate = stat(ca, cb)
    boots = np.empty(n_boot)
    pa, pb = ca / ca.sum(), cb / cb.sum()
    for i in range(n_boot):
        ra = rng.multinomial(int(ca.sum()), pa).astype(float)
        rb = rng.multinomial(int(cb.sum()), pb).astype(float)
        boots[i] = stat(ra, rb)
    return float(estimate), float(boots.std(ddof=1))


# ---------------------------------------------------------------------------
# brute-force chi^2 oracles (test budgets: m <= 12 vectors, n <= 3 matrices)


def chi2_vector_bruteforce(m, k, pair):
    """chi^2 of the k-planted Bernoulli vector mixture against Bern(q)^m,
    by literal enumeration of all 2^m outcomes and all k-subsets."""
    if pair.space != "bit":
        raise ValueError("brute force is for Bernoulli pairs")
    if m > 16:
        raise ValueError("declared brute-force budget is m <= 16")
    p, q = pair.p_alt, pair.p_null
    f1, f0 = p / q, (1.0 - p) / (1.0 - q)
    outcomes = np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.uint8)
    fvals = np.where(outcomes == 1, f1, f0)
    gbar = np.zeros(len(outcomes))
    count = 0
    for subset in itertools.combinations(range(m), k):
        gbar += np.prod(fvals[:, subset], axis=1)
        count += 1
    gbar /= count
    w = outcomes.sum(axis=1)
    qprob = q**w * (1.0 - q) ** (m - w)
    return float(np.sum(qprob * gbar * gbar) - 1.0)


def chi2_matrix_bruteforce(n, k, pair):
    """chi^2 of the k-planted Bernoulli matrix mixture against Bern(q)^(n x n),
    by literal enumeration of all 2^(n^2) matrices."""
    if pair.space != "bit":
        raise ValueError("brute force is for Bernoulli pairs")
    if n > 3:
        raise ValueError("declared brute-force budget is n <= 3")
    p, q = pair.p_alt, pair.p_null
    f1, f0 = p / q, (1.0 - p) / (1.0 - q)
    cells = n * n
    outcomes = np.array(list(itertools.product((0, 1), repeat=cells)),
                        dtype=np.uint8)
    fvals = np.where(outcomes == 1, f1, f0)
    subsets = list(itertools.combinations(range(n), k))
    gbar = np.zeros(len(outcomes))
    for rows in subsets:
        cols = [i * n + j for i in rows for j in rows]
        gbar += np.prod(fvals[:, cols], axis=1)
    gbar /= len(subsets)
    w = outcomes.sum(axis=1)
    qprob = q**w * (1.0 - q) ** (cells - w)
    return float(np.sum(qprob * gbar * gbar) - 1.0)


def vector_embedding_bound(m, k, chi2_entry):
    """Quadratic embedding bound 2 k^2 chi^2 / m, valid when k^2 chi^2 <= m."""
    if k * k * chi2_entry > m:
        raise ValueError("bound requires k^2 * chi2 <= m")
    return 2.0 * k * k * chi2_entry / m
