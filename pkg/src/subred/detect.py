"""Detection statistics with their thresholds, and an error-rate harness.

Three detectors over a matrix of observations from a homogeneous pair:
the mean log-likelihood ratio against a drifted threshold, the maximum
entrywise LLR, and the exhaustive best-average-block search.  Detectors see
only the observation matrix, never the latent planted set.  Ties at the
threshold decide "planted" (the decision event is T >= tau).
"""

import math
from dataclasses import dataclass

import numpy as np

from subred.sampler import derived_rng

__all__ = [
    "DetectorReport",
    "ErrorEstimate",
    "SumTest",
    "MaxTest",
    "SearchTest",
    "t_sum",
    "tau_sum",
    "t_max",
    "t_search",
    "estimate_error",
    "CSV_HEADER",
    "report_csv_row",
    "SEARCH_BUDGET",
]

SEARCH_BUDGET = 10**7


@dataclass(frozen=True)
class DetectorReport:
    statistic: float
    threshold: float
    decision: int


@dataclass(frozen=True)
class ErrorEstimate:
    type1: float
    type2: float
    total: float
    stderr: float
    trials: int
    seed: int


def t_sum(matrix, pair):
    """Mean entrywise LLR of the matrix."""
    return float(np.mean(pair.llr(matrix.data)))


def tau_sum(n, k, pair):
    """Sum-test threshold: -kl_qp plus the planted drift (k^2/2n^2) * skl."""
    return -pair.kl_qp + (k * k) / (2.0 * n * n) * pair.skl


def t_max(matrix, pair):
    """Maximum entrywise LLR of the matrix."""
    return float(np.max(pair.llr(matrix.data)))


def _check_interval_threshold(pair, tau, name):
    if not -pair.kl_qp < tau < pair.kl_pq:
        raise ValueError(
            f"{name} must lie in (-kl_qp, kl_pq) = "
            f"({-pair.kl_qp}, {pair.kl_pq}), got {tau}")


def _colex_subsets(n, k):
    """k-subsets of range(n) in colexicographic order."""
    if k == 0:
        yield ()
        return
    for m in range(k - 1, n):
        for rest in _colex_subsets(m, k - 1):
            yield rest + (m,)


def t_search(matrix, pair, k):
    """Best average block LLR over all k-subset row/column pairs.

    Enumerates row subsets (colex) with an O(k n) column-score update per
    step; guarded to C(n, k)^2 <= SEARCH_BUDGET.
    """
    n = matrix.d
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    log_pairs = 2.0 * (math.lgamma(n + 1) - math.lgamma(k + 1)
                       - math.lgamma(n - k + 1))
    if log_pairs > math.log(SEARCH_BUDGET):
        raise ValueError(
            f"search budget exceeded: C({n},{k})^2 > {SEARCH_BUDGET}")
    llr_matrix = pair.llr(matrix.data)
    best = -math.inf
    kth = n - k
    for rows in _colex_subsets(n, k):
        col_scores = llr_matrix[list(rows)].sum(axis=0)
        top = np.partition(col_scores, kth)[kth:]
        best = max(best, float(top.sum()))
    return best / (k * k)


class SumTest:
    """Mean-LLR detector at the drifted threshold for (n, k)."""

    name = "sum"

    def __init__(self, pair, n, k):
        self.pair = pair
        self.n = n
        self.k = k
        self.threshold = tau_sum(n, k, pair)

    def __call__(self, matrix):
        stat = t_sum(matrix, self.pair)
        return DetectorReport(statistic=stat, threshold=self.threshold,
                              decision=int(stat >= self.threshold))


class MaxTest:
    """Max-LLR detector; the threshold must lie strictly between -kl_qp and
    kl_pq (default 0)."""

    name = "max"

    def __init__(self, pair, tau=0.0):
        _check_interval_threshold(pair, tau, "tau_max")
        self.pair = pair
        self.threshold = tau

    def __call__(self, matrix):
        stat = t_max(matrix, self.pair)
        return DetectorReport(statistic=stat, threshold=self.threshold,
                              decision=int(stat >= self.threshold))


class SearchTest:
    """Exhaustive block-average detector for a known block size k."""

    name = "search"

    def __init__(self, pair, k, tau=0.0):
        _check_interval_threshold(pair, tau, "tau_search")
        self.pair = pair
        self.k = k
        self.threshold = tau

    def __call__(self, matrix):
        stat = t_search(matrix, self.pair, self.k)
        return DetectorReport(statistic=stat, threshold=self.threshold,
                              decision=int(stat >= self.threshold))


def estimate_error(detector, null_sampler, planted_sampler, trials, seed):
    """Empirical Type I / Type II rates over seeded independent trials.

    Samplers are callables rng -> matrix; trial streams derive from
    (seed, hypothesis, trial) so runs are reproducible and order-independent.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    false_alarms = 0
    misses = 0
    for i in range(trials):
        if detector(null_sampler(derived_rng(seed, 0, i))).decision == 1:
            false_alarms += 1
    for i in range(trials):
        if detector(planted_sampler(derived_rng(seed, 1, i))).decision == 0:
            misses += 1
    t1 = false_alarms / trials
    t2 = misses / trials
    stderr = math.sqrt(t1 * (1.0 - t1) / trials + t2 * (1.0 - t2) / trials)
    return ErrorEstimate(type1=t1, type2=t2, total=t1 + t2, stderr=stderr,
                         trials=trials, seed=seed)


CSV_HEADER = "detector,n,k,family,param,skl,trials,type1,type2,total,stderr,seed"


def _pair_fields(pair):
    if pair.space == "real":
        return "gaussian", f"{pair.mu:.10g}"
    return "bernoulli", f"{pair.p_alt:.10g}/{pair.p_null:.10g}"


def report_csv_row(detector_name, n, k, pair, estimate):
    family, param = _pair_fields(pair)
    return (f"{detector_name},{n},{k},{family},{param},{pair.skl:.10g},"
            f"{estimate.trials},{estimate.type1:.10g},{estimate.type2:.10g},"
            f"{estimate.total:.10g},{estimate.stderr:.10g},{estimate.seed}")
