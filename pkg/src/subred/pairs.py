"""Distribution pairs with likelihood-ratio, divergence and tail-exponent calculators.

A pair bundles a planted distribution P and a null distribution Q over a common
sample space, exposing null/planted sampling, the log-likelihood ratio
L(x) = log dP/dQ(x), its log-MGFs under both laws, and the Legendre-transform
tail exponents that drive every bound in this package.  Two families are
shipped: unit-variance Gaussians N(mu, 1) vs N(0, 1), and Bernoulli(p_alt)
vs Bernoulli(p_null).
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

__all__ = [
    "ComputablePair",
    "GaussianPair",
    "BernoulliPair",
    "ExponentQuery",
    "PairGrid",
    "UCReport",
    "llr",
    "divergences",
    "log_mgf",
    "chernoff_exponent",
    "uc_membership",
    "entrywise_counterexample",
    "pair_from_config",
    "chi2_quadrature",
]

UNDER_P = "P"
UNDER_Q = "Q"
_SIDES = (UNDER_P, UNDER_Q)

# Legendre search bracket and iteration budget for the golden-section solver.
_LAMBDA_MAX = 64.0
_GOLDEN_ITERS = 200
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _check_side(side):
    if side not in _SIDES:
        raise ValueError(f"side must be one of {_SIDES}, got {side!r}")


@dataclass(frozen=True)
class ExponentQuery:
    """A tail-exponent request: which law the tail is under, and the rate point."""

    side: str
    tau: float

    def __post_init__(self):
        _check_side(self.side)


class ComputablePair:
    """Common interface of the shipped pair families."""

    kl_pq: float
    kl_qp: float

    @property
    def skl(self):
        return self.kl_pq + self.kl_qp

    @property
    def space(self):
        raise NotImplementedError

    def llr(self, x):
        raise NotImplementedError

    def sample_null(self, size, rng):
        raise NotImplementedError

    def sample_alt(self, size, rng):
        raise NotImplementedError

    def log_mgf(self, side, lam):
        raise NotImplementedError

    def exponent_closed(self, side, tau) -> Optional[float]:
        """Closed-form Legendre exponent, or None when unavailable."""
        return None

    def chi2(self):
        raise NotImplementedError

    def in_space(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianPair(ComputablePair):
    """P = N(mu, 1) against Q = N(0, 1), mu != 0."""

    mu: float
    kl_pq: float = field(init=False)
    kl_qp: float = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.mu) or self.mu == 0.0:
            raise ValueError("mu must be finite and nonzero")
        half = 0.5 * self.mu * self.mu
        object.__setattr__(self, "kl_pq", half)
        object.__setattr__(self, "kl_qp", half)

    @property
    def space(self):
        return "real"

    def in_space(self, x):
        return np.all(np.isfinite(x))

    def llr(self, x):
        x = np.asarray(x, dtype=float)
        out = self.mu * x - 0.5 * self.mu * self.mu
        return float(out) if out.ndim == 0 else out

    def sample_null(self, size, rng):
        return rng.standard_normal(size)

    def sample_alt(self, size, rng):
        return rng.standard_normal(size) + self.mu

    def log_mgf(self, side, lam):
        _check_side(side)
        half = 0.5 * self.mu * self.mu
        if side == UNDER_Q:
            return half * lam * (lam - 1.0)
        return half * lam * (lam + 1.0)

    def exponent_closed(self, side, tau):
        _check_side(side)
        # L is N(-+ mu^2/2, mu^2) under Q/P; the rate is the usual quadratic.
        ep = (tau - 0.5 * self.mu**2) ** 2 / (2.0 * self.mu**2)
        return ep + tau if side == UNDER_Q else ep

    def chi2(self):
        return math.expm1(self.mu * self.mu)


@dataclass(frozen=True)
class BernoulliPair(ComputablePair):
    """P = Bern(p_alt) against Q = Bern(p_null), 0 < p_null < p_alt <= 1.

    p_alt = 1 is permitted (planted-clique edges): L(0) is then -inf under Q,
    d_KL(Q || P) is +inf, and exponent queries at the lower window edge report
    +inf so callers skip the corresponding tail test.
    """

    p_alt: float
    p_null: float
    kl_pq: float = field(init=False)
    kl_qp: float = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.p_null < self.p_alt <= 1.0):
            raise ValueError("need 0 < p_null < p_alt <= 1")
        p, q = self.p_alt, self.p_null
        c1 = math.log(p / q)
        c0 = -math.inf if p == 1.0 else math.log((1.0 - p) / (1.0 - q))
        kl_pq = p * c1 + ((1.0 - p) * c0 if p < 1.0 else 0.0)
        kl_qp = math.inf if p == 1.0 else -(q * c1 + (1.0 - q) * c0)
        object.__setattr__(self, "kl_pq", kl_pq)
        object.__setattr__(self, "kl_qp", kl_qp)

    @property
    def llr_one(self):
        return math.log(self.p_alt / self.p_null)

    @property
    def llr_zero(self):
        if self.p_alt == 1.0:
            return -math.inf
        return math.log((1.0 - self.p_alt) / (1.0 - self.p_null))

    @property
    def space(self):
        return "bit"

    def in_space(self, x):
        arr = np.asarray(x)
        return bool(np.all((arr == 0) | (arr == 1)))

    def llr(self, x):
        arr = np.asarray(x)
        if not self.in_space(arr):
            raise ValueError("Bernoulli sample values must lie in {0, 1}")
        out = np.where(arr == 1, self.llr_one, self.llr_zero)
        return float(out) if out.ndim == 0 else out

    def sample_null(self, size, rng):
        return (rng.random(size) < self.p_null).astype(np.uint8)

    def sample_alt(self, size, rng):
        return (rng.random(size) < self.p_alt).astype(np.uint8)

    def log_mgf(self, side, lam):
        _check_side(side)
        w = self.p_alt if side == UNDER_P else self.p_null
        c1, c0 = self.llr_one, self.llr_zero
        if lam == 0.0:
            return 0.0
        if c0 == -math.inf:
            if w == 1.0:  # L = c1 almost surely under P when p_alt = 1
                return lam * c1
            if lam < 0.0:
                return math.inf
            return math.log(w) + lam * c1
        return np.logaddexp(math.log(w) + lam * c1,
                            math.log1p(-w) + lam * c0)

    def exponent_closed(self, side, tau):
        _check_side(side)
        c1, c0 = self.llr_one, self.llr_zero
        w = self.p_alt if side == UNDER_P else self.p_null
        if tau == -math.inf:
            return math.inf
        if self.p_alt == 1.0:
            if side == UNDER_P:
                return 0.0 if tau == c1 else math.inf
            return math.inf if tau > c1 else c1
        if not (c0 <= tau <= c1):
            return math.inf
        alpha = (tau - c0) / (c1 - c0)
        return _bernoulli_kl(alpha, w)

    def chi2(self):
        # Exact two-atom sum of (dP/dQ)^2 under Q, minus one.
        p, q = self.p_alt, self.p_null
        return p * p / q + (1.0 - p) ** 2 / (1.0 - q) - 1.0


def _bernoulli_kl(a, b):
    """KL divergence between Bern(a) and Bern(b), in nats."""
    if not (0.0 <= a <= 1.0):
        return math.inf
    out = 0.0
    if a > 0.0:
        out += a * math.log(a / b)
    if a < 1.0:
        if b == 1.0:
            return math.inf
        out += (1.0 - a) * math.log((1.0 - a) / (1.0 - b))
    return out


# ---------------------------------------------------------------------------
# operations


def llr(pair, x):
    """Log-likelihood ratio log dP/dQ at x, in nats."""
    return pair.llr(x)


def divergences(pair):
    """(kl_pq, kl_qp, skl, chi2) of the pair, all in nats."""
    return pair.kl_pq, pair.kl_qp, pair.skl, pair.chi2()


def log_mgf(pair, side, lam):
    """log E[exp(lam * L)] under the requested law; +inf when divergent."""
    return pair.log_mgf(side, lam)


def _legendre_numeric(objective, lo=-_LAMBDA_MAX, hi=_LAMBDA_MAX,
                      iters=_GOLDEN_ITERS):
    """Supremum of a concave objective by golden-section over an expanding
    bracket, returning +inf if the objective is still increasing at the edge."""
    a, b = -1.0, 1.0
    # expand an edge while the (concave) objective still increases toward it
    while b < hi and objective(b) > objective(b * _INVPHI):
        b = min(2.0 * b, hi)
    while a > lo and objective(a) > objective(a * _INVPHI):
        a = max(2.0 * a, lo)
    # golden-section on [a, b]
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = objective(x1), objective(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = objective(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = objective(x1)
    xs = 0.5 * (a + b)
    val = objective(xs)
    edge = 1e-6 * _LAMBDA_MAX
    if xs >= hi - edge and objective(hi) >= val - 1e-12:
        return math.inf
    if xs <= lo + edge and objective(lo) >= val - 1e-12:
        return math.inf
    return max(val, 0.0)


def chernoff_exponent(pair, query, method="auto"):
    """Legendre-transform tail exponent sup_lambda [lambda*tau - psi(lambda)].

    method 'closed' uses the family closed form, 'numeric' the golden-section
    solver, and 'auto' prefers the closed form when one exists.  Unbounded
    suprema are reported as +inf.
    """
    if not isinstance(query, ExponentQuery):
        raise TypeError("query must be an ExponentQuery")
    side, tau = query.side, query.tau
    if method not in ("auto", "closed", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if math.isinf(tau):
        return math.inf
    closed = pair.exponent_closed(side, tau)
    if method == "closed":
        if closed is None:
            raise ValueError("no closed form available for this pair")
        return closed
    if method == "auto" and closed is not None:
        return closed
    if isinstance(pair, BernoulliPair) and pair.p_alt == 1.0:
        return pair.exponent_closed(side, tau)

    def objective(lam):
        psi = pair.log_mgf(side, lam)
        if psi == math.inf:
            return -math.inf
        return lam * tau - psi

    return _legendre_numeric(objective)


@dataclass(frozen=True)
class UCReport:
    """Outcome of a finite-size universality-class check."""

    satisfied: bool
    margin: float
    witness: float


# Finite-size conventions: witness thresholds standing in for the classes'
# asymptotic constants.  A reports the constant c in E_P(n^eps*kl) >= c *
# n^eps * kl * log n, B the smallest feasible quadratic-domination constant,
# C the chi^2 / skl ratio.
_UC_A_MIN_C = 0.25
_UC_BC_MAX_C = 16.0


def uc_membership(pair, uc_class, n, epsilon=0.5, grid_points=201):
    """Check class A, B or C at finite n; the report carries the witnessed
    constant and its margin against the convention threshold."""
    if uc_class not in ("A", "B", "C"):
        raise ValueError("uc_class must be 'A', 'B' or 'C'")
    if n < 2:
        raise ValueError("n must be at least 2")
    if uc_class == "A":
        if not (0.0 < epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        tau = n**epsilon * pair.kl_pq
        ep = chernoff_exponent(pair, ExponentQuery(UNDER_P, tau))
        c = ep / (tau * math.log(n))
        return UCReport(c >= _UC_A_MIN_C, c - _UC_A_MIN_C, c)
    if uc_class == "B":
        worst = 1.0
        for lam in np.linspace(-1.0, 0.0, grid_points):
            if lam == 0.0:
                continue
            num = pair.log_mgf(UNDER_P, lam) - pair.kl_pq * lam
            worst = max(worst, num / (pair.kl_pq * lam * lam))
        if math.isinf(pair.kl_qp):
            worst = math.inf
        else:
            for lam in np.linspace(-1.0, 1.0, grid_points):
                if lam == 0.0:
                    continue
                num = pair.log_mgf(UNDER_Q, lam) + pair.kl_qp * lam
                worst = max(worst, num / (pair.kl_qp * lam * lam))
        return UCReport(worst <= _UC_BC_MAX_C, _UC_BC_MAX_C - worst, worst)
    ratio = pair.chi2() / pair.skl
    return UCReport(ratio <= _UC_BC_MAX_C, _UC_BC_MAX_C - ratio, ratio)


def entrywise_counterexample(n=10**4, alpha=0.5):
    """Two Bernoulli pairs whose KL divergences match to a constant while
    their total variations differ polynomially, so no entrywise map can carry
    one submatrix problem to the other without losing tightness.

    Returns a dict with both pairs' KL and TV values and the TV ratio.
    """
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    eps = float(n) ** (-alpha)
    half_eps = float(n) ** (-alpha / 2.0)
    # sparse pair: Bern(eps) vs Bern(2 eps); dense pair: Bern(1/2) vs
    # Bern(1/2 + sqrt(eps)); at alpha = 0 the pairs degenerate and only the
    # (equal) total variations remain meaningful.
    degenerate = 2.0 * eps >= 1.0 or 0.5 + half_eps >= 1.0
    kl_sparse = math.nan if degenerate else _bernoulli_kl(eps, 2.0 * eps)
    tv_sparse = eps
    kl_dense = math.nan if degenerate else _bernoulli_kl(0.5, 0.5 + half_eps)
    tv_dense = half_eps
    return {
        "n": n,
        "alpha": alpha,
        "kl_sparse": kl_sparse,
        "kl_dense": kl_dense,
        "tv_sparse": tv_sparse,
        "tv_dense": tv_dense,
        "kl_ratio": kl_sparse / kl_dense if kl_dense and kl_dense > 0 else math.nan,
        "tv_ratio": tv_sparse / tv_dense if tv_dense > 0 else 1.0,
    }


# ---------------------------------------------------------------------------
# grids and config parsing


@dataclass(frozen=True)
class PairGrid:
    """A d x d grid of pairs sharing one sample space.

    Homogeneous grids store a single pair; heteroskedastic grids a d x d
    object array.
    """

    d: int
    pairs: Union[ComputablePair, np.ndarray]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if isinstance(self.pairs, ComputablePair):
            return
        arr = np.asarray(self.pairs, dtype=object)
        if arr.shape != (self.d, self.d):
            raise ValueError("pair array must have shape (d, d)")
        spaces = {p.space for p in arr.ravel()}
        if len(spaces) != 1:
            raise ValueError("all grid entries must share one sample space")
        object.__setattr__(self, "pairs", arr)

    @property
    def homogeneous(self):
        return isinstance(self.pairs, ComputablePair)

    @property
    def space(self):
        return (self.pairs if self.homogeneous else self.pairs[0, 0]).space

    def pair_at(self, i, j):
        return self.pairs if self.homogeneous else self.pairs[i, j]


def _parse_kv(text):
    out = {}
    for tok in text.replace("\n", " ").split():
        if tok.startswith("#"):
            break
        if "=" not in tok:
            raise ValueError(f"malformed key=value token: {tok!r}")
        k, v = tok.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def pair_from_config(text):
    """Build a pair from 'family=gaussian mu=0.5' or
    'family=bernoulli p=0.6 q=0.3'."""
    kv = _parse_kv(text)
    family = kv.pop("family", None)
    if family == "gaussian":
        if set(kv) != {"mu"}:
            raise ValueError("gaussian pair config takes exactly mu=<real>")
        return GaussianPair(mu=float(kv["mu"]))
    if family == "bernoulli":
        if set(kv) != {"p", "q"}:
            raise ValueError("bernoulli pair config takes exactly p=, q=")
        return BernoulliPair(p_alt=float(kv["p"]), p_null=float(kv["q"]))
    raise ValueError(f"unknown pair family: {family!r}")


# ---------------------------------------------------------------------------
# quadrature oracle


def _simpson(f, a, b, fa, fm, fb):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(f, a, m, fa, flm, fm)
    right = _simpson(f, m, b, fm, frm, fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0,
                                depth - 1))


def chi2_quadrature(pair, tol=1e-10, width=12.0):
    """Independent chi-square oracle for Gaussian pairs: adaptive Simpson of
    (dP/dQ)^2 dQ over +-width standard deviations around both means."""
    if not isinstance(pair, GaussianPair):
        raise TypeError("quadrature oracle is for Gaussian pairs")
    mu = pair.mu

    def integrand(x):
        # p(x)^2 / q(x) for unit-variance normals
        return math.exp(-((x - mu) ** 2) + 0.5 * x * x) / math.sqrt(2 * math.pi)

    lo = min(0.0, mu) - width
    hi = max(0.0, mu) + width
    m = 0.5 * (lo + hi)
    fa, fm, fb = integrand(lo), integrand(m), integrand(hi)
    whole = _simpson(integrand, lo, hi, fa, fm, fb)
    total = _adaptive_simpson(integrand, lo, hi, fa, fm, fb, whole, tol, 48)
    return total - 1.0
