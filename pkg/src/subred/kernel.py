"""Multivariate rejection kernels and their total-variation slack calculators.

A kernel maps one source bit B, distributed Bern(p_src) or Bern(q_src), to an
ell-vector whose law is close in total variation to the product of target
planted laws (B ~ Bern(p_src)) or target null laws (B ~ Bern(q_src)).  Each
iteration draws a candidate from the null product, keeps it only when the
summed log-likelihood ratio lands in the acceptance window
[log((1-p)/(1-q)), log(p/q)], and then accepts with the bit-dependent
reweighting probability; after `iterations` failures the fixed all-null-mode
fallback is returned.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from subred import backend
from subred.oracle import FiniteLaw
from subred.pairs import (
    UNDER_P,
    UNDER_Q,
    BernoulliPair,
    ComputablePair,
    ExponentQuery,
    GaussianPair,
    chernoff_exponent,
)

__all__ = [
    "KernelSpec",
    "DeltaBound",
    "TailProbs",
    "mrk_map",
    "mrk_batch",
    "exact_output_law",
    "exact_input_mixture_law",
    "delta_bound",
    "homogeneous_delta",
    "tail_probs",
]


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of one rejection-kernel instance."""

    p_src: float
    q_src: float
    targets: Tuple[ComputablePair, ...]
    iterations: int

    def __post_init__(self):
        if not 0.0 < self.q_src < self.p_src <= 1.0:
            raise ValueError("need 0 < q_src < p_src <= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        targets = tuple(self.targets)
        if not targets:
            raise ValueError("need at least one target pair")
        if len({t.space for t in targets}) != 1:
            raise ValueError("targets must share one sample space")
        object.__setattr__(self, "targets", targets)
        if not self.window_lo < self.window_hi:
            raise ValueError("empty acceptance window")

    @property
    def ell(self):
        return len(self.targets)

    @property
    def window_hi(self):
        return math.log(self.p_src / self.q_src)

    @property
    def window_lo(self):
        if self.p_src == 1.0:
            return -math.inf
        return math.log((1.0 - self.p_src) / (1.0 - self.q_src))

    @property
    def space(self):
        return self.targets[0].space

    def homogeneous_pair(self):
        first = self.targets[0]
        if any(t != first for t in self.targets):
            raise ValueError("kernel targets are not homogeneous")
        return first


@dataclass(frozen=True)
class DeltaBound:
    """Total-variation slack of a kernel plus the iteration budget it assumed."""

    delta: float
    tail_p: float
    tail_q: float
    recommended_iterations: int


@dataclass(frozen=True)
class TailProbs:
    tail_p: float
    tail_q: float
    se_p: float
    se_q: float
    method: str


def _target_params(spec, blocks=1):
    if spec.space == "bit":
        lp1 = np.array([[t.llr_one for t in spec.targets]] * blocks)
        lp0 = np.array([[t.llr_zero for t in spec.targets]] * blocks)
        qprob = np.array([[t.p_null for t in spec.targets]] * blocks)
        return lp1, lp0, qprob
    mu = np.array([[t.mu for t in spec.targets]] * blocks)
    return (mu,)


def mrk_batch(spec, bits, rng):
    """Run independent kernels for an array of source bits; rows of the
    result are the ell-vectors."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8).ravel()
    if np.any(bits > 1):
        raise ValueError("source bits must be 0/1")
    if spec.space == "bit":
        lp1, lp0, qprob = _target_params(spec, blocks=bits.size)
        return backend.mrk_bernoulli_batch(
            rng, bits, lp1, lp0, qprob, spec.p_src, spec.q_src,
            spec.window_lo, spec.window_hi, spec.iterations)
    (mu,) = _target_params(spec, blocks=bits.size)
    return backend.mrk_gaussian_batch(
        rng, bits, mu, spec.p_src, spec.q_src,
        spec.window_lo, spec.window_hi, spec.iterations)


def mrk_map(spec, b, rng):
    """Map a single source bit to an ell-vector of target sample values."""
    if b not in (0, 1):
        raise ValueError("b must be 0 or 1")
    return mrk_batch(spec, np.array([b], dtype=np.uint8), rng)[0]


# ---------------------------------------------------------------------------
# exact finite-support analysis


def _finite_atoms(spec):
    """Outcome tuples of the null product with their probabilities and summed
    LLRs, for all-Bernoulli targets."""
    if spec.space != "bit":
        raise ValueError("exact laws need finite-support (Bernoulli) targets")
    if spec.ell > 20:
        raise ValueError("exact-law budget is ell <= 20")
    outcomes = []
    qprobs = []
    pprobs = []
    lsums = []
    for bits in np.ndindex(*(2,) * spec.ell):
        qp = 1.0
        pp = 1.0
        ls = 0.0
        for z, t in zip(bits, spec.targets):
            qp *= t.p_null if z else 1.0 - t.p_null
            pp *= t.p_alt if z else 1.0 - t.p_alt
            ls += t.llr_one if z else t.llr_zero
        outcomes.append(tuple(int(z) for z in bits))
        qprobs.append(qp)
        pprobs.append(pp)
        lsums.append(ls)
    return outcomes, np.array(qprobs), np.array(pprobs), np.array(lsums)


def _accept_probs(spec, lsums, in_window):
    qp = spec.q_src / spec.p_src
    floor1 = (spec.q_src * (1.0 - spec.p_src)
              / (spec.p_src * (1.0 - spec.q_src)))
    with np.errstate(over="ignore"):
        expl = np.exp(lsums)
    a0 = np.where(in_window, 1.0 - qp * expl, 0.0)
    a1 = np.where(in_window, qp * expl - floor1, 0.0)
    for arr in (a0, a1):
        inside = arr[in_window]
        if inside.size and (inside.min() < -1e-12 or inside.max() > 1 + 1e-12):
            raise FloatingPointError("windowed acceptance probability escaped [0, 1]")
    return np.clip(a0, 0.0, 1.0), np.clip(a1, 0.0, 1.0)


def exact_output_law(spec, b):
    """Exact law of the kernel output for a fixed source bit b.

    A mixture of the accepted conditional law and the fallback atom at the
    all-zeros initialization, with fallback weight (1 - accept)^iterations.
    """
    if b not in (0, 1):
        raise ValueError("b must be 0 or 1")
    outcomes, qprobs, _, lsums = _finite_atoms(spec)
    in_window = (spec.window_lo <= lsums) & (lsums <= spec.window_hi)
    a0, a1 = _accept_probs(spec, lsums, in_window)
    accept = a1 if b else a0
    rate = float(np.sum(qprobs * accept))
    fallback = 1.0 if rate == 0.0 else (1.0 - rate) ** spec.iterations
    if spec.iterations == 0:
        fallback = 1.0
    law = {}
    z0 = (0,) * spec.ell
    if fallback < 1.0:
        cond = qprobs * accept / rate
        for outcome, pr in zip(outcomes, cond):
            if pr > 0.0:
                law[outcome] = (1.0 - fallback) * pr
    law[z0] = law.get(z0, 0.0) + fallback
    return FiniteLaw.from_dict(law)


def exact_input_mixture_law(spec, which):
    """Exact output law when the source bit is Bern(p_src) ('p') or
    Bern(q_src) ('q')."""
    if which not in ("p", "q"):
        raise ValueError("which must be 'p' or 'q'")
    w = spec.p_src if which == "p" else spec.q_src
    d1 = exact_output_law(spec, 1).as_dict()
    d0 = exact_output_law(spec, 0).as_dict()
    keys = set(d1) | set(d0)
    return FiniteLaw.from_dict(
        {k: w * d1.get(k, 0.0) + (1.0 - w) * d0.get(k, 0.0) for k in keys})


def target_product_law(spec, which):
    """Finite product law of the targets: planted ('p') or null ('q')."""
    outcomes, qprobs, pprobs, _ = _finite_atoms(spec)
    probs = pprobs if which == "p" else qprobs
    return FiniteLaw.from_dict(
        {o: pr for o, pr in zip(outcomes, probs) if pr > 0.0})


# ---------------------------------------------------------------------------
# slack calculators


def delta_bound(spec, tail_p, tail_q):
    """Unconditional TV slack from the out-of-window masses under the target
    product laws, at the kernel's configured iteration count."""
    if not (0.0 <= tail_p <= 1.0 and 0.0 <= tail_q <= 1.0):
        raise ValueError("tail probabilities must lie in [0, 1]")
    p, q = spec.p_src, spec.q_src
    n_it = spec.iterations
    main = (tail_q + tail_p) / (p - q)
    stall0 = (tail_q + q / p) ** n_it
    stall1 = (q / p * tail_p + (p - 2.0 * p * q + q * q) / (p - p * q)) ** n_it
    return DeltaBound(delta=main + max(stall0, stall1), tail_p=tail_p,
                      tail_q=tail_q, recommended_iterations=n_it)


def recommended_iterations(p_src, q_src, ell, tau):
    """Iteration count making the stall term comparable to exp(-ell * tau)."""
    denom = -math.log1p(-q_src * (p_src - q_src) / (2.0 * p_src))
    return math.ceil(ell * tau / denom)


def homogeneous_delta(pair, ell, p_src, q_src, tau_plus, tau_minus=None):
    """Large-deviation TV slack 3(e^(-ell tau+) + e^(-ell tau-))/(p - q) for
    identical targets, after checking its hypotheses.

    tau_minus is ignored when p_src = 1 (the lower window edge is -inf and
    that tail is empty).  Raises ValueError naming any failed hypothesis.
    """
    spec = KernelSpec(p_src=p_src, q_src=q_src, targets=(pair,) * ell,
                      iterations=1)
    c_hi, c_lo = spec.window_hi, spec.window_lo
    tau_floor = math.log(4.0 / (p_src - q_src)) / ell
    drop_minus = p_src == 1.0
    if drop_minus:
        tau_minus = None
    elif tau_minus is None:
        raise ValueError("tau_minus is required when p_src < 1")
    for name, tau in (("tau_plus", tau_plus), ("tau_minus", tau_minus)):
        if tau is not None and tau < tau_floor:
            raise ValueError(
                f"{name} = {tau} violates tau >= log(4/(p-q))/ell = {tau_floor}")
    if not drop_minus and not c_lo < -ell * pair.kl_qp:
        raise ValueError(
            "window sandwich violated: log((1-p)/(1-q)) < -ell*kl_qp fails")
    if not ell * pair.kl_pq < c_hi:
        raise ValueError(
            "window sandwich violated: ell*kl_pq < log(p/q) fails")
    ep = chernoff_exponent(pair, ExponentQuery(UNDER_P, c_hi / ell))
    if ep < tau_plus:
        raise ValueError(
            f"upper-tail exponent {ep} is below tau_plus = {tau_plus}")
    if not drop_minus:
        eq = chernoff_exponent(pair, ExponentQuery(UNDER_Q, c_lo / ell))
        if eq < tau_minus:
            raise ValueError(
                f"lower-tail exponent {eq} is below tau_minus = {tau_minus}")
    terms = math.exp(-ell * tau_plus)
    tail = terms
    if not drop_minus:
        terms += math.exp(-ell * tau_minus)
        tail = terms
    delta = 3.0 * terms / (p_src - q_src)
    tau_eff = tau_plus if drop_minus else min(tau_plus, tau_minus)
    return DeltaBound(delta=delta, tail_p=tail, tail_q=tail,
                      recommended_iterations=recommended_iterations(
                          p_src, q_src, ell, tau_eff))


def tail_probs(spec, method="auto", draws=10**6, rng=None):
    """Out-of-window probabilities of the summed LLR under the target planted
    and null product laws.

    'exact' enumerates Bernoulli targets or uses the normal law of the LLR sum
    for Gaussian targets; 'mc' estimates both tails from `draws` simulations
    with binomial standard errors; 'chernoff' returns large-deviation upper
    bounds (homogeneous targets only).
    """
    if method not in ("auto", "exact", "mc", "chernoff"):
        raise ValueError(f"unknown method {method!r}")
    c_lo, c_hi = spec.window_lo, spec.window_hi
    if method in ("auto", "exact"):
        if spec.space == "bit":
            _, qprobs, pprobs, lsums = _finite_atoms(spec)
            out = ~((c_lo <= lsums) & (lsums <= c_hi))
            return TailProbs(tail_p=float(pprobs[out].sum()),
                             tail_q=float(qprobs[out].sum()),
                             se_p=0.0, se_q=0.0, method="exact")
        s2 = sum(t.mu**2 for t in spec.targets)
        s = math.sqrt(s2)
        tails = []
        for mean in (0.5 * s2, -0.5 * s2):  # under P*, then under Q*
            inside = norm.cdf((c_hi - mean) / s) - norm.cdf((c_lo - mean) / s)
            tails.append(1.0 - inside)
        return TailProbs(tail_p=tails[0], tail_q=tails[1], se_p=0.0,
                         se_q=0.0, method="exact")
    if method == "mc":
        rng = np.random.default_rng(0) if rng is None else rng
        out = []
        for which in ("p", "q"):
            lsum = np.zeros(draws)
            for t in spec.targets:
                x = (t.sample_alt(draws, rng) if which == "p"
                     else t.sample_null(draws, rng))
                lsum += t.llr(x)
            hit = float(np.mean(~((c_lo <= lsum) & (lsum <= c_hi))))
            out.append((hit, math.sqrt(hit * (1.0 - hit) / draws)))
        return TailProbs(tail_p=out[0][0], tail_q=out[1][0],
                         se_p=out[0][1], se_q=out[1][1], method="mc")
    pair = spec.homogeneous_pair()
    ell = spec.ell
    bounds = {}
    for which, side in (("p", UNDER_P), ("q", UNDER_Q)):
        upper = chernoff_exponent(pair, ExponentQuery(side, c_hi / ell))
        total = math.exp(-ell * upper)
        if math.isfinite(c_lo):
            lower = chernoff_exponent(pair, ExponentQuery(side, c_lo / ell))
            total += math.exp(-ell * lower)
        bounds[which] = min(total, 1.0)
    return TailProbs(tail_p=bounds["p"], tail_q=bounds["q"], se_p=0.0,
                     se_q=0.0, method="chernoff")
