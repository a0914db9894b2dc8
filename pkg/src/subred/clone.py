"""Exact t-fold cloning of planted-subgraph instances.

Each edge indicator is passed through one of two channels R1 (edge present)
or R0 (edge absent) over {0,1}^t whose mixtures reproduce the product laws
Bern(P)^t and Bern(Q)^t exactly, so a single graph with planted density p
over background q becomes t independent graphs with densities P over Q.
The channel masses depend on a vector only through its Hamming weight, so
they are stored per weight (t + 1 values each) and sampled by inversion.
"""

import math
from dataclasses import dataclass

import numpy as np

from subred.sampler import GraphSample

__all__ = ["CloneChannel", "make_channel", "clone_graph"]

_FEAS_RTOL = 1e-9
_EXACT_TOL = 1e-12


@dataclass(frozen=True)
class CloneChannel:
    """Per-weight channel masses for t-fold edge cloning."""

    t: int
    p: float
    q: float
    big_p: float
    big_q: float
    r0_vec: np.ndarray  # per-vector masses by Hamming weight
    r1_vec: np.ndarray
    r0_weight: np.ndarray  # per-weight pmfs (vector mass times C(t, w))
    r1_weight: np.ndarray


def _comb(t, w):
    return math.comb(t, w)


def make_channel(t, p, q, big_p, big_q):
    """Build the cloning channel, checking feasibility and exactness.

    Feasibility needs (1-p)/(1-q) <= ((1-P)/(1-Q))^t and (P/Q)^t <= p/q;
    violations raise ValueError naming the failed inequality.  The returned
    masses satisfy the defining mixture identities to 1e-12 at every weight.
    """
    if t < 1:
        raise ValueError("t must be a positive integer")
    if not 0.0 < q < p <= 1.0:
        raise ValueError("need 0 < q < p <= 1")
    if not 0.0 < big_q < big_p <= 1.0:
        raise ValueError("need 0 < Q < P <= 1")
    lhs_low = (1.0 - p) / (1.0 - q)
    rhs_low = ((1.0 - big_p) / (1.0 - big_q)) ** t
    if lhs_low > rhs_low * (1.0 + _FEAS_RTOL) + 1e-300:
        raise ValueError(
            f"infeasible: (1-p)/(1-q) = {lhs_low} exceeds ((1-P)/(1-Q))^t = {rhs_low}")
    lhs_high = (big_p / big_q) ** t
    rhs_high = p / q
    if lhs_high > rhs_high * (1.0 + _FEAS_RTOL):
        raise ValueError(
            f"infeasible: (P/Q)^t = {lhs_high} exceeds p/q = {rhs_high}")

    ws = np.arange(t + 1)
    prod_p = big_p**ws * (1.0 - big_p) ** (t - ws)
    prod_q = big_q**ws * (1.0 - big_q) ** (t - ws)
    r0_vec = (p * prod_q - q * prod_p) / (p - q)
    r1_vec = ((1.0 - q) * prod_p - (1.0 - p) * prod_q) / (p - q)
    # exact-arithmetic zeros may round slightly negative at feasibility edges
    r0_vec = np.where(r0_vec < 0.0, np.where(r0_vec > -1e-15, 0.0, r0_vec), r0_vec)
    r1_vec = np.where(r1_vec < 0.0, np.where(r1_vec > -1e-15, 0.0, r1_vec), r1_vec)
    if r0_vec.min() < 0.0 or r1_vec.min() < 0.0:
        raise ValueError("channel masses are negative; inputs are infeasible")
    counts = np.array([_comb(t, int(w)) for w in ws], dtype=float)
    r0_weight = counts * r0_vec
    r1_weight = counts * r1_vec

    for name, pmf in (("R0", r0_weight), ("R1", r1_weight)):
        if abs(pmf.sum() - 1.0) > _EXACT_TOL:
            raise AssertionError(f"{name} masses sum to {pmf.sum()}, not 1")
    mix0 = (1.0 - p) * r0_vec + p * r1_vec
    mix1 = (1.0 - q) * r0_vec + q * r1_vec
    if np.max(np.abs(mix0 - prod_p)) > _EXACT_TOL:
        raise AssertionError("P-side mixing identity fails")
    if np.max(np.abs(mix1 - prod_q)) > _EXACT_TOL:
        raise AssertionError("Q-side mixing identity fails")

    return CloneChannel(t=t, p=p, q=q, big_p=big_p, big_q=big_q,
                        r0_vec=r0_vec, r1_vec=r1_vec,
                        r0_weight=r0_weight, r1_weight=r1_weight)


def clone_graph(graph, channel, rng):
    """Produce t graphs whose joint edge laws are exact independent clones."""
    t = channel.t
    m = graph.edges.size
    bits = graph.edges.astype(bool)
    cdf0 = np.cumsum(channel.r0_weight)
    cdf1 = np.cumsum(channel.r1_weight)
    u = rng.random(m)
    weights = np.where(bits,
                       np.searchsorted(cdf1, u * cdf1[-1], side="right"),
                       np.searchsorted(cdf0, u * cdf0[-1], side="right"))
    weights = np.minimum(weights, t)
    # given its weight, the pattern is uniform over weight-w vectors
    keys = rng.random((m, t))
    order = np.argsort(keys, axis=1, kind="stable")
    ranks = np.empty_like(order)
    rows = np.arange(m)[:, None]
    ranks[rows, order] = np.arange(t)[None, :]
    patterns = (ranks < weights[:, None]).astype(np.uint8)
    return [GraphSample(n=graph.n, edges=patterns[:, j].copy(),
                        planted=None if graph.planted is None
                        else graph.planted.copy())
            for j in range(t)]
