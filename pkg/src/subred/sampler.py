"""Seeded generators for the null and planted ensembles, plus the dump format.

Graphs are simple and undirected, stored as the upper-triangular edge
indicator vector; matrices are dense d x d arrays over the pair's sample
space.  All sampling is driven by caller-provided numpy Generators, with
counter-style stream derivation from (seed, indices) for reproducible
parallel trials.
"""

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "GraphSample",
    "MatrixSample",
    "derived_rng",
    "uniform_subset",
    "sample_er",
    "sample_pds",
    "sample_submatrix",
    "sample_planted_vector",
    "dump_sample",
    "load_sample",
    "dumps_sample",
    "loads_sample",
]


def derived_rng(seed, *indices):
    """Independent Generator for (seed, *indices); identical inputs give an
    identical stream regardless of how many other streams were derived."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((int(seed),) + tuple(int(i) for i in indices))))


def uniform_subset(rng, n, k):
    """Uniformly random k-subset of range(n) via partial Fisher-Yates,
    returned sorted."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    pool = np.arange(n)
    for i in range(k):
        j = i + int(rng.integers(n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:k])


def _tri_index(n):
    return np.triu_indices(n, k=1)


@dataclass
class GraphSample:
    """Undirected simple graph on n vertices with optional planted set."""

    n: int
    edges: np.ndarray  # upper-triangular indicators, length n(n-1)/2
    planted: Optional[np.ndarray] = None

    def __post_init__(self):
        m = self.n * (self.n - 1) // 2
        self.edges = np.asarray(self.edges, dtype=np.uint8).ravel()
        if self.edges.shape != (m,):
            raise ValueError(f"expected {m} edge indicators, got {self.edges.shape}")
        if self.planted is not None:
            self.planted = np.unique(np.asarray(self.planted, dtype=np.int64))
            if self.planted.size and not (
                    0 <= self.planted[0] and self.planted[-1] < self.n):
                raise ValueError("planted vertices out of range")

    def adjacency(self):
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        iu, ju = _tri_index(self.n)
        adj[iu, ju] = self.edges
        adj[ju, iu] = self.edges
        return adj

    @classmethod
    def from_adjacency(cls, adj, planted=None):
        adj = np.asarray(adj)
        n = adj.shape[0]
        if adj.shape != (n, n) or np.any(adj != adj.T) or np.any(np.diag(adj)):
            raise ValueError("adjacency must be symmetric with zero diagonal")
        iu, ju = _tri_index(n)
        return cls(n=n, edges=adj[iu, ju].astype(np.uint8), planted=planted)


@dataclass
class MatrixSample:
    """Dense d x d observation matrix with optional planted index set."""

    data: np.ndarray
    space: str  # 'bit' or 'real'
    planted: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.space not in ("bit", "real"):
            raise ValueError("space must be 'bit' or 'real'")
        dtype = np.uint8 if self.space == "bit" else np.float64
        self.data = np.ascontiguousarray(self.data, dtype=dtype)
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise ValueError("data must be square")
        if self.space == "bit" and np.any(self.data > 1):
            raise ValueError("bit matrix entries must be 0/1")
        if self.planted is not None:
            self.planted = np.unique(np.asarray(self.planted, dtype=np.int64))
            if self.planted.size and not (
                    0 <= self.planted[0] and self.planted[-1] < self.d):
                raise ValueError("planted indices out of range")

    @property
    def d(self):
        return self.data.shape[0]


def sample_er(n, q, rng):
    """Erdos-Renyi graph: every edge present independently with probability q."""
    if n < 1 or not 0.0 <= q <= 1.0:
        raise ValueError("need n >= 1 and q in [0, 1]")
    m = n * (n - 1) // 2
    edges = (rng.random(m) < q).astype(np.uint8)
    return GraphSample(n=n, edges=edges)


def sample_pds(n, k, p, q, rng):
    """Planted dense subgraph: a uniform k-subset is rewired to density p over
    an Erdos-Renyi(q) background.  p = 1 plants a clique."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if not 0.0 <= q < p <= 1.0:
        raise ValueError("need 0 <= q < p <= 1")
    g = sample_er(n, q, rng)
    planted = uniform_subset(rng, n, k)
    if k >= 2:
        iu, ju = _tri_index(n)
        inside = np.isin(iu, planted) & np.isin(ju, planted)
        g.edges[inside] = (rng.random(int(inside.sum())) < p).astype(np.uint8)
    g.planted = planted
    return g


def _grid_param_arrays(grid):
    """Per-entry (llr-one, llr-zero, null-prob) or mu arrays for a PairGrid."""
    d = grid.d
    if grid.space == "bit":
        if grid.homogeneous:
            p = grid.pairs
            return (np.full((d, d), p.p_alt), np.full((d, d), p.p_null))
        palt = np.array([[pp.p_alt for pp in row] for row in grid.pairs])
        pnull = np.array([[pp.p_null for pp in row] for row in grid.pairs])
        return palt, pnull
    if grid.homogeneous:
        return (np.full((d, d), grid.pairs.mu),)
    return (np.array([[pp.mu for pp in row] for row in grid.pairs]),)


def sample_submatrix(d, k, grid, rng, symmetric=True):
    """Null matrix when k is None, else the planted-submatrix ensemble.

    symmetric=True uses one uniform k-subset for rows and columns; False draws
    independent row and column supports.
    """
    if grid.d != d:
        raise ValueError("grid dimension must match d")
    if k is not None and not 1 <= k <= d:
        raise ValueError("need 1 <= k <= d")
    if grid.space == "bit":
        palt, pnull = _grid_param_arrays(grid)
        u = rng.random((d, d))
        data = (u < pnull).astype(np.uint8)
        planted = None
        if k is not None:
            rows = uniform_subset(rng, d, k)
            cols = rows if symmetric else uniform_subset(rng, d, k)
            block = np.ix_(rows, cols)
            data[block] = (u[block] < palt[block]).astype(np.uint8)
            planted = rows
        return MatrixSample(data=data, space="bit", planted=planted)
    (mu,) = _grid_param_arrays(grid)
    data = rng.standard_normal((d, d))
    planted = None
    if k is not None:
        rows = uniform_subset(rng, d, k)
        cols = rows if symmetric else uniform_subset(rng, d, k)
        block = np.ix_(rows, cols)
        data[block] += mu[block]
        planted = rows
    return MatrixSample(data=data, space="real", planted=planted)


def sample_planted_vector(n, pair, planted, rng):
    """Length-n vector with pair.P entries on the planted set and pair.Q
    elsewhere."""
    planted = np.asarray(planted, dtype=np.int64)
    if planted.size and not (planted.min() >= 0 and planted.max() < n):
        raise ValueError("planted indices out of range")
    out = pair.sample_null(n, rng)
    if planted.size:
        out[planted] = pair.sample_alt(planted.size, rng)
    return out


# ---------------------------------------------------------------------------
# dump format: one ASCII header line, then packed row-major payload


_MAGIC = "SUBRED v1"


def dumps_sample(obj):
    if isinstance(obj, GraphSample):
        kind, d, space = "graph", obj.n, "bit"
        flat = obj.adjacency().ravel()
    elif isinstance(obj, MatrixSample):
        kind, d, space = "matrix", obj.d, obj.space
        flat = obj.data.ravel()
    else:
        raise TypeError("expected GraphSample or MatrixSample")
    header = f"{_MAGIC} kind={kind} d={d} space={space}\n".encode("ascii")
    if space == "bit":
        payload = np.packbits(flat.astype(np.uint8)).tobytes()
    else:
        payload = flat.astype("<f8").tobytes()
    return header + payload


def dump_sample(obj, path):
    with open(path, "wb") as fh:
        fh.write(dumps_sample(obj))


def loads_sample(blob):
    stream = io.BytesIO(blob)
    header = stream.readline().decode("ascii").strip()
    fields = header.split()
    if fields[:2] != _MAGIC.split():
        raise ValueError("not a SUBRED v1 dump")
    kv = dict(f.split("=", 1) for f in fields[2:])
    kind, d, space = kv["kind"], int(kv["d"]), kv["space"]
    payload = stream.read()
    if space == "bit":
        nbits = d * d
        flat = np.unpackbits(np.frombuffer(payload, dtype=np.uint8),
                             count=nbits)
        data = flat.reshape(d, d)
    elif space == "real":
        data = np.frombuffer(payload, dtype="<f8", count=d * d).reshape(d, d)
    else:
        raise ValueError(f"unknown space {space!r}")
    if kind == "graph":
        return GraphSample.from_adjacency(data)
    if kind == "matrix":
        return MatrixSample(data=data.copy(), space=space)
    raise ValueError(f"unknown kind {kind!r}")


def load_sample(path):
    with open(path, "rb") as fh:
        return loads_sample(fh.read())


def binomial_pmf(n, p):
    """Binomial pmf over 0..n via log-gamma; exact at p in {0, 1}."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    ks = np.arange(n + 1)
    if p == 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if p == 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    logc = (math.lgamma(n + 1)
            - np.array([math.lgamma(k + 1) + math.lgamma(n - k + 1) for k in ks]))
    return np.exp(logc + ks * math.log(p) + (n - ks) * math.log1p(-p))
