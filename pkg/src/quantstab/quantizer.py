"""Logarithmic input quantization and interval (bin) quantization of data.

A logarithmic quantizer with density rho in (0, 1] maps a scalar z to the
nearest level sign(z) * rho**i under multiplicative interval matching.  The
relative quantization error is bounded by the sector constant
delta = (1 - rho) / (1 + rho), so the quantized loop is covered by a family
of linear loops A + B (I + diag(Delta)) K with |Delta_j| <= delta_j.

Interval quantization maps a real measurement to the partition bin that
contains it, giving lower/upper bounds (possibly infinite) instead of a
point value.
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuantizerSpec",
    "Partition",
    "delta_from_rho",
    "log_quantize",
    "log_quantize_vector",
    "interval_quantize",
]


def delta_from_rho(rho):
    """Sector bound delta = (1 - rho) / (1 + rho) for a density rho in (0, 1].

    Strictly decreasing in rho; rho = 1 gives delta = 0 (identity quantizer)
    and rho -> 0 gives delta -> 1.
    """
    rho = float(rho)
    if not (0.0 < rho <= 1.0):
        raise ValueError(f"density rho must lie in (0, 1], got {rho}")
    return (1.0 - rho) / (1.0 + rho)


@dataclass(frozen=True)
class QuantizerSpec:
    """Per-channel quantizer densities and their derived sector bounds.

    Attributes
    ----------
    rho : ndarray, shape (m,)
        Density of each input channel, each in (0, 1].
    delta : ndarray, shape (m,)
        Sector bound of each channel, delta_j = (1 - rho_j) / (1 + rho_j).
    """

    rho: np.ndarray
    delta: np.ndarray = field(default=None)

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        if rho.ndim != 1 or rho.size == 0:
            raise ValueError("rho must be a nonempty vector")
        if np.any(rho <= 0.0) or np.any(rho > 1.0):
            raise ValueError("all densities must lie in (0, 1]")
        delta = (1.0 - rho) / (1.0 + rho)
        if self.delta is not None:
            given = np.atleast_1d(np.asarray(self.delta, dtype=float))
            if given.shape != rho.shape or not np.allclose(given, delta, atol=1e-12):
                raise ValueError("delta does not match (1-rho)/(1+rho)")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "delta", delta)

    @property
    def m(self):
        return self.rho.size

    @classmethod
    def uniform(cls, rho, m):
        """Same density on all m channels."""
        return cls(rho=np.full(m, float(rho)))

    def beta_vertices(self):
        """All 2^m vertices of prod_j {1 - delta_j, 1 + delta_j}.

        Returned as an array of shape (2**m, m) in binary counting order
        (last channel toggles fastest, low vertex first).
        """
        m = self.m
        out = np.empty((2 ** m, m))
        for idx in range(2 ** m):
            for j in range(m):
                bit = (idx >> (m - 1 - j)) & 1
                out[idx, j] = 1.0 + self.delta[j] if bit else 1.0 - self.delta[j]
        return out


def log_quantize(z, rho):
    """Quantize a scalar to the logarithmic level grid {+-rho**i : i integer}.

    The level rho**i covers the interval [rho**i/(1+delta), rho**i/(1-delta)];
    adjacent intervals share endpoints, and a value on a shared boundary is
    assigned the larger level (smaller i).  Zero maps to zero and the map is
    odd: g(-z) = -g(z).

    Parameters
    ----------
    z : float
        Value to quantize.  Must be finite.
    rho : float
        Quantizer density in (0, 1].  rho = 1 passes z through unchanged.
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValueError("cannot quantize a non-finite value")
    rho = float(rho)
    delta = delta_from_rho(rho)
    if rho == 1.0:
        return z
    if z == 0.0:
        return 0.0
    if z < 0.0:
        return -log_quantize(-z, rho)
    # Candidate exponent from the logarithm, then correct by +-1 so that
    # rho**i <= z * (1 + delta) holds with the smallest such i. This keeps
    # the boundary rule deterministic under floating-point log drift.
    i = round(math.log(z) / math.log(rho))
    hi = z * (1.0 + delta)
    while rho ** i > hi:
        i += 1
    while i > -1074 and rho ** (i - 1) <= hi:
        i -= 1
    return rho ** i


def log_quantize_vector(u, spec):
    """Elementwise logarithmic quantization of an input vector.

    Channel j of the result is log_quantize(u_j, spec.rho[j]).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (spec.m,):
        raise ValueError(f"input has {u.size} channels, spec has {spec.m}")
    return np.array([log_quantize(u[j], spec.rho[j]) for j in range(spec.m)])


@dataclass(frozen=True)
class Partition:
    """Interval partition of the real line given by finite bin edges.

    Edges e_1 < e_2 < ... < e_k define the bins
    (-inf, e_1], [e_1, e_2], ..., [e_k, +inf).
    A value equal to an interior edge is assigned the bin where it is the
    lower endpoint (right-closed lookup).
    """

    edges: np.ndarray

    def __post_init__(self):
        edges = np.atleast_1d(np.asarray(self.edges, dtype=float))
        if edges.size == 0:
            raise ValueError("partition needs at least one edge")
        if not np.all(np.isfinite(edges)):
            raise ValueError("partition edges must be finite")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("partition edges must be strictly increasing")
        object.__setattr__(self, "edges", edges)

    @property
    def num_bins(self):
        return self.edges.size + 1

    @classmethod
    def regular(cls, lo, hi, step):
        """Evenly spaced edges from lo to hi inclusive."""
        n = int(round((hi - lo) / step))
        return cls(edges=lo + step * np.arange(n + 1))

    def to_json_dict(self):
        return {"edges": self.edges.tolist()}

    @classmethod
    def from_json_dict(cls, d):
        return cls(edges=np.asarray(d["edges"], dtype=float))


def interval_quantize(value, partition):
    """Bin lookup: return the (lower, upper) bounds of the bin holding value.

    Unbounded end bins return -inf or +inf for the missing side, so every
    finite value maps to exactly one bin.
    """
    value = float(value)
    if not math.isfinite(value):
        raise ValueError("cannot bin a non-finite value")
    edges = partition.edges
    # side='right' puts an edge value into the bin where it is the lower
    # endpoint, e.g. value 3.0 with edges ...,3,4,... gives [3, 4].
    k = int(np.searchsorted(edges, value, side="right"))
    lower = -np.inf if k == 0 else float(edges[k - 1])
    upper = np.inf if k == edges.size else float(edges[k])
    return lower, upper
