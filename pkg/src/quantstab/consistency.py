"""Interval-quantized transition data and the plant-consistency polytope.

A data sample records a state x_hat, an applied input u_hat, and interval
bounds [p, q] on the resulting next state (entries may be infinite when the
transition landed in an unbounded partition bin).  The set of plants (A, B)
consistent with all samples,

    P = {(A, B) : p_s <= A x_hat_s + B u_hat_s <= q_s  for all s},

is a polytope in z = [vec(A); vec(B)] via the identity
vec(P X Q) = (Q^T kron P) vec(X); vectorization is column-major throughout.
"""

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .lp_core import Polytope, max_linear_over_polytope, DEFAULT_BACKEND
from .quantizer import interval_quantize

logger = logging.getLogger(__name__)

PRUNE_TOL = 1e-8
CONTAIN_TOL = 1e-9

__all__ = [
    "DataSample",
    "Dataset",
    "ExcitationConfig",
    "generate_dataset",
    "widen_noise",
    "build_polytope",
    "plant_vec",
    "contains_plant",
    "prune_redundant",
]


@dataclass(frozen=True)
class DataSample:
    """One observed transition: bounds p <= A x_hat + B u_hat <= q."""

    x_hat: np.ndarray
    u_hat: np.ndarray
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x_hat, dtype=float))
        u = np.atleast_1d(np.asarray(self.u_hat, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if p.shape != x.shape or q.shape != x.shape:
            raise ValueError("p, q must have state dimension")
        both = np.isfinite(p) & np.isfinite(q)
        if np.any(p[both] > q[both]):
            raise ValueError("lower bounds exceed upper bounds")
        for name, arr in (("x_hat", x), ("u_hat", u)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "x_hat", x)
        object.__setattr__(self, "u_hat", u)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class Dataset:
    """Collection of transition samples plus a declared noise radius.

    epsilon is the L-infinity bound on process noise during collection;
    build_polytope widens every finite interval bound by epsilon so that the
    generating plant is always a member of the consistency set.
    """

    samples: tuple
    epsilon: float = 0.0
    meta: dict = field(default=None, compare=False)

    def __post_init__(self):
        samples = tuple(self.samples)
        if self.epsilon < 0:
            raise ValueError("noise radius must be nonnegative")
        if samples:
            n, m = samples[0].x_hat.size, samples[0].u_hat.size
            for s in samples:
                if s.x_hat.size != n or s.u_hat.size != m:
                    raise ValueError("samples must share dimensions")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def __len__(self):
        return len(self.samples)

    @property
    def n(self):
        return self.samples[0].x_hat.size

    @property
    def m(self):
        return self.samples[0].u_hat.size

    def truncate(self, T):
        """Dataset with only the first T samples (shared prefix)."""
        return Dataset(self.samples[:T], self.epsilon, self.meta)

    def to_json_dict(self):
        def clean(vec):
            return [None if not np.isfinite(x) else float(x) for x in vec]
        d = {
            "epsilon": self.epsilon,
            "samples": [{"x": s.x_hat.tolist(), "u": s.u_hat.tolist(),
                         "p": clean(s.p), "q": clean(s.q)}
                        for s in self.samples],
        }
        if self.meta is not None:
            d["meta"] = self.meta
        return d

    @classmethod
    def from_json_dict(cls, d):
        def unclean(vals, sign):
            return np.array([sign * np.inf if v is None else float(v)
                             for v in vals])
        samples = [DataSample(x_hat=np.asarray(s["x"], dtype=float),
                              u_hat=np.asarray(s["u"], dtype=float),
                              p=unclean(s["p"], -1.0),
                              q=unclean(s["q"], +1.0))
                   for s in d["samples"]]
        return cls(samples, float(d.get("epsilon", 0.0)), d.get("meta"))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=1)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


@dataclass(frozen=True)
class ExcitationConfig:
    """Excitation for synthetic data: i.i.d. uniform states and inputs."""

    x_halfwidth: float = 2.0
    u_halfwidth: float = 2.0

    def to_json_dict(self):
        return {"x_halfwidth": self.x_halfwidth,
                "u_halfwidth": self.u_halfwidth}


def generate_dataset(sys, partition, T, seed, excitation=None, noise=0.0):
    """Draw T random transitions of sys and bin the next states.

    States and inputs are i.i.d. uniform on [-halfwidth, halfwidth] from a
    seeded generator, so the same seed reproduces the same dataset.  With
    noise > 0 a uniform disturbance w, |w|_inf <= noise, is added to each
    transition and recorded as the dataset's epsilon.
    """
    if T < 0:
        raise ValueError("sample count must be nonnegative")
    exc = excitation or ExcitationConfig()
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(int(T)):
        x = rng.uniform(-exc.x_halfwidth, exc.x_halfwidth, sys.n)
        u = rng.uniform(-exc.u_halfwidth, exc.u_halfwidth, sys.m)
        xplus = sys.A @ x + sys.B @ u
        if noise > 0:
            xplus = xplus + rng.uniform(-noise, noise, sys.n)
        bounds = [interval_quantize(val, partition) for val in xplus]
        p = np.array([b[0] for b in bounds])
        q = np.array([b[1] for b in bounds])
        samples.append(DataSample(x, u, p, q))
    meta = {"seed": int(seed), "T": int(T), "noise": float(noise),
            "excitation": exc.to_json_dict(),
            "partition": partition.to_json_dict()}
    return Dataset(samples, epsilon=float(noise), meta=meta)


def widen_noise(dataset, epsilon):
    """Shift every finite interval bound outward by epsilon."""
    if epsilon < 0:
        raise ValueError("widening radius must be nonnegative")
    widened = []
    for s in dataset.samples:
        p = np.where(np.isfinite(s.p), s.p - epsilon, s.p)
        q = np.where(np.isfinite(s.q), s.q + epsilon, s.q)
        widened.append(DataSample(s.x_hat, s.u_hat, p, q))
    return Dataset(widened, dataset.epsilon, dataset.meta)


def build_polytope(dataset):
    """Consistency polytope over z = [vec(A); vec(B)] in R^{n(n+m)}.

    Each sample contributes the rows

        +(x_hat^T kron I_n | u_hat^T kron I_n) z <= q + epsilon
        -(x_hat^T kron I_n | u_hat^T kron I_n) z <= -(p - epsilon)

    with rows carrying an infinite bound omitted, so the face count L is at
    most 2 n N_s.
    """
    if len(dataset) == 0:
        raise ValueError("cannot build a polytope from an empty dataset")
    n, m = dataset.n, dataset.m
    eps = dataset.epsilon
    eye = np.eye(n)
    rows, rhs = [], []
    for s in dataset.samples:
        block = np.hstack([np.kron(s.x_hat.reshape(1, -1), eye),
                           np.kron(s.u_hat.reshape(1, -1), eye)])
        for i in range(n):
            if np.isfinite(s.q[i]):
                rows.append(block[i])
                rhs.append(s.q[i] + eps)
            if np.isfinite(s.p[i]):
                rows.append(-block[i])
                rhs.append(-(s.p[i] - eps))
    d = n * (n + m)
    if not rows:
        return Polytope(G=np.zeros((0, d)), h=np.zeros(0))
    return Polytope(G=np.array(rows), h=np.array(rhs))


def plant_vec(A, B):
    """Column-major stacked vector z = [vec(A); vec(B)]."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    return np.concatenate([A.flatten(order="F"), B.flatten(order="F")])


def contains_plant(poly, A, B, tol=CONTAIN_TOL):
    """Membership test of a plant in the consistency polytope."""
    z = plant_vec(A, B)
    if poly.num_faces == 0:
        return True
    if z.size != poly.dim:
        raise ValueError("plant dimensions do not match the polytope")
    return bool(np.all(poly.G @ z <= poly.h + tol))


def prune_redundant(poly, tol=PRUNE_TOL, backend=None):
    """Drop rows implied by the others, keeping the same feasible set.

    Sequential support-function test: row r is redundant when maximizing
    G_r x over the remaining retained rows cannot exceed h_r + tol.  A cap
    G_r x <= h_r + 1 keeps each support LP bounded without changing the
    verdict.  Rows are processed in order and the retained set updates
    incrementally, so the result is deterministic.
    """
    backend = backend or DEFAULT_BACKEND
    L = poly.num_faces
    if L == 0:
        return poly
    # Feasibility check: pruning an empty polytope is a caller error.
    status, _, _ = backend.solve(np.zeros(poly.dim), poly.G, poly.h,
                                 None, None,
                                 np.column_stack([np.full(poly.dim, -np.inf),
                                                  np.full(poly.dim, np.inf)]))
    if status == "infeasible":
        raise ValueError("cannot prune an infeasible polytope")
    retained = list(range(L))
    for r in range(L):
        others = [i for i in retained if i != r]
        G_test = np.vstack([poly.G[others], poly.G[r][None, :]])
        h_test = np.concatenate([poly.h[others], [poly.h[r] + 1.0]])
        support = max_linear_over_polytope(poly.G[r],
                                           Polytope(G_test, h_test), backend)
        if support <= poly.h[r] + tol:
            retained.remove(r)
            logger.debug("pruned face %d (support %.3e <= %.3e)",
                         r, support, poly.h[r])
    return Polytope(G=poly.G[retained], h=poly.h[retained])
