"""Discrete-time plants, quantized closed-loop simulation, and certificates.

Superstability of a closed loop Acl means ||Acl||_inf < 1; extended
superstability means some positive weight vector v makes the similarity
scaled norm max_i sum_j |Acl_ij| v_j / v_i less than one.  Certificates
store the weights v, the matrix S with K = S diag(1/v), an optional
envelope matrix M, and the certified gain lambda.
"""

from dataclasses import dataclass, field

import numpy as np

from .quantizer import QuantizerSpec, log_quantize_vector

__all__ = [
    "LinearSystem",
    "StabCertificate",
    "SynthResult",
    "sign_vectors",
    "recover_controller",
    "scaled_infty_norm",
    "closed_loop_vertex_gain",
    "simulate_quantized",
    "check_cert",
    "decay_check",
]

DIVERGENCE_LIMIT = 1e12
DECAY_SLACK = 1e-9


@dataclass(frozen=True)
class LinearSystem:
    """Plant x+ = A x + B u with A (n x n) and B (n x m)."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if B.shape[0] != A.shape[0]:
            raise ValueError("B row count must match A")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise ValueError("plant matrices must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def to_json_dict(self):
        return {"A": self.A.tolist(), "B": self.B.tolist()}

    @classmethod
    def from_json_dict(cls, d):
        return cls(A=np.asarray(d["A"], dtype=float),
                   B=np.asarray(d["B"], dtype=float))


@dataclass(frozen=True)
class StabCertificate:
    """Stabilization certificate (v, S, lambda, eta) with K = S diag(1/v).

    v is elementwise positive (all ones in plain superstability mode), S is
    m x n, and lambda is the certified worst-case scaled closed-loop gain.
    M, when present, is a nonnegative envelope matrix with
    |A Y + B diag(beta) S| <= M at every sector vertex beta and row sums
    sum_j M_ij <= lambda * v_i.
    """

    v: np.ndarray
    S: np.ndarray
    lam: float
    eta: float
    mode: str = "ess"
    M: np.ndarray = None
    K: np.ndarray = field(default=None)

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        S = np.atleast_2d(np.asarray(self.S, dtype=float))
        if np.any(v <= 0):
            raise ValueError("weights v must be positive")
        if self.mode not in ("ss", "ess"):
            raise ValueError("mode must be 'ss' or 'ess'")
        if self.mode == "ss" and not np.all(v == 1.0):
            raise ValueError("superstability mode requires v = 1 exactly")
        if S.shape[1] != v.size:
            raise ValueError("S must be m x n with n = len(v)")
        K = S / v[None, :]
        if self.K is not None:
            given = np.atleast_2d(np.asarray(self.K, dtype=float))
            if given.shape != K.shape or not np.allclose(given, K, atol=1e-9):
                raise ValueError("K does not equal S diag(1/v)")
        M = self.M
        if M is not None:
            M = np.atleast_2d(np.asarray(M, dtype=float))
            if M.shape != (v.size, v.size):
                raise ValueError("M must be n x n")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "eta", float(self.eta))

    def to_json_dict(self):
        d = {
            "v": self.v.tolist(),
            "S": self.S.tolist(),
            "K": self.K.tolist(),
            "lambda": self.lam,
            "eta": self.eta,
            "mode": self.mode,
            "status": "feasible",
        }
        if self.M is not None:
            d["M"] = self.M.tolist()
        return d

    @classmethod
    def from_json_dict(cls, d):
        return cls(v=np.asarray(d["v"], dtype=float),
                   S=np.asarray(d["S"], dtype=float),
                   lam=float(d["lambda"]),
                   eta=float(d["eta"]),
                   mode=d.get("mode", "ess"),
                   M=None if d.get("M") is None else np.asarray(d["M"], float))


@dataclass
class SynthResult:
    """Outcome of a synthesis call: a status string plus optional payload.

    status is 'feasible', 'infeasible', or 'numerical-failure'; certificate
    is present exactly when feasible.  extras carries method-specific audit
    data (Farkas multiplier blocks, affine envelope parameters).
    """

    status: str
    certificate: StabCertificate = None
    extras: dict = field(default_factory=dict)

    @property
    def feasible(self):
        return self.status == "feasible"


def sign_vectors(n):
    """All sign patterns alpha in {-1, +1}^n, low vertex first.

    Binary counting order: the last coordinate toggles fastest.
    """
    out = np.empty((2 ** n, n))
    for idx in range(2 ** n):
        for j in range(n):
            bit = (idx >> (n - 1 - j)) & 1
            out[idx, j] = 1.0 if bit else -1.0
    return out


def recover_controller(S, v):
    """Controller recovery K = S diag(1/v), i.e. K_kj = S_kj / v_j."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if np.any(v <= 0):
        raise ValueError("weights must be positive")
    return S / v[None, :]


def scaled_infty_norm(Acl, v):
    """Induced infinity norm of diag(1/v) Acl diag(v).

    Equals max_i sum_j |Acl_ij| v_j / v_i.  The weighted sup norm
    ||x ./ v||_inf is a Lyapunov function of x+ = Acl x exactly when this
    value is below one.
    """
    Acl = np.atleast_2d(np.asarray(Acl, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if np.any(v <= 0):
        raise ValueError("weights must be positive")
    return float(np.max((np.abs(Acl) @ v) / v))


def closed_loop_vertex_gain(sys, K, v, spec):
    """Worst scaled norm of A + B diag(beta) K over all sector vertices beta.

    A value below one certifies extended superstability of every closed loop
    in the sector family, hence of the quantized loop itself.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape != (sys.m, sys.n):
        raise ValueError("K must be m x n")
    worst = 0.0
    for beta in spec.beta_vertices():
        Acl = sys.A + sys.B @ (beta[:, None] * K)
        worst = max(worst, scaled_infty_norm(Acl, v))
    return worst


def simulate_quantized(sys, K, spec, x0, T):
    """Simulate x+ = A x + B g(K x) with the elementwise log quantizer g.

    Returns (trajectory, status) where trajectory has T+1 rows (fewer when
    the state exceeds the divergence guard) and status is 'ok' or
    'diverged'.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x.shape != (sys.n,):
        raise ValueError("x0 has wrong dimension")
    traj = [x.copy()]
    for _ in range(int(T)):
        u = log_quantize_vector(K @ x, spec)
        x = sys.A @ x + sys.B @ u
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_LIMIT:
            return np.array(traj), "diverged"
        traj.append(x.copy())
    return np.array(traj), "ok"


def check_cert(sys, cert, spec):
    """Envelope check of a certificate against a known plant.

    Verifies |A Y + B diag(beta) S| <= M elementwise at every sector vertex
    and sum_j M_ij <= v_i - eta rowwise.  When the certificate carries no M,
    the minimal envelope max_beta |A Y + B diag(beta) S| is used, which is a
    conservative test (row sums of entrywise maxima can exceed the true
    worst row sum).  Returns (ok, margin) with margin the least row-sum
    slack; envelope entries exceeding M count against the row sums.
    """
    v, S = cert.v, cert.S
    Y = np.diag(v)
    envelopes = []
    for beta in spec.beta_vertices():
        envelopes.append(np.abs(sys.A @ Y + sys.B @ (beta[:, None] * S)))
    envelope = np.max(envelopes, axis=0)
    dominated = cert.M is None or bool(
        np.all(envelope <= cert.M + DECAY_SLACK))
    eff = envelope if cert.M is None else np.maximum(cert.M, envelope)
    margin = float(np.min(v - cert.eta - eff.sum(axis=1)))
    return dominated and margin >= -DECAY_SLACK, margin


def decay_check(trajectory, v, lam):
    """True when ||x_t ./ v||_inf <= lam**t ||x_0 ./ v||_inf at every step."""
    if lam < 0:
        raise ValueError("decay rate must be nonnegative")
    traj = np.atleast_2d(np.asarray(trajectory, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    w = np.max(np.abs(traj) / v[None, :], axis=1)
    bound = w[0] * lam ** np.arange(len(w))
    return bool(np.all(w <= bound + DECAY_SLACK))
