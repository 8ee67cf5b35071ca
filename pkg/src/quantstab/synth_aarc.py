"""Affinely-adjustable robust synthesis: polynomial in n, exponential in m.

The exact robust condition asks, for every plant (A, B) in the consistency
polytope, for an envelope matrix M(A, B) with

    |A diag(v) + B diag(beta) S| <= M(A, B)  at every sector vertex beta,
    sum_j M(A, B)_ij <= v_i - eta.

Restricting M to an affine function of the plant,

    vec(M(A, B)) = m0 + ma vec(A) + mb vec(B),

turns both requirements into polytope containments over z = [vec(A); vec(B)]
that are affine in the search variables (v, S, m0, ma, mb):

  * a row-sum containment with G_M = (1^T kron I_n)[ma, mb] and
    h_M = v - eta 1 - (1^T kron I_n) m0, certified by Z_M >= 0 (n x L);
  * per sector vertex, a two-sided envelope containment with
    G_beta rows [-ma -/+ (diag(v) kron I_n), -mb -/+ ((diag(beta) S)^T kron I_n)]
    and h_beta = [m0; m0], certified by Z_beta >= 0 (2n^2 x L).

Only the 2^m vertex loop remains exponential.  The affine restriction is a
genuine restriction: feasibility here implies feasibility of the
sign-enumerated program, never the reverse.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .lp_core import AffExpr, LPModel, add_farkas_block, solve
from .nominal import DEFAULT_ETA, LAMBDA_BISECT_TOL
from .sysmodel import StabCertificate, SynthResult
from .synth_sign import _infer_state_dim, _require_nonempty

__all__ = [
    "AffineMParam",
    "eval_affine_M",
    "synthesize_aarc",
    "count_constraints_aarc",
]

VERTEX_GUARD = 20


@dataclass(frozen=True)
class AffineMParam:
    """Coefficients of the affine envelope vec(M) = m0 + ma vec(A) + mb vec(B).

    Vectorization is column-major throughout: entry (i, j) sits at index
    j*n + i, and column c of ma holds the sensitivity of vec(M) to the c-th
    entry of vec(A) (likewise mb for vec(B)).
    """

    m0: np.ndarray
    ma: np.ndarray
    mb: np.ndarray

    def __post_init__(self):
        m0 = np.atleast_1d(np.asarray(self.m0, dtype=float))
        ma = np.atleast_2d(np.asarray(self.ma, dtype=float))
        mb = np.asarray(self.mb, dtype=float).reshape(m0.size, -1)
        n = int(round(np.sqrt(m0.size)))
        if n * n != m0.size:
            raise ValueError("m0 must have n^2 entries")
        if ma.shape != (n * n, n * n):
            raise ValueError("ma must be n^2 x n^2")
        if mb.shape[1] % n:
            raise ValueError("mb must be n^2 x (n*m)")
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "ma", ma)
        object.__setattr__(self, "mb", mb)

    @property
    def n(self):
        return int(round(np.sqrt(self.m0.size)))

    @property
    def m(self):
        return self.mb.shape[1] // self.n

    def to_json_dict(self):
        return {"m0": self.m0.tolist(), "ma": self.ma.tolist(),
                "mb": self.mb.tolist()}

    @classmethod
    def from_json_dict(cls, d):
        return cls(m0=np.asarray(d["m0"], dtype=float),
                   ma=np.asarray(d["ma"], dtype=float),
                   mb=np.asarray(d["mb"], dtype=float))


def eval_affine_M(param, A, B):
    """Envelope matrix at a concrete plant, un-vectorized column-major."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(param.n, param.m)
    n = param.n
    if A.shape != (n, n):
        raise ValueError("A must be n x n")
    vecM = param.m0 + param.ma @ A.flatten(order="F") \
        + param.mb @ B.flatten(order="F")
    return vecM.reshape(n, n, order="F")


def _rowsum_selector(n):
    """(1^T kron I_n) as sparse n x n^2: picks row i of a vec'd matrix."""
    cols = np.arange(n * n)
    return sp.csr_matrix((np.ones(n * n), (cols % n, cols)), shape=(n, n * n))


def _ma_rowsum_terms(n, m, d):
    """Coefficients of G_M = (1^T kron I_n)[ma, mb], flattened row-major."""
    r4 = np.repeat(np.arange(n * n), n * n)
    c4 = np.tile(np.arange(n * n), n * n)
    T_ma = sp.csr_matrix((np.ones(r4.size),
                          ((r4 % n) * d + c4, r4 * n * n + c4)),
                         shape=(n * d, n ** 4))
    terms = {"ma": T_ma}
    if m > 0:
        rb = np.repeat(np.arange(n * n), n * m)
        cb = np.tile(np.arange(n * m), n * n)
        T_mb = sp.csr_matrix((np.ones(rb.size),
                              ((rb % n) * d + n * n + cb, rb * n * m + cb)),
                             shape=(n * d, n * n * n * m))
        terms["mb"] = T_mb
    return terms


def _beta_block_exprs(model, v_expr, S_expr, beta, n, m, d):
    """(G_beta, h_beta) expressions for one sector vertex, rows row-major.

    The 2n^2 constraint rows come minus-envelope first, then plus.
    """
    nsq = n * n
    half = nsq * d

    r4 = np.repeat(np.arange(nsq), nsq)
    c4 = np.tile(np.arange(nsq), nsq)
    base = r4 * d + c4
    T_ma = sp.csr_matrix((-np.ones(2 * r4.size),
                          (np.concatenate([base, half + base]),
                           np.tile(r4 * nsq + c4, 2))),
                         shape=(2 * half, n ** 4))
    terms = {"ma": T_ma}
    if m > 0:
        rb = np.repeat(np.arange(nsq), n * m)
        cb = np.tile(np.arange(n * m), nsq)
        base_b = rb * d + n * n + cb
        T_mb = sp.csr_matrix((-np.ones(2 * rb.size),
                              (np.concatenate([base_b, half + base_b]),
                               np.tile(rb * n * m + cb, 2))),
                             shape=(2 * half, nsq * n * m))
        terms["mb"] = T_mb
    G_expr = AffExpr(2 * half, terms)

    r = np.arange(nsq)
    base_v = r * d + r
    P_v = sp.csr_matrix((np.concatenate([-np.ones(nsq), np.ones(nsq)]),
                         (np.concatenate([base_v, half + base_v]),
                          np.tile(r // n, 2))),
                        shape=(2 * half, n))
    G_expr = G_expr + v_expr.premul(P_v)

    if m > 0:
        j5 = np.repeat(np.arange(n), n * m)
        i5 = np.tile(np.repeat(np.arange(n), m), n)
        k5 = np.tile(np.arange(m), n * n)
        rows_s = (j5 * n + i5) * d + n * n + k5 * n + i5
        vals = beta[k5]
        P_S = sp.csr_matrix((np.concatenate([-vals, vals]),
                             (np.concatenate([rows_s, half + rows_s]),
                              np.tile(j5 * m + k5, 2))),
                            shape=(2 * half, n * m))
        G_expr = G_expr + S_expr.premul(P_S)

    stack2 = sp.vstack([sp.eye(nsq, format="csr")] * 2, format="csr")
    h_expr = model.identity_expr("m0").premul(stack2)
    return G_expr, h_expr


def _aarc_model(poly, spec, n, mode, eta, lam_fixed=None, minimize_lam=False):
    m = spec.m
    d = n * (n + m)
    model = LPModel()
    if mode == "ess":
        model.add_block("v", n, lb=1.0)     # normalization, as in synth_sign
        v_expr = model.identity_expr("v")
    else:
        v_expr = AffExpr(n, {}, np.ones(n))
    model.add_block("S", m * n)
    S_expr = model.identity_expr("S")
    model.add_block("m0", n * n)
    model.add_block("ma", n ** 4)
    model.add_block("mb", n * n * n * m)
    if minimize_lam:
        model.add_block("lam", 1)

    R = _rowsum_selector(n)
    G_M = AffExpr(n * d, _ma_rowsum_terms(n, m, d))
    m0_rows = model.identity_expr("m0").premul(R)
    if lam_fixed is not None:
        h_M = v_expr * lam_fixed - m0_rows
    elif minimize_lam:
        h_M = AffExpr(n, {"lam": np.ones((n, 1))}) - m0_rows
    else:
        h_M = v_expr - eta - m0_rows
    add_farkas_block(model, poly.G, poly.h, G_M, h_M, name="ZM")

    for bi, beta in enumerate(spec.beta_vertices()):
        G_b, h_b = _beta_block_exprs(model, v_expr, S_expr, beta, n, m, d)
        add_farkas_block(model, poly.G, poly.h, G_b, h_b, name=f"Zb_{bi}")
    if minimize_lam:
        model.set_objective(AffExpr(1, {"lam": np.ones((1, 1))}))
    return model


def _extract_aarc(model, sol, poly, spec, n, mode, eta):
    m = spec.m
    v = sol.values["v"] if mode == "ess" else np.ones(n)
    S = sol.values["S"].reshape(n, m).T if m else np.zeros((0, n))
    param = AffineMParam(m0=sol.values["m0"],
                         ma=sol.values["ma"].reshape(n * n, n * n),
                         mb=sol.values["mb"].reshape(n * n, n * m))
    zblocks = {name: sol.values[name].reshape(L2, L1)
               for name, L2, L1 in model.farkas_blocks}
    R = _rowsum_selector(n)
    ZM = zblocks["ZM"]
    rowsum_bound = (ZM @ poly.h if poly.num_faces else np.zeros(n)) \
        + R @ sol.values["m0"]
    lam = float(np.max(rowsum_bound / v))
    scale = 1.0 / float(np.min(v)) if (mode == "ess" and np.min(v) < 1) else 1.0
    if scale != 1.0:
        v, S = v * scale, S * scale
        param = AffineMParam(param.m0 * scale, param.ma * scale,
                             param.mb * scale)
        zblocks = {k: z * scale for k, z in zblocks.items()}
    cert = StabCertificate(v=v, S=S, lam=lam, eta=eta, mode=mode)
    extras = {"m_param": param, "Z": zblocks,
              "counts": count_constraints_aarc(n, m, poly.num_faces)}
    return SynthResult("feasible", cert, extras)


def synthesize_aarc(poly, spec, mode="ess", eta=DEFAULT_ETA,
                    objective="feasibility", backend=None):
    """Affine-envelope robust synthesis over a consistency polytope.

    Same calling convention and certificate semantics as the sign-based
    synthesizer; extras additionally carry the AffineMParam.  Conservative
    by construction: an infeasible result here does not preclude sign-based
    feasibility.
    """
    if mode not in ("ss", "ess"):
        raise ValueError("mode must be 'ss' or 'ess'")
    if objective not in ("feasibility", "min-lambda"):
        raise ValueError("objective must be 'feasibility' or 'min-lambda'")
    if eta <= 0:
        raise ValueError("stability tolerance eta must be positive")
    m = spec.m
    if m > VERTEX_GUARD:
        raise ValueError(f"vertex enumeration limited to m <= {VERTEX_GUARD}")
    n = _infer_state_dim(poly, m)
    _require_nonempty(poly)

    def run(**kw):
        model = _aarc_model(poly, spec, n, mode, eta, **kw)
        return model, solve(model, backend)

    if objective == "min-lambda" and mode == "ss":
        model, sol = run(minimize_lam=True)
        if not sol.optimal:
            return SynthResult("infeasible" if sol.status == "infeasible"
                               else "numerical-failure")
        return _extract_aarc(model, sol, poly, spec, n, mode, eta)
    if objective == "min-lambda":
        lo, hi = 0.0, 1.0
        model, sol = run(lam_fixed=hi)
        if not sol.optimal:
            return SynthResult("infeasible" if sol.status == "infeasible"
                               else "numerical-failure")
        best = (model, sol)
        while hi - lo > LAMBDA_BISECT_TOL:
            mid = 0.5 * (lo + hi)
            model, sol = run(lam_fixed=mid)
            if sol.optimal:
                hi, best = mid, (model, sol)
            else:
                lo = mid
        return _extract_aarc(best[0], best[1], poly, spec, n, mode, eta)
    model, sol = run()
    if not sol.optimal:
        return SynthResult("infeasible" if sol.status == "infeasible"
                           else "numerical-failure")
    return _extract_aarc(model, sol, poly, spec, n, mode, eta)


def count_constraints_aarc(n, m, L):
    """Size record of the affine-counterpart LP before assembly.

    n row-sum rows plus 2n^2 envelope rows at each of the 2^m vertices;
    multiplier blocks Z_M (n x L) and one Z_beta (2n^2 x L) per vertex.
    """
    d = n * (n + m)
    verts = 2 ** m
    return {
        "robust_inequalities": n + n * n * 2 ** (m + 1),
        "farkas_variables": n * L + verts * 2 * n * n * L,
        "equality_rows": n * d + verts * 2 * n * n * d,
        "inequality_rows": n + verts * 2 * n * n,
        "search_variables": n + n * m + n * n + n ** 4 + n * n * n * m,
    }
