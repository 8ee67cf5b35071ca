"""Exact data-driven synthesis by sign enumeration and Farkas containment.

For each sign pattern alpha in {-1,1}^n and sector vertex beta, the robust
stability requirement

    sum_j alpha_j (A_ij v_j + sum_k beta_k B_ik S_kj) <= v_i - eta
        for every (A, B) in the consistency polytope P

says that P is contained in the polytope

    P_{alpha,beta} = {z : G_{alpha,beta}(v, S) z <= v - eta 1},
    G_{alpha,beta} = [(diag(v) alpha)^T kron I_n, (diag(beta) S alpha)^T kron I_n],

over z = [vec(A); vec(B)].  Containment of one polytope in another is an
LP-representable condition (extended Farkas): there must exist Z >= 0 with
Z G_D = G_{alpha,beta} and Z h_D <= h_{alpha,beta}.  Since G_{alpha,beta}
is affine in the search variables (v, S), stacking one multiplier block per
(alpha, beta) yields a single finite LP that is feasible exactly when some
controller K = S diag(1/v) superstabilizes every plant consistent with the
data, with no conservatism beyond the finite enumeration.
"""

import numpy as np
import scipy.sparse as sp

from .lp_core import (AffExpr, LPModel, add_farkas_block, DEFAULT_BACKEND,
                      solve)
from .nominal import DEFAULT_ETA, ENUM_GUARD, LAMBDA_BISECT_TOL
from .sysmodel import StabCertificate, SynthResult, sign_vectors

__all__ = [
    "build_sign_polytope_rows",
    "synthesize_sign",
    "count_constraints_sign",
]


def build_sign_polytope_rows(v_expr, S_expr, alpha, beta, eta=0.0):
    """Expression form of one (alpha, beta) robust constraint polytope.

    v_expr (n rows) and S_expr (m*n rows, vec of the m x n matrix S in
    column order) are affine expressions in the search variables; alpha is
    a sign vector and beta a sector vertex.  Returns (G_expr, h_expr):
    G_expr holds the n x n(n+m) matrix G_{alpha,beta} flattened row by row,
    h_expr the right-hand side v - eta 1.  Plugging numeric (v, S) into
    G_expr and multiplying by [vec(A); vec(B)] reproduces the signed row
    sums of A diag(v) + B diag(beta) S.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    n = v_expr.rows
    m = beta.size
    if alpha.size != n or not np.all(np.abs(alpha) == 1.0):
        raise ValueError("alpha must be a length-n vector of +/-1")
    if np.any(beta <= 0):
        raise ValueError("beta entries must be positive sector gains")
    if S_expr.rows != m * n:
        raise ValueError("S expression must have m*n rows")
    d = n * (n + m)

    # Flat row-major index of entry (i, c) of G is i*d + c.  The vec(A)
    # column j*n+i of row i carries alpha_j v_j; the vec(B) column
    # n^2 + k*n + i carries beta_k (S alpha)_k.
    ii = np.repeat(np.arange(n), n)
    jj = np.tile(np.arange(n), n)
    Pv = sp.csr_matrix((alpha[jj], (ii * d + jj * n + ii, jj)), shape=(n * d, n))
    G_expr = v_expr.premul(Pv)
    if m > 0:
        i3 = np.repeat(np.arange(n), m * n)
        k3 = np.tile(np.repeat(np.arange(m), n), n)
        j3 = np.tile(np.arange(n), n * m)
        rows = i3 * d + n * n + k3 * n + i3
        PS = sp.csr_matrix((alpha[j3] * beta[k3], (rows, j3 * m + k3)),
                           shape=(n * d, n * m))
        G_expr = G_expr + S_expr.premul(PS)
    h_expr = v_expr - eta
    return G_expr, h_expr


def _infer_state_dim(poly, m):
    """n from dim = n(n+m)."""
    disc = m * m + 4 * poly.dim
    n = int(round((-m + np.sqrt(disc)) / 2))
    if n <= 0 or n * (n + m) != poly.dim:
        raise ValueError("polytope dimension is not n(n+m) for any n")
    return n


def _require_nonempty(poly):
    bounds = np.column_stack([np.full(poly.dim, -np.inf),
                              np.full(poly.dim, np.inf)])
    status, _, _ = DEFAULT_BACKEND.solve(np.zeros(poly.dim), poly.G, poly.h,
                                         None, None, bounds)
    if status == "infeasible":
        raise ValueError("data polytope is empty")


def _sign_model(poly, spec, n, mode, eta, lam_fixed=None, minimize_lam=False):
    m = spec.m
    model = LPModel()
    if mode == "ess":
        # Homogeneous in (v, S, Z): v >= 1 is a pure normalization that
        # keeps the LP away from degenerate tiny-v solutions.
        model.add_block("v", n, lb=1.0)
        v_expr = model.identity_expr("v")
    else:
        v_expr = AffExpr(n, {}, np.ones(n))
    model.add_block("S", m * n)
    S_expr = model.identity_expr("S")
    if minimize_lam:
        model.add_block("lam", 1)

    betas = spec.beta_vertices()
    for ai, alpha in enumerate(sign_vectors(n)):
        for bi, beta in enumerate(betas):
            G_expr, _ = build_sign_polytope_rows(v_expr, S_expr, alpha, beta)
            if lam_fixed is not None:
                h_expr = v_expr * lam_fixed
            elif minimize_lam:
                h_expr = AffExpr(n, {"lam": np.ones((n, 1))})
            else:
                h_expr = v_expr - eta
            add_farkas_block(model, poly.G, poly.h, G_expr, h_expr,
                             name=f"Z_{ai}_{bi}")
    if minimize_lam:
        model.set_objective(AffExpr(1, {"lam": np.ones((1, 1))}))
    return model


def _certified_lambda(model, sol, poly, v):
    """Tightest certified bound max_i (Z h_D)_i / v_i over all blocks.

    Weak duality: Z >= 0 with Z G_D = G gives sup_P G z <= Z h_D rowwise,
    so this bounds the worst scaled gain over every consistent plant."""
    worst = 0.0
    for name, L2, L1 in model.farkas_blocks:
        Z = sol.values[name].reshape(L2, L1)
        if L1:
            worst = max(worst, float(np.max((Z @ poly.h) / v)))
    return worst


def _extract_sign(model, sol, poly, spec, n, mode, eta):
    m = spec.m
    v = sol.values["v"] if mode == "ess" else np.ones(n)
    S = sol.values["S"].reshape(n, m).T if m else np.zeros((0, n))
    zblocks = {name: sol.values[name].reshape(L2, L1)
               for name, L2, L1 in model.farkas_blocks}
    if mode == "ess" and np.min(v) < 1.0:
        scale = 1.0 / float(np.min(v))
        v, S = v * scale, S * scale
        zblocks = {k: z * scale for k, z in zblocks.items()}
    lam = _certified_lambda(model, sol, poly, sol.values["v"]
                            if mode == "ess" else v)
    cert = StabCertificate(v=v, S=S, lam=lam, eta=eta, mode=mode)
    extras = {"Z": zblocks,
              "counts": count_constraints_sign(n, m, poly.num_faces)}
    return SynthResult("feasible", cert, extras)


def synthesize_sign(poly, spec, mode="ess", eta=DEFAULT_ETA,
                    objective="feasibility", backend=None):
    """Controller synthesis over every plant in a consistency polytope.

    poly is the data polytope over [vec(A); vec(B)]; spec fixes the sector
    vertices.  mode 'ss' pins v = 1, 'ess' searches v > 0.  objective
    'min-lambda' minimizes the certified gain (direct LP for 'ss',
    bisection to 1e-4 for 'ess').  Returns a SynthResult whose extras carry
    the Farkas multiplier blocks for audit.
    """
    if mode not in ("ss", "ess"):
        raise ValueError("mode must be 'ss' or 'ess'")
    if objective not in ("feasibility", "min-lambda"):
        raise ValueError("objective must be 'feasibility' or 'min-lambda'")
    if eta <= 0:
        raise ValueError("stability tolerance eta must be positive")
    m = spec.m
    n = _infer_state_dim(poly, m)
    if n + m > ENUM_GUARD:
        raise ValueError(f"sign enumeration limited to n + m <= {ENUM_GUARD}")
    _require_nonempty(poly)

    def run(**kw):
        model = _sign_model(poly, spec, n, mode, eta, **kw)
        return model, solve(model, backend)

    if objective == "min-lambda" and mode == "ss":
        model, sol = run(minimize_lam=True)
        if not sol.optimal:
            return SynthResult("infeasible" if sol.status == "infeasible"
                               else "numerical-failure")
        return _extract_sign(model, sol, poly, spec, n, mode, eta)
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
        return _extract_sign(best[0], best[1], poly, spec, n, mode, eta)
    model, sol = run()
    if not sol.optimal:
        return SynthResult("infeasible" if sol.status == "infeasible"
                           else "numerical-failure")
    return _extract_sign(model, sol, poly, spec, n, mode, eta)


def count_constraints_sign(n, m, L):
    """Size record of the sign-enumerated Farkas LP before assembly.

    One multiplier block Z in R>=0^(n x L) per (alpha, beta) pair; each
    block contributes n(n+m) equality rows per robust row and one RHS
    inequality row per robust row.  Nonnegativity lives in variable bounds,
    not rows.
    """
    blocks = 2 ** (n + m)
    return {
        "robust_inequalities": n * blocks,
        "farkas_variables": n * L * blocks,
        "equality_rows": n * n * (n + m) * blocks,
        "inequality_rows": n * blocks,
        "search_variables": n + n * m,
    }
