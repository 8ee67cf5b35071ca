"""Known-plant quantized superstabilization in two LP forms.

The lifted (M-form) program searches for an envelope matrix M with

    -M <= A Y + B diag(beta) S <= M   at every sector vertex beta,
    sum_j M_ij <= v_i - eta,          Y = diag(v),

while the sign form eliminates M by enumerating sign patterns:

    sum_j alpha_j (A_ij v_j + sum_k beta_k B_ik S_kj) <= v_i - eta
        for all i, alpha in {-1,1}^n, beta vertices.

Both certify that K = S diag(1/v) extended-superstabilizes every closed
loop in the quantization sector.  The sign form states the exact vertex
worst-case row sums; the M-form bounds each entry by its vertex maximum
before summing, so its feasible set can be strictly smaller whenever
different vertices maximize different entries of the same row.
"""

from dataclasses import dataclass

import numpy as np

from .lp_core import AffExpr, LPModel, solve
from .sysmodel import (StabCertificate, SynthResult, closed_loop_vertex_gain,
                       sign_vectors)

__all__ = [
    "NominalProblem",
    "synthesize_nominal_mform",
    "synthesize_nominal_sign",
]

ENUM_GUARD = 20
DEFAULT_ETA = 1e-6
LAMBDA_BISECT_TOL = 1e-4


@dataclass(frozen=True)
class NominalProblem:
    """A known plant, a quantizer spec, and solve options.

    mode 'ss' fixes v = 1 (plain superstability); 'ess' leaves v free
    positive.  objective 'feasibility' aims for gain below one with slack
    eta; 'min-lambda' minimizes the certified gain instead.
    """

    sys: object
    spec: object
    mode: str = "ess"
    eta: float = DEFAULT_ETA
    objective: str = "feasibility"

    def __post_init__(self):
        if self.mode not in ("ss", "ess"):
            raise ValueError("mode must be 'ss' or 'ess'")
        if self.objective not in ("feasibility", "min-lambda"):
            raise ValueError("objective must be 'feasibility' or 'min-lambda'")
        if self.eta <= 0:
            raise ValueError("stability tolerance eta must be positive")
        if self.spec.m != self.sys.m:
            raise ValueError("quantizer channel count must match the plant")


def _mform_model(prob, lam_fixed=None, minimize_lam=False):
    """Assemble the lifted LP.  lam_fixed replaces v_i - eta by lam * v_i;
    minimize_lam adds a free lambda variable (SS only, v constant)."""
    sys, spec = prob.sys, prob.spec
    n, m = sys.n, sys.m
    ess = prob.mode == "ess"
    model = LPModel()
    if ess:
        # The constraints are homogeneous of degree one in (v, S, M), so
        # v >= 1 loses no generality and keeps the LP well scaled; a lower
        # bound near zero invites degenerate tiny-v solutions whose
        # constraint residuals drown in solver tolerances.
        model.add_block("v", n, lb=1.0)
    model.add_block("S", m * n)
    model.add_block("M", n * n)
    if minimize_lam:
        model.add_block("lam", 1)

    # Envelope rows, column-major pairing with the M block: row j*n+i
    # carries the (i, j) entry of A Y + B diag(beta) S.
    col_of_row = np.repeat(np.arange(n), n)      # j for flat index j*n+i
    Vcoef = np.zeros((n * n, n))
    Vcoef[np.arange(n * n), col_of_row] = sys.A.flatten(order="F")
    Mneg = -np.eye(n * n)
    for beta in spec.beta_vertices():
        Scoef = np.kron(np.eye(n), sys.B * beta[None, :])
        for sgn in (+1.0, -1.0):
            terms = {"S": sgn * Scoef, "M": Mneg}
            const = np.zeros(n * n)
            if ess:
                terms["v"] = sgn * Vcoef
            else:
                const = sgn * sys.A.flatten(order="F")
            model.add_ineq(AffExpr(n * n, terms, const))

    rowsum = np.kron(np.ones((1, n)), np.eye(n))
    terms = {"M": rowsum}
    const = np.zeros(n)
    if lam_fixed is not None:
        if ess:
            terms["v"] = -lam_fixed * np.eye(n)
        else:
            const = const - lam_fixed
    elif minimize_lam:
        terms["lam"] = -np.ones((n, 1))
    else:
        if ess:
            terms["v"] = -np.eye(n)
        const = const + prob.eta - (0.0 if ess else 1.0)
    model.add_ineq(AffExpr(n, terms, const))
    if minimize_lam:
        model.set_objective(AffExpr(1, {"lam": np.ones((1, 1))}))
    return model


def _sign_model(prob, lam_fixed=None, minimize_lam=False):
    """Assemble the sign-enumerated LP (no M variables)."""
    sys, spec = prob.sys, prob.spec
    n, m = sys.n, sys.m
    ess = prob.mode == "ess"
    model = LPModel()
    if ess:
        model.add_block("v", n, lb=1.0)     # scale freedom, see _mform_model
    model.add_block("S", m * n)
    if minimize_lam:
        model.add_block("lam", 1)

    for alpha in sign_vectors(n):
        Av = sys.A * alpha[None, :]
        for beta in spec.beta_vertices():
            Scoef = np.kron(alpha.reshape(1, n), sys.B * beta[None, :])
            terms = {"S": Scoef}
            const = np.zeros(n)
            if ess:
                vcoef = Av.copy()
                if lam_fixed is not None:
                    vcoef = vcoef - lam_fixed * np.eye(n)
                else:
                    vcoef = vcoef - np.eye(n)
                    const = const + prob.eta
                terms["v"] = vcoef
            else:
                const = const + Av @ np.ones(n)
                if lam_fixed is not None:
                    const = const - lam_fixed
                elif minimize_lam:
                    terms["lam"] = -np.ones((n, 1))
                else:
                    const = const - 1.0 + prob.eta
            model.add_ineq(AffExpr(n, terms, const))
    if minimize_lam:
        model.set_objective(AffExpr(1, {"lam": np.ones((1, 1))}))
    return model


def _extract(prob, sol, with_M):
    sys = prob.sys
    n, m = sys.n, sys.m
    v = sol.values["v"] if prob.mode == "ess" else np.ones(n)
    S = sol.values["S"].reshape(n, m).T
    M = sol.values["M"].reshape(n, n, order="F") if with_M else None
    return v, S, M


def _fail_status(sol):
    return "infeasible" if sol.status == "infeasible" else "numerical-failure"


def _finish(prob, v, S, M):
    if prob.mode == "ess" and np.min(v) < 1.0:
        # Certificates are scale invariant; scaling up so min(v) = 1 keeps
        # the eta slack in downstream envelope checks negligible.
        scale = 1.0 / float(np.min(v))
        v, S = v * scale, S * scale
        if M is not None:
            M = M * scale
    K = S / v[None, :]
    lam = closed_loop_vertex_gain(prob.sys, K, v, prob.spec)
    if M is not None:
        lam = max(lam, float(np.max(M.sum(axis=1) / v)))
    cert = StabCertificate(v=v, S=S, lam=lam, eta=prob.eta, mode=prob.mode,
                           M=M)
    return SynthResult("feasible", cert)


def _solve_bisect_lambda(prob, build, with_M):
    """ESS min-lambda: the row-sum bound lam * v_i is bilinear, so bisect
    lam over [0, 1] with feasibility LPs."""
    lo, hi = 0.0, 1.0
    sol_hi = solve(build(prob, lam_fixed=hi))
    if not sol_hi.optimal:
        return SynthResult(_fail_status(sol_hi))
    best = sol_hi
    while hi - lo > LAMBDA_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        sol = solve(build(prob, lam_fixed=mid))
        if sol.optimal:
            hi, best = mid, sol
        else:
            lo = mid
    v, S, M = _extract(prob, best, with_M)
    return _finish(prob, v, S, M)


def _synthesize(prob, build, with_M):
    guard = prob.sys.n + prob.sys.m
    if not with_M and guard > ENUM_GUARD:
        raise ValueError(f"sign enumeration limited to n + m <= {ENUM_GUARD}")
    if prob.objective == "min-lambda":
        if prob.mode == "ess":
            return _solve_bisect_lambda(prob, build, with_M)
        sol = solve(build(prob, minimize_lam=True))
        if not sol.optimal:
            return SynthResult(_fail_status(sol))
        v, S, M = _extract(prob, sol, with_M)
        res = _finish(prob, v, S, M)
        # The LP objective is the exact minimized bound; keep it.
        lam = float(sol.values["lam"][0])
        cert = StabCertificate(v=res.certificate.v, S=res.certificate.S,
                               lam=lam, eta=prob.eta, mode=prob.mode, M=M)
        return SynthResult("feasible", cert)
    sol = solve(build(prob))
    if not sol.optimal:
        return SynthResult(_fail_status(sol))
    v, S, M = _extract(prob, sol, with_M)
    return _finish(prob, v, S, M)


def synthesize_nominal_mform(prob):
    """Lifted-envelope synthesis for a known plant.

    Returns a SynthResult whose certificate carries the envelope matrix M
    from the LP solution; check_cert holds on success.
    """
    return _synthesize(prob, _mform_model, with_M=True)


def synthesize_nominal_sign(prob):
    """Sign-enumerated synthesis for a known plant (exact vertex condition).

    Enumerates n 2^(n+m) inequality rows; guarded to n + m <= 20.  The
    returned certificate has no envelope matrix; its lambda is the exact
    worst vertex gain of the recovered controller.
    """
    return _synthesize(prob, _sign_model, with_M=False)
