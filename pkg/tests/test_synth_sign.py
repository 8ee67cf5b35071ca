"""Exact robust synthesis by sign enumeration over the data polytope."""

import numpy as np
import pytest

from quantstab import (
    LinearSystem,
    LPModel,
    NominalProblem,
    Partition,
    Polytope,
    QuantizerSpec,
    build_polytope,
    build_sign_polytope_rows,
    closed_loop_vertex_gain,
    count_constraints_sign,
    enumerate_vertices,
    generate_dataset,
    prune_redundant,
    robust_verify,
    synthesize_nominal_sign,
    synthesize_sign,
)
from quantstab.synth_sign import _sign_model

from conftest import box_polytope


def _scalar_box(alow, ahigh, blow, bhigh):
    """Plant box {A in [alow, ahigh], B in [blow, bhigh]} for n = m = 1."""
    G = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])
    h = np.array([-alow, ahigh, -blow, bhigh])
    return Polytope(G=G, h=h)


def _singleton(sys):
    z = np.concatenate([sys.A.flatten("F"), sys.B.flatten("F")])
    d = z.size
    G = np.vstack([np.eye(d), -np.eye(d)])
    h = np.concatenate([z, -z])
    return Polytope(G=G, h=h)


# ---------------------------------------------------------------------------
# row assembly oracle


def test_row_assembly_matches_direct_kronecker(rng):
    n, m = 3, 2
    model = LPModel()
    model.add_block("v", n)
    model.add_block("S", n * m)
    v_expr = model.identity_expr("v")
    S_expr = model.identity_expr("S")
    alpha = np.array([1.0, -1.0, 1.0])
    beta = np.array([0.7, 1.3])
    G_expr, h_expr = build_sign_polytope_rows(v_expr, S_expr, alpha, beta,
                                              eta=0.01)
    d = n * (n + m)
    assert G_expr.rows == n * d and h_expr.rows == n

    v = rng.uniform(0.5, 2.0, size=n)
    S = rng.normal(size=(m, n))
    S_flat = S.T.reshape(-1)  # row k, column j stored at j*m + k
    values = {"v": v, "S": S_flat}
    got = G_expr.value(values).reshape(n, d)
    eye = np.eye(n)
    direct = np.hstack([np.kron((alpha * v).reshape(1, n), eye),
                        np.kron((beta * (S @ alpha)).reshape(1, m), eye)])
    np.testing.assert_allclose(got, direct, atol=1e-12)
    np.testing.assert_allclose(h_expr.value(values), v - 0.01, atol=1e-12)


def test_row_assembly_acts_on_plants_as_signed_rowsum(rng):
    # G z must equal sum_j alpha_j (A_ij v_j + sum_k beta_k B_ik S_kj)
    n, m = 2, 2
    model = LPModel()
    model.add_block("v", n)
    model.add_block("S", n * m)
    alpha = np.array([-1.0, 1.0])
    beta = np.array([1.25, 0.75])
    G_expr, _ = build_sign_polytope_rows(model.identity_expr("v"),
                                         model.identity_expr("S"),
                                         alpha, beta)
    v = rng.uniform(0.5, 2.0, size=n)
    S = rng.normal(size=(m, n))
    values = {"v": v, "S": S.T.reshape(-1)}
    G = G_expr.value(values).reshape(n, n * (n + m))
    A = rng.normal(size=(n, n))
    B = rng.normal(size=(n, m))
    z = np.concatenate([A.flatten("F"), B.flatten("F")])
    expect = (A * (alpha * v)[None, :] + B @ (beta[:, None] * S * alpha[None, :])).sum(axis=1)
    np.testing.assert_allclose(G @ z, expect, atol=1e-12)


def test_row_assembly_validates_inputs():
    model = LPModel()
    model.add_block("v", 2)
    model.add_block("S", 2)
    with pytest.raises(ValueError):
        build_sign_polytope_rows(model.identity_expr("v"),
                                 model.identity_expr("S"),
                                 np.array([0.5, 1.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        build_sign_polytope_rows(model.identity_expr("v"),
                                 model.identity_expr("S"),
                                 np.array([1.0, -1.0]), np.array([-0.2]))


# ---------------------------------------------------------------------------
# hand-checkable plant boxes


def test_scalar_box_minimal_gain():
    # best S centers A + B S on zero: lam* = 0.15 for A in [.4,.6], B in [.9,1.1]
    poly = _scalar_box(0.4, 0.6, 0.9, 1.1)
    spec = QuantizerSpec.uniform(1.0, 1)
    res = synthesize_sign(poly, spec, mode="ss", objective="min-lambda")
    assert res.feasible
    assert res.certificate.lam == pytest.approx(0.15, abs=1e-6)


def test_scalar_box_gain_dominates_every_member_plant():
    poly = _scalar_box(0.4, 0.6, 0.9, 1.1)
    spec = QuantizerSpec.uniform(0.6, 1)
    res = synthesize_sign(poly, spec, mode="ss", objective="min-lambda")
    assert res.feasible
    cert = res.certificate
    for vtx in enumerate_vertices(poly):
        sys = LinearSystem(A=vtx[:1].reshape(1, 1), B=vtx[1:].reshape(1, 1))
        gain = closed_loop_vertex_gain(sys, cert.K, cert.v, spec)
        assert gain <= cert.lam + 1e-7


def test_singleton_reduces_to_nominal(sys1):
    poly = _singleton(sys1)
    for mode in ("ss", "ess"):
        spec = QuantizerSpec.uniform(0.7, 2)
        data = synthesize_sign(poly, spec, mode=mode, objective="min-lambda")
        nominal = synthesize_nominal_sign(
            NominalProblem(sys=sys1, spec=spec, mode=mode,
                           objective="min-lambda"))
        assert data.feasible and nominal.feasible
        tol = 1e-6 if mode == "ss" else 3e-4
        assert data.certificate.lam == pytest.approx(nominal.certificate.lam,
                                                     abs=tol)


def test_infeasible_at_coarse_density(sys1):
    # the known-plant threshold is ~0.311; a singleton data set inherits it
    poly = _singleton(sys1)
    res = synthesize_sign(poly, QuantizerSpec.uniform(0.2, 2), mode="ss")
    assert res.status == "infeasible"


# ---------------------------------------------------------------------------
# data-driven round trip


def test_data_round_trip_certificate_verifies(sys1, part1):
    ds = generate_dataset(sys1, part1, 60, seed=3)
    poly = prune_redundant(build_polytope(ds))
    spec = QuantizerSpec.uniform(0.7, 2)
    res = synthesize_sign(poly, spec, mode="ess")
    assert res.feasible
    cert = res.certificate
    assert cert.lam < 1.0
    report = robust_verify(poly, cert, spec)
    assert report.verified
    assert report.worst_margin >= -1e-7
    # the unknown true plant is consistent, so its closed loop is covered
    gain = closed_loop_vertex_gain(sys1, cert.K, cert.v, spec)
    assert gain <= cert.lam + 1e-6


def test_min_lambda_no_worse_than_feasibility(sys1, part1):
    ds = generate_dataset(sys1, part1, 60, seed=3)
    poly = prune_redundant(build_polytope(ds))
    spec = QuantizerSpec.uniform(0.8, 2)
    feas = synthesize_sign(poly, spec, mode="ess")
    best = synthesize_sign(poly, spec, mode="ess", objective="min-lambda")
    assert best.certificate.lam <= feas.certificate.lam + 1e-4


def test_multiplier_blocks_certify_lambda(sys1, part1):
    ds = generate_dataset(sys1, part1, 40, seed=12)
    poly = prune_redundant(build_polytope(ds))
    spec = QuantizerSpec.uniform(0.8, 2)
    res = synthesize_sign(poly, spec, mode="ess")
    cert, Z = res.certificate, res.extras["Z"]
    assert len(Z) == 2 ** (sys1.n + sys1.m)
    for z in Z.values():
        assert z.shape == (sys1.n, poly.num_faces)
        assert np.all(z >= -1e-12)
        # weak duality: each block's certified rowsum stays below lam * v
        assert np.all(z @ poly.h <= cert.lam * cert.v + 1e-7)


# ---------------------------------------------------------------------------
# guards and size accounting


def test_rejects_empty_data_polytope():
    empty = Polytope(G=np.array([[1.0, 0.0], [-1.0, 0.0]]),
                     h=np.array([-1.0, -1.0]))
    with pytest.raises(ValueError):
        synthesize_sign(empty, QuantizerSpec.uniform(0.5, 1))


def test_rejects_oversized_enumeration():
    d = 21 * 22  # n = 21, m = 1
    poly = Polytope(G=np.zeros((1, d)), h=np.ones(1))
    with pytest.raises(ValueError):
        synthesize_sign(poly, QuantizerSpec.uniform(0.5, 1))


@pytest.mark.parametrize("n,m,L", [(1, 1, 2), (2, 1, 6), (2, 2, 10),
                                   (3, 2, 8)])
def test_size_record_matches_assembled_model(n, m, L):
    rng = np.random.default_rng(n * 10 + m)
    G = rng.normal(size=(L, n * (n + m)))
    h = rng.uniform(1.0, 2.0, size=L)
    poly = Polytope(G=G, h=h)
    spec = QuantizerSpec.uniform(0.5, m)
    model = _sign_model(poly, spec, n, "ess", 1e-6)
    counts = count_constraints_sign(n, m, L)
    assert model.num_ineq_rows == counts["inequality_rows"]
    assert model.num_eq_rows == counts["equality_rows"]
    farkas_vars = model.num_variables - counts["search_variables"]
    assert farkas_vars == counts["farkas_variables"]
    assert counts["robust_inequalities"] == n * 2 ** (n + m)
