"""Independent robust audit via support-function maximization."""

import numpy as np
import pytest

from quantstab import (
    Polytope,
    QuantizerSpec,
    StabCertificate,
    build_polytope,
    contains_plant,
    generate_dataset,
    prune_redundant,
    robust_verify,
    synthesize_sign,
)

from test_synth_sign import _scalar_box


def test_scalar_controller_passes_with_wide_margin():
    poly = _scalar_box(0.4, 0.6, 0.9, 1.1)
    spec = QuantizerSpec.uniform(1.0, 1)
    report = robust_verify(poly, np.array([[-0.5]]), spec, eta=0.0)
    assert report.verified
    # worst closed loop over the box is |A + B K| = 0.15, so slack is 0.85
    assert report.worst_margin == pytest.approx(0.85, abs=1e-7)


def test_scalar_destabilizing_gain_fails():
    poly = _scalar_box(0.4, 0.6, 0.9, 1.1)
    spec = QuantizerSpec.uniform(1.0, 1)
    report = robust_verify(poly, np.array([[1.0]]), spec, eta=0.0)
    assert not report.verified
    # A + B at the top corner reaches 1.7, violating the unit bound by 0.7
    assert report.worst_margin == pytest.approx(-0.7, abs=1e-7)


def test_worst_case_plant_is_consistent_and_tight():
    poly = _scalar_box(0.4, 0.6, 0.9, 1.1)
    spec = QuantizerSpec.uniform(0.5, 1)
    report = robust_verify(poly, np.array([[-0.5]]), spec, eta=0.0)
    wc = report.worst_case
    A = np.asarray(wc["A"])
    B = np.asarray(wc["B"])
    assert contains_plant(poly, A, B, tol=1e-6)
    beta = np.asarray(wc["beta"])
    alpha = np.asarray(wc["alpha"])
    attained = float(((A + B @ (beta[:, None] * np.array([[-0.5]]))) @ alpha)[wc["i"]])
    assert 1.0 - attained == pytest.approx(report.worst_margin, abs=1e-6)


def test_accepts_certificate_and_tuple_candidates(sys1, part1):
    ds = generate_dataset(sys1, part1, 50, seed=3)
    poly = prune_redundant(build_polytope(ds))
    spec = QuantizerSpec.uniform(0.7, 2)
    res = synthesize_sign(poly, spec, mode="ess")
    cert = res.certificate
    by_cert = robust_verify(poly, cert, spec)
    by_tuple = robust_verify(poly, (cert.v, cert.S), spec, eta=cert.eta)
    assert by_cert.verified and by_tuple.verified
    assert by_cert.worst_margin == pytest.approx(by_tuple.worst_margin,
                                                 abs=1e-9)


def test_flags_tampered_controller(sys1, part1):
    ds = generate_dataset(sys1, part1, 50, seed=3)
    poly = prune_redundant(build_polytope(ds))
    spec = QuantizerSpec.uniform(0.7, 2)
    res = synthesize_sign(poly, spec, mode="ess")
    cert = res.certificate
    bad = StabCertificate(v=cert.v, S=cert.S + 3.0, lam=cert.lam,
                          eta=cert.eta, mode=cert.mode)
    report = robust_verify(poly, bad, spec)
    assert not report.verified
    assert report.worst_margin < 0


def test_unbounded_data_directions_refuse_verification():
    # a single face cannot pin down the plant: support values diverge
    poly = Polytope(G=np.array([[1.0, 0.0]]), h=np.array([1.0]))
    spec = QuantizerSpec.uniform(0.5, 1)
    report = robust_verify(poly, np.array([[-0.5]]), spec)
    assert not report.verified
    assert report.worst_margin == -np.inf
    assert "unbounded" in report.diagnostic


def test_report_json_schema():
    poly = _scalar_box(0.4, 0.6, 0.9, 1.1)
    spec = QuantizerSpec.uniform(0.5, 1)
    report = robust_verify(poly, np.array([[-0.5]]), spec, eta=0.0)
    d = report.to_json_dict()
    assert set(d) >= {"verified", "worst_margin", "worst_case"}
    assert set(d["worst_case"]) == {"i", "alpha", "beta", "A", "B"}
    assert isinstance(d["verified"], bool)


def test_dimension_guards(sys1):
    poly = _scalar_box(0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        robust_verify(poly, np.array([[-0.5]]), QuantizerSpec.uniform(0.5, 2))
    with pytest.raises(ValueError):
        robust_verify(poly, (np.array([1.0, -1.0]), np.array([[0.5, 0.5]])),
                      QuantizerSpec.uniform(0.5, 1))


def test_margin_tightens_with_sector(sys1, part1):
    ds = generate_dataset(sys1, part1, 60, seed=5)
    poly = prune_redundant(build_polytope(ds))
    res = synthesize_sign(poly, QuantizerSpec.uniform(0.6, 2), mode="ess")
    cert = res.certificate
    margins = [robust_verify(poly, cert, QuantizerSpec.uniform(r, 2)).worst_margin
               for r in (1.0, 0.8, 0.6)]
    assert np.all(np.diff(margins) <= 1e-12)
