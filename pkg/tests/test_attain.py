import json
from fractions import Fraction

import pytest

from readlab.attain import (Attains, Combination, CoverageError, DegenerateSpecError,
                            Inconclusive, NonAttainmentCertificate, NotAttains, Refuted, Unknown,
                            attaining_functional, attainment_verdict, certificate_check,
                            combined_functional, dichotomy_certificate, generate_attaining_pair,
                            maximizer, na_c0_base, replay_certificate, sign_cancellation_indices,
                            verdict_to_json)
from readlab.core import FiniteVector, pair
from readlab.dualgeom import DualBallRep, PreconditionError, decompose_attaining, read_dual_norm
from readlab.linalg import rank
from readlab.renorm import ReadNormSpec, build_read_spec, p_norm

from conftest import vec

F = Fraction


@pytest.fixture(scope="module")
def disc_spec():
    return build_read_spec(4, F(1, 2), seed=2, rows=32, mesh_size=256)


def test_na_c0_base():
    assert na_c0_base(vec(1, 0), "finite")
    assert not na_c0_base(vec(1, 0), "symbolic")
    assert na_c0_base(FiniteVector.zero(3), "symbolic")


def test_attaining_functional_has_symbolic_tail(disc_spec):
    F_ = attaining_functional(disc_spec, vec(1, 2, 0, -1))
    assert not na_c0_base(F_)
    assert p_norm(disc_spec, F_.witness) == 1
    assert pair(F_.assemble(), F_.witness) == 1


def test_basis_pair_on_small_spec(small_spec):
    F_, G = generate_attaining_pair(small_spec, seed=0, kind="basis")
    assert F_.witness == vec(F(4, 5), 0) and G.witness == vec(0, F(8, 9))
    assert rank([F_.assemble().dense(), G.assemble().dense()]) == 2


def test_pair_generation_is_deterministic(disc_spec):
    a = generate_attaining_pair(disc_spec, seed=9)
    b = generate_attaining_pair(disc_spec, seed=9)
    assert [x.witness for x in a] == [x.witness for x in b]


def test_pair_needs_two_dimensions():
    spec = ReadNormSpec(1, (F(1, 4),), (vec(1),))
    with pytest.raises(DegenerateSpecError):
        generate_attaining_pair(spec, seed=0)


def test_sign_cancellation_examples():
    V = (vec(F(1, 2), F(-1, 2)), vec(1, 0))
    spec = ReadNormSpec(2, (F(1, 8), F(1, 16)), V)
    e1, e2 = vec(1, 0), vec(0, 1)
    assert 1 in sign_cancellation_indices(spec, e1, e2, 1)
    assert sign_cancellation_indices(spec, e1, e1, 1) == ()
    # z = x and theta = -1: every row with v_n(e1) != 0 cancels
    assert sign_cancellation_indices(spec, e1, e1, -1) == (1, 2)
    with pytest.raises(ValueError):
        sign_cancellation_indices(spec, e1, e2, 0)


def test_certificate_at_basis_witnesses(disc_spec):
    F_ = attaining_functional(disc_spec, vec(1, 0, 0, 0))
    G = attaining_functional(disc_spec, vec(0, 1, 0, 0))
    cert = dichotomy_certificate(disc_spec, F_, G)
    assert len(cert.cancel_indices) >= 1
    for n in cert.cancel_indices:
        assert F_.coefficient(n) + cert.theta * G.coefficient(n) == 0


def test_dependent_pair_rejected(disc_spec):
    F_ = attaining_functional(disc_spec, vec(1, 0, 0, 0))
    with pytest.raises(PreconditionError):
        dichotomy_certificate(disc_spec, F_, F_)


def test_equal_witnesses_force_negative_theta(disc_spec):
    x = vec(1, 1, 0, 0)
    F_ = attaining_functional(disc_spec, x, "lowest")
    G = attaining_functional(disc_spec, x, "highest")
    assert F_.witness == G.witness
    assert dichotomy_certificate(disc_spec, F_, G).theta == -1


def test_no_separating_row_raises():
    spec = ReadNormSpec(2, (F(1, 8),), (vec(0, 1),))
    F_ = attaining_functional(spec, vec(1, 0))
    G = attaining_functional(spec, vec(0, 1))
    with pytest.raises(CoverageError):
        dichotomy_certificate(spec, F_, G)


@pytest.fixture(scope="module")
def certified(disc_spec):
    F_, G = generate_attaining_pair(disc_spec, seed=4)
    cert = dichotomy_certificate(disc_spec, F_, G)
    return F_, G, cert


def test_maximizer_is_refuted(disc_spec, certified):
    F_, G, cert = certified
    value, e = maximizer(disc_spec, combined_functional(F_, G, cert.theta))
    verdict = certificate_check(disc_spec, cert, F_, G, e, value)
    assert isinstance(verdict, Refuted)
    assert verdict.index in cert.cancel_indices and verdict.coefficient != 0
    assert certificate_check(disc_spec, cert, F_, G, e) == verdict


def test_kernel_point_is_inconclusive():
    # the only cancelling row is v = (1, -1); e = (1, 1)/p lies in its kernel
    V = (vec(1, -1), vec(1, 0))
    spec = ReadNormSpec(2, (F(1, 8), F(1, 16)), V)
    F_ = attaining_functional(spec, vec(1, 0))
    G = attaining_functional(spec, vec(0, 1))
    cert = dichotomy_certificate(spec, F_, G)
    assert cert.cancel_indices == (1,)
    e = vec(1, 1) / p_norm(spec, vec(1, 1))
    assert certificate_check(spec, cert, F_, G, e) == Inconclusive()


def test_witness_of_f_decided_by_signs(disc_spec, certified):
    F_, G, cert = certified
    verdict = certificate_check(disc_spec, cert, F_, G, F_.witness)
    n = cert.cancel_indices[0]
    assert isinstance(verdict, Refuted) and verdict.index == n


def test_check_requires_unit_point(disc_spec, certified):
    F_, G, cert = certified
    with pytest.raises(PreconditionError):
        certificate_check(disc_spec, cert, F_, G, F_.witness * 2)


def test_certificate_json_round_trip(certified):
    cert = certified[2]
    data = json.loads(json.dumps(cert.to_json()))
    assert NonAttainmentCertificate.from_json(data) == cert


def test_replay_round_trip(disc_spec, certified):
    F_, G, cert = certified
    value, e = maximizer(disc_spec, combined_functional(F_, G, cert.theta))
    recorded = verdict_to_json(certificate_check(disc_spec, cert, F_, G, e, value))
    res = replay_certificate(disc_spec, cert.to_json(), recorded)
    assert res.ok and isinstance(res.verdict, Refuted)


def test_replay_detects_tampered_index(disc_spec, certified):
    data = certified[2].to_json()
    body = dict(data)
    bad = [n for n in range(1, disc_spec.M + 1) if n not in data["cancel_indices"]][0]
    body["cancel_indices"] = [bad] + data["cancel_indices"][1:]
    assert not replay_certificate(disc_spec, body).ok
    body.pop("hash")
    res = replay_certificate(disc_spec, body)
    assert not res.ok and res.problems


def test_replay_wrong_spec(certified):
    other = build_read_spec(4, F(1, 2), seed=3, rows=8, mesh_size=64)
    with pytest.raises(PreconditionError):
        replay_certificate(other, certified[2].to_json())


def test_verdict_supporting_functional_attains(disc_spec):
    f = attaining_functional(disc_spec, vec(2, -1, 1, 0))
    v = attainment_verdict(disc_spec, f, [8, 16, 32])
    assert isinstance(v, Attains) and v.witness == f.witness


def test_verdict_fixed_functional(disc_spec):
    f = vec(1, 0, 0, 0)
    v = attainment_verdict(disc_spec, f, [16, 32])
    assert isinstance(v, (Attains, Unknown))
    if isinstance(v, Attains):
        spec = disc_spec.restrict(32)
        x = v.witness / p_norm(spec, v.witness)
        assert pair(f, x) == read_dual_norm(spec, f)


def test_verdict_combination_never_attains(disc_spec, certified):
    F_, G, cert = certified
    v = attainment_verdict(disc_spec, Combination(F_, G, cert.theta), [16, 32])
    assert isinstance(v, (NotAttains, Unknown))
    if isinstance(v, NotAttains):
        assert verdict_to_json(v)["verdict"] == "not_attains"


def test_verdict_zero_functional(disc_spec):
    v = attainment_verdict(disc_spec, FiniteVector.zero(4), [32])
    assert isinstance(v, Attains) and v.witness.is_zero()


def test_verdict_needs_horizons(disc_spec):
    with pytest.raises(ValueError):
        attainment_verdict(disc_spec, vec(1, 0, 0, 0), [])


def test_attaining_decomposition_exists_for_assembled(disc_spec):
    f = attaining_functional(disc_spec, vec(0, 3, -1, 1))
    rep = DualBallRep.from_spec(disc_spec)
    assert decompose_attaining(rep, f.assemble(), f.witness) is not None
