from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from readlab.core import FiniteVector, norm_value, pair
from readlab.dualgeom import (Decomposition, DualBallRep, PreconditionError, decompose_attaining,
                              dual_norm_gauge, dual_norm_support, read_dual_norm,
                              rep_dual_norm, support_function, supporting_functional)
from readlab.renorm import ReadNormSpec, build_read_spec, p_norm

from conftest import vec
from oracles import read_dual_scipy

F = Fraction


def test_gauge_worked_instance(small_spec):
    value, dec = dual_norm_gauge(DualBallRep.from_spec(small_spec), vec(1, 0))
    assert value == F(4, 5)
    assert dec.residual_check(DualBallRep.from_spec(small_spec))
    assert dec.in_unit_ball()
    assert dec.target == vec(F(5, 4), 0)


def test_support_worked_instance(small_spec):
    value, x = dual_norm_support(small_spec, vec(1, 0))
    assert value == F(4, 5)
    assert x == vec(F(4, 5), 0)
    assert p_norm(small_spec, x) == 1


def test_zero_functional(small_spec):
    rep = DualBallRep.from_spec(small_spec)
    assert dual_norm_gauge(rep, FiniteVector.zero(2))[0] == 0
    assert dual_norm_support(small_spec, FiniteVector.zero(2))[0] == 0


def test_single_row_functional_bounds(small_spec):
    rep = DualBallRep.from_spec(small_spec)
    f = small_spec.V[0] * small_spec.r[0]
    value, _ = dual_norm_gauge(rep, f)
    assert value <= 1 and value <= norm_value(f, "l1")
    assert value == dual_norm_support(small_spec, f)[0]


@pytest.mark.parametrize("x, expected", [((1, 0), F(5, 4)), ((0, 0), 0), ((2, -3), None)])
def test_support_function_matches_p(small_spec, x, expected):
    rep = DualBallRep.from_spec(small_spec)
    x = vec(*x)
    assert support_function(rep, x) == p_norm(small_spec, x)
    if expected is not None:
        assert support_function(rep, x) == expected


def test_supporting_functional_examples(small_spec):
    d = supporting_functional(small_spec, vec(1, 0))
    assert d.target == vec(F(5, 4), 0) and pair(d.target, vec(1, 0)) == F(5, 4)
    d = supporting_functional(small_spec, vec(1, 1))
    assert d.f0 == vec(1, 0) and d.target == vec(F(5, 4), F(1, 8))
    assert supporting_functional(small_spec, vec(1, 1), "highest").f0 == vec(0, 1)
    d = supporting_functional(small_spec, vec(1, -1))
    assert d.s == (1, -1)


def test_supporting_functional_of_zero(small_spec):
    with pytest.raises(PreconditionError):
        supporting_functional(small_spec, FiniteVector.zero(2))


def test_decompose_round_trip(small_spec):
    rep = DualBallRep.from_spec(small_spec)
    x = vec(1, 1) / p_norm(small_spec, vec(1, 1))
    f = supporting_functional(small_spec, x).target
    dec = decompose_attaining(rep, f, x)
    assert dec is not None and dec.residual_check(rep) and dec.in_unit_ball()


def test_decompose_infeasible_sign_mismatch():
    # v_1 = e_1 with v_1(x) > 0 forces s_1 = +1, which cannot produce a functional along -e_1 + e_2
    spec = ReadNormSpec(2, (F(1, 4),), (vec(1, 0),))
    rep = DualBallRep.from_spec(spec)
    x = vec(F(4, 5), F(4, 5))
    assert p_norm(spec, x) == 1
    f = vec(-1, 1) / dual_norm_support(spec, vec(-1, 1))[0]
    assert decompose_attaining(rep, f, x, check_norms=False) is None


def test_decompose_free_rows_verified():
    # v_2(x) = 0, so s_2 is free in [-1, 1]; whatever s_2 comes back must assemble exactly
    spec = ReadNormSpec(2, (F(1, 4), F(1, 8)), (vec(1, 0), vec(0, 1)))
    rep = DualBallRep.from_spec(spec)
    x = vec(F(4, 5), 0)
    f = vec(1, 0) / dual_norm_support(spec, vec(1, 0))[0]
    dec = decompose_attaining(rep, f, x)
    assert dec is not None and dec.residual_check(rep) and abs(dec.s[1]) <= 1


def test_decompose_requires_unit_inputs(small_spec):
    rep = DualBallRep.from_spec(small_spec)
    with pytest.raises(PreconditionError, match="p\\(x\\)"):
        decompose_attaining(rep, vec(1, 0), vec(1, 0))


def test_decomposition_json(small_spec):
    rep = DualBallRep.from_spec(small_spec)
    _, dec = dual_norm_gauge(rep, vec(1, 0))
    data = dec.to_json(rep)
    assert data["residual_check"] is True
    assert Decomposition.from_json(data, dec.target) == dec


@pytest.fixture(scope="module")
def spec5():
    return build_read_spec(5, F(1, 2), seed=11, rows=10, mesh_size=128)


@given(st.lists(st.integers(-6, 6), min_size=5, max_size=5))
def test_gauge_equals_support_exactly(spec5, entries):
    f = FiniteVector.from_dense([F(a) for a in entries])
    g, dec = dual_norm_gauge(DualBallRep.from_spec(spec5), f)
    s, x = dual_norm_support(spec5, f)
    assert g == s
    if not f.is_zero():
        assert dec.in_unit_ball() and dec.residual_check(DualBallRep.from_spec(spec5))
        assert p_norm(spec5, x) == 1 and pair(f, x) == s


@given(st.lists(st.integers(-6, 6), min_size=5, max_size=5))
def test_dual_norm_matches_scipy(spec5, entries):
    f = FiniteVector.from_dense([F(a) for a in entries])
    if f.is_zero():
        return
    ref = read_dual_scipy(spec5.V_array, spec5.r_array, f.to_numpy())
    assert float(read_dual_norm(spec5, f)) == pytest.approx(ref, rel=1e-9)


@given(st.lists(st.integers(-6, 6), min_size=5, max_size=5),
       st.lists(st.integers(-6, 6), min_size=5, max_size=5))
def test_dual_norm_holder_inequality(spec5, fa, xa):
    f = FiniteVector.from_dense([F(a) for a in fa])
    x = FiniteVector.from_dense([F(a) for a in xa])
    assert abs(pair(f, x)) <= read_dual_norm(spec5, f) * p_norm(spec5, x)


def test_dual_norm_between_l1_bounds(spec5):
    rng = np.random.default_rng(0)
    for _ in range(10):
        f = FiniteVector.from_dense([F(int(a)) for a in rng.integers(-5, 6, size=5)])
        v = read_dual_norm(spec5, f)
        assert norm_value(f, "l1") / (1 + spec5.rho) <= v <= norm_value(f, "l1")


def test_float_mode_close_to_exact(spec5):
    f = vec(3, -1, 0, 2, 5)
    exact = read_dual_norm(spec5, f)
    approx = read_dual_norm(spec5, f.to_float(), exact=False)
    assert isinstance(approx, float) and approx == pytest.approx(float(exact), rel=1e-9)


def test_rep_dual_norm_with_cross_radius(small_spec):
    rep = DualBallRep(2, tuple(zip(small_spec.r, small_spec.V)), F(2))
    # 2 B_l1 + [-1/4, 1/4] e1 + [-1/8, 1/8] e2 at f = 2 e1: 2 = 2t + t/4
    assert rep_dual_norm(rep, vec(2, 0)) == F(8, 9)
    assert dual_norm_gauge(rep, vec(2, 0))[0] == F(8, 9)
