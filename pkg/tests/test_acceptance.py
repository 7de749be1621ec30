"""Acceptance criteria 1-9, each at its stated tolerance.

Every criterion records one ``PASS``/``FAIL`` line; the lines are printed in the
terminal summary under pytest and directly when run as a script:

    python3 tests/test_acceptance.py
"""
import contextlib
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from readlab.attain import (Combination, CoverageError, Refuted, attaining_functional,
                            attainment_verdict, certificate_check, combined_functional,
                            dichotomy_certificate, generate_attaining_pair, maximizer,
                            verdict_to_json)
from readlab.cli import main as cli_main
from readlab.core import FiniteVector, norm_value, pair, random_integer_vector
from readlab.discrange import (OperatorColumns, RealPolynomial, biorthogonal_system,
                               density_errors, zero_coordinate_count)
from readlab.dualgeom import DualBallRep, dual_norm_gauge, dual_norm_support
from readlab.geom import (combo_slices_diameter, roughness_at, slice_at,
                          slice_diameter_lower_bound, sphere_pairs, strict_convexity_margin)
from readlab.linalg import rank
from readlab.renorm import (AcostaSpec, BallSumSpec, ReadNormSpec, acosta_attainment_criterion,
                            acosta_norm, ball_sum_dual_norm, base_dual_norm, build_read_spec,
                            p_norm, smooth_variant)

F = Fraction
RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    RESULTS[n] = line
    print(line, flush=True)
    return ok


# ----------------------------------------------------------------------------- 1

def criterion_1():
    started = time.perf_counter()
    dims = list(range(2, 13))
    specs = {d: build_read_spec(d, F(1, 2), seed=100 + d, rows=2 * d, mesh_size=256) for d in dims}
    mismatches = 0
    count = 1000
    for k in range(count):
        spec = specs[dims[k % len(dims)]]
        rng = np.random.default_rng([k, spec.dim])
        f = FiniteVector.from_dense(random_integer_vector(rng, spec.dim, 5))
        g, _ = dual_norm_gauge(DualBallRep.from_spec(spec), f)
        s, _ = dual_norm_support(spec, f)
        mismatches += g != s
    elapsed = time.perf_counter() - started
    ok = mismatches == 0 and elapsed <= 300
    return record(1, ok, f"{count - mismatches}/{count} exact gauge = support over dims 2-12, "
                         f"{elapsed:.0f}s (limit 300s)")


# ----------------------------------------------------------------------------- 2

def criterion_2():
    e1, e2 = FiniteVector.basis(1, 2), FiniteVector.basis(2, 2)
    spec = ReadNormSpec(2, (F(1, 4), F(1, 8)), (e1, e2))
    p = p_norm(spec, e1)
    gauge, _ = dual_norm_gauge(DualBallRep.from_spec(spec), e1)
    support, _ = dual_norm_support(spec, e1)
    ok = p == F(5, 4) and gauge == support == F(4, 5)
    return record(2, ok, f"p(e1) = {p}, p*(e1) = {gauge} (gauge) / {support} (support)")


# ----------------------------------------------------------------------------- 3

def _euclidean_rational_specs():
    """Ball-sum specs whose S^T f is Pythagorean on the grid (so the l2 part is exact)."""
    out = []
    for dim in (2, 4, 6, 8):
        base = build_read_spec(dim, F(1, 2), seed=30 + dim, rows=3 * dim, mesh_size=256)
        cols = (FiniteVector.basis(1, dim) * F(3, 64), FiniteVector.basis(2, dim) * F(1, 64))
        out.append(BallSumSpec(base, OperatorColumns(cols, dim), F(1, 4), dim))
    return out


def criterion_3():
    from oracles import ball_sum_support_cvxpy
    exact_ok, checked, worst = True, 0, 0.0
    grid = [(1, 4), (4, 9), (-8, 18), (4, 0), (0, 3), (-1, -4), (0, 0)]
    for spec in _euclidean_rational_specs():
        S = np.array(spec.S.rows(), float)
        rng = np.random.default_rng(spec.dim)
        for head in grid:
            tail = [F(int(a)) for a in rng.integers(-3, 4, size=spec.dim - 2)]
            f = FiniteVector.from_dense([F(head[0]), F(head[1])] + tail)
            if f.is_zero():
                continue
            value = ball_sum_dual_norm(spec, f)
            st = spec.S.transpose_apply(f)
            _, bx = dual_norm_support(spec.base, f)
            shift = FiniteVector.zero(spec.dim) if st.is_zero() else \
                spec.S.apply(st / norm_value(st, "l2"))
            exact_ok &= isinstance(value, Fraction) and pair(f, bx + shift) == value
            exact_ok &= value == base_dual_norm(spec, f) + norm_value(st, "l2")
            oracle = ball_sum_support_cvxpy(spec.base.V_array, spec.base.r_array, S, f.to_numpy())
            worst = max(worst, abs(float(value) - oracle) / max(1.0, oracle))
            checked += 1
    # verdicts on the symbolic corpus, before and after the smooth ball-sum renorming
    base = build_read_spec(6, F(1, 4), seed=3, rows=24, mesh_size=256)
    smooth = smooth_variant(base, F(1, 16), dense_points=6, seed=1, epsilon=F(1, 2))
    horizons = [12, 24]
    corpus = [FiniteVector.zero(6)]
    rng = np.random.default_rng(5)
    for _ in range(4):
        corpus.append(attaining_functional(base, FiniteVector.from_dense(random_integer_vector(rng, 6, 3))))
    for seed in range(3):
        F_, G = generate_attaining_pair(base, seed)
        corpus.append(Combination(F_, G, 1))
        corpus.append(Combination(F_, G, -1))
    same = 0
    for f in corpus:
        before = attainment_verdict(base, f, horizons)
        after = attainment_verdict(smooth, f, horizons)
        same += type(before) is type(after)
    ok = exact_ok and worst <= 1e-6 and same == len(corpus)
    return record(3, ok, f"{checked} grid functionals exact (SOCP oracle max rel err {worst:.1e}); "
                         f"verdicts identical on {same}/{len(corpus)} corpus entries")


# ----------------------------------------------------------------------------- 4

def criterion_4(tmp: Path):
    started = time.perf_counter()
    spec = build_read_spec(8, F(1, 2), generator="disc", seed=0, rows=64)
    spec_path = tmp / "read_spec.json"
    spec_path.write_text(json.dumps(spec.to_json()))
    pairs, certified, refuted, replayed = 200, 0, 0, 0
    for seed in range(pairs):
        F_, G = generate_attaining_pair(spec, seed)
        try:
            cert = dichotomy_certificate(spec, F_, G)
        except CoverageError:
            continue
        certified += 1
        value, e = maximizer(spec, combined_functional(F_, G, cert.theta))
        verdict = certificate_check(spec, cert, F_, G, e, value)
        if isinstance(verdict, Refuted):
            refuted += 1
        path = tmp / f"cert_{seed:04d}.json"
        path.write_text(json.dumps({"certificate": cert.to_json(), "verdict": verdict_to_json(verdict)}))
        with contextlib.redirect_stdout(io.StringIO()):
            replayed += cli_main(["replay", str(path), "--spec", str(spec_path)]) == 0
    elapsed = time.perf_counter() - started
    ok = (certified >= 0.99 * pairs and refuted == certified and replayed == certified
          and elapsed <= 600)
    return record(4, ok, f"certified {certified}/{pairs}, refuted {refuted}/{certified}, "
                         f"replayed {replayed}/{certified}, {elapsed:.0f}s (limit 600s)")


# ----------------------------------------------------------------------------- 5

def criterion_5():
    details, ok = [], True
    for dim, seed in ((6, 0), (8, 1), (10, 2)):
        spec = build_read_spec(dim, F(1, 2), seed=seed, mesh_size=256)
        kernel_trivial = rank(spec.V_dense) == dim
        margin = strict_convexity_margin(spec, sphere_pairs(spec, 1000, seed=seed))
        ok &= kernel_trivial and margin > 0
        details.append(f"dim {dim}: min margin {float(margin):.2e}")
    return record(5, ok, "1000 pairs per spec; " + ", ".join(details))


# ----------------------------------------------------------------------------- 6

def criterion_6():
    started = time.perf_counter()
    eps = F(1, 2)
    target = 2 - float(eps) - 0.05
    hs = [F(1), F(1, 2), F(1, 4), F(1, 8)]
    trend = []
    for dim in (8, 16, 24, 32):
        spec = build_read_spec(dim, eps, seed=dim, mesh_size=512)
        rng = np.random.default_rng([6, dim])
        slices = [slice_at(spec, FiniteVector.from_dense(random_integer_vector(rng, dim, 4)), F(1, 4))
                  for _ in range(3)]
        single = min(float(slice_diameter_lower_bound(spec, sl).value) for sl in slices)
        combo = float(combo_slices_diameter(spec, slices, [F(1, 3)] * 3).value)
        rough = min(float(roughness_at(spec, sl.witness, hs)[0]) for sl in slices)
        trend.append((dim, single, combo, rough))
    elapsed = time.perf_counter() - started
    dim, single, combo, rough = trend[-1]
    ok = min(single, combo) >= target and rough >= target and elapsed <= 600
    sweep = "; ".join(f"d{d}: {s:.3f}/{c:.3f}/{r:.3f}" for d, s, c, r in trend)
    return record(6, ok, f"slice/combo/roughness at dim {dim}: {single:.3f}/{combo:.3f}/{rough:.3f} "
                         f"(need >= {target:.2f}); sweep {sweep}; {elapsed:.0f}s (limit 600s)")


# ----------------------------------------------------------------------------- 7

def _random_polynomials(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        deg = int(rng.integers(0, 12))
        k = int(rng.integers(0, deg + 1))
        roots = [F(1, 2 ** int(rng.integers(1, 80))) for _ in range(k)]
        while True:
            rest = RealPolynomial(tuple(F(int(c)) for c in rng.integers(-5, 6, size=deg - k + 1)))
            if rest.degree == deg - k:
                break
        yield RealPolynomial.from_roots(roots) * rest


def criterion_7():
    tol = F(1, 1000)
    best = {}
    for m in range(1, 7):
        errs = density_errors(m, 200, 64)
        best[m] = min(errs)
    density_ok = all(v <= tol for v in best.values())
    polys = list(_random_polynomials(500, 7))
    zero_ok = sum(zero_coordinate_count(f, 64) <= f.degree for f in polys)
    ok = density_ok and zero_ok == 500
    errs = ", ".join(f"m{m} {float(v):.2e}" for m, v in best.items())
    return record(7, ok, f"density min error over n <= 200 ({errs}; need <= 1e-3); "
                         f"zero count <= degree on {zero_ok}/500")


# ----------------------------------------------------------------------------- 8

def criterion_8():
    rng = np.random.default_rng(8)
    good = 0
    for _ in range(100):
        dim = int(rng.integers(1, 11))
        while True:
            w = [random_integer_vector(rng, dim, 5) for _ in range(dim)]
            if rank(w) == dim:
                break
        v, vs = biorthogonal_system([FiniteVector.from_dense(a) for a in w])
        good += all(pair(vs[i], v[j]) == (1 if i == j else 0)
                    for i in range(dim) for j in range(dim))
    return record(8, good == 100, f"exact v*_i(v_j) = delta_ij on {good}/100 systems, dims 1-10")


# ----------------------------------------------------------------------------- 9

def criterion_9():
    spec = AcostaSpec.from_rule("1/(n+1)", 32)
    unit = all(acosta_norm(spec, FiniteVector.basis(n, 32)) == 1 for n in range(1, 33))
    full = acosta_attainment_criterion(spec, "all")
    squares = acosta_attainment_criterion(spec, "squares")
    ok = unit and full is False and squares is True
    return record(9, ok, f"||e_n|| = 1 for n <= 32: {unit}; full support {full}, squares {squares}")


# ----------------------------------------------------------------------------- pytest

def test_criterion_1_duality_oracle():
    assert criterion_1()


def test_criterion_2_worked_instance():
    assert criterion_2()


def test_criterion_3_ball_sum():
    assert criterion_3()


def test_criterion_4_dichotomy(tmp_path):
    assert criterion_4(tmp_path)


def test_criterion_5_strict_convexity():
    assert criterion_5()


def test_criterion_6_geometry_trend():
    assert criterion_6()


def test_criterion_7_disc_operator():
    assert criterion_7()


def test_criterion_8_biorthogonality():
    assert criterion_8()


def test_criterion_9_acosta():
    assert criterion_9()


if __name__ == "__main__":
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        for n, fn in enumerate((criterion_1, criterion_2, criterion_3, lambda: criterion_4(Path(tmp)),
                                criterion_5, criterion_6, criterion_7, criterion_8, criterion_9),
                               start=1):
            fn()
    print("\n".join(RESULTS[n] for n in sorted(RESULTS)))
    sys.exit(0 if all(line.startswith("PASS") for line in RESULTS.values()) else 1)
