"""The dual ball of a Read norm as a Minkowski sum, and two independent dual-norm solvers.

The dual unit ball is ``K = B_l1 + sum_n r_n [-v_n, v_n]``.  The gauge of ``K`` is
computed by one linear program and ``max {f(x) : p(x) <= 1}`` by another; LP
duality makes them equal, which the test-suite checks in exact arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (FiniteVector, ReadlabError, DimensionError, format_scalar, norm_value,
                   pair, parse_scalar, scalars_equal, sign)
from .lp import OPTIMAL, LPError, linprog
from .renorm import ReadNormSpec


class PreconditionError(ReadlabError, ValueError):
    pass


@dataclass(frozen=True)
class DualBallRep:
    dim: int
    segments: tuple          # (r_n, v_n) pairs
    cross_radius: Fraction = Fraction(1)

    @classmethod
    def from_spec(cls, spec: ReadNormSpec) -> "DualBallRep":
        return cls(spec.dim, tuple(zip(spec.r, spec.V)))

    @property
    def M(self) -> int:
        return len(self.segments)

    def _check(self, v: FiniteVector):
        if v.dim != self.dim:
            raise DimensionError(f"dimension {v.dim} for a dual ball in dimension {self.dim}")


@dataclass(frozen=True)
class Decomposition:
    """``f = f0 + sum_n s_n r_n v_n``; ``target`` is the functional being decomposed."""

    f0: FiniteVector
    s: tuple
    target: FiniteVector

    def assemble(self, rep: DualBallRep) -> FiniteVector:
        out = self.f0
        for sn, (rn, vn) in zip(self.s, rep.segments):
            if sn:
                out = out + vn * (sn * rn)
        return out

    def residual_check(self, rep: DualBallRep) -> bool:
        f = self.assemble(rep)
        if f.exact and self.target.exact:
            return f == self.target
        return all(scalars_equal(a, b) for a, b in zip(f.dense(), self.target.dense()))

    def in_unit_ball(self) -> bool:
        l1 = norm_value(self.f0, "l1")
        if self.f0.exact and all(isinstance(a, Fraction) for a in self.s):
            return l1 <= 1 and all(abs(a) <= 1 for a in self.s)
        tol = 1e-9
        return l1 <= 1 + tol and all(abs(a) <= 1 + tol for a in self.s)

    def to_json(self, rep: DualBallRep) -> dict:
        return {"f0": self.f0.to_json(), "s": [format_scalar(a) for a in self.s],
                "residual_check": self.residual_check(rep)}

    @classmethod
    def from_json(cls, data: dict, target: FiniteVector) -> "Decomposition":
        return cls(FiniteVector.from_json(data["f0"]),
                   tuple(parse_scalar(a) for a in data["s"]), target)


def support_function(rep: DualBallRep, x: FiniteVector):
    """``h_K(x) = r_0 ||x||_inf + sum_n r_n |v_n(x)|`` in closed form."""
    rep._check(x)
    total = rep.cross_radius * norm_value(x, "sup")
    for rn, vn in rep.segments:
        total = total + rn * abs(pair(vn, x))
    return total


def _zero(f: FiniteVector):
    return Fraction(0) if f.exact else 0.0


def dual_norm_gauge(rep: DualBallRep, f: FiniteVector, exact: bool | None = None):
    """Gauge of the dual ball at ``f`` and a decomposition of ``f / value``.

    Variables ``t, g_1..g_d, u_1..u_d, s_1..s_M``; minimize ``t`` subject to
    ``f = g + sum s_n r_n v_n``, ``|g_i| <= u_i``, ``sum u_i <= t r_0``, ``|s_n| <= t``.
    """
    rep._check(f)
    exact = f.exact if exact is None else exact
    d, M = rep.dim, rep.M
    if f.is_zero():
        z = _zero(f)
        return z, Decomposition(FiniteVector.zero(d), (z,) * M, f)
    T, G, U, S = 0, 1, 1 + d, 1 + 2 * d
    nv = 1 + 2 * d + M
    A_eq, b_eq = [], []
    dense = [[Fraction(0)] * d for _ in range(M)]
    for n, (_, vn) in enumerate(rep.segments):
        for i, a in vn.entries:
            dense[n][i - 1] = a
    fd = f.dense()
    for i in range(d):
        row = {G + i: 1}
        for n, (rn, _) in enumerate(rep.segments):
            if dense[n][i]:
                row[S + n] = rn * dense[n][i]
        A_eq.append(row)
        b_eq.append(fd[i])
    A_ub, b_ub = [], []
    for i in range(d):
        A_ub += [{G + i: 1, U + i: -1}, {G + i: -1, U + i: -1}]
        b_ub += [0, 0]
    cross = {U + i: 1 for i in range(d)}
    cross[T] = -rep.cross_radius
    A_ub.append(cross)
    b_ub.append(0)
    for n in range(M):
        A_ub += [{S + n: 1, T: -1}, {S + n: -1, T: -1}]
        b_ub += [0, 0]
    c = [1] + [0] * (nv - 1)
    free = list(range(G, G + d)) + list(range(S, S + M))
    res = linprog(c, A_ub, b_ub, A_eq, b_eq, free=free, exact=exact)
    if res.status != OPTIMAL:
        raise LPError(f"gauge program ended {res.status}")
    t = res.value
    x = res.x
    inv = 1 / t
    f0 = FiniteVector.from_dense([x[G + i] * inv for i in range(d)], d)
    s = tuple(x[S + n] * inv for n in range(M))
    return t, Decomposition(f0, s, f * inv)


def _support_lp(dim: int, r: tuple, V: tuple, f: FiniteVector, exact: bool):
    X, MM, A = 0, dim, dim + 1
    nv = dim + 1 + len(V)
    A_ub, b_ub = [], []
    for i in range(dim):
        A_ub += [{X + i: 1, MM: -1}, {X + i: -1, MM: -1}]
        b_ub += [0, 0]
    for n, vn in enumerate(V):
        row = {X + i - 1: a for i, a in vn.entries}
        neg = {k: -a for k, a in row.items()}
        row[A + n] = -1
        neg[A + n] = -1
        A_ub += [row, neg]
        b_ub += [0, 0]
    budget = {MM: 1}
    for n, rn in enumerate(r):
        budget[A + n] = rn
    A_ub.append(budget)
    b_ub.append(1)
    c = [0] * nv
    for i, a in f.entries:
        c[X + i - 1] = a
    res = linprog(c, A_ub, b_ub, free=range(dim), maximize=True, exact=exact)
    if res.status != OPTIMAL:
        raise LPError(f"support program ended {res.status}")
    return res.value, FiniteVector.from_dense(res.x[:dim], dim)


def dual_norm_support(spec: ReadNormSpec, f: FiniteVector, exact: bool | None = None):
    """``max f(x)`` over ``p(x) <= 1`` and a maximizer on the unit sphere.

    Variables ``x_1..x_d`` (free), ``m`` (sup bound) and ``a_1..a_M`` with
    ``|x_i| <= m``, ``|v_n(x)| <= a_n``, ``m + sum r_n a_n <= 1``.  At a positive
    optimum the budget row is tight, so the maximizer has ``p(x) = 1``.
    """
    if f.dim != spec.dim:
        raise DimensionError(f"functional of dimension {f.dim} for a spec of dimension {spec.dim}")
    exact = f.exact if exact is None else exact
    if f.is_zero():
        return _zero(f), FiniteVector.zero(spec.dim)
    return _support_lp(spec.dim, spec.r, spec.V, f, exact)


def rep_dual_norm(rep: DualBallRep, f: FiniteVector, exact: bool | None = None):
    """Dual norm through the support program built from the segments of ``rep``."""
    rep._check(f)
    exact = f.exact if exact is None else exact
    if f.is_zero():
        return _zero(f)
    r = tuple(a / rep.cross_radius for a, _ in rep.segments)
    value, _ = _support_lp(rep.dim, r, tuple(v for _, v in rep.segments), f, exact)
    return value / rep.cross_radius


def supporting_functional(spec: ReadNormSpec, x: FiniteVector,
                          tie_rule: str = "lowest") -> Decomposition:
    """Lemma-style supporting functional at ``x``: ``f0 = sign(x_k) e_k`` plus the row signs.

    ``tie_rule`` picks ``k`` among maximal coordinates: ``"lowest"`` or ``"highest"`` index.
    The returned decomposition's target satisfies ``f(x) = p(x)`` and lies on the dual sphere.
    """
    if x.is_zero():
        raise PreconditionError("supporting functional of the zero vector")
    top = norm_value(x, "sup")
    ties = [i for i, a in x.entries if scalars_equal(abs(a), top)]
    if tie_rule == "lowest":
        k = ties[0]
    elif tie_rule == "highest":
        k = ties[-1]
    else:
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    f0 = FiniteVector(((k, Fraction(sign(x[k]))),), spec.dim)
    s = tuple(Fraction(sign(a)) for a in spec.row_values(x))
    rep = DualBallRep.from_spec(spec)
    partial = Decomposition(f0, s, f0)
    return Decomposition(f0, s, partial.assemble(rep))


def _require_unit(value, what: str):
    if isinstance(value, Fraction):
        ok = value == 1
    else:
        ok = scalars_equal(value, 1.0, 1e-7)
    if not ok:
        raise PreconditionError(f"{what} is {value}, expected 1")


def decompose_attaining(rep: DualBallRep, f: FiniteVector, x: FiniteVector,
                        check_norms: bool = True) -> Decomposition | None:
    """A decomposition of ``f`` witnessing attainment at ``x``, or None when none exists.

    Constraints: ``f = f0 + sum s_n r_n v_n``, ``||f0||_1 <= 1``, ``|s_n| <= 1``,
    ``s_n = sign(v_n(x))`` wherever ``v_n(x) != 0`` and ``f0(x) = ||x||_inf``.
    ``s_n`` stays free (within [-1, 1]) on rows that vanish at ``x``.
    """
    rep._check(f)
    rep._check(x)
    exact = f.exact and x.exact
    if check_norms:
        _require_unit(support_function(rep, x), "p(x)")
        _require_unit(rep_dual_norm(rep, f, exact=exact), "p*(f)")
    d, M = rep.dim, rep.M
    G, U, S = 0, d, 2 * d
    nv = 2 * d + M
    acts = [pair(vn, x) for _, vn in rep.segments]
    xd = x.dense()
    A_eq, b_eq = [], []
    fd = f.dense()
    for i in range(d):
        row = {G + i: 1}
        for n, (rn, vn) in enumerate(rep.segments):
            a = vn[i + 1]
            if a:
                row[S + n] = rn * a
        A_eq.append(row)
        b_eq.append(fd[i])
    for n, a in enumerate(acts):
        sg = sign(a)
        if sg:
            A_eq.append({S + n: 1})
            b_eq.append(sg)
    A_eq.append({G + i: xd[i] for i in range(d) if xd[i]})
    b_eq.append(norm_value(x, "sup"))
    A_ub, b_ub = [], []
    for i in range(d):
        A_ub += [{G + i: 1, U + i: -1}, {G + i: -1, U + i: -1}]
        b_ub += [0, 0]
    A_ub.append({U + i: 1 for i in range(d)})
    b_ub.append(rep.cross_radius)
    for n in range(M):
        A_ub += [{S + n: 1}, {S + n: -1}]
        b_ub += [1, 1]
    free = list(range(G, G + d)) + list(range(S, S + M))
    res = linprog([0] * nv, A_ub, b_ub, A_eq, b_eq, free=free, exact=exact)
    if res.status != OPTIMAL:
        return None
    f0 = FiniteVector.from_dense(res.x[:d], d)
    return Decomposition(f0, tuple(res.x[S:S + M]), f)


def read_dual_norm(spec: ReadNormSpec, f: FiniteVector, exact: bool | None = None):
    """Dual norm ``p*(f)``.

    Uses the support program: with geometric weights far below float resolution the
    float basis of the gauge program needs many exact repair pivots, while the
    support basis is typically optimal as returned.
    """
    return dual_norm_support(spec, f, exact)[0]


__all__ = ["DualBallRep", "Decomposition", "PreconditionError", "support_function",
           "dual_norm_gauge", "dual_norm_support", "rep_dual_norm", "supporting_functional",
           "decompose_attaining", "read_dual_norm"]
