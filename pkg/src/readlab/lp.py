"""Linear programming with exact rational answers.

The exact path solves the program in floating point with HiGHS, reads off the
final basis, and re-derives that basis exactly: primal values from ``B x_B = b``
and duals from ``B^T y = c_B``.  When the basis is primal and dual feasible in
rational arithmetic the vertex is certified optimal.  Otherwise, or when HiGHS
reports a non-optimal status, a two-phase tableau simplex over Fractions with
Bland's rule decides the program from scratch.

Programs are given as::

    minimize (or maximize) c.x
    subject to  A_ub x <= b_ub,  A_eq x == b_eq,
                x_j >= 0 unless j in ``free``

with constraint rows as ``{column: coefficient}`` dicts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import highspy
import numpy as np

from .core import ReadlabError
from .linalg import SingularError, solve_domain, sparse_to_domain

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPError(ReadlabError):
    pass


@dataclass
class LPResult:
    status: str
    x: list | None
    value: Fraction | float | None
    exact: bool
    method: str


@dataclass
class _Standard:
    """min c.x, A x = b, x >= 0, b >= 0; column map back to user variables."""

    rows: list          # list of dict col -> Fraction
    b: list
    c: list
    ncols: int
    plus: list          # user var j -> standard column of its positive part
    minus: dict         # user var j -> standard column of its negative part
    slack_of_row: dict  # standard row -> slack column (ub rows only)


def _standardize(c, A_ub, b_ub, A_eq, b_eq, free, nvars) -> _Standard:
    plus = list(range(nvars))
    minus = {}
    col = nvars
    for j in sorted(free):
        minus[j] = col
        col += 1
    rows, b, slack_of_row = [], [], {}
    for i, (row, rhs) in enumerate(zip(A_ub, b_ub)):
        r = {}
        for j, a in row.items():
            a = Fraction(a)
            if a == 0:
                continue
            r[j] = r.get(j, 0) + a
            if j in minus:
                r[minus[j]] = r.get(minus[j], 0) - a
        r[col] = Fraction(1)
        slack_of_row[i] = col
        col += 1
        rows.append(r)
        b.append(Fraction(rhs))
    for row, rhs in zip(A_eq, b_eq):
        r = {}
        for j, a in row.items():
            a = Fraction(a)
            if a == 0:
                continue
            r[j] = r.get(j, 0) + a
            if j in minus:
                r[minus[j]] = r.get(minus[j], 0) - a
        rows.append(r)
        b.append(Fraction(rhs))
    for i in range(len(rows)):
        if b[i] < 0:
            rows[i] = {j: -a for j, a in rows[i].items()}
            b[i] = -b[i]
    cc = [Fraction(0)] * col
    for j, a in enumerate(c):
        cc[j] = Fraction(a)
        if j in minus:
            cc[minus[j]] = -Fraction(a)
    return _Standard(rows, b, cc, col, plus, minus, slack_of_row)


def _user_x(std: _Standard, xs: Sequence) -> list:
    out = []
    for j, pj in enumerate(std.plus):
        v = xs[pj]
        if j in std.minus:
            v = v - xs[std.minus[j]]
        out.append(v)
    return out


# ---------------------------------------------------------------- float solve

def _highs(c, A_ub, b_ub, A_eq, b_eq, free, nvars):
    m_ub, m_eq = len(A_ub), len(A_eq)
    cols: list[list] = [[] for _ in range(nvars)]
    for i, row in enumerate(list(A_ub) + list(A_eq)):
        for j, a in row.items():
            if a != 0:
                cols[j].append((i, float(a)))
    start, index, value = [0], [], []
    for entries in cols:
        for i, a in entries:
            index.append(i)
            value.append(a)
        start.append(len(index))
    inf = highspy.kHighsInf
    lp = highspy.HighsLp()
    lp.num_col_ = nvars
    lp.num_row_ = m_ub + m_eq
    lp.col_cost_ = np.array([float(a) for a in c], dtype=float)
    lp.col_lower_ = np.array([-inf if j in free else 0.0 for j in range(nvars)])
    lp.col_upper_ = np.full(nvars, inf)
    lp.row_lower_ = np.array([-inf] * m_ub + [float(v) for v in b_eq], dtype=float)
    lp.row_upper_ = np.array([float(v) for v in b_ub] + [float(v) for v in b_eq], dtype=float)
    lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
    lp.a_matrix_.start_ = np.array(start, dtype=np.int32)
    lp.a_matrix_.index_ = np.array(index, dtype=np.int32)
    lp.a_matrix_.value_ = np.array(value, dtype=float)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.passModel(lp)
    h.run()
    return h


# ---------------------------------------------------------- exact crossover

def _crossover(std: _Standard, h, m_ub: int, free) -> list | None:
    """Exact optimal standard-form solution from the HiGHS basis, or None.

    Rows whose slack is basic drop out of the basis system: their duals are zero
    and their slack values follow from the structural solution.  Basic free
    variables are solved as a single signed column.
    """
    basis = h.getBasis()
    if not basis.valid:
        return None
    kBasic = highspy.HighsBasisStatus.kBasic
    structural = [j for j, st in enumerate(basis.col_status) if st == kBasic]
    slack_rows = set()
    for i, st in enumerate(basis.row_status):
        if st == kBasic:
            if i >= m_ub:
                return None
            slack_rows.add(i)
    active = [i for i in range(len(std.rows)) if i not in slack_rows]
    k = len(structural)
    if k != len(active):
        return None
    pos = {j: n for n, j in enumerate(structural)}
    B = sparse_to_domain([{pos[j]: a for j, a in std.rows[i].items() if j in pos}
                          for i in active], k)
    try:
        xb = solve_domain(B, [std.b[i] for i in active]) if k else []
    except SingularError:
        return None
    xs = [Fraction(0)] * std.ncols
    for j, v in zip(structural, xb):
        if v < 0:
            if j not in std.minus:
                return None
            xs[std.minus[j]] = -v
        else:
            xs[j] = v
    for i in slack_rows:
        r = std.rows[i]
        sc = std.slack_of_row[i]
        val = (std.b[i] - sum((a * xs[j] for j, a in r.items() if j != sc and xs[j]),
                              Fraction(0))) / r[sc]
        if val < 0:
            return None
        xs[sc] = val
    # duals on active rows: B^T y = c_B (plus-part costs; the minus part is its negation)
    Bt_rows = [dict() for _ in range(k)]
    for n, i in enumerate(active):
        for j, a in std.rows[i].items():
            if j in pos:
                Bt_rows[pos[j]][n] = a
    try:
        y = solve_domain(sparse_to_domain(Bt_rows, k), [std.c[j] for j in structural]) if k else []
    except SingularError:
        return None
    reduced = list(std.c)
    for n, i in enumerate(active):
        yi = y[n]
        if yi:
            for j, a in std.rows[i].items():
                reduced[j] -= yi * a
    basic = set(structural) | {std.minus[j] for j in structural if j in std.minus}
    basic |= {std.slack_of_row[i] for i in slack_rows}
    for j in range(std.ncols):
        if j not in basic and reduced[j] < 0:
            # primal feasible but not optimal: continue exactly from this basis
            full = [std.minus[j] if xs[j] == 0 and j in std.minus and xs[std.minus[j]] else j
                    for j in structural]
            full += [std.slack_of_row[i] for i in sorted(slack_rows)]
            return _revised_phase2(std, full)
    return xs


_STALL_LIMIT = 20
"""Consecutive degenerate pivots after which pricing switches to Bland's rule."""


def _revised_phase2(std: _Standard, basis: list) -> list | None:
    """Exact revised simplex from a primal feasible basis.

    Pricing is Dantzig's rule; after a run of degenerate pivots it falls back to
    Bland's rule, which cannot cycle, until the objective moves again.
    """
    m = len(std.rows)
    columns: list[dict] = [dict() for _ in range(std.ncols)]
    for i, r in enumerate(std.rows):
        for j, a in r.items():
            columns[j][i] = a
    basis = list(basis)
    stalled = 0
    while True:
        pos = {j: k for k, j in enumerate(basis)}
        B = sparse_to_domain([{pos[j]: a for j, a in r.items() if j in pos} for r in std.rows], m)
        Bt = sparse_to_domain([columns[j] for j in basis], m)
        try:
            xb = solve_domain(B, std.b)
            y = solve_domain(Bt, [std.c[j] for j in basis])
        except SingularError:
            return None
        q, q_rc = None, Fraction(0)
        for j in range(std.ncols):
            if j not in pos:
                rc = std.c[j] - sum((y[i] * a for i, a in columns[j].items() if y[i]), Fraction(0))
                if rc < q_rc:
                    q, q_rc = j, rc
                    if stalled >= _STALL_LIMIT:
                        break       # Bland: first improving column
        if q is None:
            xs = [Fraction(0)] * std.ncols
            for j, v in zip(basis, xb):
                xs[j] = v
            return xs
        aq = [Fraction(0)] * m
        for i, a in columns[q].items():
            aq[i] = a
        d = solve_domain(B, aq)
        best, leave = None, None
        for k, dk in enumerate(d):
            if dk > 0:
                ratio = xb[k] / dk
                if best is None or ratio < best or (ratio == best and basis[k] < basis[leave]):
                    best, leave = ratio, k
        if leave is None:
            return None
        stalled = stalled + 1 if best == 0 else 0
        basis[leave] = q


# ------------------------------------------------------------ exact simplex

def _pivot(T, rhs, obj_rows, r, q):
    row = T[r]
    piv = row[q]
    if piv != 1:
        inv = 1 / piv
        T[r] = row = [a * inv if a else a for a in row]
        rhs[r] *= inv
    nz = [(j, a) for j, a in enumerate(row) if a]
    for i in range(len(T)):
        if i == r:
            continue
        f = T[i][q]
        if f:
            Ti = T[i]
            for j, a in nz:
                Ti[j] -= f * a
            rhs[i] -= f * rhs[r]
    for obj in obj_rows:
        f = obj[0][q]
        if f:
            for j, a in nz:
                obj[0][j] -= f * a
            obj[1][0] -= f * rhs[r]


def _run_bland(T, rhs, basis, objs, allowed):
    """Minimize the first cost row in ``objs``; every row in ``objs`` is kept reduced."""
    obj = objs[0][0]
    while True:
        q = next((j for j in range(len(obj)) if allowed[j] and obj[j] < 0), None)
        if q is None:
            return OPTIMAL
        best, r = None, None
        for i, row in enumerate(T):
            if row[q] > 0:
                ratio = rhs[i] / row[q]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                    best, r = ratio, i
        if r is None:
            return UNBOUNDED
        _pivot(T, rhs, objs, r, q)
        basis[r] = q


def simplex_exact(std: _Standard) -> tuple[str, list | None]:
    """Two-phase tableau simplex over Fractions with Bland's rule."""
    m, n = len(std.rows), std.ncols
    slack_cols = set(std.slack_of_row.values())
    # rows whose slack kept coefficient +1 start with the slack basic
    slack_basic = {}
    for i, r in enumerate(std.rows):
        for j, a in r.items():
            if j in slack_cols and a == 1:
                slack_basic[i] = j
                break
    art_rows = [i for i in range(m) if i not in slack_basic]
    width = n + len(art_rows)
    T = []
    for r in std.rows:
        row = [Fraction(0)] * width
        for j, a in r.items():
            row[j] = a
        T.append(row)
    rhs = list(std.b)
    basis = [0] * m
    for i, j in slack_basic.items():
        basis[i] = j
    for k, i in enumerate(art_rows):
        T[i][n + k] = Fraction(1)
        basis[i] = n + k
    # phase 1 minimizes the artificial sum, carrying the phase 2 costs along
    obj1 = [Fraction(0)] * width
    val1 = [Fraction(0)]
    for k in range(len(art_rows)):
        obj1[n + k] = Fraction(1)
    for i in art_rows:
        for j in range(width):
            if T[i][j]:
                obj1[j] -= T[i][j]
        val1[0] -= rhs[i]
    obj2 = list(std.c) + [Fraction(0)] * len(art_rows)
    val2 = [Fraction(0)]
    for i in range(m):
        f = obj2[basis[i]]
        if f:
            for j in range(width):
                if T[i][j]:
                    obj2[j] -= f * T[i][j]
            val2[0] -= f * rhs[i]
    status = _run_bland(T, rhs, basis, [(obj1, val1), (obj2, val2)], [True] * width)
    if status != OPTIMAL:
        raise LPError("phase 1 cannot be unbounded")
    if val1[0] != 0:
        return INFEASIBLE, None
    for i in range(m):
        if basis[i] >= n:
            q = next((j for j in range(n) if T[i][j] != 0), None)
            if q is not None:
                _pivot(T, rhs, [(obj2, val2)], i, q)
                basis[i] = q
    allowed = [j < n for j in range(width)]
    if _run_bland(T, rhs, basis, [(obj2, val2)], allowed) == UNBOUNDED:
        return UNBOUNDED, None
    xs = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            xs[j] = rhs[i]
    return OPTIMAL, xs


# --------------------------------------------------------------- front door

def linprog(c: Sequence, A_ub: Sequence[dict] = (), b_ub: Sequence = (),
            A_eq: Sequence[dict] = (), b_eq: Sequence = (), free=(),
            maximize: bool = False, exact: bool = True) -> LPResult:
    nvars = len(c)
    free = frozenset(free)
    c_min = [-a for a in c] if maximize else list(c)
    flip = -1 if maximize else 1
    h = _highs(c_min, A_ub, b_ub, A_eq, b_eq, free, nvars)
    status = h.getModelStatus()
    MS = highspy.HighsModelStatus
    if not exact:
        if status == MS.kOptimal:
            x = list(h.getSolution().col_value)
            return LPResult(OPTIMAL, x, flip * h.getInfo().objective_function_value,
                            False, "float")
        if status == MS.kInfeasible:
            return LPResult(INFEASIBLE, None, None, False, "float")
        if status in (MS.kUnbounded, MS.kUnboundedOrInfeasible):
            return LPResult(UNBOUNDED, None, None, False, "float")
        raise LPError(f"HiGHS returned {h.modelStatusToString(status)}")
    std = _standardize(c_min, A_ub, b_ub, A_eq, b_eq, free, nvars)
    xs = None
    if status == MS.kOptimal:
        xs = _crossover(std, h, len(A_ub), free)
    method = "crossover"
    if xs is None:
        log.debug("crossover failed (HiGHS status %s); exact simplex", status)
        st, xs = simplex_exact(std)
        method = "simplex"
        if st != OPTIMAL:
            return LPResult(st, None, None, True, method)
    x = _user_x(std, xs)
    value = sum((Fraction(a) * v for a, v in zip(c, x) if a), Fraction(0))
    return LPResult(OPTIMAL, x, value, True, method)
