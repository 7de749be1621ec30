"""Exact rational linear algebra on top of sympy's DomainMatrix over QQ."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from .core import ReadlabError


class SingularError(ReadlabError):
    pass


def _qq(v):
    v = Fraction(v)
    return QQ(v.numerator, v.denominator)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def to_domain(rows: Sequence[Sequence]) -> DomainMatrix:
    rows = [list(r) for r in rows]
    ncols = len(rows[0]) if rows else 0
    data = {}
    for i, r in enumerate(rows):
        nz = {j: _qq(v) for j, v in enumerate(r) if v != 0}
        if nz:
            data[i] = nz
    return DomainMatrix(data, (len(rows), ncols), QQ)


def sparse_to_domain(rows: Sequence[dict], ncols: int) -> DomainMatrix:
    data = {}
    for i, r in enumerate(rows):
        nz = {j: _qq(v) for j, v in r.items() if v != 0}
        if nz:
            data[i] = nz
    return DomainMatrix(data, (len(rows), ncols), QQ)


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return to_domain(rows).rank()


def solve_domain(A: DomainMatrix, b: Sequence) -> list[Fraction]:
    """Solve the square system A x = b exactly."""
    n = A.shape[0]
    rhs = DomainMatrix({i: {0: _qq(v)} for i, v in enumerate(b) if v != 0}, (n, 1), QQ)
    try:
        sol = A.lu_solve(rhs)
    except DMNonInvertibleMatrixError as exc:
        raise SingularError("singular system") from exc
    out = [Fraction(0)] * n
    for i, row in sol.to_sdm().items():
        for _, v in row.items():
            out[i] = _frac(v)
    return out


def solve(rows: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    return solve_domain(to_domain(rows), b)


def solve_least_columns(columns: Sequence[Sequence], target: Sequence) -> list[Fraction] | None:
    """Coefficients a with sum_j a_j columns[j] == target, or None if target is outside the span.

    Columns must be linearly independent.
    """
    m = len(target)
    k = len(columns)
    aug = [[columns[j][i] for j in range(k)] + [target[i]] for i in range(m)]
    R, pivots = to_domain(aug).rref()
    if k in pivots:
        return None
    if len(pivots) < k:
        raise SingularError("columns are linearly dependent")
    sdm = R.to_sdm()
    out = [Fraction(0)] * k
    for i, pc in enumerate(pivots):
        out[pc] = _frac(sdm.get(i, {}).get(k, QQ(0)))
    return out
