"""Operator ranges inside l1 built from real polynomials sampled at geometric nodes.

The disc operator sends a real polynomial ``f`` to ``(f(t_1), f(t_2)/2, f(t_3)/4, ...)``
with ``t_k = 2^-k``.  A nonzero polynomial of degree ``d`` vanishes at no more than
``d`` nodes, so every nonzero image has only finitely many zero coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .core import FiniteVector, ReadlabError, norm_value, pair
from .linalg import SingularError, rank, solve_least_columns


class RangeError(ReadlabError):
    pass


@dataclass(frozen=True)
class RealPolynomial:
    """Polynomial with rational coefficients in ascending degree order."""

    coefficients: tuple = ()

    def __post_init__(self):
        coeffs = [Fraction(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def constant(cls, c) -> "RealPolynomial":
        return cls((c,))

    @classmethod
    def from_roots(cls, roots: Sequence, lead=1) -> "RealPolynomial":
        p = cls.constant(lead)
        for a in roots:
            p = p * cls((-Fraction(a), 1))
        return p

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def __call__(self, z):
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc

    def __add__(self, other: "RealPolynomial") -> "RealPolynomial":
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        return RealPolynomial(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                                    for i in range(n)))

    def __mul__(self, other) -> "RealPolynomial":
        if not isinstance(other, RealPolynomial):
            return RealPolynomial(tuple(c * other for c in self.coefficients))
        a, b = self.coefficients, other.coefficients
        if not a or not b:
            return RealPolynomial()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return RealPolynomial(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RealPolynomial":
        result, base = RealPolynomial.constant(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def to_json(self) -> list:
        return [f"{c.numerator}/{c.denominator}" for c in self.coefficients]


def dyadic_points(N: int, base: int = 2) -> list[Fraction]:
    """Nodes ``base^-1, ..., base^-N``."""
    if N < 1:
        raise ValueError(f"need at least one node, got N={N}")
    return [Fraction(1, base ** k) for k in range(1, N + 1)]


def disc_operator_apply(f: RealPolynomial, N: int, base: int = 2) -> FiniteVector:
    """First ``N`` coordinates of the image: coordinate k is ``f(t_k) / 2^(k-1)``."""
    nodes = dyadic_points(N, base)
    return FiniteVector.from_dense([f(t) / 2 ** (k - 1) for k, t in enumerate(nodes, start=1)], N)


def _bump(m: int) -> RealPolynomial:
    t = Fraction(1, 2 ** m)
    # (4 - (z - t)^2) / 4
    return RealPolynomial((1 - t * t / 4, t / 2, Fraction(-1, 4)))


def density_witness(m: int, n: int) -> RealPolynomial:
    """``(¼(4 - (z - t_m)^2))^n``: equal to 1 at t_m and in (0, 1) at the other nodes."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    return _bump(m) ** n


def density_error(m: int, n: int, N: int) -> Fraction:
    """Exact ``||T(density_witness(m, n)) - e_m / 2^(m-1)||_1`` over the first N coordinates."""
    f = _bump(m)
    total = Fraction(0)
    for k, t in enumerate(dyadic_points(N), start=1):
        v = f(t) ** n
        total += abs(v - 1) / 2 ** (k - 1) if k == m else v / 2 ** (k - 1)
    return total


def density_errors(m: int, n_max: int, N: int) -> list[Fraction]:
    """``density_error(m, n, N)`` for n = 1..n_max, computed by running products."""
    f = _bump(m)
    vals = [f(t) for t in dyadic_points(N)]
    powers = list(vals)
    out = []
    for _ in range(n_max):
        out.append(sum((p / 2 ** k for k, p in enumerate(powers) if k != m - 1), Fraction(0)))
        powers = [p * v for p, v in zip(powers, vals)]
    return out


def zero_coordinate_count(f: RealPolynomial, N: int) -> int:
    """Number of nodes t_1..t_N where ``f`` vanishes (at most its degree)."""
    if f.is_zero():
        raise ValueError("zero polynomial has every coordinate zero")
    return sum(1 for t in dyadic_points(N) if f(t) == 0)


@lru_cache(maxsize=64)
def _lagrange_basis(nodes: tuple) -> tuple:
    """Coefficient lists of the Lagrange basis polynomials for ``nodes``."""
    full = RealPolynomial((Fraction(1),))
    for xj in nodes:
        full = full * RealPolynomial((-xj, Fraction(1)))
    out = []
    for i, xi in enumerate(nodes):
        # synthetic division of prod (z - x_j) by (z - x_i)
        c = full.coefficients
        q = [Fraction(0)] * (len(c) - 1)
        acc = Fraction(0)
        for k in range(len(c) - 1, 0, -1):
            acc = c[k] + acc * xi
            q[k - 1] = acc
        denom = Fraction(1)
        for j, xj in enumerate(nodes):
            if j != i:
                denom *= xi - xj
        out.append(tuple(a / denom for a in q))
    return tuple(out)


def interpolate(nodes: Sequence, values: Sequence) -> RealPolynomial:
    """Lagrange interpolation through ``(nodes[i], values[i])`` in exact arithmetic."""
    nodes = tuple(Fraction(x) for x in nodes)
    if len(set(nodes)) != len(nodes):
        raise ValueError("interpolation nodes must be distinct")
    coeffs = [Fraction(0)] * len(nodes)
    for basis, yi in zip(_lagrange_basis(nodes), values):
        if yi:
            for k, a in enumerate(basis):
                coeffs[k] += yi * a
    return RealPolynomial(tuple(coeffs))


def polynomial_with_image(target: Sequence) -> RealPolynomial:
    """Degree < N polynomial whose disc image starts with ``target`` (length N)."""
    N = len(target)
    nodes = dyadic_points(N)
    return interpolate(nodes, [Fraction(v) * 2 ** k for k, v in enumerate(target)])


def scaling_coefficients(preimage_norms: Sequence) -> list:
    """``s_n = min(1, 1/||T^-1 u_n||)`` for each preimage norm."""
    out = []
    for a in preimage_norms:
        if a <= 0:
            raise ValueError(f"preimage norms must be positive, got {a}")
        out.append(min(Fraction(1) if isinstance(a, (int, Fraction)) else 1.0, 1 / a))
    return out


@dataclass(frozen=True)
class OperatorColumns:
    """Linear operator stored by its columns (column n is the image of e_n)."""

    columns: tuple
    codomain_dim: int

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        for c in self.columns:
            if c.dim != self.codomain_dim:
                raise ValueError(f"column of dimension {c.dim} in codomain {self.codomain_dim}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "OperatorColumns":
        m = len(rows)
        k = len(rows[0]) if rows else 0
        return cls(tuple(FiniteVector.from_dense([rows[i][j] for i in range(m)], m)
                         for j in range(k)), m)

    @classmethod
    def identity(cls, n: int, scale=1) -> "OperatorColumns":
        return cls(tuple(FiniteVector.basis(i, n) * Fraction(scale) for i in range(1, n + 1)), n)

    @property
    def domain_dim(self) -> int:
        return len(self.columns)

    def column(self, n: int) -> FiniteVector:
        return self.columns[n - 1]

    def apply(self, x: Sequence) -> FiniteVector:
        if isinstance(x, FiniteVector):
            x = x.dense()
        if len(x) != self.domain_dim:
            raise ValueError(f"operator takes {self.domain_dim} coordinates, got {len(x)}")
        out = FiniteVector.zero(self.codomain_dim)
        for a, col in zip(x, self.columns):
            if a:
                out = out + col * a
        return out

    def compose(self, inner: "OperatorColumns") -> "OperatorColumns":
        """``self ∘ inner``."""
        return OperatorColumns(tuple(self.apply(c) for c in inner.columns), self.codomain_dim)

    def transpose_apply(self, f: FiniteVector) -> FiniteVector:
        return FiniteVector.from_dense([pair(f, c) for c in self.columns], self.domain_dim)

    def rows(self) -> list[list]:
        dense = [c.dense() for c in self.columns]
        return [[dense[j][i] for j in range(self.domain_dim)] for i in range(self.codomain_dim)]

    def column_norms(self, which: str = "l1") -> list:
        return [norm_value(c, which) for c in self.columns]

    def l1_operator_norm(self):
        """Norm as a map l1 -> l1 (largest column l1 norm)."""
        return max(self.column_norms("l1"), default=Fraction(0))

    def rank(self) -> int:
        return rank([c.dense() for c in self.columns]) if self.columns else 0

    def is_injective(self) -> bool:
        return self.rank() == self.domain_dim

    def preimage(self, w: FiniteVector) -> list | None:
        """Exact coefficients a with ``apply(a) == w``; None if ``w`` is outside the range."""
        return solve_least_columns([c.dense() for c in self.columns], w.dense())

    def to_json(self) -> list:
        return [[f"{Fraction(v).numerator}/{Fraction(v).denominator}" for v in row]
                for row in self.rows()]

    @classmethod
    def from_json(cls, data) -> "OperatorColumns":
        return cls.from_rows([[Fraction(v) for v in row] for row in data])


def disc_operator_columns(K: int, N: int, base: int = 2) -> OperatorColumns:
    """Images of the monomials 1, z, ..., z^(K-1) under the node operator with t_k = base^-k."""
    cols = []
    for j in range(K):
        mono = RealPolynomial(tuple([0] * j + [1]))
        cols.append(disc_operator_apply(mono, N, base))
    return OperatorColumns(tuple(cols), N)


def range_intersection_dim(U1: OperatorColumns, U2: OperatorColumns) -> int:
    """dim(range U1 ∩ range U2) by exact ranks."""
    joint = OperatorColumns(U1.columns + U2.columns, U1.codomain_dim)
    return U1.rank() + U2.rank() - joint.rank()


def default_eps_rule(n: int, preimage_norm) -> Fraction:
    """``2^-n / (1 + ||T1^-1 w_n||)``."""
    return Fraction(1, 2 ** n) / (1 + preimage_norm)


def halving_eps_rule(n: int, preimage_norm) -> Fraction:
    return Fraction(1, 2 ** n)


def zero_eps_rule(n: int, preimage_norm) -> Fraction:
    return Fraction(0)


@dataclass(frozen=True)
class DenseImage:
    operator: OperatorColumns
    deviations: tuple        # ||col_n / ||col_n|| - w_n||_1
    deviation_bounds: tuple  # 2 eps_n ||T1^-1 w_n|| ||T1 U2||
    eps: tuple
    scales: tuple
    preimage_norms: tuple


def dense_normalized_columns(targets: Sequence[FiniteVector], T1: OperatorColumns,
                             U2: OperatorColumns,
                             eps_rule: Callable = default_eps_rule,
                             U1: OperatorColumns | None = None) -> DenseImage:
    """Columns ``s_n T1(u_n + eps_n U2 e_n)`` whose directions track the unit targets ``w_n``.

    ``u_n = T1^-1(w_n)/||T1^-1(w_n)||``.  The scale ``s_n`` uses the preimage norm of
    ``u_n`` under ``U1`` when given and is 1 otherwise.  All norms are l1.
    """
    if not T1.is_injective():
        raise RangeError("T1 is not injective")
    if U2.domain_dim < len(targets) or U2.codomain_dim != T1.domain_dim:
        raise RangeError("U2 must map at least len(targets) coordinates into the domain of T1")
    TU2 = T1.compose(U2)
    TU2_norm = TU2.l1_operator_norm()
    cols, devs, bounds, epss, scales, pnorms = [], [], [], [], [], []
    for n, w in enumerate(targets, start=1):
        if norm_value(w, "l1") != 1:
            raise ValueError(f"target {n} is not an l1 unit vector")
        a = T1.preimage(w)
        if a is None:
            raise RangeError(f"target {n} is not in the range of T1")
        a_vec = FiniteVector.from_dense(a)
        a_norm = norm_value(a_vec, "l1")
        u = a_vec / a_norm
        if U1 is not None:
            b = U1.preimage(u)
            if b is None:
                raise RangeError(f"u_{n} is not in the range of U1")
            s = scaling_coefficients([norm_value(FiniteVector.from_dense(b), "l1")])[0]
        else:
            s = Fraction(1)
        eps = Fraction(eps_rule(n, a_norm))
        inner = u + U2.column(n) * eps
        col = T1.apply(inner) * s
        direction = col / norm_value(col, "l1")
        cols.append(col)
        devs.append(norm_value(direction - w, "l1"))
        bounds.append(2 * eps * a_norm * TU2_norm)
        epss.append(eps)
        scales.append(s)
        pnorms.append(a_norm)
    op = OperatorColumns(tuple(cols), T1.codomain_dim)
    return DenseImage(op, tuple(devs), tuple(bounds), tuple(epss), tuple(scales), tuple(pnorms))


class DependenceError(ReadlabError, ValueError):
    pass


def biorthogonal_system(w: Sequence[FiniteVector]) -> tuple[list[FiniteVector], list[FiniteVector]]:
    """Gram-Schmidt on ``w`` in exact arithmetic, giving ``v_star[i](v[j]) == δ_ij``.

    ``span(v[:k]) == span(w[:k])`` for every k; each ``v[i]`` has sup norm 1 and
    ``v_star[i]`` is rescaled to compensate.
    """
    hs: list[FiniteVector] = []
    for k, wk in enumerate(w, start=1):
        h = wk
        for g in hs:
            h = h - g * (pair(g, wk) / pair(g, g))
        if h.is_zero():
            raise DependenceError(f"w_{k} lies in the span of the previous vectors")
        hs.append(h)
    v, v_star = [], []
    for h in hs:
        gram = pair(h, h)
        scale = norm_value(h, "sup")
        v.append(h / scale)
        v_star.append(h * (scale / gram))
    return v, v_star


def direct_sum_extension(y_star: Sequence[FiniteVector], T: OperatorColumns,
                         partition_block_of: Callable[[int], int] | Mapping[int, int],
                         shrink: bool = True) -> OperatorColumns:
    """Columns ``y_star[block(k)] + T(e_k)/k`` (``T(e_k)`` itself when ``shrink`` is False).

    Blocks are numbered from 1.
    """
    lookup = partition_block_of.get if isinstance(partition_block_of, Mapping) \
        else partition_block_of
    cols = []
    for k, tk in enumerate(T.columns, start=1):
        n = lookup(k)
        if n is None or not 1 <= n <= len(y_star):
            raise RangeError(f"column {k} is not assigned to a block")
        tail = tk * Fraction(1, k) if shrink else tk
        cols.append(y_star[n - 1] + tail)
    return OperatorColumns(tuple(cols), T.codomain_dim)


def modest_image(v: Sequence[FiniteVector], f: RealPolynomial) -> FiniteVector:
    """``sum_k f(t_k)/2^(k-1) v_k``: the disc image pushed through the basis ``v``."""
    coeffs = disc_operator_apply(f, len(v)).dense()
    out = FiniteVector.zero(v[0].dim)
    for a, vk in zip(coeffs, v):
        if a:
            out = out + vk * a
    return out


def recover_coefficients(v_star: Sequence[FiniteVector], w: FiniteVector) -> list:
    """``[v_star_l(w)]``; on the span of a biorthogonal system this inverts the expansion."""
    return [pair(vs, w) for vs in v_star]


__all__ = [
    "RealPolynomial", "OperatorColumns", "DenseImage", "RangeError", "DependenceError",
    "dyadic_points", "disc_operator_apply", "density_witness", "density_error",
    "density_errors", "zero_coordinate_count", "interpolate", "polynomial_with_image",
    "scaling_coefficients", "disc_operator_columns", "range_intersection_dim",
    "default_eps_rule", "halving_eps_rule", "zero_eps_rule", "dense_normalized_columns",
    "biorthogonal_system", "direct_sum_extension", "modest_image", "recover_coefficients",
    "SingularError",
]
