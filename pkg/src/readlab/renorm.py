"""Norm families on truncated c0: Read norms, their ball-sum smoothing, Acosta norms.

A Read norm is ``p(x) = ||x||_inf + sum_n r_n |v_n(x)|`` for functional rows ``v_n``
and positive weights ``r_n`` with ``rho = sum r_n``.  Since ``||R|| <= rho`` it is
equivalent to the sup norm with constants 1 and ``1 + rho``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import sympy

from . import kernels
from .core import (FiniteVector, ReadlabError, canonical_hash, dense_dot, format_scalar,
                   is_exact, norm_value, pair, parse_scalar, random_integer_vector)
from .discrange import OperatorColumns, biorthogonal_system, disc_operator_apply, \
    polynomial_with_image

BUDGET_MARGIN = Fraction(1, 100)
"""Weights are scaled to ``(1 - margin)`` times the operator-norm budget."""


class SpecError(ReadlabError, ValueError):
    pass


def epsilon_budget(epsilon) -> Fraction:
    """Largest admissible ``rho``: ``epsilon / (2 - epsilon)`` (strict)."""
    epsilon = Fraction(epsilon)
    return epsilon / (2 - epsilon)


@dataclass(frozen=True)
class ReadNormSpec:
    dim: int
    r: tuple
    V: tuple
    epsilon: Fraction | None = None
    generator: str = "explicit"
    seed: int | None = None
    covering_radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(Fraction(a) if is_exact(a) else float(a)
                                            for a in self.r))
        object.__setattr__(self, "V", tuple(self.V))
        if self.epsilon is not None:
            object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if len(self.r) != len(self.V):
            raise SpecError(f"{len(self.r)} weights for {len(self.V)} rows")
        if any(a <= 0 for a in self.r):
            raise SpecError("every weight r_n must be positive")
        seen = set()
        for n, v in enumerate(self.V, start=1):
            if v.dim != self.dim:
                raise SpecError(f"row {n} has dimension {v.dim}, expected {self.dim}")
            if v.is_zero():
                raise SpecError(f"row {n} is zero")
            key = (v / norm_value(v, "l1")).entries
            if key in seen:
                raise SpecError(f"row {n} duplicates the direction of an earlier row")
            seen.add(key)
        if self.epsilon is not None:
            if not 0 < self.epsilon < 2:
                raise SpecError(f"epsilon must lie in (0, 2), got {self.epsilon}")
            if not self.rho < epsilon_budget(self.epsilon):
                raise SpecError(f"rho = {self.rho} violates rho < epsilon/(2-epsilon) = "
                                f"{epsilon_budget(self.epsilon)}")

    @property
    def M(self) -> int:
        return len(self.V)

    @cached_property
    def rho(self):
        return sum(self.r, Fraction(0))

    @cached_property
    def V_dense(self) -> list[list]:
        return [v.dense() for v in self.V]

    @cached_property
    def V_array(self) -> np.ndarray:
        return np.array([[float(a) for a in row] for row in self.V_dense]).reshape(self.M, self.dim)

    @cached_property
    def r_array(self) -> np.ndarray:
        return np.array([float(a) for a in self.r])

    def row_values(self, x: FiniteVector) -> list:
        """``[v_n(x) for n = 1..M]``."""
        if x.dim != self.dim:
            raise SpecError(f"vector of dimension {x.dim} for a spec of dimension {self.dim}")
        xd = x.dense()
        if x.exact:
            return [dense_dot(row, xd) for row in self.V_dense]
        return (self.V_array @ np.asarray(xd, dtype=float)).tolist()

    def restrict(self, M: int) -> "ReadNormSpec":
        """The spec using only rows 1..M (the horizon-M member of the family)."""
        if not 1 <= M <= self.M:
            raise SpecError(f"horizon {M} outside 1..{self.M}")
        return ReadNormSpec(self.dim, self.r[:M], self.V[:M], self.epsilon,
                            self.generator, self.seed, self.covering_radius)

    def to_json(self) -> dict:
        out = {
            "schema": "readlab.read_spec/v1",
            "dim": self.dim,
            "base": "sup",
            "r": [format_scalar(a) for a in self.r],
            "V": [v.to_json() for v in self.V],
            "epsilon": None if self.epsilon is None else format_scalar(self.epsilon),
            "generator": self.generator,
            "seed": self.seed,
            "covering_radius": self.covering_radius,
        }
        out["hash"] = canonical_hash(out)
        return out

    @cached_property
    def hash(self) -> str:
        return self.to_json()["hash"]

    @classmethod
    def from_json(cls, data: dict, verify_hash: bool = True) -> "ReadNormSpec":
        if data.get("base", "sup") != "sup":
            raise SpecError(f"unsupported base norm {data['base']!r}")
        eps = data.get("epsilon")
        spec = cls(int(data["dim"]), tuple(parse_scalar(a) for a in data["r"]),
                   tuple(FiniteVector.from_json(row) for row in data["V"]),
                   None if eps is None else Fraction(eps), data.get("generator", "explicit"),
                   data.get("seed"), data.get("covering_radius"))
        if verify_hash and "hash" in data and data["hash"] != spec.hash:
            raise SpecError("spec hash does not match its contents")
        return spec


def p_norm(spec: ReadNormSpec, x: FiniteVector):
    """``||x||_inf + sum_n r_n |v_n(x)|``; exact when ``x`` is exact."""
    vals = spec.row_values(x)
    if x.exact:
        return norm_value(x, "sup") + sum((a * abs(b) for a, b in zip(spec.r, vals)), Fraction(0))
    return float(kernels.read_norm_batch(x.to_numpy(), spec.V_array, spec.r_array)[0])


def p_norm_batch(spec: ReadNormSpec, X: np.ndarray) -> np.ndarray:
    """Float Read norm of every row of ``X``."""
    return kernels.read_norm_batch(X, spec.V_array, spec.r_array)


def sup_mesh(dim: int, size: int, seed: int = 0) -> np.ndarray:
    """Deterministic points on the l1 unit sphere: ±e_i plus Laplace directions."""
    rng = np.random.default_rng([seed, dim, size])
    pts = rng.laplace(size=(size, dim))
    pts /= np.abs(pts).sum(axis=1, keepdims=True)
    eye = np.eye(dim)
    return np.vstack([eye, -eye, pts])


def covering_radius(V: Sequence[FiniteVector], mesh_size: int = 2048, seed: int = 0) -> float:
    """Worst l1 distance from a mesh point of the dual sphere to ``{±v_n/||v_n||_1}``."""
    dim = V[0].dim
    dirs = np.array([v.to_numpy() / float(norm_value(v, "l1")) for v in V])
    dirs = np.vstack([dirs, -dirs])
    return kernels.covering_radius(sup_mesh(dim, mesh_size, seed), dirs)


def geometric_weights(M: int, epsilon) -> tuple:
    """``r_n = c 2^-n`` with ``sum r_n = (1 - margin) * epsilon/(2 - epsilon)`` exactly."""
    target = (1 - BUDGET_MARGIN) * epsilon_budget(epsilon)
    c = target / (1 - Fraction(1, 2 ** M))
    return tuple(c / 2 ** n for n in range(1, M + 1))


def _disc_rows(dim: int, M: int, rng, bound: int) -> list[FiniteVector]:
    """Rows from disc images: interpolate a random full-support direction, then apply T."""
    rows, seen = [], set()
    while len(rows) < M:
        g = random_integer_vector(rng, dim, bound, nonzero=True)
        total = sum(abs(a) for a in g)
        target = [a / total for a in g]
        if tuple(target) in seen:
            continue
        seen.add(tuple(target))
        f = polynomial_with_image(target)
        rows.append(disc_operator_apply(f, dim))
    return rows


def _biortho_rows(dim: int, rng, bound: int) -> list[FiniteVector]:
    from .linalg import rank
    while True:
        w = [random_integer_vector(rng, dim, bound) for _ in range(dim)]
        if rank(w) == dim:
            break
    _, v_star = biorthogonal_system([FiniteVector.from_dense(a) for a in w])
    return [v / norm_value(v, "l1") for v in v_star]


def build_read_spec(dim: int, epsilon, generator: str = "disc", seed: int = 0,
                    rows: int | None = None, V: Sequence[FiniteVector] | None = None,
                    r: Sequence | None = None, mesh_size: int = 2048,
                    entry_bound: int = 9) -> ReadNormSpec:
    """Build a Read norm spec with ``rho < epsilon/(2 - epsilon)``.

    ``generator`` selects the rows: ``"disc"`` (l1-normalized disc-operator images,
    ``rows`` of them, default ``8 * dim``), ``"biortho"`` (functionals of a
    Gram-Schmidt biorthogonal system, ``dim`` rows) or ``"explicit"`` (``V``).
    Weights default to the geometric sequence of :func:`geometric_weights`.
    """
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 2:
        raise SpecError(f"epsilon must lie in (0, 2), got {epsilon}")
    if dim < 2:
        raise SpecError(f"dimension must be at least 2, got {dim}")
    rng = np.random.default_rng(seed)
    if generator == "disc":
        V = _disc_rows(dim, rows or 8 * dim, rng, entry_bound)
    elif generator == "biortho":
        V = _biortho_rows(dim, rng, entry_bound)
    elif generator == "explicit":
        if V is None:
            raise SpecError("explicit generator needs rows V")
        V = list(V)
    else:
        raise SpecError(f"unknown generator {generator!r}")
    weights = tuple(r) if r is not None else geometric_weights(len(V), epsilon)
    radius = covering_radius(V, mesh_size, seed)
    return ReadNormSpec(dim, weights, tuple(V), epsilon, generator, seed, radius)


# ------------------------------------------------------------------ ball sum

@dataclass(frozen=True)
class BallSumSpec:
    """Unit ball ``B_base + S(B_l2)``; ``base=None`` means the plain sup norm."""

    base: ReadNormSpec | None
    S: OperatorColumns
    rho_s: Fraction
    dim: int
    epsilon: Fraction | None = None
    na_preserving: bool = field(default=True)

    def __post_init__(self):
        if self.base is not None and self.base.dim != self.dim:
            raise SpecError("base spec and S disagree on dimension")
        if self.S.codomain_dim != self.dim:
            raise SpecError("S must map into the primal space")
        for n, col in enumerate(self.S.columns, start=1):
            if self.base_norm(col) > Fraction(self.rho_s) / 2 ** n:
                raise SpecError(f"column {n} of S exceeds rho_s 2^-{n}")

    def base_norm(self, x: FiniteVector):
        return norm_value(x, "sup") if self.base is None else p_norm(self.base, x)

    def restrict(self, M: int) -> "BallSumSpec":
        return BallSumSpec(self.base.restrict(M), self.S, self.rho_s, self.dim, self.epsilon)

    def to_json(self) -> dict:
        out = {
            "schema": "readlab.ballsum_spec/v1",
            "dim": self.dim,
            "base": None if self.base is None else self.base.to_json(),
            "S": self.S.to_json(),
            "rho_s": format_scalar(self.rho_s),
            "epsilon": None if self.epsilon is None else format_scalar(self.epsilon),
        }
        out["hash"] = canonical_hash(out)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "BallSumSpec":
        base = None if data["base"] is None else ReadNormSpec.from_json(data["base"])
        eps = data.get("epsilon")
        return cls(base, OperatorColumns.from_json(data["S"]), Fraction(data["rho_s"]),
                   int(data["dim"]), None if eps is None else Fraction(eps))


def base_dual_norm(spec: BallSumSpec | ReadNormSpec | None, f: FiniteVector, dim=None):
    from .dualgeom import read_dual_norm
    base = spec.base if isinstance(spec, BallSumSpec) else spec
    if base is None:
        return norm_value(f, "l1")
    return read_dual_norm(base, f)


def ball_sum_dual_parts(spec: BallSumSpec, f: FiniteVector):
    """``(base dual norm of f, ||S^T f||_2^2)``, both exact for exact ``f``."""
    if f.dim != spec.dim:
        raise SpecError(f"functional of dimension {f.dim} for a spec of dimension {spec.dim}")
    st = spec.S.transpose_apply(f)
    sq = sum((a * a for _, a in st.entries), Fraction(0) if st.exact else 0.0)
    return base_dual_norm(spec, f), sq


def ball_sum_dual_norm(spec: BallSumSpec, f: FiniteVector):
    """``base_dual(f) + ||S^T f||_2``; a Fraction when the l2 part is rational, else a float."""
    base, sq = ball_sum_dual_parts(spec, f)
    st = spec.S.transpose_apply(f)
    try:
        return base + norm_value(st, "l2")
    except ReadlabError:
        return float(base) + float(sq) ** 0.5


def sample_ball_points(base: ReadNormSpec | None, dim: int, count: int, seed: int,
                       bound: int = 4) -> list[FiniteVector]:
    """Exact seeded points of the base unit ball with radii in {1/4, 1/2, 3/4, 1}."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        g = FiniteVector.from_dense(random_integer_vector(rng, dim, bound))
        scale = Fraction(int(rng.integers(1, 5)), 4)
        nrm = norm_value(g, "sup") if base is None else p_norm(base, g)
        out.append(g * (scale / nrm))
    return out


def smooth_variant(base: ReadNormSpec, rho_s, dense_points: int | Sequence[FiniteVector] = 16,
                   seed: int = 0, epsilon=None) -> BallSumSpec:
    """Ball-sum renorming with ``S e_n = rho_s x_n / 2^n``.

    With ``epsilon`` given, require ``(2 - eps')/(1 + rho_s) > 2 - epsilon`` where
    ``eps'`` is the base spec's budget parameter.
    """
    rho_s = Fraction(rho_s)
    if rho_s < 0:
        raise SpecError("rho_s must be nonnegative")
    if epsilon is not None:
        epsilon = Fraction(epsilon)
        if base.epsilon is None or not base.epsilon < epsilon:
            raise SpecError("the base budget eps' must be set and smaller than epsilon")
        if not (2 - base.epsilon) / (1 + rho_s) > 2 - epsilon:
            raise SpecError(f"(2 - {base.epsilon})/(1 + {rho_s}) is not above 2 - {epsilon}")
    if isinstance(dense_points, int):
        dense_points = sample_ball_points(base, base.dim, dense_points, seed)
    for n, x in enumerate(dense_points, start=1):
        if p_norm(base, x) > 1:
            raise SpecError(f"dense point {n} lies outside the base unit ball")
    cols = tuple(x * (rho_s / 2 ** n) for n, x in enumerate(dense_points, start=1))
    return BallSumSpec(base, OperatorColumns(cols, base.dim), rho_s, base.dim, epsilon)


# -------------------------------------------------------------------- Acosta

@dataclass(frozen=True)
class AcostaSpec:
    """Weights ``0 < w_n < 1``; ``weight_rule`` (a formula in ``n``) describes the tail."""

    w: tuple
    weight_rule: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(Fraction(a) for a in self.w))
        for n, a in enumerate(self.w, start=1):
            if not 0 < a < 1:
                raise SpecError(f"weight w_{n} = {a} is outside (0, 1)")

    @property
    def dim(self) -> int:
        return len(self.w)

    @classmethod
    def from_rule(cls, rule: str, N: int) -> "AcostaSpec":
        n = sympy.Symbol("n", integer=True, positive=True)
        expr = sympy.sympify(rule, locals={"n": n})
        w = []
        for k in range(1, N + 1):
            val = sympy.Rational(expr.subs(n, k))
            w.append(Fraction(int(val.p), int(val.q)))
        return cls(tuple(w), rule)

    def to_json(self) -> dict:
        out = {"schema": "readlab.acosta_spec/v1", "w": [format_scalar(a) for a in self.w],
               "weight_rule": self.weight_rule}
        out["hash"] = canonical_hash(out)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "AcostaSpec":
        return cls(tuple(Fraction(a) for a in data["w"]), data.get("weight_rule"))


def acosta_norm(spec: AcostaSpec, z: FiniteVector):
    """``max_n (1 - w_n)|z_n| + sum_n w_n |z_n|``."""
    if z.dim != spec.dim:
        raise SpecError(f"vector of dimension {z.dim} for {spec.dim} weights")
    zero = Fraction(0) if z.exact else 0.0
    peak = max(((1 - spec.w[i - 1]) * abs(a) for i, a in z.entries), default=zero)
    return peak + sum((spec.w[i - 1] * abs(a) for i, a in z.entries), zero)


SUPPORT_RULES = {"all": "k", "squares": "k**2"}


def acosta_attainment_criterion(spec: AcostaSpec, support: Iterable[int] | str,
                                tail_rule: str | None = None) -> bool:
    """Necessary condition for attainment: ``sum_{n in support} w_n < inf``.

    ``support`` is a finite index collection, or a rule: ``"all"``, ``"squares"`` or a
    formula in ``k`` giving the k-th index.  ``tail_rule`` (a formula in ``n``) overrides
    the spec's weight rule for the infinite part.
    """
    if not isinstance(support, str):
        for n in support:
            if n < 1:
                raise ValueError(f"index {n} is not positive")
        return True
    rule = tail_rule or spec.weight_rule
    if rule is None:
        raise SpecError("an infinite support needs a weight rule for the tail")
    n = sympy.Symbol("n", integer=True, positive=True)
    k = sympy.Symbol("k", integer=True, positive=True)
    w = sympy.sympify(rule, locals={"n": n})
    index = sympy.sympify(SUPPORT_RULES.get(support, support), locals={"k": k})
    series = sympy.Sum(w.subs(n, index), (k, 1, sympy.oo))
    return bool(series.is_convergent())
