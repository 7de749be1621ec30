"""Coordinate vectors over exact rationals or floats, sequence norms and sampling.

Vectors are 1-indexed truncations of elements of c0, l1, l2 or l-infinity.
A vector is in *exact* mode when every stored entry is a :class:`~fractions.Fraction`
(or int) and in *float* mode otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Callable, Iterable, Sequence, Union

import numpy as np

Scalar = Union[Fraction, float]

FLOAT_TOL = 1e-9
"""Global comparison tolerance for float mode."""


class ReadlabError(Exception):
    """Base class for all errors raised by this package."""


class ModeError(ReadlabError):
    """An operation cannot be carried out in the requested arithmetic mode."""


class DimensionError(ReadlabError, ValueError):
    pass


class SamplingError(ReadlabError):
    pass


def is_exact(value) -> bool:
    return isinstance(value, Rational)


def to_scalar(value, exact: bool = True) -> Scalar:
    """Coerce ``value`` to a Fraction (exact) or float.

    Strings of the form ``"p/q"`` are accepted in both modes.
    """
    if isinstance(value, str):
        value = Fraction(value)
    if exact:
        if isinstance(value, float):
            raise ModeError(f"float {value!r} given where an exact scalar is required")
        return Fraction(value)
    return float(value)


def sign(value, tol: float = FLOAT_TOL) -> int:
    """Sign of a scalar; exact for rationals, with a zero band of width ``tol`` for floats."""
    if is_exact(value):
        return (value > 0) - (value < 0)
    if abs(value) <= tol:
        return 0
    return 1 if value > 0 else -1


def is_zero(value, tol: float = FLOAT_TOL) -> bool:
    return sign(value, tol) == 0


def scalars_equal(a, b, tol: float = FLOAT_TOL) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= tol * max(1.0, abs(float(a)), abs(float(b)))


def format_scalar(value):
    """JSON form of a scalar: ``"p/q"`` for rationals, a plain number for floats."""
    if is_exact(value):
        value = Fraction(value)
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def parse_scalar(value) -> Scalar:
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, bool):
        raise TypeError("boolean is not a scalar")
    if isinstance(value, int):
        return Fraction(value)
    return float(value)


@dataclass(frozen=True)
class FiniteVector:
    """Finitely supported coordinate sequence with 1-based indices.

    ``entries`` holds ``(index, value)`` pairs sorted by index with every value
    nonzero; use :meth:`from_dense` or :meth:`from_mapping` rather than building
    the tuple by hand.
    """

    entries: tuple
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"ambient dimension must be positive, got {self.dim}")
        last = 0
        for idx, val in self.entries:
            if not (last < idx <= self.dim):
                raise DimensionError(
                    f"index {idx} out of order or outside 1..{self.dim}")
            if val == 0:
                raise ValueError(f"stored entry at index {idx} is zero")
            last = idx

    @classmethod
    def from_mapping(cls, mapping, dim: int) -> "FiniteVector":
        items = sorted((int(i), v) for i, v in mapping.items() if v != 0)
        return cls(tuple(items), dim)

    @classmethod
    def from_dense(cls, values: Iterable, dim: int | None = None) -> "FiniteVector":
        values = list(values)
        if dim is None:
            dim = len(values)
        if len(values) > dim:
            raise DimensionError(f"{len(values)} values do not fit in dimension {dim}")
        clean = []
        for i, v in enumerate(values, start=1):
            if isinstance(v, str):
                v = Fraction(v)
            elif isinstance(v, (int, np.integer)):
                v = Fraction(int(v))
            elif isinstance(v, np.floating):
                v = float(v)
            if v != 0:
                clean.append((i, v))
        return cls(tuple(clean), dim)

    @classmethod
    def zero(cls, dim: int) -> "FiniteVector":
        return cls((), dim)

    @classmethod
    def basis(cls, n: int, dim: int) -> "FiniteVector":
        """The canonical unit vector e_n."""
        return cls(((n, Fraction(1)),), dim)

    @cached_property
    def _map(self) -> dict:
        return dict(self.entries)

    @cached_property
    def exact(self) -> bool:
        return all(is_exact(v) for _, v in self.entries)

    @property
    def support(self) -> tuple:
        return tuple(i for i, _ in self.entries)

    def __getitem__(self, n: int):
        if not 1 <= n <= self.dim:
            raise IndexError(f"index {n} outside 1..{self.dim}")
        return self._map.get(n, Fraction(0) if self.exact else 0.0)

    def dense(self) -> list:
        zero = Fraction(0) if self.exact else 0.0
        out = [zero] * self.dim
        for i, v in self.entries:
            out[i - 1] = v
        return out

    def to_numpy(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for i, v in self.entries:
            out[i - 1] = float(v)
        return out

    def to_float(self) -> "FiniteVector":
        return FiniteVector(tuple((i, float(v)) for i, v in self.entries), self.dim)

    def is_zero(self) -> bool:
        return not self.entries

    def _check(self, other: "FiniteVector"):
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "FiniteVector") -> "FiniteVector":
        self._check(other)
        out = dict(self.entries)
        for i, v in other.entries:
            out[i] = out.get(i, 0) + v
        return FiniteVector.from_mapping(out, self.dim)

    def __neg__(self) -> "FiniteVector":
        return FiniteVector(tuple((i, -v) for i, v in self.entries), self.dim)

    def __sub__(self, other: "FiniteVector") -> "FiniteVector":
        return self + (-other)

    def __mul__(self, c) -> "FiniteVector":
        if isinstance(c, FiniteVector):
            return NotImplemented
        if c == 0:
            return FiniteVector.zero(self.dim)
        return FiniteVector.from_mapping({i: c * v for i, v in self.entries}, self.dim)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "FiniteVector":
        if is_exact(c):
            return self * (1 / Fraction(c))
        return self * (1.0 / c)

    def to_json(self) -> list:
        return [format_scalar(v) for v in self.dense()]

    @classmethod
    def from_json(cls, data: Sequence) -> "FiniteVector":
        return cls.from_dense([parse_scalar(v) for v in data])

    def __repr__(self) -> str:
        body = ", ".join(str(v) for v in self.dense()) if self.dim <= 12 else \
            ", ".join(f"{i}: {v}" for i, v in self.entries)
        return f"FiniteVector([{body}])"


def vec(*values) -> FiniteVector:
    """Shorthand: ``vec(1, -2, 3)`` or ``vec("1/2", 0)`` builds an exact vector."""
    return FiniteVector.from_dense(values)


def _exact_sqrt(q: Fraction) -> Fraction | None:
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def norm_value(v: FiniteVector, which: str) -> Scalar:
    """Sequence norm of ``v``: ``"sup"``, ``"l1"`` or ``"l2"``.

    In exact mode ``"l2"`` only succeeds when the sum of squares is the square
    of a rational; otherwise :class:`ModeError` is raised.
    """
    vals = [v_ for _, v_ in v.entries]
    zero = Fraction(0) if v.exact else 0.0
    if which == "sup":
        return max((abs(a) for a in vals), default=zero)
    if which == "l1":
        return sum((abs(a) for a in vals), zero)
    if which == "l2":
        sq = sum((a * a for a in vals), zero)
        if v.exact:
            root = _exact_sqrt(Fraction(sq))
            if root is None:
                raise ModeError(f"l2 norm sqrt({sq}) is irrational; use float mode")
            return root
        return math.sqrt(sq)
    raise ValueError(f"unknown norm {which!r}")


def pair(f: FiniteVector, x: FiniteVector) -> Scalar:
    """Duality pairing f(x) = sum of f_i x_i."""
    f._check(x)
    xm = x._map
    zero = Fraction(0) if (f.exact and x.exact) else 0.0
    return sum((a * xm[i] for i, a in f.entries if i in xm), zero)


def dense_dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b) if x and y), Fraction(0))


def sphere_sample(norm_fn: Callable[[FiniteVector], Scalar], dim: int, count: int,
                  seed: int, max_retries: int = 100) -> list[FiniteVector]:
    """Deterministic float vectors with ``norm_fn(v) == 1``.

    Candidates are standard Gaussian; a candidate whose norm vanishes is redrawn,
    and :class:`SamplingError` is raised after ``max_retries`` consecutive failures.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        for _ in range(max_retries):
            cand = FiniteVector.from_dense(rng.standard_normal(dim).tolist())
            nv = float(norm_fn(cand))
            if nv > FLOAT_TOL:
                break
        else:
            raise SamplingError(f"norm vanished on {max_retries} consecutive candidates")
        out.append(cand * (1.0 / nv))
    return out


def random_integer_vector(rng: np.random.Generator, dim: int, bound: int = 4,
                          nonzero: bool = False) -> list[Fraction]:
    """Entries drawn uniformly from [-bound, bound] (excluding 0 if ``nonzero``)."""
    if nonzero:
        mags = rng.integers(1, bound + 1, size=dim)
        signs = rng.choice((-1, 1), size=dim)
        return [Fraction(int(m * s)) for m, s in zip(mags, signs)]
    while True:
        vals = rng.integers(-bound, bound + 1, size=dim)
        if np.any(vals):
            return [Fraction(int(a)) for a in vals]


def canonical_json(obj) -> str:
    """Sorted-key, whitespace-free JSON used for hashing."""
    import json
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def canonical_hash(obj) -> str:
    import hashlib
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()
