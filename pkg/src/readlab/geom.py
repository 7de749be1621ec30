"""Geometric diagnostics of Read norms: convexity margins, slice diameters, roughness.

Diameter results are lower bounds realised by explicit witness pairs.  Given a
sup-scaled point ``x`` and a coordinate ``n`` the pair is

    y = x + (1 - x(n)) e_n,    z = x - (1 + x(n)) e_n,

so ``y - z = 2 e_n``; after normalisation in ``p`` their distance is at least
``2 / (1 + rho)``.  Coordinates whose column ``R e_n`` is light play the role of
the coordinates far out in the sequence.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import FiniteVector, ReadlabError, norm_value, pair, random_integer_vector, sign
from .dualgeom import read_dual_norm, supporting_functional
from .renorm import ReadNormSpec, p_norm


class GeometryError(ReadlabError, ValueError):
    pass


@dataclass(frozen=True)
class SliceSpec:
    """``{x in B_p : f(x) > 1 - delta}``; ``witness`` is a known point with ``f(witness) = 1``."""

    f: FiniteVector
    delta: Fraction
    witness: FiniteVector | None = None

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise GeometryError(f"delta must lie in (0, 1], got {self.delta}")

    def contains(self, spec: ReadNormSpec, x: FiniteVector) -> bool:
        return p_norm(spec, x) <= 1 and pair(self.f, x) > 1 - self.delta


def slice_at(spec: ReadNormSpec, x: FiniteVector, delta) -> SliceSpec:
    """Slice cut by the supporting functional of ``x / p(x)``."""
    x = x / p_norm(spec, x)
    f = supporting_functional(spec, x).target
    return SliceSpec(f, Fraction(delta), x)


def _rows_signature(spec: ReadNormSpec, x: FiniteVector):
    top = norm_value(x, "sup")
    peaks = frozenset(i * sign(a) for i, a in x.entries if abs(a) == top)
    return peaks, tuple(sign(a) for a in spec.row_values(x))


def separated(spec: ReadNormSpec, x: FiniteVector, y: FiniteVector) -> bool:
    """Whether ``p`` fails to be affine on ``[x, y]``.

    Exactly when some row changes sign strictly between ``x`` and ``y`` or the two
    points share no signed peak coordinate.  (Exact inputs only.)
    """
    px, sx = _rows_signature(spec, x)
    py, sy = _rows_signature(spec, y)
    if not px & py:
        return True
    return any(a * b < 0 for a, b in zip(sx, sy))


def strict_convexity_margin(spec: ReadNormSpec, pairs: Sequence[tuple]):
    """``min over pairs of 1 - p((x + y)/2)`` for pairs of distinct p-unit vectors."""
    if not pairs:
        raise GeometryError("need at least one pair")
    best = None
    for x, y in pairs:
        if x == y:
            raise GeometryError("pair with x == y")
        m = 1 - p_norm(spec, (x + y) * Fraction(1, 2))
        best = m if best is None or m < best else best
    return best


def sphere_pairs(spec: ReadNormSpec, count: int, seed: int, bound: int = 6) -> list[tuple]:
    """Seeded exact pairs of distinct points on the p-unit sphere."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x = FiniteVector.from_dense(random_integer_vector(rng, spec.dim, bound))
        y = FiniteVector.from_dense(random_integer_vector(rng, spec.dim, bound))
        x, y = x / p_norm(spec, x), y / p_norm(spec, y)
        if x != y:
            out.append((x, y))
    return out


def column_weights(spec: ReadNormSpec) -> list:
    """``||R e_n||_1 = sum_k r_k |v_k(e_n)|`` for every coordinate ``n``."""
    w = [Fraction(0)] * spec.dim
    for rk, vk in zip(spec.r, spec.V):
        for i, a in vk.entries:
            w[i - 1] += rk * abs(a)
    return w


def fresh_coordinates(spec: ReadNormSpec, exclude: Sequence[int] = (),
                      threshold=None) -> list[int]:
    """Coordinates outside ``exclude`` ordered by lightest column weight, optionally capped."""
    w = column_weights(spec)
    ex = set(exclude)
    idx = [n for n in range(1, spec.dim + 1) if n not in ex and (threshold is None or w[n - 1] <= threshold)]
    return sorted(idx, key=lambda n: (w[n - 1], n))


@dataclass(frozen=True)
class WitnessPair:
    y: FiniteVector        # p-normalised
    z: FiniteVector
    g: FiniteVector        # e_n scaled to the dual unit sphere
    gap: object            # g(y - z)
    distance: object       # p(y - z)


def witness_sequences(spec: ReadNormSpec, x: FiniteVector, n: int, level: str = "p",
                      with_dual: bool = True) -> WitnessPair:
    """Witness pair at coordinate ``n`` built on the sup-scaled ``x``.

    ``level="sup"`` skips the p-normalisation (and allows ``x = 0``): then
    ``y - z = 2 e_n`` and ``g = e_n``.  ``with_dual=False`` skips the dual-norm
    program for ``g`` (``g`` and ``gap`` are then None).
    """
    if not 1 <= n <= spec.dim:
        raise GeometryError(f"coordinate {n} outside 1..{spec.dim}")
    en = FiniteVector.basis(n, spec.dim)
    if level == "sup":
        xb = x if x.is_zero() else x / norm_value(x, "sup")
        y, z = xb + en * (1 - xb[n]), xb - en * (1 + xb[n])
        return WitnessPair(y, z, en, pair(en, y - z), norm_value(y - z, "sup"))
    if level != "p":
        raise ValueError(f"unknown level {level!r}")
    if x.is_zero():
        raise GeometryError("witness sequences need a nonzero base point")
    xb = x / norm_value(x, "sup")
    y, z = xb + en * (1 - xb[n]), xb - en * (1 + xb[n])
    y, z = y / p_norm(spec, y), z / p_norm(spec, z)
    d = y - z
    if not with_dual:
        return WitnessPair(y, z, None, None, p_norm(spec, d))
    g = en / read_dual_norm(spec, en)
    return WitnessPair(y, z, g, pair(g, d), p_norm(spec, d))


def diameter_reference(spec: ReadNormSpec):
    """``2 / (1 + rho)``, the witness-pair guarantee."""
    return 2 / (1 + spec.rho)


@dataclass(frozen=True)
class SliceBound:
    value: object              # best p-distance of an in-slice witness pair (0 if none)
    n: int | None              # coordinate that achieved it
    found: bool                # some swept pair landed in the slice
    reference: object          # 2 / (1 + rho)
    deficit: object            # c(delta) = 1 - value / reference

    def as_float(self) -> float:
        return float(self.value)


def _bound(spec, value, n, found) -> SliceBound:
    ref = diameter_reference(spec)
    return SliceBound(value, n, found, ref, 1 - value / ref)


def _base_point(spec: ReadNormSpec, sl: SliceSpec) -> FiniteVector:
    if sl.witness is not None:
        return sl.witness
    from .dualgeom import dual_norm_support
    value, x = dual_norm_support(spec, sl.f)
    if value != 1 and abs(float(value) - 1) > 1e-9:
        raise GeometryError(f"slice functional has dual norm {value}, expected 1")
    return x


def _sweep(spec: ReadNormSpec, sl: SliceSpec, n_sweep) -> list[int]:
    if n_sweep is None:
        peaks = [i for i, a in sl.f.entries if abs(a) == norm_value(sl.f, "sup")]
        return fresh_coordinates(spec, exclude=peaks[:1])
    return list(n_sweep)


def slice_diameter_lower_bound(spec: ReadNormSpec, sl: SliceSpec,
                               n_sweep: Sequence[int] | None = None) -> SliceBound:
    """Largest p-distance of a witness pair lying in the slice over the swept coordinates."""
    x = _base_point(spec, sl)
    best, best_n = Fraction(0), None
    for n in _sweep(spec, sl, n_sweep):
        wp = witness_sequences(spec, x, n, with_dual=False)
        if sl.contains(spec, wp.y) and sl.contains(spec, wp.z) and wp.distance > best:
            best, best_n = wp.distance, n
    return _bound(spec, best, best_n, best_n is not None)


def combo_slices_diameter(spec: ReadNormSpec, slices: Sequence[SliceSpec], weights: Sequence,
                          n_sweep: Sequence[int] | None = None) -> SliceBound:
    """Lower bound on the diameter of ``sum_i t_i S_i`` from synchronised witness pairs."""
    weights = [Fraction(w) for w in weights]
    if len(weights) != len(slices) or not slices:
        raise GeometryError("one positive weight per slice is required")
    if any(w <= 0 for w in weights) or sum(weights) != 1:
        raise GeometryError("weights must be positive and sum to 1")
    bases = [_base_point(spec, sl) for sl in slices]
    if n_sweep is None:
        excl = set()
        for sl in slices:
            top = norm_value(sl.f, "sup")
            excl.update(i for i, a in sl.f.entries[:] if abs(a) == top)
        n_sweep = fresh_coordinates(spec, exclude=sorted(excl)) or list(range(1, spec.dim + 1))
    best, best_n = Fraction(0), None
    for n in n_sweep:
        ys, zs, ok = [], [], True
        for sl, x in zip(slices, bases):
            wp = witness_sequences(spec, x, n, with_dual=False)
            if not (sl.contains(spec, wp.y) and sl.contains(spec, wp.z)):
                ok = False
                break
            ys.append(wp.y)
            zs.append(wp.z)
        if not ok:
            continue
        Y = sum((y * t for y, t in zip(ys, weights)), FiniteVector.zero(spec.dim))
        Z = sum((z * t for z, t in zip(zs, weights)), FiniteVector.zero(spec.dim))
        dist = p_norm(spec, Y - Z)
        if dist > best:
            best, best_n = dist, n
    return _bound(spec, best, best_n, best_n is not None)


def slice_diameter_exact(spec: ReadNormSpec, sl: SliceSpec) -> float:
    """Float diameter of the closed slice by vertex enumeration (dim <= 4, small M).

    ``B_p`` is cut out by ``g(x) <= 1`` for the candidate vertices
    ``g = ±e_i + sum_n ±r_n v_n`` of the dual ball; the slice adds ``f(x) >= 1 - delta``.
    """
    from scipy.spatial import HalfspaceIntersection
    d, M = spec.dim, spec.M
    if d > 4 or M > 10:
        raise GeometryError("vertex enumeration is limited to dim <= 4 and at most 10 rows")
    V = spec.V_array * spec.r_array[:, None]
    gens = []
    for i in range(d):
        for s0 in (1.0, -1.0):
            base = np.zeros(d)
            base[i] = s0
            for signs in itertools.product((1.0, -1.0), repeat=M):
                gens.append(base + np.asarray(signs) @ V)
    G = np.unique(np.round(np.array(gens), 12), axis=0)
    f = sl.f.to_numpy()
    halfspaces = np.vstack([np.hstack([G, -np.ones((len(G), 1))]),
                            np.hstack([-f, [1 - float(sl.delta)]])[None, :]])
    x0 = _base_point(spec, sl).to_numpy() * (1 - float(sl.delta) / 4)
    x0 = x0 * (1 - 1e-3)
    hs = HalfspaceIntersection(halfspaces, x0)
    verts = hs.intersections
    best = 0.0
    for a, b in itertools.combinations(range(len(verts)), 2):
        diff = verts[a] - verts[b]
        val = np.abs(diff).max() + float(spec.r_array @ np.abs(spec.V_array @ diff))
        best = max(best, val)
    return best


def roughness_quotient(q: Callable[[FiniteVector], object], point: FiniteVector,
                       direction: FiniteVector, h_sweep: Sequence) -> float:
    """``max_h (q(u + h d) + q(u - h d) - 2 q(u)) / (h q(d))``."""
    if point.is_zero() or direction.is_zero():
        raise GeometryError("point and direction must be nonzero")
    qu, qd = q(point), q(direction)
    best = None
    for h in h_sweep:
        val = (q(point + direction * h) + q(point - direction * h) - 2 * qu) / (h * qd)
        best = val if best is None or val > best else best
    return best


def read_dual(spec: ReadNormSpec, exact: bool = False) -> Callable[[FiniteVector], object]:
    """Dual norm of ``spec`` as a callable (float LP unless ``exact``)."""
    def q(f: FiniteVector):
        return read_dual_norm(spec, f, exact=exact)
    return q


def l1_norm(f: FiniteVector):
    return norm_value(f, "l1")


def roughness_at(spec: ReadNormSpec, x: FiniteVector, h_sweep: Sequence,
                 n: int | None = None, exact: bool = False):
    """Roughness quotient of ``p*`` at the supporting functional of ``x`` along a fresh ``e_n``.

    Returns ``(quotient, n)``.
    """
    x = x / p_norm(spec, x)
    dec = supporting_functional(spec, x)
    if n is None:
        n = fresh_coordinates(spec, exclude=dec.f0.support)[0]
    en = FiniteVector.basis(n, spec.dim)
    return roughness_quotient(read_dual(spec, exact), dec.target, en, h_sweep), n


DIAGNOSTIC_FIELDS = ("spec_hash", "dim", "epsilon", "kind", "bound", "n", "runtime")


def diagnostic_row(spec: ReadNormSpec, kind: str, bound, n, started: float) -> dict:
    return {"spec_hash": spec.hash, "dim": spec.dim,
            "epsilon": None if spec.epsilon is None else float(spec.epsilon),
            "kind": kind, "bound": float(bound), "n": n,
            "runtime": round(time.perf_counter() - started, 6)}


__all__ = ["GeometryError", "SliceSpec", "slice_at", "separated", "strict_convexity_margin",
           "sphere_pairs", "column_weights", "fresh_coordinates", "WitnessPair",
           "witness_sequences", "diameter_reference", "SliceBound", "slice_diameter_lower_bound",
           "combo_slices_diameter", "slice_diameter_exact", "roughness_quotient", "read_dual",
           "l1_norm", "roughness_at", "DIAGNOSTIC_FIELDS", "diagnostic_row"]
