"""Norm-attaining functionals of a Read norm and sign-cancellation certificates.

An attaining functional is stored symbolically as ``(f0, x)``: its row coefficients
are ``sign(v_n(x))`` and are expanded only up to a requested horizon.  For two such
functionals ``F`` (at ``x``) and ``G`` (at ``z``) and a sign ``theta`` the rows with
``sign v_n(x) + theta sign v_n(z) = 0`` carry a zero coefficient in ``F + theta G``;
any attaining witness ``e`` with ``v_n(e) != 0`` on such a row would force that
coefficient to be ``p*(F + theta G) sign v_n(e) != 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .core import (FiniteVector, ReadlabError, canonical_hash, format_scalar, norm_value,
                   pair, parse_scalar, random_integer_vector, sign)
from .dualgeom import (DualBallRep, PreconditionError, decompose_attaining, dual_norm_support,
                       read_dual_norm, supporting_functional)
from .linalg import rank
from .renorm import BallSumSpec, ReadNormSpec, ball_sum_dual_norm, p_norm

CERT_SCHEMA = "readlab.certificate/v1"


class CoverageError(ReadlabError):
    """No row of the spec falls in a separating cap."""


class DegenerateSpecError(ReadlabError):
    pass


def na_c0_base(f: Union[FiniteVector, "AttainingFunctional"], tail: str = "finite") -> bool:
    """Whether ``f`` attains its norm on c0: exactly when it is finitely supported.

    ``tail`` is ``"finite"`` (the stored coordinates are all of ``f``) or ``"symbolic"``
    (``f`` continues past the truncation with infinitely many nonzero coordinates).
    An :class:`AttainingFunctional` with a nonzero witness always has a symbolic tail.
    """
    if isinstance(f, AttainingFunctional):
        return f.witness.is_zero() and f.f0.is_zero()
    if tail not in ("finite", "symbolic"):
        raise ValueError(f"unknown tail model {tail!r}")
    if f.is_zero():
        return True
    return tail == "finite"


@dataclass(frozen=True)
class AttainingFunctional:
    """``f = f0 + sum_{n <= horizon} sign(v_n(x)) r_n v_n`` with witness ``x``."""

    f0: FiniteVector
    witness: FiniteVector
    spec: ReadNormSpec = field(repr=False)
    horizon: int

    def coefficient(self, n: int) -> Fraction:
        """Row coefficient ``sign(v_n(x))`` for any ``n`` within the spec."""
        return Fraction(sign(pair(self.spec.V[n - 1], self.witness)))

    def coefficients(self, horizon: int | None = None) -> tuple:
        h = self.horizon if horizon is None else horizon
        return tuple(self.coefficient(n) for n in range(1, h + 1))

    def assemble(self, horizon: int | None = None) -> FiniteVector:
        out = self.f0
        for n, t in enumerate(self.coefficients(horizon), start=1):
            if t:
                out = out + self.spec.V[n - 1] * (t * self.spec.r[n - 1])
        return out

    def at_horizon(self, horizon: int) -> "AttainingFunctional":
        if not 1 <= horizon <= self.spec.M:
            raise ValueError(f"horizon {horizon} outside 1..{self.spec.M}")
        return AttainingFunctional(self.f0, self.witness, self.spec, horizon)

    def to_json(self) -> dict:
        return {"f0": self.f0.to_json(), "witness": self.witness.to_json(),
                "horizon": self.horizon}

    @classmethod
    def from_json(cls, data: dict, spec: ReadNormSpec) -> "AttainingFunctional":
        return cls(FiniteVector.from_json(data["f0"]), FiniteVector.from_json(data["witness"]),
                   spec, int(data["horizon"]))


def attaining_functional(spec: ReadNormSpec, x: FiniteVector,
                         tie_rule: str = "lowest") -> AttainingFunctional:
    """The supporting functional at ``x / p(x)`` in symbolic form."""
    x = x / p_norm(spec, x)
    dec = supporting_functional(spec, x, tie_rule)
    return AttainingFunctional(dec.f0, x, spec, spec.M)


def generate_attaining_pair(spec: ReadNormSpec, seed: int, kind: str = "random",
                            bound: int = 4, max_tries: int = 200):
    """Two attaining functionals with independent assembled vectors.

    ``kind="random"`` draws integer witnesses in ``[-bound, bound]``; ``kind="basis"``
    uses two distinct canonical vectors (in increasing index order).
    """
    if spec.dim < 2:
        raise DegenerateSpecError("attaining pairs need dimension at least 2")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        if kind == "basis":
            i, j = sorted(int(a) for a in rng.choice(spec.dim, size=2, replace=False) + 1)
            x, z = FiniteVector.basis(i, spec.dim), FiniteVector.basis(j, spec.dim)
        elif kind == "random":
            x = FiniteVector.from_dense(random_integer_vector(rng, spec.dim, bound))
            z = FiniteVector.from_dense(random_integer_vector(rng, spec.dim, bound))
        else:
            raise ValueError(f"unknown pair kind {kind!r}")
        F, G = attaining_functional(spec, x), attaining_functional(spec, z)
        if F.witness == G.witness or F.witness == -G.witness:
            continue
        if rank([F.assemble().dense(), G.assemble().dense()]) == 2:
            return F, G
    raise DegenerateSpecError(f"no independent attaining pair after {max_tries} draws")


def sign_cancellation_indices(spec: ReadNormSpec, x: FiniteVector, z: FiniteVector,
                              theta: int) -> tuple:
    """Rows ``n`` (1-based) with ``v_n(x) * v_n(theta z) < 0``."""
    if theta not in (1, -1):
        raise ValueError("theta must be +1 or -1")
    ax, az = spec.row_values(x), spec.row_values(z)
    return tuple(n for n, (a, b) in enumerate(zip(ax, az), start=1) if sign(a) * theta * sign(b) < 0)


@dataclass(frozen=True)
class NonAttainmentCertificate:
    theta: int
    cancel_indices: tuple
    y0: FiniteVector
    cap_radius: Fraction
    separation: Fraction        # radius within which every direction separates x from -theta z
    spec_hash: str
    x: FiniteVector
    z: FiniteVector

    def to_json(self) -> dict:
        out = {
            "schema": CERT_SCHEMA,
            "spec_hash": self.spec_hash,
            "theta": self.theta,
            "cancel_indices": list(self.cancel_indices),
            "y0": self.y0.to_json(),
            "cap_radius": format_scalar(self.cap_radius),
            "separation": format_scalar(self.separation),
            "x": self.x.to_json(),
            "z": self.z.to_json(),
        }
        out["hash"] = canonical_hash(out)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "NonAttainmentCertificate":
        return cls(int(data["theta"]), tuple(int(n) for n in data["cancel_indices"]),
                   FiniteVector.from_json(data["y0"]), parse_scalar(data["cap_radius"]),
                   parse_scalar(data["separation"]), data["spec_hash"],
                   FiniteVector.from_json(data["x"]), FiniteVector.from_json(data["z"]))


def _unit_dirs(spec: ReadNormSpec) -> list[FiniteVector]:
    return [v / norm_value(v, "l1") for v in spec.V]


def _cap_distance(d: FiniteVector, y0: FiniteVector):
    """l1 distance from ``y0`` to the nearer of ``±d`` (rows carry no orientation)."""
    return min(norm_value(d - y0, "l1"), norm_value(d + y0, "l1"))


def _cap_members(dirs, y0: FiniteVector, radius) -> list[int]:
    return [n for n, d in enumerate(dirs, start=1) if _cap_distance(d, y0) < radius]


def dichotomy_certificate(spec: ReadNormSpec, F: AttainingFunctional, G: AttainingFunctional,
                          cap_radius=None) -> NonAttainmentCertificate:
    """Sign-cancellation certificate against ``F + theta G`` attaining.

    Candidate caps are centred on oriented row directions ``y0`` with
    ``y0(x) < 0 < y0(theta z)`` and have l1 radius ``cap_radius`` (default half the
    spec's covering radius).  Only rows inside the cap that satisfy the exact sign
    equation are kept.  The cap with the most such rows wins, ``theta = +1`` on ties.
    ``separation`` records ``min(-y0(x)/||x||_inf, y0(theta z)/||z||_inf)``, the radius
    within which every direction separates.
    """
    x, z = F.witness, G.witness
    if rank([F.assemble().dense(), G.assemble().dense()]) < 2:
        raise PreconditionError("F and G must be linearly independent")
    if cap_radius is None:
        cov = spec.covering_radius if spec.covering_radius is not None else 2.0
        cap_radius = Fraction(cov / 2).limit_denominator(10 ** 6)
    cap_radius = Fraction(cap_radius)
    dirs = _unit_dirs(spec)
    xs, zs = norm_value(x, "sup"), norm_value(z, "sup")
    spec_hash = spec.hash
    best = None
    for theta in (1, -1):
        if x == z * theta:
            continue
        tz = z * theta
        for n in sign_cancellation_indices(spec, x, z, theta):
            y0 = dirs[n - 1] * -sign(pair(dirs[n - 1], x))
            sep = min(-pair(y0, x) / xs, pair(y0, tz) / zs)
            members = tuple(m for m in _cap_members(dirs, y0, cap_radius)
                            if sign(pair(spec.V[m - 1], x)) * sign(pair(spec.V[m - 1], tz)) < 0)
            key = (len(members), theta, -n)
            if best is None or key > best[0]:
                best = (key, NonAttainmentCertificate(theta, members, y0, cap_radius, sep,
                                                      spec_hash, x, z))
    if best is None or not best[1].cancel_indices:
        raise CoverageError("no row direction separates x from -theta z; enlarge the row set")
    return best[1]


@dataclass(frozen=True)
class Refuted:
    index: int
    coefficient: Fraction


@dataclass(frozen=True)
class Inconclusive:
    pass


def combined_functional(F: AttainingFunctional, G: AttainingFunctional, theta: int,
                        horizon: int | None = None) -> FiniteVector:
    return F.assemble(horizon) + G.assemble(horizon) * theta


def certificate_check(spec: ReadNormSpec, cert: NonAttainmentCertificate,
                      F: AttainingFunctional, G: AttainingFunctional, e: FiniteVector,
                      f_dual=None):
    """Refute ``e`` as an attaining witness of ``F + theta G`` or report Inconclusive.

    ``f_dual`` is ``p*(F + theta G)``; it is computed exactly when omitted.
    """
    pe = p_norm(spec, e)
    if pe != 1:
        raise PreconditionError(f"p(e) = {pe}, expected 1")
    if f_dual is None:
        f_dual = read_dual_norm(spec, combined_functional(F, G, cert.theta))
    for n in cert.cancel_indices:
        s = sign(pair(spec.V[n - 1], e))
        if s:
            coef = F.coefficient(n) + cert.theta * G.coefficient(n) - f_dual * s
            return Refuted(n, coef)
    return Inconclusive()


def maximizer(spec: ReadNormSpec, f: FiniteVector):
    """``(p*(f), e)`` with ``e`` an exact maximizer on the p-unit sphere."""
    return dual_norm_support(spec, f)


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    verdict: Union[Refuted, Inconclusive, None]
    problems: tuple


def replay_certificate(spec: ReadNormSpec, data: dict, expected_verdict: dict | None = None):
    """Re-derive every equation of a serialized certificate against ``spec``.

    Raises :class:`PreconditionError` on a spec hash mismatch; mismatched equations are
    collected in ``problems``.
    """
    if data.get("spec_hash") != spec.hash:
        raise PreconditionError("certificate refers to a different spec")
    body = {k: v for k, v in data.items() if k != "hash"}
    problems = []
    if "hash" in data and canonical_hash(body) != data["hash"]:
        problems.append("certificate hash does not match its contents")
    cert = NonAttainmentCertificate.from_json(data)
    F, G = attaining_functional(spec, cert.x), attaining_functional(spec, cert.z)
    if F.witness != cert.x or G.witness != cert.z:
        problems.append("witnesses are not p-unit")
    if cert.x == cert.z * cert.theta:
        problems.append("x equals theta z")
    if not cert.cancel_indices:
        problems.append("empty cancel set")
    tz = cert.z * cert.theta
    if not (pair(cert.y0, cert.x) < 0 < pair(cert.y0, tz)):
        problems.append("y0 does not separate x from -theta z")
    xs, zs = norm_value(cert.x, "sup"), norm_value(cert.z, "sup")
    sep = min(-pair(cert.y0, cert.x) / xs, pair(cert.y0, tz) / zs)
    if sep != cert.separation:
        problems.append("separation radius differs")
    dirs = _unit_dirs(spec)
    for n in cert.cancel_indices:
        if not 1 <= n <= spec.M:
            problems.append(f"index {n} outside the spec")
            continue
        if F.coefficient(n) + cert.theta * G.coefficient(n) != 0:
            problems.append(f"row {n} does not cancel")
        if not _cap_distance(dirs[n - 1], cert.y0) < cert.cap_radius:
            problems.append(f"row {n} lies outside the cap")
    verdict = None
    if not problems:
        f = combined_functional(F, G, cert.theta)
        value, e = maximizer(spec, f)
        verdict = certificate_check(spec, cert, F, G, e, value)
        if expected_verdict is not None and verdict_to_json(verdict) != expected_verdict:
            problems.append("verdict differs from the recorded one")
    return ReplayResult(not problems, verdict, tuple(problems))


def verdict_to_json(v) -> dict:
    if isinstance(v, Refuted):
        return {"verdict": "refuted", "index": v.index, "coefficient": format_scalar(v.coefficient)}
    if isinstance(v, Inconclusive):
        return {"verdict": "inconclusive"}
    if isinstance(v, Attains):
        return {"verdict": "attains", "witness": v.witness.to_json()}
    if isinstance(v, NotAttains):
        return {"verdict": "not_attains", "certificate": v.certificate.to_json()}
    if isinstance(v, Unknown):
        return {"verdict": "unknown", "reason": v.reason}
    raise TypeError(f"not a verdict: {v!r}")


# ------------------------------------------------------------ verdict sweep

@dataclass(frozen=True)
class Attains:
    witness: FiniteVector


@dataclass(frozen=True)
class NotAttains:
    certificate: NonAttainmentCertificate


@dataclass(frozen=True)
class Unknown:
    reason: str


@dataclass(frozen=True)
class Combination:
    """``F + theta G`` at every horizon, as produced by a dichotomy pair."""

    F: AttainingFunctional
    G: AttainingFunctional
    theta: int

    def assemble(self, horizon: int) -> FiniteVector:
        return combined_functional(self.F, self.G, self.theta, horizon)


def _read_verdict(family: ReadNormSpec, f, horizons: Sequence[int]):
    if isinstance(f, Combination):
        cert = None
        for M in horizons:
            spec = family.restrict(M)
            try:
                Fm = attaining_functional(spec, f.F.witness)
                Gm = attaining_functional(spec, f.G.witness)
                c = dichotomy_certificate(spec, Fm, Gm)
            except (CoverageError, PreconditionError) as exc:
                return Unknown(f"no certificate at horizon {M}: {exc}")
            if c.theta != f.theta:
                idx = sign_cancellation_indices(spec, Fm.witness, Gm.witness, f.theta)
                if not idx:
                    return Unknown(f"no cancelling rows for this theta at horizon {M}")
                c = NonAttainmentCertificate(f.theta, idx, c.y0, c.cap_radius, c.separation,
                                             spec.hash, Fm.witness, Gm.witness)
            g = combined_functional(Fm, Gm, f.theta)
            value, e = maximizer(spec, g)
            if not isinstance(certificate_check(spec, c, Fm, Gm, e, value), Refuted):
                return Unknown(f"maximizer at horizon {M} annihilates every cancelling row")
            cert = c
        return NotAttains(cert)
    witness = f.witness if isinstance(f, AttainingFunctional) else None
    if witness is None:
        value, witness = maximizer(family.restrict(max(horizons)), f)
    support = witness.support
    for M in horizons:
        spec = family.restrict(M)
        fm = f.assemble(M) if isinstance(f, AttainingFunctional) else f
        value = read_dual_norm(spec, fm)
        xm = witness / p_norm(spec, witness)
        if xm.support != support or pair(fm, xm) != value:
            return Unknown(f"witness does not maximize at horizon {M}")
        if decompose_attaining(DualBallRep.from_spec(spec), fm / value, xm) is None:
            return Unknown(f"no attaining decomposition at horizon {M}")
    return Attains(witness)


def attainment_verdict(spec_family: ReadNormSpec | BallSumSpec, f, horizons: Sequence[int]):
    """Attains, NotAttains or Unknown for ``f`` across truncation horizons (row counts).

    ``f`` is a fixed functional, an :class:`AttainingFunctional` or a
    :class:`Combination`.  Combinations are only ever certified (or left Unknown):
    every finite truncation attains, so a finite maximizer says nothing about the limit.
    On a ball-sum family the verdict is taken on the base norm, and an Attains witness
    is shifted by the maximizer of ``f`` over the Euclidean summand.
    """
    horizons = sorted(set(int(h) for h in horizons))
    if not horizons:
        raise ValueError("empty horizon list")
    if isinstance(spec_family, BallSumSpec):
        if spec_family.base is None:
            raise ValueError("ball-sum verdicts need a Read base norm")
        base = _read_verdict(spec_family.base, f, horizons) if not _is_zero(f, horizons) \
            else Attains(FiniteVector.zero(spec_family.dim))
        if isinstance(base, Attains) and not base.witness.is_zero():
            fm = _final(f, horizons)
            shift = _euclidean_maximizer(spec_family, fm)
            base_w = base.witness / p_norm(spec_family.base.restrict(horizons[-1]), base.witness)
            return Attains(base_w + shift)
        return base
    if _is_zero(f, horizons):
        return Attains(FiniteVector.zero(spec_family.dim))
    return _read_verdict(spec_family, f, horizons)


def _final(f, horizons):
    if isinstance(f, (AttainingFunctional, Combination)):
        return f.assemble(horizons[-1])
    return f


def _is_zero(f, horizons) -> bool:
    return _final(f, horizons).is_zero()


def _euclidean_maximizer(spec: BallSumSpec, f: FiniteVector) -> FiniteVector:
    """``S (S^T f / ||S^T f||_2)``, the maximizer of ``f`` over ``S(B_l2)``."""
    st = spec.S.transpose_apply(f)
    if st.is_zero():
        return FiniteVector.zero(spec.dim)
    try:
        nrm = norm_value(st, "l2")
    except ReadlabError:
        st = st.to_float()
        nrm = norm_value(st, "l2")
    return spec.S.apply(st / nrm)


def ball_sum_attains_at(spec: BallSumSpec, f: FiniteVector, w: FiniteVector, tol=1e-9) -> bool:
    """Whether ``f(w)`` reaches the ball-sum dual norm of ``f`` (within ``tol`` in float)."""
    return abs(float(pair(f, w)) - float(ball_sum_dual_norm(spec, f))) <= tol


__all__ = ["CoverageError", "DegenerateSpecError", "na_c0_base", "AttainingFunctional",
           "attaining_functional", "generate_attaining_pair", "sign_cancellation_indices",
           "NonAttainmentCertificate", "dichotomy_certificate", "Refuted", "Inconclusive",
           "certificate_check", "combined_functional", "maximizer", "replay_certificate",
           "ReplayResult", "verdict_to_json", "Attains", "NotAttains", "Unknown", "Combination",
           "attainment_verdict", "ball_sum_attains_at"]
