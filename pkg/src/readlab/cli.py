"""Command-line experiment driver.

    readlab build  [--config FILE] [--dim N] [--epsilon E] [--seed S] --out DIR
    readlab run    SUITE [--config FILE] [--mode exact|float] [--horizons a,b] --out DIR
    readlab replay CERT --spec SPEC

Exit codes: 0 pass, 1 gate failure or replay divergence, 2 usage/config error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from .core import (FiniteVector, ReadlabError, canonical_hash, format_scalar, pair,
                   random_integer_vector)

log = logging.getLogger("readlab")

SUITE_VERSIONS = {"duality": "1.0", "dichotomy": "1.0", "geometry": "1.0",
                  "acosta": "1.0", "discrange": "1.0"}
REPORT_SCHEMA = "readlab.report/v1"

DEFAULTS = {
    "spec": {"dim": 8, "epsilon": "1/2", "generator": "disc", "seed": 0, "rows": None,
             "mesh_size": 2048},
    "ballsum": None,
    "acosta": {"weight_rule": "1/(n+1)", "N": 32},
    "mode": "exact",
    "horizons": None,
    "tolerances": {"float": 1e-9, "geometry_slack": 0.05, "density": 1e-3},
    "suites": {
        "duality": {"count": 1000, "bound": 5, "dims": list(range(2, 13)), "rows_per_dim": 2},
        "dichotomy": {"pairs": 200, "min_certified": 0.99, "verdict_pairs": 3},
        "geometry": {"dims": [8, 16, 24, 32], "slices": 3, "delta": "1/4",
                     "h_sweep": ["1", "1/2", "1/4", "1/8"], "seed": 1},
        "acosta": {"max_n": 32},
        "discrange": {"m_max": 6, "n_max": 200, "N": 64, "polys": 500, "systems": 100,
                      "max_dim": 10},
    },
}


class UsageError(ReadlabError):
    pass


# ------------------------------------------------------------------ config

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise UsageError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a mapping")
    return data


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return format_scalar(obj)
    return obj


def resolve_config(args) -> dict:
    cfg = _merge(DEFAULTS, load_config(getattr(args, "config", None)))
    for flag, key in (("dim", "dim"), ("epsilon", "epsilon"), ("seed", "seed"),
                      ("generator", "generator"), ("rows", "rows")):
        val = getattr(args, flag, None)
        if val is not None:
            cfg["spec"][key] = val
    if getattr(args, "mode", None):
        cfg["mode"] = args.mode
    if getattr(args, "horizons", None):
        try:
            cfg["horizons"] = [int(h) for h in args.horizons.split(",") if h]
        except ValueError as exc:
            raise UsageError(f"bad --horizons {args.horizons!r}") from exc
    if cfg["mode"] not in ("exact", "float"):
        raise UsageError(f"mode must be exact or float, got {cfg['mode']!r}")
    try:
        cfg["spec"]["epsilon"] = format_scalar(Fraction(str(cfg["spec"]["epsilon"])))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad epsilon {cfg['spec']['epsilon']!r}") from exc
    _validate(cfg)
    return _jsonable(cfg)


def _validate(cfg: dict):
    import jsonschema
    path = schema_dir()
    if path is None:
        log.warning("config schema not found; skipping validation")
        return
    schema = json.loads((path / "config.schema.json").read_text())
    try:
        jsonschema.validate(_jsonable(cfg), schema)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid config: {exc.message}") from exc


def schema_dir() -> Path | None:
    env = os.environ.get("READLAB_SCHEMAS")
    if env:
        return Path(env)
    here = Path(__file__).resolve()
    for cand in (here.parent / "schemas", here.parents[2] / "docs" / "schemas"):
        if cand.is_dir():
            return cand
    return None


def config_hash(cfg: dict) -> str:
    return canonical_hash(cfg)


# ------------------------------------------------------------------ output

def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def dump_csv(rows: list[dict], fields) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r.get(k) for k in fields})
    return buf.getvalue()


# ------------------------------------------------------------------ build

def build_specs(cfg: dict) -> dict:
    """Spec objects named ``read``, ``ballsum`` (optional) and ``acosta``."""
    from .renorm import AcostaSpec, build_read_spec, smooth_variant
    s = cfg["spec"]
    read = build_read_spec(int(s["dim"]), Fraction(s["epsilon"]), s["generator"], int(s["seed"]),
                           rows=s.get("rows"), mesh_size=int(s["mesh_size"]))
    out = {"read": read}
    if cfg.get("ballsum"):
        b = cfg["ballsum"]
        eps = b.get("epsilon")
        out["ballsum"] = smooth_variant(read, Fraction(str(b["rho_s"])),
                                        int(b.get("dense_points", 8)), int(s["seed"]),
                                        None if eps is None else Fraction(str(eps)))
    a = cfg["acosta"]
    out["acosta"] = AcostaSpec.from_rule(a["weight_rule"], int(a["N"]))
    return out


SPEC_FILES = {"read": "read_spec.json", "ballsum": "ballsum_spec.json", "acosta": "acosta_spec.json"}


def cmd_build(cfg: dict, out: Path) -> int:
    specs = build_specs(cfg)
    for name, spec in specs.items():
        write_atomic(out / SPEC_FILES[name], dump_json(spec.to_json()))
    write_atomic(out / "config.json", dump_json({"config": cfg, "config_hash": config_hash(cfg)}))
    read = specs["read"]
    print(f"built {SPEC_FILES['read']}: dim={read.dim} M={read.M} rho={read.rho} "
          f"covering_radius={read.covering_radius:.4f} hash={read.hash[:12]}")
    return 0


def load_read_spec(out: Path):
    from .renorm import ReadNormSpec
    path = out / SPEC_FILES["read"]
    if not path.exists():
        raise UsageError(f"missing spec {path}; run `readlab build` first")
    return ReadNormSpec.from_json(json.loads(path.read_text()))


# ------------------------------------------------------------------ suites

def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _duality_case(args):
    from .dualgeom import DualBallRep, dual_norm_gauge, dual_norm_support
    spec_json, seed, bound, exact, tol = args
    from .renorm import ReadNormSpec
    spec = ReadNormSpec.from_json(spec_json, verify_hash=False)
    rng = np.random.default_rng([seed, spec.dim])
    f = FiniteVector.from_dense(random_integer_vector(rng, spec.dim, bound))
    if not exact:
        f = f.to_float()
    g, _ = dual_norm_gauge(DualBallRep.from_spec(spec), f, exact=exact)
    s, _ = dual_norm_support(spec, f, exact=exact)
    equal = (g == s) if exact else abs(float(g) - float(s)) <= tol * max(1.0, abs(float(g)))
    return {"seed": seed, "dim": spec.dim, "f": f.to_json(), "gauge": format_scalar(g), "support": format_scalar(s),
            "equal": bool(equal)}


def suite_duality(cfg, spec, workers):
    """Gauge against support LP on functionals spread round-robin over ``dims``.

    Each dim gets its own spec with ``rows_per_dim * dim`` rows; the exact gauge LP
    slows sharply once row weights fall below float resolution.
    """
    from .renorm import build_read_spec
    p = cfg["suites"]["duality"]
    s = cfg["spec"]
    exact = cfg["mode"] == "exact"
    dims = [int(d) for d in p["dims"]]
    specs = {d: build_read_spec(d, Fraction(s["epsilon"]), s["generator"], int(s["seed"]) + d,
                                rows=int(p["rows_per_dim"]) * d, mesh_size=int(s["mesh_size"])).to_json()
             for d in dims}
    items = [(specs[dims[k % len(dims)]], k, int(p["bound"]), exact, cfg["tolerances"]["float"])
             for k in range(int(p["count"]))]
    cases = _map(_duality_case, items, workers)
    n_eq = sum(c["equal"] for c in cases)
    gates = {"all_equal": {"value": n_eq, "required": len(cases), "pass": n_eq == len(cases)}}
    rows = [{"seed": c["seed"], "dim": c["dim"], "gauge": c["gauge"], "support": c["support"],
             "equal": c["equal"]} for c in cases]
    return {"spec_hashes": {str(d): specs[d]["hash"] for d in dims}, "functionals": cases}, gates, rows


def _dichotomy_case(args):
    from .attain import (Refuted, certificate_check, combined_functional, dichotomy_certificate,
                         generate_attaining_pair, maximizer, verdict_to_json, CoverageError)
    from .renorm import ReadNormSpec
    spec_json, seed = args
    spec = ReadNormSpec.from_json(spec_json, verify_hash=False)
    F, G = generate_attaining_pair(spec, seed)
    case = {"seed": seed, "x": F.witness.to_json(), "z": G.witness.to_json()}
    try:
        cert = dichotomy_certificate(spec, F, G)
    except CoverageError as exc:
        case.update(certified=False, refuted=False, reason=str(exc))
        return case
    value, e = maximizer(spec, combined_functional(F, G, cert.theta))
    verdict = certificate_check(spec, cert, F, G, e, value)
    case.update(certified=True, refuted=isinstance(verdict, Refuted), theta=cert.theta,
                cancel_indices=list(cert.cancel_indices), maximizer=e.to_json(),
                verdict=verdict_to_json(verdict), certificate=cert.to_json())
    return case


def suite_dichotomy(cfg, spec, workers, out: Path):
    from .attain import (Attains, Combination, NotAttains, attainment_verdict,
                         generate_attaining_pair, verdict_to_json)
    p = cfg["suites"]["dichotomy"]
    cases = _map(_dichotomy_case, [(spec.to_json(), s) for s in range(int(p["pairs"]))], workers)
    certified = [c for c in cases if c["certified"]]
    refuted = [c for c in certified if c["refuted"]]
    for c in certified:
        write_atomic(out / "certificates" / f"cert_{c['seed']:04d}.json",
                     dump_json({"certificate": c["certificate"], "verdict": c["verdict"]}))
    horizons = cfg["horizons"] or [spec.M // 2, spec.M]
    verdicts, consistent = [], True
    for c in certified[: int(p["verdict_pairs"])]:
        F, G = generate_attaining_pair(spec, c["seed"])
        single = attainment_verdict(spec, F, horizons)
        combo = attainment_verdict(spec, Combination(F, G, c["theta"]), horizons)
        ok = isinstance(single, Attains) and not isinstance(combo, Attains)
        consistent &= ok
        verdicts.append({"seed": c["seed"], "single": verdict_to_json(single)["verdict"],
                         "combination": verdict_to_json(combo)["verdict"], "consistent": ok,
                         "combination_certified": isinstance(combo, NotAttains)})
    rate = len(certified) / len(cases) if cases else 0.0
    gates = {
        "certified_rate": {"value": rate, "required": p["min_certified"],
                           "pass": rate >= p["min_certified"]},
        "refuted_all_certified": {"value": len(refuted), "required": len(certified),
                                  "pass": len(refuted) == len(certified)},
        "verdicts_consistent": {"value": consistent, "required": True, "pass": consistent},
    }
    rows = [{"seed": c["seed"], "certified": c["certified"], "refuted": c["refuted"],
             "indices": len(c.get("cancel_indices", []))} for c in cases]
    return {"pairs": cases, "horizons": horizons, "verdicts": verdicts}, gates, rows


def suite_geometry(cfg, spec, workers):
    from .geom import (combo_slices_diameter, diagnostic_row, roughness_at,
                       slice_at, slice_diameter_lower_bound)
    from .renorm import build_read_spec
    p = cfg["suites"]["geometry"]
    s = cfg["spec"]
    eps = Fraction(s["epsilon"])
    target = float(2 - eps) - float(cfg["tolerances"]["geometry_slack"])
    delta = Fraction(p["delta"])
    hs = [Fraction(h) for h in p["h_sweep"]]
    dims = sorted(int(d) for d in p["dims"])
    cases, rows = [], []
    for dim in dims:
        started = time.perf_counter()
        sp = spec if dim == spec.dim else build_read_spec(
            dim, eps, s["generator"], int(s["seed"]) + dim, mesh_size=int(s["mesh_size"]))
        rng = np.random.default_rng([int(p["seed"]), dim])
        slices = [slice_at(sp, FiniteVector.from_dense(random_integer_vector(rng, dim, 4)), delta)
                  for _ in range(int(p["slices"]))]
        bounds = [slice_diameter_lower_bound(sp, sl) for sl in slices]
        combo = combo_slices_diameter(sp, slices, [Fraction(1, len(slices))] * len(slices))
        rough = [roughness_at(sp, sl.witness, hs, exact=cfg["mode"] == "exact" and dim <= 8)
                 for sl in slices]
        case = {"dim": dim, "spec_hash": sp.hash, "rho": format_scalar(sp.rho),
                "reference": float(2 / (1 + sp.rho)),
                "slice_bounds": [float(b.value) for b in bounds],
                "slice_found": [b.found for b in bounds],
                "combo_bound": float(combo.value), "combo_found": combo.found,
                "roughness": [float(q) for q, _ in rough],
                "roughness_coordinates": [n for _, n in rough]}
        cases.append(case)
        for kind, val, n in ([("slice", b.value, b.n) for b in bounds]
                             + [("combo", combo.value, combo.n)]
                             + [("roughness", q, n) for q, n in rough]):
            rows.append(diagnostic_row(sp, kind, val, n, started))
    last = cases[-1]
    min_slice = min(last["slice_bounds"] + [last["combo_bound"]])
    min_rough = min(last["roughness"])
    gates = {"slice_diameter": {"value": min_slice, "required": target, "pass": min_slice >= target},
             "roughness": {"value": min_rough, "required": target, "pass": min_rough >= target}}
    return cases, gates, rows


def suite_acosta(cfg, spec, workers):
    from .renorm import AcostaSpec, acosta_attainment_criterion, acosta_norm
    a = cfg["acosta"]
    max_n = int(cfg["suites"]["acosta"]["max_n"])
    ac = AcostaSpec.from_rule(a["weight_rule"], max(int(a["N"]), max_n))
    norms = [acosta_norm(ac, FiniteVector.basis(n, ac.dim)) for n in range(1, max_n + 1)]
    full = acosta_attainment_criterion(ac, "all")
    squares = acosta_attainment_criterion(ac, "squares")
    finite = acosta_attainment_criterion(ac, list(range(1, max_n + 1)))
    gates = {"unit_basis": {"value": all(v == 1 for v in norms), "required": True,
                            "pass": all(v == 1 for v in norms)},
             "full_support_diverges": {"value": full, "required": False, "pass": full is False},
             "square_support_converges": {"value": squares, "required": True, "pass": squares is True},
             "finite_support": {"value": finite, "required": True, "pass": finite is True}}
    cases = {"weight_rule": a["weight_rule"], "norms": [format_scalar(v) for v in norms]}
    rows = [{"n": n, "norm": format_scalar(v)} for n, v in enumerate(norms, start=1)]
    return cases, gates, rows


def suite_discrange(cfg, spec, workers):
    from .discrange import RealPolynomial, biorthogonal_system, density_errors, zero_coordinate_count
    from .linalg import rank
    p = cfg["suites"]["discrange"]
    tol = Fraction(str(cfg["tolerances"]["density"]))
    N, n_max = int(p["N"]), int(p["n_max"])
    density = []
    for m in range(1, int(p["m_max"]) + 1):
        errs = density_errors(m, n_max, N)
        k = min(range(len(errs)), key=lambda i: errs[i])
        density.append({"m": m, "min_error": float(errs[k]), "argmin_n": k + 1,
                        "pass": errs[k] <= tol,
                        "decreasing": all(a >= b for a, b in zip(errs, errs[1:]))})
    rng = np.random.default_rng(int(cfg["spec"]["seed"]))
    zero_ok = 0
    for _ in range(int(p["polys"])):
        deg = int(rng.integers(0, 12))
        k = int(rng.integers(0, deg + 1))
        roots = [Fraction(1, 2 ** int(rng.integers(1, 2 * N))) for _ in range(k)]
        while True:
            rest = RealPolynomial(tuple(Fraction(int(c)) for c in rng.integers(-5, 6, size=deg - k + 1)))
            if rest.degree == deg - k:
                break
        f = RealPolynomial.from_roots(roots) * rest
        zero_ok += zero_coordinate_count(f, N) <= f.degree
    bi_ok = 0
    for _ in range(int(p["systems"])):
        dim = int(rng.integers(1, int(p["max_dim"]) + 1))
        while True:
            w = [random_integer_vector(rng, dim, 5) for _ in range(dim)]
            if rank(w) == dim:
                break
        v, vs = biorthogonal_system([FiniteVector.from_dense(a) for a in w])
        bi_ok += all(pair(vs[i], v[j]) == (1 if i == j else 0) for i in range(dim) for j in range(dim))
    gates = {"density": {"value": [d["min_error"] for d in density], "required": float(tol),
                         "pass": all(d["pass"] for d in density)},
             "zero_count": {"value": zero_ok, "required": int(p["polys"]),
                            "pass": zero_ok == int(p["polys"])},
             "biorthogonal": {"value": bi_ok, "required": int(p["systems"]),
                              "pass": bi_ok == int(p["systems"])}}
    return {"density": density}, gates, density


def cmd_run(cfg: dict, suite: str, out: Path, workers: int = 1) -> int:
    if suite not in SUITE_VERSIONS:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITE_VERSIONS)}")
    spec = load_read_spec(out)
    if suite == "dichotomy":
        cases, gates, rows = suite_dichotomy(cfg, spec, workers, out)
    else:
        cases, gates, rows = globals()[f"suite_{suite}"](cfg, spec, workers)
    passed = all(g["pass"] for g in gates.values())
    report = {"schema": REPORT_SCHEMA, "suite": suite, "suite_version": SUITE_VERSIONS[suite],
              "suite_versions": SUITE_VERSIONS, "config_hash": config_hash(cfg),
              "spec_hash": spec.hash, "mode": cfg["mode"], "gates": gates, "cases": cases,
              "passed": passed}
    write_atomic(out / f"report_{suite}.json", dump_json(_jsonable(report)))
    if rows:
        fields = list(rows[0].keys())
        write_atomic(out / f"summary_{suite}.csv", dump_csv(rows, fields))
    for name, g in gates.items():
        print(f"{'PASS' if g['pass'] else 'FAIL'} {suite}.{name}: {g['value']!r} (required {g['required']!r})")
    return 0 if passed else 1


def cmd_replay(cert_path: Path, spec_path: Path) -> int:
    from .attain import replay_certificate, verdict_to_json
    from .dualgeom import PreconditionError
    from .renorm import ReadNormSpec
    data = json.loads(cert_path.read_text())
    cert = data.get("certificate", data)
    recorded = data.get("verdict")
    spec = ReadNormSpec.from_json(json.loads(spec_path.read_text()))
    try:
        res = replay_certificate(spec, cert, recorded)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if res.ok:
        print(f"replayed: {verdict_to_json(res.verdict)}")
        return 0
    for p in res.problems:
        print(f"divergence: {p}")
    return 1


# ------------------------------------------------------------------ main

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="readlab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML or JSON experiment config")
        p.add_argument("--dim", type=int)
        p.add_argument("--epsilon")
        p.add_argument("--seed", type=int)
        p.add_argument("--generator", choices=("disc", "biortho"))
        p.add_argument("--rows", type=int)
        p.add_argument("--mode", choices=("exact", "float"))
        p.add_argument("--horizons", help="comma-separated row horizons, e.g. 16,32,64")
        p.add_argument("--out", required=True, type=Path)

    common(sub.add_parser("build", help="write spec files"))
    run = sub.add_parser("run", help="run a suite against built specs")
    run.add_argument("suite", choices=sorted(SUITE_VERSIONS))
    common(run)
    run.add_argument("--workers", type=int, default=1)
    rp = sub.add_parser("replay", help="re-derive a certificate")
    rp.add_argument("certificate", type=Path)
    rp.add_argument("--spec", type=Path, required=True)
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "replay":
            return cmd_replay(args.certificate, args.spec)
        cfg = resolve_config(args)
        if args.command == "build":
            return cmd_build(cfg, args.out)
        return cmd_run(cfg, args.suite, args.out, args.workers)
    except (UsageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ReadlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
