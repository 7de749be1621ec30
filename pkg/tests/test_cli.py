import json

import jsonschema
import pytest

from readlab.cli import main, schema_dir


def _config(tmp_path, **suites):
    cfg = {"spec": {"dim": 4, "epsilon": "1/2", "seed": 1, "mesh_size": 128},
           "suites": {"duality": {"count": 12, "dims": [2, 3]},
                      "dichotomy": {"pairs": 3, "verdict_pairs": 1},
                      "geometry": {"dims": [4], "slices": 2, "h_sweep": ["1", "1/4"]},
                      "discrange": {"m_max": 1, "n_max": 200, "polys": 10, "systems": 5}}}
    path = tmp_path / "cfg.yaml"
    import yaml
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def _schema(name):
    return json.loads((schema_dir() / name).read_text())


def test_build_writes_spec_with_budget(tmp_path):
    out = tmp_path / "o"
    assert main(["build", "--dim", "16", "--epsilon", "0.5", "--out", str(out)]) == 0
    data = json.loads((out / "read_spec.json").read_text())
    jsonschema.validate(data, _schema("read_spec.schema.json"))
    from fractions import Fraction
    assert sum(Fraction(a) for a in data["r"]) < Fraction(1, 3)


def test_build_rejects_epsilon_two(tmp_path, capsys):
    assert main(["build", "--epsilon", "2", "--out", str(tmp_path)]) == 2
    assert "(0, 2)" in capsys.readouterr().err


def test_build_is_byte_identical(tmp_path):
    cfg = _config(tmp_path)
    for d in ("a", "b"):
        assert main(["build", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    for name in ("read_spec.json", "acosta_spec.json", "config.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_invalid_config_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"spec": {"dim": 4, "epsilon": "1/2", "generator": "nope", "seed": 0}}))
    assert main(["build", "--config", str(bad), "--out", str(tmp_path)]) == 2


def test_run_without_spec(tmp_path):
    assert main(["run", "acosta", "--out", str(tmp_path / "empty")]) == 2


def test_bad_horizons(tmp_path):
    assert main(["run", "acosta", "--horizons", "a,b", "--out", str(tmp_path)]) == 2


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    cfg = _config(tmp)
    assert main(["build", "--config", cfg, "--out", str(tmp / "out")]) == 0
    return cfg, tmp / "out"


@pytest.mark.parametrize("suite", ["acosta", "duality", "dichotomy", "geometry"])
def test_run_suite_passes_and_reports(built, suite):
    cfg, out = built
    assert main(["run", suite, "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / f"report_{suite}.json").read_text())
    jsonschema.validate(report, _schema("report.schema.json"))
    assert report["passed"] and report["suite_versions"][suite]
    assert (out / f"summary_{suite}.csv").exists()


def test_gate_failure_exit_code(built):
    # density at m = 1 misses the 1e-3 tolerance within n <= 200 at truncation 64
    cfg, out = built
    assert main(["run", "discrange", "--config", cfg, "--out", str(out)]) == 1
    report = json.loads((out / "report_discrange.json").read_text())
    assert not report["passed"] and report["gates"]["biorthogonal"]["pass"]


def test_reports_are_deterministic(built):
    cfg, out = built
    first = (out / "report_duality.json").read_bytes() if (out / "report_duality.json").exists() else None
    assert main(["run", "duality", "--config", cfg, "--out", str(out)]) == 0
    again = (out / "report_duality.json").read_bytes()
    assert main(["run", "duality", "--config", cfg, "--out", str(out), "--workers", "2"]) == 0
    assert (out / "report_duality.json").read_bytes() == again
    if first is not None:
        assert first == again


def test_replay_round_trip_and_tampering(built, tmp_path, capsys):
    cfg, out = built
    assert main(["run", "dichotomy", "--config", cfg, "--out", str(out)]) == 0
    certs = sorted((out / "certificates").glob("*.json"))
    assert certs
    spec = str(out / "read_spec.json")
    for c in certs:
        jsonschema.validate(json.loads(c.read_text())["certificate"], _schema("certificate.schema.json"))
        assert main(["replay", str(c), "--spec", spec]) == 0
    assert "refuted" in capsys.readouterr().out
    data = json.loads(certs[0].read_text())
    data["certificate"]["cancel_indices"][0] += 1
    tampered = tmp_path / "t.json"
    tampered.write_text(json.dumps(data))
    assert main(["replay", str(tampered), "--spec", spec]) == 1
    assert main(["build", "--dim", "3", "--out", str(tmp_path / "other")]) == 0
    assert main(["replay", str(certs[0]), "--spec", str(tmp_path / "other" / "read_spec.json")]) == 2
