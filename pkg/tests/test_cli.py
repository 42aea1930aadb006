import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

SCHEMA_DIR = Path(__file__).parent.parent / "src" / "cqpolar" / "schemas"


def run_cli(*args, env=None):
    import os

    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "cqpolar.cli", *args],
        capture_output=True,
        text=True,
        env=full_env,
    )


def validate_schema(payload, schema_name):
    import jsonschema
    from referencing import Registry, Resource

    resources = []
    for path in SCHEMA_DIR.glob("*.json"):
        doc = json.loads(path.read_text())
        resources.append((path.name, Resource.from_contents(doc)))
    registry = Registry().with_resources(resources)
    schema = json.loads((SCHEMA_DIR / schema_name).read_text())
    jsonschema.validate(payload, schema, registry=registry)


def test_channel_validate_rejects_bad_matrix(tmp_path):
    bad = {
        "group": [2],
        "k": 2,
        "states": {
            "(0)": {"re": [[1, 0], [0, 0]]},
            "(1)": {"re": [[1.4, 0], [0, -0.4]]},
        },
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    res = run_cli("channel", "validate", str(path))
    assert res.returncode == 1
    assert "(1)" in res.stderr  # names the offending input symbol


def test_channel_preset_and_validate(tmp_path):
    out = tmp_path / "ch.json"
    res = run_cli(
        "channel", "preset", "--preset", "classical-symmetric", "--q", "3",
        "--p", "0.2", "--out", str(out),
    )
    assert res.returncode == 0
    payload = json.loads(out.read_text())
    validate_schema(payload, "channel.schema.json")
    assert run_cli("channel", "validate", str(out)).returncode == 0


def test_polarize_csv_and_sidecar(tmp_path):
    out = tmp_path / "scan.csv"
    res = run_cli(
        "polarize", "--preset", "classical-symmetric", "--q", "2", "--p", "0.11",
        "--n", "3", "--out", str(out),
    )
    assert res.returncode == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 8
    assert list(rows[0]) == ["branch", "I", "Fmax", "F", "best_H", "I_quot", "F_quot"]
    payload = json.loads((tmp_path / "scan.csv.json").read_text())
    validate_schema(payload, "scan.schema.json")
    total = sum(float(r["I"]) for r in rows)
    assert total == pytest.approx(8 * payload["base_I"], abs=1e-8)


def test_polarize_bits_flag(tmp_path):
    out_n = tmp_path / "n.csv"
    out_b = tmp_path / "b.csv"
    for out, units in [(out_n, "nats"), (out_b, "bits")]:
        assert run_cli(
            "polarize", "--preset", "classical-symmetric", "--q", "2", "--p", "0.11",
            "--n", "1", "--out", str(out), "--units", units,
        ).returncode == 0
    nats = list(csv.DictReader(out_n.open()))
    bits = list(csv.DictReader(out_b.open()))
    for a, b in zip(nats, bits):
        assert float(b["I"]) == pytest.approx(float(a["I"]) / np.log(2), abs=1e-9)


def test_construct_decode_roundtrip(tmp_path):
    plan = tmp_path / "plan.json"
    res = run_cli(
        "construct", "--preset", "pure-states", "--angles", "0,1.0471975511965976",
        "--n", "2", "--tau", "0.5", "--seed", "3", "--out", str(plan),
    )
    assert res.returncode == 0
    payload = json.loads(plan.read_text())
    validate_schema(payload, "plan.schema.json")
    report = tmp_path / "decode.json"
    prof = tmp_path / "prof.csv"
    res = run_cli(
        "decode-sim", "--plan", str(plan), "--trials", "100", "--seed", "5",
        "--out", str(report), "--profile-csv", str(prof),
    )
    assert res.returncode == 0
    payload = json.loads(report.read_text())
    validate_schema(payload, "decode_report.schema.json")
    assert payload["trials"] == 100
    assert prof.exists()


def test_decode_sim_deterministic_modulo_timestamp(tmp_path):
    plan = tmp_path / "plan.json"
    run_cli(
        "construct", "--preset", "pure-states", "--angles", "0,1.2",
        "--n", "1", "--tau", "1.0", "--seed", "2", "--out", str(plan),
    )
    out = tmp_path / "report.json"
    outs = []
    for _ in range(2):
        assert run_cli(
            "decode-sim", "--plan", str(plan), "--trials", "60", "--seed", "9",
            "--out", str(out),
        ).returncode == 0
        payload = json.loads(out.read_text())
        payload["manifest"].pop("timestamp")
        payload["manifest"].pop("wallclock_s")
        outs.append(payload)
    assert outs[0] == outs[1]


def test_verify_jsonl(tmp_path):
    out = tmp_path / "verify.jsonl"
    res = run_cli(
        "verify", "--checks", "info-fidelity-lower,sequential-union-bound",
        "--trials", "4", "--seed", "1", "--out", str(out),
    )
    assert res.returncode == 0
    lines = [json.loads(line) for line in out.read_text().splitlines()]
    assert lines
    for line in lines:
        validate_schema(line, "verify_line.schema.json")
        assert line["passed"]
    # byte-identical on rerun (JSONL has no timestamps)
    first = out.read_text()
    run_cli(
        "verify", "--checks", "info-fidelity-lower,sequential-union-bound",
        "--trials", "4", "--seed", "1", "--out", str(out),
    )
    assert out.read_text() == first


def test_verify_unknown_check_exits_validation(tmp_path):
    res = run_cli("verify", "--checks", "bogus", "--out", str(tmp_path / "v.jsonl"))
    assert res.returncode == 1


def test_capacity_exit_code(tmp_path):
    res = run_cli(
        "polarize", "--preset", "pure-states", "--angles", "0,0.8",
        "--n", "7", "--out", str(tmp_path / "scan.csv"),
        env={"CQPOLAR_DIM_CAP": "64"},
    )
    assert res.returncode == 2
    assert "capacity" in res.stderr.lower()


def test_mac_region_output(tmp_path):
    out = tmp_path / "mac.json"
    csv_out = tmp_path / "mac.csv"
    res = run_cli(
        "mac-region", "--users", "2;2", "--seed", "1", "--n", "2",
        "--out", str(out), "--csv", str(csv_out),
    )
    assert res.returncode == 0
    payload = json.loads(out.read_text())
    validate_schema(payload, "mac_region.schema.json")
    region = payload["region"]["constraints"]
    assert region["0,1"] == pytest.approx(payload["sum_rate"], abs=1e-9)
    est2 = payload["polarized_estimates"]["2"]["constraints"]
    assert est2["0,1"] == pytest.approx(payload["sum_rate"], abs=1e-8)
    rows = list(csv.DictReader(csv_out.open()))
    assert {r["subset"] for r in rows} == {"~", "0", "1", "0,1"}


def test_missing_channel_args_is_validation_error(tmp_path):
    res = run_cli("polarize", "--n", "2", "--out", str(tmp_path / "s.csv"))
    assert res.returncode == 1
