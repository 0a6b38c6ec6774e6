import json
import subprocess
import sys

import numpy as np
import pytest

from chanres.objects import channel_to_dict, dephasing_channel, unitary_channel
from chanres.suites import SUITE_TAGS, render_csv, render_json, report_csv, run_suite

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "chanres.cli", *args],
        capture_output=True,
        **kwargs,
    )


# ---------------------------------------------------------------------------
# suites as a library


@pytest.mark.parametrize("tag", SUITE_TAGS)
def test_every_suite_passes_smoke(tag):
    trials = 2 if tag in ("prop3", "prop6", "thm9") else 3
    report = run_suite(tag, dim=2, trials=trials, seed=13)
    assert report.passed, (tag, report.max_violation, report.threshold)
    assert len(report.rows) == trials
    assert report.max_violation <= report.threshold


def test_suite_rejects_unknown_tag():
    with pytest.raises(ValueError):
        run_suite("nope")


def test_suite_reports_are_deterministic():
    a = run_suite("thm2", dim=2, trials=2, seed=5)
    b = run_suite("thm2", dim=2, trials=2, seed=5)
    assert render_json(a.to_dict()) == render_json(b.to_dict())
    assert report_csv(a) == report_csv(b)


def test_bounds_suite_dim3():
    report = run_suite("bounds", dim=3, trials=5, seed=2)
    assert report.passed
    for row in report.rows:
        assert row["c_trace"] <= 1.0 - 1.0 / 3.0 + 1e-9


def test_csv_rendering_format():
    rows = [{"a": 1, "b": 0.123456789012345}]
    data = render_csv(rows, {"k": 2}).decode()
    assert "a,b" in data
    assert "0.123456789012" in data  # 12 significant digits
    assert data.startswith("# k=2")


# ---------------------------------------------------------------------------
# CLI: analyze


def test_cli_analyze_hadamard(tmp_path):
    spec = tmp_path / "hadamard.json"
    spec.write_text(json.dumps(channel_to_dict(unitary_channel(HADAMARD, name="hadamard"))))
    proc = _cli("analyze", "--input", str(spec))
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert payload["generating_power"] == pytest.approx(0.5, abs=1e-6)
    assert payload["channel"]["is_mio"] is False


def test_cli_analyze_dephasing(tmp_path):
    spec = tmp_path / "delta.json"
    spec.write_text(json.dumps(channel_to_dict(dephasing_channel(2))))
    proc = _cli("analyze", "--input", str(spec))
    payload = json.loads(proc.stdout)
    assert payload["generating_power"] == pytest.approx(0.0, abs=1e-9)
    assert payload["increasing_power_search"] == pytest.approx(0.0, abs=1e-9)
    assert payload["channel"]["is_mio"] is True and payload["channel"]["is_dio"] is True
    for probe in payload["basis_probes"]:
        assert probe["c_trace"] == pytest.approx(0.0, abs=1e-9)


def test_cli_analyze_malformed_spec_exits_2(tmp_path):
    spec = tmp_path / "bad.json"
    spec.write_text(json.dumps({"dim_in": 2, "repr": "choi", "data": []}))
    proc = _cli("analyze", "--input", str(spec))
    assert proc.returncode == 2
    assert "missing_field" in proc.stderr.decode()
    assert "dim_out" in proc.stderr.decode()


def test_cli_analyze_invalid_channel_exits_2(tmp_path):
    spec = tmp_path / "nonphysical.json"
    bad = {
        "dim_in": 2,
        "dim_out": 2,
        "repr": "choi",
        "data": [[[1.0, 0.0] if i == j else [0.0, 0.0] for j in range(4)] for i in range(4)],
    }
    spec.write_text(json.dumps(bad))
    proc = _cli("analyze", "--input", str(spec))
    assert proc.returncode == 2
    assert "trace_preserving" in proc.stderr.decode()


# ---------------------------------------------------------------------------
# CLI: verify


def test_cli_verify_passes_and_is_byte_identical(tmp_path):
    args = ("verify", "thm2", "--dim", "2", "--trials", "3", "--seed", "7")
    first = _cli(*args)
    second = _cli(*args)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    payload = json.loads(first.stdout)
    assert payload["passed"] is True
    assert payload["max_violation"] <= 1e-4


def test_cli_verify_csv_output(tmp_path):
    out = tmp_path / "report.csv"
    proc = _cli("verify", "bounds", "--dim", "2", "--trials", "3", "--seed", "9", "--out", "csv", "--output", str(out))
    assert proc.returncode == 0
    text = out.read_text()
    assert text.startswith("#")
    assert "violation" in text.splitlines()[1]


# ---------------------------------------------------------------------------
# CLI: sweep


def test_cli_sweep_closed_form_column():
    proc = _cli(
        "sweep", "--kind", "haar-unitary", "--count", "3", "--seed", "3",
        "--include", "dephasing", "--out", "csv",
    )
    assert proc.returncode == 0
    lines = proc.stdout.decode().strip().splitlines()
    header = lines[1].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[2:]]
    for row in rows:
        if row["name"].startswith("haar"):
            assert float(row["generating_power"]) == pytest.approx(float(row["closed_form"]), abs=1e-6)
        if row["name"] == "dephasing":
            assert float(row["generating_power"]) == pytest.approx(0.0, abs=1e-9)
            assert float(row["p_free_probes"]) == pytest.approx(0.5, abs=1e-9)
        assert float(row["bound_slack"]) >= -1e-6


def test_cli_sweep_empty_count_header_only():
    proc = _cli("sweep", "--kind", "haar-unitary", "--count", "0", "--out", "csv")
    assert proc.returncode == 0
    lines = proc.stdout.decode().strip().splitlines()
    assert lines[0].startswith("#")
    assert len(lines) <= 2  # meta comment plus nothing or an empty line
