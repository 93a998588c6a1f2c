import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from grc.cli import main

ROOT = Path(__file__).resolve().parents[1]
MODELS = ROOT / "models"
GOLDEN = ROOT / "tests" / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "golden, argv",
    [
        ("erasure_analyze.json", ["analyze", MODELS / "erasure.grc", "--json"]),
        ("rset_analyze.json", ["analyze", MODELS / "rset.grc", "--json"]),
        ("bennett_and_analyze.json", ["analyze", MODELS / "bennett_and.grc", "--json"]),
        ("fig7_adiabatic.json", ["adiabatic", MODELS / "fig7.grc", "--all-inputs", "--json"]),
        ("erasure_classify.json", ["classify", MODELS / "erasure.grc", "--json"]),
    ],
)
def test_golden_json(capsys, golden, argv):
    _, out, _ = run(capsys, *argv)
    assert out == (GOLDEN / golden).read_text()


def test_analyze_erasure(capsys):
    code, out, _ = run(capsys, "analyze", MODELS / "erasure.grc", "--json", "--temperature", "300")
    data = json.loads(out)
    assert code == 1
    assert data["total_nats"] == pytest.approx(math.log(2), abs=1e-12)
    assert data["total_bits"] == pytest.approx(1.0, abs=1e-12)
    assert data["entropy_ejecting"] is True
    assert data["heat_joules"] == pytest.approx(2.8709788850787e-21, rel=1e-9)
    assert data["temperature_kelvin"] == 300.0
    g = data["gates"][0]
    assert set(g) == {
        "index", "gate", "precondition_probability", "precondition_satisfied",
        "delta_s_nc_nats", "delta_s_nc_bits", "cumulative_nats", "cumulative_bits",
    }
    assert g["precondition_probability"] == 0.5 and g["precondition_satisfied"] is False


def test_analyze_rset_exit_zero(capsys):
    code, out, _ = run(capsys, "analyze", MODELS / "rset.grc")
    assert code == 0
    assert "verdict" in out


def test_analyze_human_readable_has_heat(capsys):
    _, out, _ = run(capsys, "analyze", MODELS / "erasure.grc", "--temperature", "300")
    assert "2.87098e-21 J" in out


def test_classify_fields(capsys):
    code, out, _ = run(capsys, "classify", MODELS / "bennett_and.grc", "--op", "copy", "--json")
    data = json.loads(out)
    assert code == 0
    assert set(data) == {"deterministic", "unconditionally_reversible", "canonical_precondition", "reachable_final_count"}
    assert data["deterministic"] is True
    assert data["unconditionally_reversible"] is False
    assert data["reachable_final_count"] == 8


def test_classify_stochastic(capsys):
    code, out, _ = run(capsys, "classify", MODELS / "coin.grc", "--op", "coin", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["deterministic"] is False
    assert data["unconditionally_reversible"] is False


def test_preconditions_listing(capsys):
    code, out, _ = run(capsys, "preconditions", MODELS / "erasure.grc", "--op", "erase", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["total_count"] == 2
    assert data["preconditions"] == [["x=0"], ["x=1"]]


def test_preconditions_display_limit(capsys):
    code, out, _ = run(capsys, "preconditions", MODELS / "bennett_and.grc", "--op", "compute", "--limit", "3", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["total_count"] == 256
    assert len(data["preconditions"]) == 3


def test_enumeration_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("GRC_ENUM_LIMIT", "5")
    code, out, _ = run(capsys, "preconditions", MODELS / "bennett_and.grc", "--op", "compute", "--json")
    data = json.loads(out)
    assert code == 3
    assert data["total_count"] == 256
    assert data["preconditions"] is None


def test_adiabatic_single_run(capsys):
    code, out, _ = run(capsys, "adiabatic", "fig7", "--input", "A=1,B=1", "--json")
    data = json.loads(out)
    assert code == 1
    assert data["run"]["dissipative_events"] == 2
    assert data["run"]["rail_pair_events"] == 1
    code, _, _ = run(capsys, "adiabatic", "fig7", "--input", "A=1,B=0")
    assert code == 0


def test_adiabatic_trace_jsonl(capsys):
    code, out, _ = run(capsys, "adiabatic", "fig7", "--input", "A=1,B=1", "--trace")
    events = [json.loads(line) for line in out.splitlines() if line.startswith("{")]
    assert len(events) == 8
    assert code == 1
    assert [e["cause"] for e in events].count("snap") == 2


def test_adiabatic_bad_input(capsys):
    code, _, err = run(capsys, "adiabatic", "fig7", "--input", "A=7,B=0")
    assert code == 2
    assert "bad input 'A=7'" in err


def test_parse_error_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.grc"
    bad.write_text("var x arity 2\ndist d { x=0: 0.6, x=1: 0.5 }\n")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 2
    assert f"{bad}:2:6: error[E005]: probabilities sum to 1.1" in err


def test_missing_file_and_names(capsys):
    assert run(capsys, "classify", "no_such_file.grc")[0] == 2
    assert run(capsys, "classify", MODELS / "erasure.grc", "--op", "nope")[0] == 2
    assert run(capsys, "analyze", MODELS / "erasure.grc", "--circuit", "nope")[0] == 2


def test_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "grc", "classify", str(MODELS / "erasure.grc"), "--json"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == (GOLDEN / "erasure_classify.json").read_text()


@pytest.mark.skipif(shutil.which("grc") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["grc", "--help"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    for sub in ("classify", "analyze", "preconditions", "adiabatic"):
        assert sub in proc.stdout
