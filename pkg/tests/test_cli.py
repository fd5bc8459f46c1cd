import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from frozen_planet import compute_constants
from frozen_planet.cli import main

GOLDEN = Path(__file__).parent / "golden"


def _kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


def test_freefall(capsys):
    assert main(["freefall", "--alpha", "1"]) == 0
    assert _kv(capsys.readouterr().out)["kappa"] == "0.75"
    assert main(["freefall", "--alpha", "2", "--quadrature"]) == 0
    assert float(_kv(capsys.readouterr().out)["kappa"]) == pytest.approx(0.7853981633974483, abs=1e-12)


def test_constants(capsys):
    assert main(["constants", "--eps", "0.2146"]) == 0
    kv = {k: float(v) for k, v in _kv(capsys.readouterr().out).items()}
    assert set(kv) == {"eps", "c0", "c1", "c2", "c3", "c4", "kappa"}
    assert kv["kappa"] == max(kv["c4"], 1 / kv["c2"])
    assert kv == compute_constants(0.2146).as_dict()


def test_verify_exit_codes(tmp_path, capsys):
    assert main(["sweep", "--r-from", "1", "--r-to", "0.8", "--steps", "2", "--out", str(tmp_path / "b.json")]) == 0
    assert main(["verify", str(tmp_path / "b.json"), "--report", str(tmp_path / "rep.json")]) == 0
    report = json.loads((tmp_path / "rep.json").read_text())
    assert report["passed"] and all(c["passed"] for o in report["orbits"] for c in o["checks"])
    assert len(report["orbits"]) == 3

    data = json.loads((GOLDEN / "orbit_r0.50.json").read_text())
    scale = 0.5 / data["samples"]["q2"][0]
    data["samples"]["q2"] = [q * scale for q in data["samples"]["q2"]]
    (tmp_path / "bad.json").write_text(json.dumps(data))
    assert main(["verify", str(tmp_path / "bad.json")]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_usage_errors(tmp_path):
    assert main(["nonsense"]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "junk.json").write_text("{")
    assert main(["verify", str(tmp_path / "junk.json")]) == 2
    assert main(["freefall", "--alpha", "-1"]) == 1


def test_solve_and_export(tmp_path, capsys):
    out = tmp_path / "o.json"
    assert main(["solve", "--r", "1", "--out", str(out)]) == 0
    assert main(["solve", "--r", "0.9", "--seed", str(out), "--out", str(tmp_path / "o9.json")]) == 0
    kv = _kv(capsys.readouterr().out)
    assert float(kv["r"]) == 0.9 and float(kv["residual_norm"]) < 1e-10
    assert main(["export", str(tmp_path / "o9.json"), "--what", "symmetric", "--out", str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s.csv").read_text().startswith("t,q1,q2,v1,v2,E\n")


def _strip_stamp(text):
    return re.sub(r'"timestamp": "[^"]*"', '"timestamp": ""', text)


def test_deterministic_output(tmp_path):
    for name in ("a", "b"):
        assert main(["sweep", "--r-from", "1", "--r-to", "0.9", "--steps", "1", "--out", str(tmp_path / name)]) == 0
    assert _strip_stamp((tmp_path / "a").read_text()) == _strip_stamp((tmp_path / "b").read_text())


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "frozen_planet", "freefall", "--alpha", "1"],
                          capture_output=True, text=True, check=True)
    assert "kappa = 0.75" in done.stdout
