import subprocess
import sys

import pytest

from pipip.cli import main
from pipip.harness import parse_config, preset

CONFIG = """
[world]
width = 4
height = 3
agents = 0.15 0.15; 0.45 0.15

[density]
kind = static-gaussian
mean = 0.75 0.45

[run]
horizon = 40
seeds = 0-2
"""


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    assert capsys.readouterr().out.split() == ["experiment1", "experiment1-eps0.3", "experiment2"]


def test_preset_emission(capsys, tmp_path):
    assert main(["presets", "experiment2"]) == 0
    assert parse_config(capsys.readouterr().out) == preset("experiment2")
    assert main(["presets", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "experiment1-eps0.3.ini", "experiment1.ini", "experiment2.ini",
    ]


def test_run_with_overrides_and_analyze(capsys, tmp_path):
    cfg = tmp_path / "small.ini"
    cfg.write_text(CONFIG)
    out = tmp_path / "out"
    code = main(["run", str(cfg), "--seeds", "3-4", "--horizon", "30", "--algorithm", "PHPIP,DISL",
                 "--out", str(out), "--threads", "2"])
    assert code == 0
    for arm in ("PHPIP", "DISL"):
        assert sorted(p.name for p in (out / arm).glob("*.csv")) == ["seed_0003.csv", "seed_0004.csv"]
        lines = (out / arm / "seed_0003.csv").read_text().splitlines()
        assert len(lines) == 31
    capsys.readouterr()
    assert main(["analyze", str(out)]) == 0
    report = capsys.readouterr().out
    assert "PHPIP" in report and "DISL" in report


def test_run_pipip_arm_switches_to_decaying_rate(tmp_path):
    cfg = tmp_path / "small.ini"
    cfg.write_text(CONFIG)
    assert main(["run", str(cfg), "--algorithm", "PIPIP", "--seeds", "0", "--out", str(tmp_path / "o")]) == 0
    assert "epsilon = inhomogeneous" in (tmp_path / "o" / "config.ini").read_text()


@pytest.mark.parametrize(
    "text",
    ["[learning]\nkappa = 0.05\n", "[run]\nhorizon = 1\n", "[run]\nseeds = 4,4\n", "[world]\nradius = 2\n"],
)
def test_invalid_config_exit_code(tmp_path, capsys, text):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) != 0
    assert "error" in capsys.readouterr().err


def test_analyze_empty_directory(tmp_path, capsys):
    assert main(["analyze", str(tmp_path)]) != 0


def test_missing_config(tmp_path):
    assert main(["run", str(tmp_path / "nope.ini")]) != 0


def test_verify(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert out.count("[") >= 3 and "FAIL" not in out


def test_module_entry_point():
    result = subprocess.run([sys.executable, "-m", "pipip", "presets"], capture_output=True, text=True)
    assert result.returncode == 0 and "experiment1" in result.stdout
