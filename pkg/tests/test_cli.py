import json
import subprocess
import sys

import pytest

from collectivesim.cli import main


def test_condorcet_surface_file(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["condorcet", "--n-max", "100", "--p-step", "0.01", "--out", str(out), "--seed", "1"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "p,n,probability"
    assert len(lines) - 1 == 10100
    # 12 significant digits
    assert "0.5,3,0.5" in lines and any(line.startswith("0.6,3,0.648") for line in lines)
    assert capsys.readouterr().out == ""


def test_zero_k_step_is_an_argument_error(capsys):
    assert main(["ddd", "--k-step", "0"]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_is_an_argument_error(capsys):
    assert main(["market", "--colour", "red"]) == 2
    assert main(["nonsense"]) == 2


def test_market_example_output(capsys):
    assert main(["market-example"]) == 0
    out = capsys.readouterr().out
    assert "[0.5, 0.5, 0.4]" in out and "[0.7, 0.6, 0.7]" in out
    assert "mean-squared error 0.287" in out and "mean-squared error 0.113" in out


def test_resolved_config_goes_to_stderr(capsys):
    assert main(["ddd", "--citizens", "20", "--networks", "2", "--k-min", "50", "--k-max", "50", "--threads", "1"]) == 0
    captured = capsys.readouterr()
    config = json.loads(captured.err.strip().splitlines()[0])
    assert config["params"]["citizens"] == 20 and config["replications"] == 2
    assert isinstance(config["master_seed"], int)
    assert captured.out.splitlines()[0].startswith("k,e_tend_ddd")


def test_printed_seed_reproduces_run(capsys):
    args = ["market", "--citizens", "30", "--dims", "4", "--reps", "3", "--p-step", "0.5", "--threads", "1"]
    assert main(args) == 0
    first = capsys.readouterr()
    seed = json.loads(first.err.strip().splitlines()[0])["master_seed"]
    assert main(args + ["--seed", str(seed)]) == 0
    assert capsys.readouterr().out == first.out


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("citizens = 25\nreps = 2\ndims = 3\np-step = 0.5\nseed = 4\n")
    assert main(["market", "--config", str(cfg), "--dims", "6", "--threads", "1"]) == 0
    config = json.loads(capsys.readouterr().err.strip().splitlines()[0])
    assert config["params"]["citizens"] == 25 and config["params"]["dims"] == 6
    assert config["replications"] == 2 and config["master_seed"] == 4


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("flux = 3\n")
    assert main(["ddd", "--config", str(cfg)]) == 2


def test_preset_show_and_scale(capsys):
    assert main(["preset", "fig4", "--scale", "10", "--show", "--seed", "3"]) == 0
    config = json.loads(capsys.readouterr().err.strip())
    assert config["replications"] == 100 and config["params"]["citizens"] == 100
    assert main(["ddd", "--preset", "fig7"]) == 2


def test_preset_run(tmp_path):
    out = tmp_path / "f2.csv"
    assert main(["preset", "fig2", "--out", str(out), "--seed", "0"]) == 0
    assert len(out.read_text().splitlines()) == 10101


def test_runtime_error_exit_code(tmp_path):
    assert main(["condorcet", "--n-max", "3", "--out", str(tmp_path / "nope" / "x.csv")]) == 1


def test_help_documents_presets():
    proc = subprocess.run([sys.executable, "-m", "collectivesim", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("fig2", "fig4", "fig5", "fig7", "fig8"):
        assert name in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "collectivesim", "ddd", "--help"], capture_output=True, text=True)
    for flag in ("--citizens", "--networks", "--m", "--beta", "--k-min", "--k-max", "--k-step", "--epsilon",
                 "--seed", "--out", "--threads", "--scale"):
        assert flag in proc.stdout


@pytest.mark.parametrize("argv", [["--version"], []])
def test_no_command(argv):
    assert main(argv) == 2
