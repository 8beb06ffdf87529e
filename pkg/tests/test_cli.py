"""End-to-end checks of the console entry point."""

import shutil
import subprocess
from pathlib import Path

import pytest

from xorlink.cli import main
from xorlink.experiments import load_experiment, loads_experiment, run_experiment

FIGS = sorted((Path(__file__).resolve().parent.parent / "figs").glob("*.ini"))

OK_RUN = """\
[run]
scheme = windowed
seed = 3
b = 2
delta_max = 4
p_feedback = 1.0
min_failures = 1
max_intervals = 50

[channel]
kind = bernoulli
p_success = 1.0
"""

OK_SWEEP = """\
[run]
scheme = windowed
seed = 9
b = 2
delta_max = 8
p_feedback = 0.5
min_failures = 5
max_intervals = 300

[channel]
kind = bernoulli
p_success = 0.7

[sweep]
axis = p_success
values = 0.6, 0.8
replicates = 3
"""


def write_cfg(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_degree_table_qmax_5(capsys):
    assert main(["degree-table", "--qmax", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 10  # pairs (x, y) with 0 < y < x <= 5
    assert "5 2 2" in lines
    assert lines[0] == "2 1 2"


def test_degree_table_default_size(capsys):
    assert main(["degree-table"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 120


def test_validate_echoes_canonical_form(tmp_path, capsys):
    cfg = write_cfg(tmp_path, OK_RUN)
    assert main(["validate", cfg]) == 0
    echoed = capsys.readouterr().out
    assert loads_experiment(echoed) == load_experiment(cfg)


def test_validate_rejects_bad_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, OK_RUN.replace("b = 2", "b = 0"))
    assert main(["validate", cfg]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.ini")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_run_writes_csv(tmp_path, capsys):
    cfg = write_cfg(tmp_path, OK_RUN)
    out = tmp_path / "results.csv"
    assert main(["run", cfg, "--output", str(out)]) == 0
    assert f"wrote 1 rows to {out}" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "windowed"
    assert fields[10] == "0.0000000000"  # perfect channel, no failures
    assert fields[8] == fields[11] == fields[15] == "50"


def test_run_output_key_from_config(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    cfg = write_cfg(tmp_path, OK_RUN.replace("[channel]", "output = from_cfg.csv\n\n[channel]"))
    assert main(["run", cfg]) == 0
    assert (tmp_path / "from_cfg.csv").exists()


def test_sweep_row_count_and_repeatability(tmp_path):
    cfg = write_cfg(tmp_path, OK_SWEEP)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", cfg, "-o", str(a)]) == 0
    assert main(["sweep", cfg, "-o", str(b), "--workers", "3"]) == 0
    assert len(a.read_text().splitlines()) == 1 + 2 * 3
    assert a.read_bytes() == b.read_bytes()


def test_sweep_without_sweep_section(tmp_path, capsys):
    cfg = write_cfg(tmp_path, OK_RUN)
    assert main(["sweep", cfg]) == 2
    assert "sweep" in capsys.readouterr().err


def test_unwritable_output_path(tmp_path, capsys):
    cfg = write_cfg(tmp_path, OK_RUN)
    bad = tmp_path / "no" / "such" / "dir" / "out.csv"
    assert main(["run", cfg, "-o", str(bad)]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_installed_entry_point():
    exe = shutil.which("xorlink")
    assert exe, "console script not on PATH"
    res = subprocess.run([exe, "degree-table", "--qmax", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines() == ["2 1 2", "3 1 3", "3 2 1"]


def test_fig_configs_present():
    names = {p.stem for p in FIGS}
    assert names == {
        "fig3a", "fig3b", "fig4", "fig5a", "fig5b", "fig6", "fig7", "fig8", "fig9a", "fig9b",
    }


@pytest.mark.parametrize("path", FIGS, ids=lambda p: p.stem)
def test_fig_config_validates_and_runs(path, capsys):
    assert main(["validate", str(path)]) == 0
    capsys.readouterr()
    exp = load_experiment(str(path))
    rows = run_experiment(exp, "sweep", workers=2)
    assert len(rows) == len(exp.schemes) * len(exp.values) * exp.replicates
    for row in rows:
        assert 0.0 <= float(row.split(",")[10]) <= 1.0
