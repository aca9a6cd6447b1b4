import json
import subprocess
import sys

import pytest

from ldg_orlicz.cli import main, read_config
from ldg_orlicz.errors import ConfigurationError


def test_missing_p_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 2
    assert "--p" in capsys.readouterr().err


def test_solve_prints_report(capsys):
    assert main(["solve", "--p", "4", "--alpha", "2.5", "--levels", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["converged"] and data["level"] == 0 and data["dofs"] == 32 * 6


def test_eoc_rows(capsys, tmp_path):
    assert main(["eoc", "--p", "2", "--levels", "3", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [ln.split(",")[0] for ln in lines] == ["0", "1", "2"]
    assert (tmp_path / "eoc.csv").exists() and (tmp_path / "report.json").exists()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# study\np = 3\nlevels = 1\nshift-mode = full\nalpha = 9\n")
    assert read_config(cfg) == {"p": 3.0, "levels": 1, "shift_mode": "full", "alpha": 9.0}
    assert main(["solve", "--config", str(cfg), "--alpha", "2.5", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert json.loads((tmp_path / "solve.json").read_text())["converged"]
    cfg.write_text("colour = blue\n")
    with pytest.raises(ConfigurationError):
        read_config(cfg)


def test_untabulated_p_needs_alpha(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve", "--p", "1.7"])
    assert info.value.code == 2


def test_solver_failure_exit_code(capsys):
    assert main(["solve", "--p", "1.5", "--levels", "1", "--max-iter", "1"]) == 1
    assert "solver failure" in capsys.readouterr().err


def test_props(tmp_path, capsys):
    assert main(["props", "--samples", "200", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "props.json").read_text())
    assert data


def test_export_fields(tmp_path, capsys):
    assert main(["export-fields", "--p", "2", "--levels", "2", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "fields.json").read_text())
    assert set(data) == {"fields", "errors", "error_share_near_origin"}
    assert all((tmp_path / f"{name}.csv").exists() for name in data["fields"])


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "ldg_orlicz.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "eoc" in out.stdout
