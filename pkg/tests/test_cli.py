import json
import math
import subprocess
import sys

import pytest

from spde1d import cli, nonlinearity


def write_cfg(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def read_rows(path):
    lines = path.read_text().strip().split("\n")
    return lines[0], lines[1:]


def test_help_lists_subcommands():
    out = subprocess.run([sys.executable, "-m", "spde1d.cli", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    for name in ("heat-errors", "simulate", "converge", "check"):
        assert name in out.stdout


def test_heat_errors_default_grid(tmp_path, capsys):
    rc = cli.main(["heat-errors", "--out", str(tmp_path)])
    assert rc == cli.EXIT_OK
    header, rows = read_rows(tmp_path / "spde1d_heat_errors.csv")
    assert header == "M,N,exact,lower,upper,kind"
    # 7 x 7 grid for each of the three kinds
    assert len(rows) == 3 * 49
    kinds = [r.split(",")[-1] for r in rows]
    assert kinds.count("temporal") == kinds.count("spatial") == kinds.count("full") == 49
    assert "all sandwiched" in capsys.readouterr().out


def test_heat_errors_all_modes_rows(tmp_path):
    cfg = write_cfg(tmp_path, {"study": {"m_grid": [2, 8], "n_grid": [4, "all"]}})
    rc = cli.main(["heat-errors", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_OK
    _, rows = read_rows(tmp_path / "spde1d_heat_errors.csv")
    # temporal keeps the "all" column entries, spatial and full drop them
    assert len(rows) == 4 + 2 + 2
    all_rows = [r for r in rows if r.split(",")[1] == "all"]
    assert len(all_rows) == 2
    assert all(r.endswith("temporal") for r in all_rows)


def test_heat_errors_negative_tolerance_forces_exit_3(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"study": {"m_grid": [2], "n_grid": [2],
                                         "sandwich_tol": -1.0}})
    rc = cli.main(["heat-errors", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_SANDWICH
    assert "sandwich violated" in capsys.readouterr().err
    # the report file is still written for inspection
    assert (tmp_path / "spde1d_heat_errors.csv").exists()


def test_malformed_config_exits_2_without_output(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    out_dir = tmp_path / "out"
    rc = cli.main(["heat-errors", "--config", str(bad), "--out", str(out_dir)])
    assert rc == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err
    assert not (out_dir / "spde1d_heat_errors.csv").exists()


def test_unknown_section_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, {"modle": {"T": 1.0}})
    assert cli.main(["heat-errors", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_bad_study_values_exit_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"study": {"m_grid": [7], "M_ref": 64, "N_ref": 8}})
    rc = cli.main(["converge", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def simulate_cfg(tmp_path, **model):
    payload = {"discretization": {"M": 8, "N": 8}}
    if model:
        payload["model"] = model
    return write_cfg(tmp_path, payload)


def test_simulate_writes_and_reruns_identically(tmp_path):
    cfg = simulate_cfg(tmp_path)
    rc = cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_OK
    out = tmp_path / "spde1d_trajectory.csv"
    first = out.read_bytes()
    header, rows = read_rows(out)
    assert header == "t,mode_index,Y_coeff,O_coeff,indicator"
    assert len(rows) == 9 * 8
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_OK
    assert out.read_bytes() == first


def test_simulate_zero_drift_trajectory_is_ou(tmp_path):
    cfg = simulate_cfg(tmp_path, a=[0.0, 0.0, 0.0, 0.0], initial="zero")
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_OK
    _, rows = read_rows(tmp_path / "spde1d_trajectory.csv")
    for row in rows:
        _, _, y, o, ind = row.split(",")
        assert abs(float(y) - float(o)) <= 1e-14
        assert ind in ("0", "1")


def converge_cfg(tmp_path, exact=False, paths=32):
    payload = {
        "model": {"a": [0.0, 0.0, 0.0, 0.0], "initial": "zero"},
        "study": {
            "m_grid": [4, 8, 16], "n_grid": [2, 4, 8],
            "M_ref": 128, "N_ref": 16, "paths": paths, "exact": exact,
        },
    }
    return write_cfg(tmp_path, payload)


def test_converge_exact_mode(tmp_path, capsys):
    cfg = converge_cfg(tmp_path, exact=True)
    rc = cli.main(["converge", "--config", cfg, "--out", str(tmp_path)])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "temporal slope" in out
    fits = json.loads((tmp_path / "spde1d_rates.json").read_text())
    assert -0.30 <= fits["temporal"]["slope"] <= -0.20
    header, rows = read_rows(tmp_path / "spde1d_errors.csv")
    assert header == "kind,M,N,estimate,stderr,activation_fraction,paths,seed"
    assert all(r.split(",")[6] == "0" for r in rows)  # paths column marks exact mode


def test_converge_thread_count_does_not_change_bytes(tmp_path):
    cfg = converge_cfg(tmp_path)
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path),
                     "--threads", "1"]) == cli.EXIT_OK
    csv1 = (tmp_path / "spde1d_errors.csv").read_bytes()
    json1 = (tmp_path / "spde1d_rates.json").read_bytes()
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path),
                     "--threads", "2"]) == cli.EXIT_OK
    assert (tmp_path / "spde1d_errors.csv").read_bytes() == csv1
    assert (tmp_path / "spde1d_rates.json").read_bytes() == json1


def test_converge_single_path_stderr_nan(tmp_path):
    cfg = converge_cfg(tmp_path, paths=1)
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_OK
    _, rows = read_rows(tmp_path / "spde1d_errors.csv")
    assert all(math.isnan(float(r.split(",")[4])) for r in rows)


def test_seed_precedence_flag_env_file(tmp_path, monkeypatch):
    cfg = converge_cfg(tmp_path)
    # file default seed is 0; env overrides file; flag overrides env
    monkeypatch.setenv("SPDE_SEED", "7")
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_OK
    _, rows = read_rows(tmp_path / "spde1d_errors.csv")
    assert all(r.split(",")[7] == "7" for r in rows)
    assert cli.main(["converge", "--config", cfg, "--out", str(tmp_path),
                     "--seed", "9"]) == cli.EXIT_OK
    _, rows = read_rows(tmp_path / "spde1d_errors.csv")
    assert all(r.split(",")[7] == "9" for r in rows)


def test_out_env_var(tmp_path, monkeypatch):
    target = tmp_path / "envout"
    monkeypatch.setenv("SPDE_OUT", str(target))
    monkeypatch.chdir(tmp_path)
    cfg = simulate_cfg(tmp_path)
    assert cli.main(["simulate", "--config", cfg]) == cli.EXIT_OK
    assert (target / "spde1d_trajectory.csv").exists()


def test_output_prefix_from_config(tmp_path):
    cfg = write_cfg(tmp_path, {"discretization": {"M": 4, "N": 2},
                               "output": {"prefix": "run1"}})
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_OK
    assert (tmp_path / "run1_trajectory.csv").exists()


def test_check_passes_on_healthy_library(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"study": {"audit_trials": 60}})
    rc = cli.main(["check", "--config", cfg])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 6 and "FAIL" not in out


def test_check_audit_failure_exits_4(monkeypatch, capsys):
    def rigged(name, trials=0, seed=0, **kw):
        return 1.0 if name == "lipschitz" else -1.0

    monkeypatch.setattr(nonlinearity, "run_inequality_audit", rigged)
    monkeypatch.setattr(cli.nonlinearity, "run_inequality_audit", rigged)
    rc = cli.main(["check"])
    assert rc == cli.EXIT_AUDIT
    assert "FAIL drift-lipschitz" in capsys.readouterr().out
