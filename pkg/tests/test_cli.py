import json
import math
import os

import numpy as np
import pytest

from dressedsim import cli, configio
from dressedsim.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from dressedsim.configio import ConfigError, fmt_float, parse_config, write_csv


# ---- flat config parsing -------------------------------------------------------

def test_parse_config_basics(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("# header comment\n"
                 "alpha = 1.5  # trailing comment\n"
                 "\n"
                 "name = hello world\n")
    got = parse_config(str(p))
    assert got == {"alpha": "1.5", "name": "hello world"}


def test_parse_config_rejects_duplicates(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("x = 1\nx = 2\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(str(p))


def test_parse_config_rejects_bad_lines(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("just some words\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config(str(p))
    p.write_text("= 3\n")
    with pytest.raises(ConfigError):
        parse_config(str(p))


def test_fmt_float():
    assert fmt_float(math.nan) == "nan"
    assert fmt_float(math.inf) == "inf"
    assert fmt_float(-math.inf) == "-inf"
    x = 0.1 + 0.2
    assert float(fmt_float(x)) == x


def test_write_csv_roundtrip(tmp_path):
    out = tmp_path / "t.csv"
    n = write_csv(str(out), ["a", "b"], [(1.0, math.nan), (0.25, 2.0)])
    assert n == 2
    txt = out.read_bytes().decode()
    lines = txt.strip().split("\r\n")
    assert lines[0] == "a,b"
    assert len(lines) == 3
    assert "nan" in lines[1]


# ---- schema application ----------------------------------------------------------

def test_schema_unknown_key_named():
    with pytest.raises(ConfigError, match="bogus"):
        cli.apply_schema({"bogus": "1"}, cli.SCHEMAS["optimum"], "optimum")


def test_schema_required_and_defaults():
    cfg = cli.apply_schema({"sigma_eps_grid": "0.005, 0.01"},
                           cli.SCHEMAS["optimum"], "optimum")
    assert cfg["sigma_eps_grid"] == [0.005, 0.01]
    assert cfg["t2_star_s"] == 1.0
    assert cfg["budget.max_grid_points"] == 64
    with pytest.raises(ConfigError, match="sigma_eps_grid"):
        cli.apply_schema({}, cli.SCHEMAS["optimum"], "optimum")


def test_schema_hz_conversion():
    raw = {"scheme.variant": "circular_dressed",
           "scheme.omega1_hz": "100",
           "scheme.omega2_hz": "10",
           "noise.t2_star_s": "1.0"}
    cfg = cli.apply_schema(raw, cli.SCHEMAS["coherence"], "coherence")
    assert np.isclose(cfg["scheme.omega1_hz"], 2 * math.pi * 100)
    assert np.isclose(cfg["scheme.omega2_hz"], 2 * math.pi * 10)


def test_schema_value_errors_name_key():
    with pytest.raises(ConfigError, match="scheme.omega1_hz"):
        cli.apply_schema({"scheme.variant": "circular_dressed",
                          "scheme.omega1_hz": "-3",
                          "noise.t2_star_s": "1"},
                         cli.SCHEMAS["coherence"], "coherence")
    with pytest.raises(ConfigError, match="not a number"):
        cli.apply_schema({"sigma_eps_grid": "0.005, banana"},
                         cli.SCHEMAS["optimum"], "optimum")


def test_scheme_detuning_rules():
    base = {"scheme.variant": "circular_dressed",
            "scheme.omega1_hz": 10.0, "scheme.omega2_hz": 2.0,
            "scheme.phase_rad": 0.0, "scheme.mod_freq_hz": None}
    s = cli._scheme_from({**base, "scheme.detuning": "resonant"})
    assert s.mod_freq == 10.0
    s = cli._scheme_from({**base, "scheme.detuning": "magic"})
    assert s.mod_freq == 20.0
    s = cli._scheme_from({**base, "scheme.detuning": "optimal"})
    assert np.isclose(s.mod_freq, 10.0 + 0.5 * 4.0 / 10.0)
    s = cli._scheme_from({**base, "scheme.detuning": "optimal",
                          "scheme.mod_freq_hz": 11.0})
    assert s.mod_freq == 11.0
    s = cli._scheme_from({**base, "scheme.variant": "double_drive",
                          "scheme.detuning": "magic"})
    assert np.isclose(s.mod_freq, 10.0 + 2.0 / math.sqrt(2.0))


# ---- end-to-end CLI -------------------------------------------------------------

def write_cfg(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_validate_and_run_optimum(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "o.cfg", "sigma_eps_grid = 0.005\n")
    out = str(tmp_path / "o.csv")
    assert main(["optimum", "validate", "--config", cfg]) == EXIT_OK
    assert "1 grid points" in capsys.readouterr().out
    assert main(["optimum", "run", "--config", cfg, "--out", out]) == EXIT_OK
    stdout = capsys.readouterr().out
    assert "T2_opt" in stdout
    rows = open(out, "rb").read().decode().strip().split("\r\n")
    assert rows[0].startswith("sigma_eps,")
    assert len(rows) == 2
    meta = json.load(open(str(tmp_path / "o.meta.json")))
    assert meta["scenario"] == "optimum"
    assert meta["seed"] == 0


def test_cli_budget_warning(tmp_path, capsys):
    grid = ", ".join(str(0.001 * (i + 1)) for i in range(5))
    cfg = write_cfg(tmp_path, "o.cfg",
                    f"sigma_eps_grid = {grid}\nbudget.max_grid_points = 3\n")
    assert main(["optimum", "validate", "--config", cfg]) == EXIT_OK
    assert "warning" in capsys.readouterr().out


def test_cli_unknown_key_exit_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "o.cfg", "sigma_eps_grid = 0.005\nwat = 1\n")
    assert main(["optimum", "run", "--config", cfg]) == EXIT_CONFIG
    assert "wat" in capsys.readouterr().err


def test_cli_missing_config_exit_config(tmp_path):
    assert main(["optimum", "run", "--config",
                 str(tmp_path / "nope.cfg")]) == EXIT_CONFIG


def test_cli_inconsistent_scheme_exit_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "c.cfg",
                    "scheme.variant = single_drive\n"
                    "scheme.omega1_hz = 10\n"
                    "scheme.omega2_hz = 5\n"
                    "noise.t2_star_s = 1\n")
    assert main(["coherence", "validate", "--config", cfg]) == EXIT_CONFIG
    assert "single_drive" in capsys.readouterr().err


def test_cli_numeric_failure_exit(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "g.cfg",
                    "omega2_grid_hz = 77000\nsubsteps = 64\nn_fock = 6\n")
    rc = main(["gate2q", "run", "--config", cfg,
               "--out", str(tmp_path / "g.csv")])
    assert rc == EXIT_NUMERIC
    assert "numeric failure" in capsys.readouterr().err


def test_cli_deterministic_rerun(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "f.cfg",
                    "scheme.omega1_hz = 1.1\n"
                    "scheme.omega2_hz = 0.08\n"
                    "noise.t2_star_s = 1.0\n"
                    "noise.sigma_eps_grid = 0.005, 0.01\n")
    out1 = str(tmp_path / "f1.csv")
    out2 = str(tmp_path / "f2.csv")
    assert main(["floquet", "run", "--config", cfg, "--out", out1,
                 "--quiet"]) == EXIT_OK
    assert main(["floquet", "run", "--config", cfg, "--out", out2,
                 "--quiet", "--threads", "2"]) == EXIT_OK
    assert open(out1, "rb").read() == open(out2, "rb").read()
    m1 = json.load(open(str(tmp_path / "f1.meta.json")))
    m2 = json.load(open(str(tmp_path / "f2.meta.json")))
    assert m1 == m2
    assert capsys.readouterr().out == ""


def test_cli_seed_override(tmp_path):
    cfg = write_cfg(tmp_path, "c.cfg",
                    "scheme.variant = circular_dressed\n"
                    "scheme.omega1_hz = 1.1\n"
                    "scheme.omega2_hz = 0.08\n"
                    "noise.t2_star_s = 1.0\n"
                    "noise.n_realizations = 32\n"
                    "seed = 5\n")
    out1 = str(tmp_path / "c1.csv")
    out2 = str(tmp_path / "c2.csv")
    assert main(["coherence", "run", "--config", cfg, "--out", out1,
                 "--quiet"]) == EXIT_OK
    assert main(["coherence", "run", "--config", cfg, "--out", out2,
                 "--seed", "9", "--quiet"]) == EXIT_OK
    m1 = json.load(open(str(tmp_path / "c1.meta.json")))
    m2 = json.load(open(str(tmp_path / "c2.meta.json")))
    assert m1["seed"] == 5
    assert m2["seed"] == 9
    assert open(out1).read() != open(out2).read()


def test_cli_env_thread_fallback(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, "o.cfg", "sigma_eps_grid = 0.004, 0.008\n")
    ref = str(tmp_path / "r.csv")
    env = str(tmp_path / "e.csv")
    assert main(["optimum", "run", "--config", cfg, "--out", ref,
                 "--quiet"]) == EXIT_OK
    monkeypatch.setenv("DRESSEDSIM_THREADS", "3")
    assert main(["optimum", "run", "--config", cfg, "--out", env,
                 "--quiet"]) == EXIT_OK
    assert open(ref, "rb").read() == open(env, "rb").read()


def test_cli_bad_scenario_argparse_exit():
    with pytest.raises(SystemExit) as e:
        main(["warpdrive", "run", "--config", "x.cfg"])
    assert e.value.code == 2


def test_meta_has_no_timestamps(tmp_path):
    cfg = write_cfg(tmp_path, "o.cfg", "sigma_eps_grid = 0.005\n")
    out = str(tmp_path / "o.csv")
    assert main(["optimum", "run", "--config", cfg, "--out", out,
                 "--quiet"]) == EXIT_OK
    meta = open(str(tmp_path / "o.meta.json")).read().lower()
    for word in ("time", "date", "stamp"):
        assert word not in meta
