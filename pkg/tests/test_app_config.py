import os

import pytest

from torus_coulomb.app_config import (
    load_config,
    parse_vertex,
    read_config_file,
    resolve_run_config,
)
from torus_coulomb.errors import ConfigurationError, UsageError
from torus_coulomb.exact import DEFAULT_BUDGET


@pytest.fixture
def no_env_file(tmp_path):
    return str(tmp_path / "absent.env")


def test_load_config_defaults(monkeypatch, no_env_file):
    for key in ("TORUS_COULOMB_THREADS", "TORUS_COULOMB_BUDGET", "TORUS_COULOMB_LOG_LEVEL"):
        monkeypatch.delenv(key, raising=False)
    config = load_config(no_env_file)
    assert config == {"threads": os.cpu_count() or 1, "budget": DEFAULT_BUDGET, "log_level": "INFO"}


def test_load_config_reads_environment(monkeypatch, no_env_file):
    monkeypatch.setenv("TORUS_COULOMB_THREADS", "3")
    monkeypatch.setenv("TORUS_COULOMB_BUDGET", "1e6")
    monkeypatch.setenv("TORUS_COULOMB_LOG_LEVEL", "debug")
    config = load_config(no_env_file)
    assert config["threads"] == 3
    assert config["budget"] == 1_000_000
    assert config["log_level"] == "DEBUG"


def test_load_config_falls_back_on_bad_values(monkeypatch, no_env_file, caplog):
    monkeypatch.setenv("TORUS_COULOMB_THREADS", "many")
    monkeypatch.setenv("TORUS_COULOMB_BUDGET", "-5")
    monkeypatch.setenv("TORUS_COULOMB_LOG_LEVEL", "verbose")
    config = load_config(no_env_file)
    assert config["threads"] == (os.cpu_count() or 1)
    assert config["budget"] == DEFAULT_BUDGET
    assert config["log_level"] == "INFO"
    assert "TORUS_COULOMB_THREADS" in caplog.text


def test_read_config_file_normalises_keys(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("# DG 실행\nn=4\nbeta-star=0.1\nsweeps = 2000\ni=1,1\n", encoding="utf-8")
    assert read_config_file(str(path)) == {"n": "4", "beta_star": "0.1", "sweeps": "2000", "i": "1,1"}


def test_read_config_file_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        read_config_file(str(tmp_path / "missing.conf"))
    path = tmp_path / "bad.conf"
    path.write_text("temperature=3\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        read_config_file(str(path))


@pytest.mark.parametrize("raw,expected", [("1,2", (1, 2)), ("(3, 0)", (3, 0)), ((4, 5), (4, 5)), (None, None)])
def test_parse_vertex(raw, expected):
    assert parse_vertex(raw) == expected


def test_parse_vertex_rejects_garbage():
    with pytest.raises(ConfigurationError):
        parse_vertex("1;2")


def test_beta_flag_derives_dual_temperature():
    cfg = resolve_run_config("dg", {"n": 8, "beta": 3.0})
    assert cfg.beta_star == pytest.approx(1 / 12)


def test_beta_star_flag_derives_beta():
    cfg = resolve_run_config("cg", {"beta_star": 0.125})
    assert cfg.beta == pytest.approx(2.0)


def test_both_temperatures_rejected():
    with pytest.raises(UsageError):
        resolve_run_config("dg", {"beta": 3.0, "beta_star": 0.1})


def test_flags_override_file_values():
    file_values = {"n": "4", "beta": "1.0", "sweeps": "2000", "j": "2,2"}
    cfg = resolve_run_config("dg", {"n": 6, "beta_star": 0.1, "sweeps": None}, file_values)
    assert cfg.n == 6
    assert cfg.beta_star == pytest.approx(0.1)
    assert cfg.sweeps == 2000
    assert cfg.j == (2, 2)


def test_bad_file_value_is_configuration_error():
    with pytest.raises(ConfigurationError):
        resolve_run_config("dg", {}, {"n": "four"})


def test_environment_limits_flow_into_run_config():
    cfg = resolve_run_config("exact", {"n": 2}, env_config={"budget": 500, "threads": 2})
    assert cfg.budget == 500
    assert cfg.threads == 2


@pytest.mark.parametrize("flags", [{"format": "xml"}, {"proposal": "far"}])
def test_invalid_choices(flags):
    with pytest.raises(UsageError):
        resolve_run_config("cg", flags)


def test_run_config_dict_uses_lists_for_vertices():
    cfg = resolve_run_config("dg", {"i": "1,1", "j": (2, 1)})
    data = cfg.to_dict()
    assert data["i"] == [1, 1]
    assert data["j"] == [2, 1]
