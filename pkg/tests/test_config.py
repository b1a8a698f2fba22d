import pytest

from windsmc.config import KEYS, parse_lines, parse_overrides, parse_scenario, resolve_scenario_path, shipped_scenarios
from windsmc.errors import ConfigError


def test_table1_plant():
    sc = parse_scenario("table1")
    p = sc.params
    assert (p.rho, p.j_total, p.radius, p.b_total, p.lambda_opt) == (1.29, 1.5, 1.26, 0.0, 6.9)
    assert sc.controller == "smc_afdo"
    assert sc.t_end == 600.0 and sc.dt == 0.001 and sc.seed == 42


def test_shipped_files_use_only_known_keys():
    assert {"table1", "pid_baseline", "afdo_step"} <= set(shipped_scenarios())
    for name in shipped_scenarios():
        raw = parse_lines(resolve_scenario_path(name).read_text().splitlines(), name)
        assert set(raw) <= set(KEYS)
        parse_scenario(name)


def test_zero_dt_names_key(tmp_path):
    text = resolve_scenario_path("table1").read_text().replace("sim.dt = 0.001", "sim.dt = 0")
    path = tmp_path / "bad.scenario"
    path.write_text(text)
    with pytest.raises(ConfigError, match="sim.dt"):
        parse_scenario(path)


def test_override():
    assert parse_scenario("table1", ["smc.k2=12"]).smc.k2 == 12.0
    assert parse_scenario("table1", {"smc.k2": 12}).smc.k2 == 12.0


def test_seed_override():
    assert parse_scenario("table1", seed=7).seed == 7


@pytest.mark.parametrize("lines,fragment", [
    (["plant.colour = red"], "unknown key"),
    (["sim.dt = 0.1", "sim.dt = 0.2"], "duplicate"),
    (["sim.dt 0.1"], "key = value"),
])
def test_parse_errors(lines, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_lines(lines)


def test_comments_and_blanks():
    assert parse_lines(["# header", "", "sim.dt = 0.01  # fine step"]) == {"sim.dt": "0.01"}


@pytest.mark.parametrize("items", [["smc.k2"], ["smc.k3=1"]])
def test_bad_overrides(items):
    with pytest.raises(ConfigError):
        parse_overrides(items)


def test_unparseable_value_names_key():
    with pytest.raises(ConfigError, match="afdo.freeze_theta"):
        parse_scenario("table1", ["afdo.freeze_theta=maybe"])


def test_invariant_violation_names_key():
    with pytest.raises(ConfigError, match="smc.k1"):
        parse_scenario("table1", ["smc.k1=-1"])


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        parse_scenario("no_such_scenario")


def test_relative_wind_path(tmp_path):
    (tmp_path / "w.csv").write_text("t,v\n0,8\n100,8\n")
    text = resolve_scenario_path("table1").read_text() + "wind.path = w.csv\n"
    (tmp_path / "s.scenario").write_text(text)
    sc = parse_scenario(tmp_path / "s.scenario")
    assert sc.wind.path == str(tmp_path / "w.csv")
