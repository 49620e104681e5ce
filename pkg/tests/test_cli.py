import csv
import json
import math

import pytest

from divmca import cli
from divmca.errors import ConfigError
from divmca.model import EXAMPLE_Q

SMALL = {
    "model": {
        "type": "proportional",
        "claim": {"dist": "exponential", "rate": 1.0},
        "beta": [1.0, 10.0],
        "Q": [[-0.5, 0.5], [0.5, -0.5]],
        "r": 0.05,
    },
    "payoff": {"c": {"type": "constant", "value": 1.0}},
    "control": {"u_min": 0.0, "u_max": 1.0, "n_u": 11},
    "grid": {"h": 0.25, "B": 20.0},
    "verify": {"dt_sim": 0.001, "t_max": 400.0, "n_paths": 200, "seed": 5},
    "probes": [[3.0, 1], [3.0, 2]],
}


def text(doc):
    return json.dumps(doc)


def with_(path, value):
    doc = json.loads(json.dumps(SMALL))
    node = doc
    for key in path[:-1]:
        node = node[key]
    if value is None:
        del node[path[-1]]
    else:
        node[path[-1]] = value
    return doc


def test_preset_matches_example_parameters():
    cfg = cli.load_config("prop-exp")
    m = cfg.model
    assert m.reinsurance == "proportional" and m.claim.kind == "exponential"
    assert m.regimes.Q == EXAMPLE_Q and m.regimes.beta == (1.0, 10.0)
    assert m.r == 0.05 and m.payoff.c_kind == "constant"
    assert (cfg.h, cfg.B, len(m.control.mesh())) == (0.1, 100.0, 101)
    assert cfg.probes == [(30.0, 0), (30.0, 1)]
    assert cfg.method == "policy" and cfg.tol == 1e-9


def test_all_presets_parse():
    names = cli.preset_names()
    assert len(names) == 10
    for name in names:
        cli.load_config(name)


def test_missing_grid_h_is_schema_error():
    with pytest.raises(ConfigError) as e:
        cli.parse_config(text(with_(["grid", "h"], None)))
    assert e.value.kind == "schema"
    assert ("$.grid.h", "'h' is a required property") in e.value.issues


def test_generator_row_is_semantic_error():
    with pytest.raises(ConfigError) as e:
        cli.parse_config(text(with_(["model", "Q"], [[-0.5, 0.4], [0.5, -0.5]])))
    assert e.value.kind == "semantic"
    assert ("$.model.Q[0]", "generator row 0 sums to -0.1") in e.value.issues


def test_syntax_error_has_position():
    with pytest.raises(ConfigError) as e:
        cli.parse_config('{"model":\n  {"type": }')
    assert e.value.kind == "syntax"
    assert e.value.issues[0][0] == "line 2, column 12"


def test_all_issues_reported_with_paths():
    doc = with_(["control", "n_u"], 1)
    doc["model"]["beta"] = [1.0, -2.0]
    doc["payoff"]["c"] = {"type": "exp_marginal", "lambda": 0.0}
    with pytest.raises(ConfigError) as e:
        cli.parse_config(text(doc))
    paths = {p for p, _ in e.value.issues}
    assert {"$.model.beta[1]", "$.payoff.c", "$.control"} <= paths


def test_schema_type_errors():
    doc = with_(["grid", "B"], "100")
    doc["solver"] = {"method": "newton"}
    doc["extra"] = 1
    with pytest.raises(ConfigError) as e:
        cli.parse_config(text(doc))
    paths = [p for p, _ in e.value.issues]
    assert "$.grid.B" in paths and "$.solver.method" in paths and "$" in paths


def test_grid_and_probe_semantics(caplog):
    with pytest.raises(ConfigError) as e:
        cli.parse_config(text(with_(["grid", "B"], 20.1)))
    assert e.value.issues[0][0] == "$.grid.B"
    with pytest.raises(ConfigError) as e:
        cli.parse_config(text(with_(["probes"], [[3.0, 3]])))
    assert e.value.issues == [("$.probes[0][1]", "regime 3 outside 1..2")]
    cfg = cli.parse_config(text(with_(["probes"], [[3.1, 1]])))
    assert cfg.probes == [(3.0, 0)]
    assert cfg.warnings and "snapped" in caplog.text
    assert cfg.resolved["probes"] == [[3.0, 1]]


def test_verify_section_checked_against_grid():
    with pytest.raises(ConfigError) as e:
        cli.parse_config(text(with_(["verify", "dt_sim"], 0.1)))
    assert e.value.issues[0][0] == "$.verify"


def test_defaults_materialised_and_round_trip():
    doc = json.loads(json.dumps(SMALL))
    del doc["control"], doc["verify"]
    cfg = cli.parse_config(text(doc))
    res = cfg.resolved
    assert res["control"] == {"u_min": 0.0, "u_max": 1.0, "n_u": 101}
    assert res["solver"] == {"method": "policy", "tol": 1e-9, "max_iter": 10000, "discount": "implicit"}
    assert res["payoff"]["f"] == {"type": "zero"}
    again = cli.parse_config(json.dumps(res))
    assert again.resolved == res


def test_tabulated_reward_config():
    doc = with_(["payoff", "f"], {"type": "tabulated", "u": [0.0, 1.0], "values": [[0.0, 0.1], [0.0, 0.2]]})
    cfg = cli.parse_config(text(doc))
    assert cfg.model.payoff.f(1.0, 1, 0.5) == pytest.approx(0.1)
    doc["payoff"]["f"]["values"] = [[0.0, 0.1]]
    with pytest.raises(ConfigError) as e:
        cli.parse_config(text(doc))
    assert e.value.issues[0][0] == "$.payoff.f.values"


@pytest.fixture(scope="module")
def small_cfg():
    return cli.parse_config(text(SMALL))


def test_solve_outputs_deterministic(tmp_path, small_cfg):
    sol, summary = cli.run_solve(small_cfg, tmp_path / "a")
    cli.run_solve(small_cfg, tmp_path / "b")
    for name in ("value.csv", "barrier.csv", "summary.json", "solution.npz"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = list(csv.DictReader(open(tmp_path / "a" / "value.csv")))
    assert len(rows) == 2 * 82
    assert rows[0] == {"x": "0.000000000", "regime": "1", "V": "0.000000000", "action": "ruin", "u_star": ""}
    assert rows[-1]["action"] == "reflect"
    assert {r["action"] for r in rows} == {"ruin", "regular", "singular", "reflect"}
    for r in rows:
        assert len(r["V"].split(".")[1]) == 9
        assert (r["u_star"] != "") == (r["action"] == "regular")
    s = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert s["converged"] and s["residual"] <= 1e-6
    assert [p["regime"] for p in s["probes"]] == [1, 2]
    assert s["probes"][0]["V"] == sol.value_at(3.0, 0)
    assert s["config"] == small_cfg.resolved
    bar = (tmp_path / "a" / "barrier.csv").read_text().splitlines()
    assert bar[0] == "regime,barrier" and len(bar) == 3
    assert "solve_wall_time_s" in json.loads((tmp_path / "a" / "timing.json").read_text())


def test_pure_singular_value_column(tmp_path):
    cfg = cli.load_config("pure-singular")
    cli.run_solve(cfg, tmp_path)
    rows = list(csv.DictReader(open(tmp_path / "value.csv")))
    assert all(r["V"] == r["x"] for r in rows)


def test_verify_deterministic(tmp_path, small_cfg):
    cli.run_solve(small_cfg, tmp_path / "sol")
    r1 = cli.run_verify(small_cfg, tmp_path / "sol", tmp_path / "v1")
    cli.run_verify(small_cfg, tmp_path / "sol", tmp_path / "v2")
    assert (tmp_path / "v1" / "verify.json").read_bytes() == (tmp_path / "v2" / "verify.json").read_bytes()
    for p in r1["probes"]:
        assert p["bound"] == pytest.approx(3 * p["stderr"] + 5 * 0.25)
        assert p["pass"] == (p["abs_diff"] <= p["bound"])
        assert p["seed"] == 5 and p["n_paths"] == 200


def test_verify_needs_matching_solution(tmp_path, small_cfg):
    with pytest.raises(ConfigError):
        cli.run_verify(small_cfg, tmp_path / "nothing", tmp_path / "v")
    cli.run_solve(small_cfg, tmp_path / "sol")
    other = cli.parse_config(text(with_(["grid", "h"], 0.125)))
    with pytest.raises(ConfigError):
        cli.run_verify(other, tmp_path / "sol", tmp_path / "v")


def test_sweep(tmp_path, small_cfg):
    table = cli.run_sweep(small_cfg, [1.0, 0.5, 0.25], tmp_path)
    assert len(table) == 6
    assert table[0]["diff"] is None and table[2]["diff"] is not None
    last = table[4]
    assert last["order"] == pytest.approx(math.log2(last["ratio"]))
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "h,x,regime,V,diff,ratio,order,converged"
    assert len(lines) == 7
    with pytest.raises(ConfigError):
        cli.run_sweep(small_cfg, [0.3], tmp_path)


def test_oracle_table():
    b, rows = cli.oracle_table(1.0, 2.0, 0.05, x_max=10.0, step=0.5)
    assert b == pytest.approx(5.639661654)
    assert rows[0] == (0.0, 0.0) and len(rows) == 21
    with pytest.raises(Exception):
        cli.oracle_table(1.0, 0.0, 0.05)


def test_main_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(text(SMALL))
    assert cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 0
    assert "V(3, 1)" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    bad.write_text(text(with_(["model", "Q"], [[-0.5, 0.4], [0.5, -0.5]])))
    assert cli.main(["solve", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert "generator row 0 sums to -0.1" in capsys.readouterr().err

    slow = tmp_path / "slow.json"
    slow.write_text(text({**SMALL, "solver": {"method": "value", "max_iter": 3}}))
    assert cli.main(["solve", "--config", str(slow), "--out", str(tmp_path / "n")]) == 3
    assert json.loads((tmp_path / "n" / "summary.json").read_text())["converged"] is False

    assert cli.main(["verify", "--config", str(cfg), "--solution", str(tmp_path / "s"),
                     "--out", str(tmp_path / "v")]) == 0
    # stored values come from the unit-weight run while the config pays
    # nothing, so the simulated mean is 0 and the check must fail
    zero = tmp_path / "zero.json"
    zero.write_text(text(with_(["payoff", "c"], {"type": "constant", "value": 0.0})))
    assert cli.main(["verify", "--config", str(zero), "--solution", str(tmp_path / "s"),
                     "--out", str(tmp_path / "v0")]) == 4

    capsys.readouterr()
    assert cli.main(["oracle", "--mu", "1", "--sigma2", "2", "--r", "0.05"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("b* = 5.639661654\nx,V\n0.000000000,0.000000000\n")
    assert cli.main(["oracle", "--mu", "1", "--sigma2", "0", "--r", "0.05"]) == 2
    assert cli.main(["sweep", "--config", str(cfg), "--h", "0.5,0.25", "--out", str(tmp_path / "w")]) == 0
    assert cli.main(["sweep", "--config", str(cfg), "--h", "a,b", "--out", str(tmp_path / "w")]) == 2
    assert cli.main(["solve", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    assert cli.main(["presets"]) == 0
