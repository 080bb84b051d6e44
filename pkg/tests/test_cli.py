import json
import subprocess
import sys

import numpy as np
import pytest

from dampmap.cli import main


def write_cfg(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def read_csv(path):
    lines = [ln for ln in open(path).read().splitlines()]
    header = lines[0].split(",")
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    footer = {}
    for ln in lines[1:]:
        if ln.startswith("# "):
            key, val = ln[2:].split(": ", 1)
            footer[key] = json.loads(val)
    return header, np.array([[float(x) for x in ln.split(",")] for ln in body]), footer


def test_simulate_circular_orbit(tmp_path):
    out = tmp_path / "traj.csv"
    cfg = write_cfg(tmp_path, {"units": "natural", "state": {"q1": 1, "q2": 0, "v1": 0, "v2": 1}})
    assert main(["simulate", "--system", "transformed-kepler", "--config", cfg, "--span", "0,20",
                 "--out", str(out)]) == 0
    header, data, footer = read_csv(out)
    assert header == ["s", "q1", "q2", "v1", "v2", "conserved1", "conserved2"]
    assert np.ptp(data[:, 5]) < 1e-8
    assert footer["config"]["params"]["lambda"] == 0.0
    assert "n_steps" in footer["integrator"]


def test_simulate_infall_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"state": {"q1": 1, "q2": 0, "v1": 0, "v2": 0}, "params": {"lambda": 0.1}})
    code = main(["simulate", "--system", "damped-kepler", "--config", cfg, "--span", "0,10",
                 "--out", str(tmp_path / "x.csv")])
    assert code == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["event"] == "r_min"
    assert not (tmp_path / "x.csv").exists()


def test_malformed_config_names_field(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"params": {"lambda": -1}})
    assert main(["simulate", "--system", "transformed-kepler", "--config", cfg]) == 2
    assert "params.lambda" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"integrator": {"tolerance": 1e-3}})
    assert main(["simulate", "--system", "transformed-kepler", "--config", cfg]) == 2
    assert "integrator.tolerance" in capsys.readouterr().err


def test_invalid_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["spectrum", "--side", "oscillator", "--config", str(path)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_bad_span(capsys):
    assert main(["simulate", "--system", "transformed-kepler", "--span", "3,1"]) == 2


def test_mapcheck_pass_and_fail(tmp_path):
    cfg = write_cfg(tmp_path, {"params": {"lambda": 0.1}, "state": {"q1": 1, "q2": 0, "v1": 0, "v2": 1.1},
                               "span": [0, 15]})
    out = tmp_path / "rep.json"
    assert main(["mapcheck", "--pipeline", "levi-civita", "--config", cfg, "--tol", "1e-6",
                 "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and rep["config"]["params"]["lambda"] == 0.1
    assert main(["mapcheck", "--pipeline", "levi-civita", "--config", cfg, "--tol", "1e-15",
                 "--out", str(out)]) == 1
    rep = json.loads(out.read_text())
    assert not rep["passed"] and 0 < rep["max_position_deviation"] < 1


def test_mapcheck_bohlin_zero_damping(tmp_path):
    cfg = write_cfg(tmp_path, {"state": {"q1": 1, "q2": 0, "v1": 0, "v2": 1}, "span": [0, 10],
                               "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14}})
    out = tmp_path / "rep.json"
    assert main(["mapcheck", "--pipeline", "bohlin", "--config", cfg, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["max_position_deviation"] < 1e-9


def test_spectrum_oscillator(tmp_path):
    out = tmp_path / "spec.json"
    assert main(["spectrum", "--side", "oscillator", "--nmax", "2", "--lmax", "2", "--method", "oracle",
                 "--out", str(out)]) == 0
    table = json.loads(out.read_text())
    assert sorted({r["E0"] for r in table["rows"]}) == [1, 2, 3, 4, 5, 6, 7]
    assert all(r["E1"] == 0 for r in table["rows"])


def test_spectrum_mapped_and_both(tmp_path):
    cfg = write_cfg(tmp_path, {"params": {"lambda": 0.05}})
    out = tmp_path / "spec.json"
    assert main(["spectrum", "--side", "mapped-hatom", "--nmax", "2", "--method", "both", "--config", cfg,
                 "--out", str(out)]) == 0
    table = json.loads(out.read_text())
    assert table["rejected"]
    for r in table["rows"]:
        assert r["E0"] == pytest.approx(-0.5 / (r["n"] + abs(r["l"]) + 0.5) ** 2)
    assert main(["spectrum", "--side", "oscillator", "--nmax", "0", "--lmax", "0", "--config", cfg,
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["rows"][0]["ratio"] is not None


def test_oracle_canonical(tmp_path):
    cfg = write_cfg(tmp_path, {"params": {"lambda": 0.4}, "span": [0, 30]})
    out = tmp_path / "can.json"
    assert main(["oracle", "--check", "canonical", "--config", cfg, "--seed", "3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["result"]["max_violation"] < 1e-8


def test_oracle_chainrule(tmp_path):
    out = tmp_path / "cr.json"
    assert main(["oracle", "--check", "chainrule", "--lam", "0.4", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["result"]
    assert {"printed_relation_err", "weighted_relation_err"} <= set(res)


@pytest.mark.parametrize("argv", [
    ["oracle", "--check", "me", "--nmax", "2", "--lmax", "1"],
    ["oracle", "--check", "diag", "--levels", "2"],
    ["oracle", "--check", "residual", "--n", "1", "--l", "1"],
    ["oracle", "--check", "residual", "--side", "hatom", "--n", "0", "--l", "0"],
])
def test_oracle_checks_pass(tmp_path, argv):
    out = tmp_path / "o.json"
    assert main(argv + ["--out", str(out)]) == 0
    assert json.loads(out.read_text())["passed"]


def test_wavefn_gauge_modulus_matches_raw(tmp_path):
    cfg = write_cfg(tmp_path, {"params": {"lambda": 0.3}})
    raw, gauge = tmp_path / "raw.csv", tmp_path / "gauge.csv"
    for variant, path in (("raw", raw), ("gauge", gauge)):
        assert main(["wavefn", "--side", "oscillator", "--n", "0", "--l", "0", "--variant", variant,
                     "--config", cfg, "--out", str(path)]) == 0
    h1, a, _ = read_csv(raw)
    h2, b, _ = read_csv(gauge)
    assert h1 == h2 == ["coord1", "coord2", "re", "im"]
    assert np.allclose(np.hypot(a[:, 2], a[:, 3]), np.hypot(b[:, 2], b[:, 3]), rtol=1e-14, atol=0)
    assert not np.allclose(a[:, 3], b[:, 3])


def test_wavefn_bad_grid(capsys):
    assert main(["wavefn", "--side", "hatom", "--n", "0", "--l", "0", "--grid", "1,2,3"]) == 2


def test_outputs_are_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        main(["simulate", "--system", "damped-ho", "--span", "0,5", "--out", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    for i in range(2):
        path = tmp_path / f"can{i}.json"
        main(["oracle", "--check", "canonical", "--seed", "5", "--span", "0,5", "--out", str(path)])
        outs.append(path.read_bytes())
    assert outs[2] == outs[3]


def test_atomic_write_leaves_no_temporaries(tmp_path):
    out = tmp_path / "sub" / "t.csv"
    assert main(["simulate", "--system", "shifted-ho", "--span", "0,2", "--out", str(out)]) == 0
    assert [p.name for p in out.parent.iterdir()] == ["t.csv"]


def test_csv_numbers_round_trip(tmp_path):
    out = tmp_path / "t.csv"
    main(["simulate", "--system", "shifted-ho", "--span", "0,2", "--out", str(out)])
    _, data, _ = read_csv(out)
    line = out.read_text().splitlines()[2].split(",")
    assert all(repr(float(x)) == x for x in line)


def test_sextic_system_from_kepler_state(tmp_path):
    out = tmp_path / "u.csv"
    cfg = write_cfg(tmp_path, {"params": {"c": 0.25}, "span": [0, 3]})
    assert main(["simulate", "--system", "sextic-osc", "--config", cfg, "--out", str(out)]) == 0
    _, data, footer = read_csv(out)
    assert footer["sextic_from_transformed_kepler"]["cal_E"] == pytest.approx(0.5)


def test_print_config_and_schema(capsys):
    assert main(["--print-config"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["units"] == "natural" and cfg["integrator"]["method"] == "DOP853"
    assert main(["--print-schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "lambda" in schema["$defs"]["ParamsModel"]["properties"]


def test_no_command():
    assert main([]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dampmap", "--print-config"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["units"] == "natural"
