import json

import numpy as np
import pytest

from charkern.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_unknown_subcommand(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1 and "unknown subcommand" in err


def test_verdict_constant_gram(capsys):
    code, out, _ = run(capsys, "verdict", "--group", "2", "--gram", "[[1,1],[1,1]]", "--json")
    assert code == 0
    res = json.loads(out)
    assert res["characteristic"] == "no"
    assert res["witnesses"] == [[1.0, -1.0]]


def test_verdict_table_output(capsys):
    code, out, _ = run(capsys, "verdict", "--gram", "[[2,0],[0,1]]")
    assert code == 0 and "universal        yes" in out


def test_verdict_bad_input(capsys):
    assert run(capsys, "verdict", "--gram", "[[1,2],[2,1]]")[0] == 2
    assert run(capsys, "verdict", "--gram", "not json")[0] == 2
    assert run(capsys, "verdict", "--group", "3", "--gram", "[[1,0],[0,1]]")[0] == 3


def test_counterexample_near(capsys):
    code, out, _ = run(capsys, "counterexample", "--group", "16", "--decay", "0.5", "--eps", "0.05")
    assert code == 0
    ver = json.loads(out)["verification"]
    assert ver["passed"] and abs(ver["tv"] - 2) < 1e-12 and ver["sqrt_mmd"] <= 0.05


def test_counterexample_zero_and_uniform(capsys):
    code, out, _ = run(capsys, "counterexample", "--moduli", "2,2", "--coeffs", '{"0,0":1,"0,1":1,"1,0":1}',
                       "--kind", "zero", "--eps-tv", "1.9")
    assert code == 0 and json.loads(out)["verification"]["passed"]
    code, out, _ = run(capsys, "counterexample", "--group", "8", "--kind", "uniform", "--index", "3",
                       "--coeffs", "[1,0.5,0.4,0.3,0.2,0.3,0.4,0.5]")
    assert code == 0 and json.loads(out)["verification"]["passed"]


def test_counterexample_unachievable(capsys):
    code, _, err = run(capsys, "counterexample", "--group", "4", "--coeffs", "[1,1,1,1]", "--eps", "0.01")
    assert code == 2 and "spectrum too flat" in err


def test_counterexample_self_check_failure(capsys, monkeypatch):
    import charkern.cli as cli
    from charkern import SignedMeasure

    def broken(m, eps):
        s = m.space
        return SignedMeasure(s, np.eye(len(s))[0]), SignedMeasure(s, np.eye(len(s))[0])

    monkeypatch.setattr(cli, "near_zero_mmd_pair", broken)
    code, out, _ = run(capsys, "counterexample", "--group", "16", "--decay", "0.5")
    assert code == 4 and not json.loads(out)["verification"]["passed"]


def test_group_verdict(capsys):
    code, out, _ = run(capsys, "group-verdict", "--moduli", "2,2,6", "--coeffs", json.dumps([1.0] * 24), "--json")
    assert code == 0 and json.loads(out)["universal"] == "yes"
    code, out, _ = run(capsys, "group-verdict", "--group", "4", "--kappa", "[2,1,0,1]", "--json")
    res = json.loads(out)
    assert code == 0 and res["characteristic"] == "no" and res["coeffs"] == pytest.approx([1, 0.5, 0, 0.5])


def test_sphere_verdict(capsys, tmp_path):
    f = tmp_path / "allpos.json"
    f.write_text(json.dumps({"d": 2, "b": [1, 0.5, 0.25, 0.125]}))
    code, out, _ = run(capsys, "sphere-verdict", "--d", "2", "--coeffs", str(f), "--tail", "positive", "--json")
    assert code == 0 and json.loads(out)["universal"] == "yes"
    code, out, _ = run(capsys, "sphere-verdict", "--coeffs", str(f), "--tail", "zero", "--json")
    assert json.loads(out)["characteristic"] == "no"


def test_sphere_embed(capsys):
    spec = json.dumps({"d": 2, "b": [1, 1, 1, 0.5, 0, 0.1], "kind": "infinity", "tail": "positive-odd"})
    code, out, _ = run(capsys, "sphere-embed", "--coeffs", spec, "--n", "4", "--a", "0.5")
    res = json.loads(out)
    assert code == 0 and res["constant"] is True


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--group", "4", "--coeffs", "[1,0.5,0.25,0.5]")
    res = json.loads(out)
    assert code == 0 and res["lambdas"] == [1, 0.5, 0.5, 0.25]


@pytest.fixture
def forecast_files(tmp_path):
    kernel = {"space": {"points": ["a", "b", "c"]}, "gram": np.eye(3).tolist()}
    kf = tmp_path / "k.json"
    kf.write_text(json.dumps(kernel))
    fa = tmp_path / "a.json"
    fa.write_text(json.dumps({"records": [
        {"id": "1", "forecast": [0.6, 0.3, 0.1], "observation": "a"},
        {"id": "2", "forecast": [0.2, 0.2, 0.6], "observation": "c"}]}))
    fb = tmp_path / "b.json"
    fb.write_text(json.dumps({"records": [
        {"id": "1", "forecast": [1 / 3, 1 / 3, 1 / 3], "observation": "a"},
        {"id": "2", "forecast": [1 / 3, 1 / 3, 1 / 3], "observation": "c"}]}))
    return kf, fa, fb


def test_score(capsys, forecast_files):
    kf, fa, fb = forecast_files
    code, out, _ = run(capsys, "score", "--kernel", str(kf), "--forecasts", str(fa), "--json")
    rep = json.loads(out)
    # Brier / 2 - 1/2 with the identity kernel
    assert code == 0 and rep["records"][0]["score"] == pytest.approx(-0.6 + 0.5 * 0.46)
    code, out, _ = run(capsys, "score", "--kernel", str(kf), "--forecasts", str(fa), "--compare", str(fb))
    assert code == 0 and "mean difference" in out


def test_score_simulation_is_deterministic(capsys, forecast_files):
    kf, fa, fb = forecast_files
    args = ("score", "--kernel", str(kf), "--forecasts", str(fa), "--compare", str(fb),
            "--simulate", "2000", "--seed", "5", "--json")
    _, out1, _ = run(capsys, *args)
    _, out2, _ = run(capsys, *args)
    assert out1 == out2
    for r in json.loads(out1)["records"]:
        assert abs(r["mean_difference"] - r["half_mmd_sq"]) <= 3 * r["stderr"]


def test_score_space_mismatch(capsys, forecast_files, tmp_path):
    kf, _, _ = forecast_files
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"forecast": [0.5, 0.5], "observation": "a"}]))
    assert run(capsys, "score", "--kernel", str(kf), "--forecasts", str(bad))[0] == 3
    bad.write_text(json.dumps([{"forecast": [0.5, 0.5, 0.0], "observation": "zz"}]))
    assert run(capsys, "score", "--kernel", str(kf), "--forecasts", str(bad))[0] == 3
    bad.write_text("{broken")
    assert run(capsys, "score", "--kernel", str(kf), "--forecasts", str(bad))[0] == 2
