import json

import mpmath
import pytest
from click.testing import CliRunner

from hamforge import model_io
from hamforge.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    r = CliRunner()
    cp1 = d / "cp1.json"
    cy = d / "cy.json"
    assert r.invoke(main, ["solve", "--case", "type2", "--class", "cy", "--iB", "2", "--dB", "1",
                           "--d", "0", "--m", "1,1", "-o", str(cp1)]).exit_code == 0
    assert r.invoke(main, ["solve", "--case", "type1", "--class", "cy", "--iB", "3", "--dB", "2",
                           "--d", "0,0", "--m", "2,1", "-o", str(cy)]).exit_code == 0
    return {"dir": d, "cp1": cp1, "cy": cy}


def test_solve_cp1(files):
    m = model_io.load(files["cp1"])
    assert m.alphas == (-1, 1)
    cert = model_io.stored_certification(files["cp1"])
    assert cert["passed"]


def test_solve_deterministic(runner, files):
    out = files["dir"] / "cp1_again.json"
    res = runner.invoke(main, ["solve", "--case", "type2", "--class", "cy", "--iB", "2", "--dB", "1",
                               "--d", "0", "--m", "1,1", "-o", str(out)])
    assert res.exit_code == 0
    assert out.read_bytes() == files["cp1"].read_bytes()


def test_type2_shrinker_usage_error(runner):
    res = runner.invoke(main, ["solve", "--case", "type2", "--class", "shrinking", "--iB", "4",
                               "--dB", "3", "--d", "0,0", "--m", "1,1"])
    assert res.exit_code == 2
    assert "there can be no complete Type 2 shrinking or expanding soliton" in res.output


def test_infeasible_exit(runner):
    res = runner.invoke(main, ["solve", "--case", "type1", "--class", "shrinking", "--iB", "4",
                               "--dB", "3", "--d", "0,0", "--m", "1,2"])
    assert res.exit_code == 2
    assert "3/2" in res.output


def test_verify_pass(runner, files):
    res = runner.invoke(main, ["verify", str(files["cy"]), "--oracle-points", "2"])
    assert res.exit_code == 0, res.output
    assert "[PASS] ricci_oracle" in res.output


def test_verify_detects_perturbed_root(runner, files):
    doc = json.loads(files["cy"].read_text())
    al = model_io.decode(doc["roots"]["alphas"])
    al[1] = al[1] + 1e-3
    doc["roots"]["alphas"] = model_io.encode(al)
    bad = files["dir"] / "perturbed.json"
    bad.write_text(json.dumps(doc))
    res = runner.invoke(main, ["verify", str(bad), "--oracle-points", "1"])
    assert res.exit_code == 1
    assert "[FAIL] delta_match" in res.output


def test_verify_corrupted(runner, files):
    bad = files["dir"] / "bad.json"
    bad.write_text("{bad")
    res = runner.invoke(main, ["verify", str(bad)])
    assert res.exit_code == 1
    assert "corrupted model file" in res.output


def test_verify_json(runner, files):
    res = runner.invoke(main, ["verify", str(files["cp1"]), "--oracle-points", "1", "--json"])
    assert res.exit_code == 0
    assert json.loads(res.output)["passed"]


def test_sample_grid_and_clipping(runner, files):
    res = runner.invoke(main, ["sample", str(files["cp1"]), "--grid", "-3:-1.5:2", "--grid", "0.5:3:2"])
    assert res.exit_code == 0
    lines = res.stdout.splitlines()
    assert lines[0].startswith("# schema:")
    assert lines[1].startswith("xi_1,xi_2,min_eig")
    assert len(lines) == 2 + 2          # ξ₂ = 0.5 lies outside and is clipped
    assert "clipped" in res.stderr


def test_sample_random_with_oracle(runner, files):
    res = runner.invoke(main, ["sample", str(files["cy"]), "--n", "2", "--oracle"])
    assert res.exit_code == 0
    rows = res.stdout.splitlines()[2:]
    assert len(rows) == 2
    assert all(float(r.split(",")[-1]) < 1e-6 for r in rows)


def test_growth_slope(runner, files):
    res = runner.invoke(main, ["growth", str(files["cp1"])])
    assert res.exit_code == 0
    slope = float(res.stderr.split("regression slope")[1].split()[0])
    assert abs(slope - 5) <= 0.25


def test_sweep_monotone_crossing(runner, files):
    res = runner.invoke(main, ["sweep", str(files["cy"]), "--alpha", "1.1:10:6"])
    assert res.exit_code == 0
    d1 = [float(r.split(",")[2]) for r in res.stdout.splitlines()[2:]]
    assert len(d1) == 6
    assert all(x < y for x, y in zip(d1, d1[1:]))
    assert d1[0] < 2 < d1[-1]


def test_help_documents_columns(runner):
    res = runner.invoke(main, ["sample", "--help"])
    assert "min_eig" in res.output


def test_verify_shrinker_rechecks(runner, files, shrinker_model):
    p = files["dir"] / "shrink.json"
    model_io.save(shrinker_model, p)
    res = runner.invoke(main, ["verify", str(p), "--oracle-points", "1"])
    assert res.exit_code == 0, res.output
    for name in ("shrinker_c_zero", "shrinker_tail_moment", "shrinker_H"):
        assert f"[PASS] {name}" in res.output


def test_bits_flag(runner, files):
    prec = mpmath.mp.prec
    try:
        res = runner.invoke(main, ["--bits", "160", "verify", str(files["cp1"]), "--oracle-points", "1"])
        assert res.exit_code == 0
        assert mpmath.mp.prec >= 160
    finally:
        mpmath.mp.prec = prec
