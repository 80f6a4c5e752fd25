import json
import shlex
import subprocess
import sys

import pytest

from offsetshape import cli

PLACE = ["--place", "h^2, h^4 + h^9", "--cosab", "3/5,4/5"]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_place_report(capsys):
    code, out, _ = run(["analyze", *PLACE], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["convention"] == cli.CONVENTION
    (place,) = rep["places"]
    assert place["signature"]["p"] == 2 and place["signature"]["q"] == 4
    for sheet in place["sheets"]:
        assert sheet["prediction"]["case"] == "Q2P_ZERO_T12_1"
        assert sheet["series"]["signature"] == [2, 4]


def test_analyze_curve_smoothing(capsys):
    code, out, _ = run(["analyze", "--curve", "x^3 - y^2", "--theta", "0.7853981633974483"], capsys)
    assert code == 0
    for sheet in json.loads(out)["places"][0]["sheets"]:
        assert sheet["prediction"]["case"] == "SMOOTHED_QP1"
        assert sheet["agreement"] == "agree"


def test_analyze_is_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert cli.main(["analyze", *PLACE, "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_plot_outputs(tmp_path, capsys):
    csvs = []
    for i in range(2):
        c, s = tmp_path / f"p{i}.csv", tmp_path / f"p{i}.svg"
        code, out, _ = run(["plot", "--curve", "y - x^2", "--theta", "0", "--h-max", "1.2",
                            "--csv", str(c), "--svg", str(s)], capsys)
        assert code == 0
        csvs.append(c.read_bytes())
    assert csvs[0] == csvs[1]
    lines = csvs[0].decode().splitlines()
    assert lines[0] == "branch_id,h,x,y"
    assert {ln.split(",")[0] for ln in lines[1:]} == {"src", "gen+", "gen-"}
    assert "<svg" in (tmp_path / "p0.svg").read_text()
    summary = json.loads(out)
    assert summary["branches"]["gen+"]["cusps"] == 2
    assert summary["branches"]["gen-"]["cusps"] == 0


def test_config_round_trip(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    code, first, _ = run(["analyze", *PLACE, "--d", "3/2", "--save-config", str(cfg)], capsys)
    assert code == 0
    code, second, _ = run(["analyze", "--config", str(cfg)], capsys)
    assert code == 0 and first == second
    # a flag overrides the file, including the other member of an exclusive pair
    code, third, _ = run(["analyze", "--config", str(cfg), "--theta", "0.5"], capsys)
    assert code == 0 and json.loads(third)["input"]["params"]["exact"] is False


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"curve": "y - x^2", "frobnicate": 1}))
    code, _, err = run(["analyze", "--config", str(cfg)], capsys)
    assert code == cli.EXIT_PARSE and "frobnicate" in err


def test_tolerance_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"curve": "y - x^2", "theta": 0.5, "tol": 1e-6}))
    parse = cli.build_parser().parse_args
    assert cli.resolve_config(parse(["analyze", "--config", str(cfg)]), {}).tol == 1e-6
    env = {"OFFSETSHAPE_TOL": "1e-8"}
    assert cli.resolve_config(parse(["analyze", "--config", str(cfg)]), env).tol == 1e-8
    args = parse(["analyze", "--config", str(cfg), "--tol", "1e-4"])
    assert cli.resolve_config(args, env).tol == 1e-4


@pytest.mark.parametrize("argv,code", [
    (["analyze", "--curve", "x^3 - y^"], cli.EXIT_PARSE),
    (["analyze", "--curve", "x + 2*y"], cli.EXIT_PARSE),
    (["analyze", "--bogus"], cli.EXIT_PARSE),
    (["analyze", "--curve", "y - x^2", "--theta", "0", "--cosab", "1,0"], cli.EXIT_PARSE),
    (["analyze", "--curve", "x^3 - y^2", "--point", "1,2", "--theta", "0"], cli.EXIT_GEOMETRY),
    (["analyze", "--curve", "y^2 - x^17", "--trunc", "4", "--trunc-cap", "8",
      "--cosab", "3/5,4/5"], cli.EXIT_TRUNC),
])
def test_exit_codes(argv, code, capsys):
    assert run(argv, capsys)[0] == code


def test_verify_forced_suites(capsys):
    code, out, _ = run(["verify", "--seed", "2", "--n", "30", "--force-flex"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["flex_preserved"] == 0
    code, out, _ = run(["verify", "--seed", "2", "--n", "30", "--force-smoothing"], capsys)
    assert code == 0 and json.loads(out)["smoothing_exceptions"] == []


def test_verify_prints_reproduction_on_disagreement(capsys):
    # seed 1 contains places where a literal clause disagrees with the series
    code, out, err = run(["verify", "--seed", "1", "--n", "200"], capsys)
    rep = json.loads(out)
    if rep["decisive_disagreements"]:
        assert code == cli.EXIT_DISAGREE
        assert "offsetshape analyze --place" in err
        # every printed reproduction command replays the same disagreement
        for fail in rep["failures"]:
            argv = shlex.split(fail["reproduce"])[1:]
            code, out, _ = run(argv, capsys)
            sheet = json.loads(out)["places"][0]["sheets"][0]
            assert code == cli.EXIT_DISAGREE and sheet["prediction"]["case"] == fail["case"]
    else:
        assert code == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "offsetshape", "analyze", *PLACE],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["places"]
