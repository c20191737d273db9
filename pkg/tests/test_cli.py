import json

import pytest

from codedcache.cli import main

CFG = {"P": 3, "K": 4, "N": 4, "rho": 2, "M_U": 1, "M_S": 2}


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(CFG))
    return str(path)


def test_verify_command(cfg_file, capsys):
    rc = main(["verify", "--config", cfg_file, "--trials", "3"])
    out = capsys.readouterr().out
    report = json.loads(out)
    assert rc == 0
    assert report["passed"] is True
    assert report["cases"] == 3


def test_verify_command_enumerate(cfg_file, capsys):
    rc = main(["verify", "--config", cfg_file, "--enumerate"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["cases"] == 81


def test_verify_command_failure_exit_code(cfg_file, capsys):
    rc = main(
        ["verify", "--config", cfg_file, "--trials", "2", "--corrupt-generator"]
    )
    assert rc == 1
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_verify_command_rejects_infeasible(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(CFG, M_U=0, M_S=1)))
    rc = main(["verify", "--config", str(bad)])
    err = capsys.readouterr().err
    assert rc == 2
    assert "request rejected (400)" in err


def test_sweep_command(tmp_path, capsys):
    spec = {
        "P": 7, "K": 5, "N": 5,
        "rho": [4], "M_U": [0, 1], "M_S": ["5/4"],
        "mode": "successive", "method": "formula",
    }
    spec_file = tmp_path / "sweep.json"
    spec_file.write_text(json.dumps(spec))
    out_csv = tmp_path / "out.csv"
    rc = main(["sweep", "--config", str(spec_file), "--out", str(out_csv)])
    assert rc == 0
    assert capsys.readouterr().out.strip() == f"wrote 2 rows to {out_csv}"
    lines = out_csv.read_text().strip().split("\n")
    assert len(lines) == 3
    assert lines[0].split(",")[:4] == ["P", "K", "N", "rho"]

    # overrides reach the request: simulate rows carry trials and seed
    rc = main([
        "sweep", "--config", str(spec_file), "--out", str(out_csv),
        "--method", "simulate", "--trials", "5", "--seed", "11",
    ])
    assert rc == 0
    capsys.readouterr()
    rows = out_csv.read_text().strip().split("\n")[1:]
    sim = [r for r in rows if ",simulate," in r]
    assert sim
    for row in sim:
        cells = row.split(",")
        assert cells[12] == "5"  # trials column


def test_sweep_command_deterministic(tmp_path, capsys):
    spec_file = tmp_path / "s.json"
    spec_file.write_text(json.dumps(
        {"P": 3, "K": 4, "N": 4, "rho": 2, "M_U": 1, "M_S": 2, "trials": 6}
    ))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", str(spec_file), "--out", str(a)]) == 0
    assert main(["sweep", "--config", str(spec_file), "--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_sweep_command_spec_must_be_object(tmp_path, capsys):
    spec_file = tmp_path / "s.json"
    spec_file.write_text("[1, 2]")
    rc = main(["sweep", "--config", str(spec_file), "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert "JSON object" in capsys.readouterr().err


def test_replay_command(tmp_path, cfg_file, capsys):
    topo_file = tmp_path / "topo.json"
    topo_file.write_text(json.dumps({"Z": [[1, 2], [1, 2], [1, 2], [1, 2]]}))
    rc = main(["replay", "--topology", str(topo_file), "--config", cfg_file])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["q"] == [4, 4, 0]
    assert report["T_successive"] == 1.5
    assert report["T_parallel"] == 0.75


def test_extremes_command(cfg_file, capsys):
    rc = main(["extremes", "--config", cfg_file, "--mode", "successive"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert len(report["results"]) == 1
    assert report["results"][0]["best_T_exact"] == "3/2"


def test_malformed_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"P": 3,\n  "K": }')
    rc = main(["verify", "--config", str(bad)])
    err = capsys.readouterr().err
    assert rc == 2
    assert "line 2" in err and "column" in err


def test_missing_file(capsys):
    rc = main(["verify", "--config", "/nonexistent/cfg.json"])
    assert rc == 2
    assert "cannot read" in capsys.readouterr().err


def test_unknown_command():
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_unreachable_server(cfg_file, capsys):
    rc = main(
        ["verify", "--config", cfg_file, "--server", "http://127.0.0.1:1"]
    )
    assert rc == 2
    assert "cannot reach server" in capsys.readouterr().err
