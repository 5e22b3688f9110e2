import csv

import yaml

from guard_sim.cli import main


def write_config(path, **extra):
    tree = {"game": {"n_targets": 10, "defender_budget": 3, "horizon": 5}, "replications": 1,
            "policies": ["HERDS", "Static"]}
    tree.update(extra)
    path.write_text(yaml.safe_dump(tree))
    return str(path)


def test_run_and_aggregate(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml")
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out", str(out), "--seed", "9", "--policies", "HERDS,FPL-UE"]) == 0
    assert sorted(p.name for p in (out / "rounds").iterdir()) == ["c000-r000-FPL-UE.csv", "c000-r000-HERDS.csv"]
    before = (out / "aggregate.csv").read_text()
    (out / "aggregate.csv").unlink()
    assert main(["aggregate", str(out)]) == 0
    assert (out / "aggregate.csv").read_text() == before


def test_sweep_covers_grid(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", policies=["Static"])
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", cfg, "--out", str(out), "--jobs", "2"]) == 0
    rows = list(csv.DictReader(open(out / "aggregate.csv")))
    assert len(rows) == 6 * 3 * 2
    assert {r["gr_truncation"] for r in rows} == {"3", "8", "15"}


def test_checks(capsys):
    assert main(["bench-gr", "--rounds", "20000"]) == 0
    assert main(["oracle-check", "--instances", "200"]) == 0
    assert "0 mismatches" in capsys.readouterr().out


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml", replications=0)
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert "replications" in capsys.readouterr().err
    assert main(["run", "--policies", "EXP3", "--out", str(tmp_path / "y")]) == 2
