import json

import pytest

from pimas.cli import RunConfig, main, run


def test_simulate_writes_artifacts(tmp_path):
    out = tmp_path / "single"
    code = main([
        "simulate", "--scenario", "firemen-2x2", "--seed", "0",
        "--out", str(out), "--plots", "--record-marginals",
    ])
    assert code == 0
    csv = out / "firemen-2x2__seed0.csv"
    assert csv.exists()
    assert (out / "firemen-2x2__seed0.svg").exists()
    header = csv.read_text().splitlines()[0]
    assert header.startswith("t,x_1,x_2,u_1,u_2,mubar_1,mubar_2,p_1_1")
    # simulate does not write sweep artifacts
    assert not (out / "firemen-2x2__summary.csv").exists()


def test_sweep_outputs_independent_of_parallelism(tmp_path):
    outs = []
    for jobs, tag in ((1, "serial"), (3, "parallel")):
        out = tmp_path / tag
        code = main([
            "sweep", "--scenario", "firemen-2x2", "--seeds", "0..3",
            "--out", str(out), "--jobs", str(jobs), "--record-marginals",
        ])
        assert code == 0
        outs.append(out)
    serial, parallel = outs
    names = sorted(p.name for p in serial.iterdir())
    assert names == sorted(p.name for p in parallel.iterdir())
    for name in names:
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()
    manifest = json.loads((serial / "firemen-2x2__manifest.json").read_text())
    assert manifest["seeds"] == [0, 1, 2, 3]
    assert manifest["failed"] == []
    summary = (serial / "firemen-2x2__summary.csv").read_text().splitlines()
    assert len(summary) == 5


def test_sweep_summary_counts_conserve_agents(tmp_path):
    out = tmp_path / "h"
    code = run(RunConfig(scenario="firemen-6x3", seeds=(0, 1), out_dir=str(out)))
    assert code == 0
    lines = (out / "firemen-6x3__summary.csv").read_text().splitlines()
    header = lines[0].split(",")
    c_cols = [i for i, h in enumerate(header) if h.startswith("count_")]
    s_cols = [i for i, h in enumerate(header) if h.startswith("s_")]
    for line in lines[1:]:
        cells = line.split(",")
        counts = sum(int(cells[i]) for i in c_cols)
        assigned = sum(int(cells[i]) > 0 for i in s_cols)
        assert counts == assigned <= 6


def test_validate_gradient_subcommand(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code = main(["validate", "gradient", "--gradient-instances", "50",
                 "--out", str(report_path)])
    captured = capsys.readouterr()
    assert code == 0
    assert "PASS gradient-consistency" in captured.out
    report = json.loads(report_path.read_text())
    assert report["passed"] is True
    assert report["checks"][0]["name"] == "gradient-consistency"


def test_validate_rejects_unknown_suite():
    with pytest.raises(SystemExit):
        main(["validate", "everything"])


def test_mc_check_subcommand(capsys):
    code = main(["mc-check", "--n-samples", "20000", "--seed", "0"])
    captured = capsys.readouterr()
    assert code == 0
    assert "log Z estimate" in captured.out
    assert "closed form" in captured.out


def test_bad_seed_range_is_usage_error():
    with pytest.raises(SystemExit):
        main(["sweep", "--scenario", "firemen-2x2", "--seeds", "5", "--out", "x"])
    with pytest.raises(SystemExit):
        main(["sweep", "--scenario", "firemen-2x2", "--seeds", "9..3", "--out", "x"])


def test_unknown_scenario_fails_cleanly(tmp_path, capsys):
    code = main(["simulate", "--scenario", "nope", "--seed", "0", "--out", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 2
    assert "built-in" in captured.err


def test_run_config_requires_seeds():
    with pytest.raises(ValueError):
        RunConfig(scenario="firemen-2x2", seeds=(), out_dir="x")
