import csv
import json

import pytest

from desense import records
from desense.cli import main
from desense.design import SWEEP_HEADER


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def grid_dir(tmp_path, capsys):
    assert run(["simulate", "--out", tmp_path / "d"], capsys)[0] == 0
    return tmp_path / "d"


@pytest.fixture
def replica_dir(tmp_path, capsys):
    assert run(["simulate", "--scenario", "replica", "--out", tmp_path / "r"], capsys)[0] == 0
    return tmp_path / "r"


def sets(d):
    return [d / f"set{i}.csv" for i in (1, 2, 3)]


def test_simulate_default(grid_dir):
    for path in sets(grid_dir):
        rows = list(csv.DictReader(open(path)))
        assert len(rows) == 49
        assert list(rows[0]) == records.SAMPLE_HEADER


def test_seed_changes_noise_not_poses(tmp_path, capsys):
    for seed in (1, 2):
        run(["simulate", "--scenario", "replica", "--seed", seed, "--out", tmp_path / str(seed)], capsys)
    a = records.read_samples(tmp_path / "1" / "set1.csv")
    b = records.read_samples(tmp_path / "2" / "set1.csv")
    assert [s.true_pose for s in a] == [s.true_pose for s in b]
    assert [s.c_A for s in a] != [s.c_A for s in b]


def test_infeasible_stroke(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"stroke_mm": 40}))
    code, _, err = run(["simulate", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == 2
    assert "buckling" in err and "lambda_max" in err


def test_bad_config_json(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert run(["simulate", "--config", cfg, "--out", tmp_path / "o"], capsys)[0] == 2


def test_calibrate_replica_table(replica_dir, tmp_path, capsys):
    out = tmp_path / "cal.json"
    code, text, _ = run(["calibrate", *sets(replica_dir), "--out", out], capsys)
    assert code == 0
    planes, _ = records.read_calibration(out)
    by = {(p.pair, p.set_id): p for p in planes}
    assert by["AC", "all"].beta == pytest.approx(-69.4, abs=1.0)
    assert by["BD", "all"].alpha == pytest.approx(-69.4, abs=1.0)
    assert "alpha [pF/mm]" in text and "AC" in text


def test_calibrate_noiseless_zero_cross(grid_dir, tmp_path, capsys):
    out = tmp_path / "cal.json"
    run(["calibrate", grid_dir / "set1.csv", "--out", out], capsys)
    planes, _ = records.read_calibration(out)
    ac = next(p for p in planes if p.pair == "AC")
    bd = next(p for p in planes if p.pair == "BD")
    assert abs(ac.alpha) < 1e-3 and abs(ac.gamma) < 1e-3
    assert abs(bd.beta) < 1e-3 and abs(bd.gamma) < 1e-3


def test_calibrate_one_cell(grid_dir, tmp_path, capsys):
    out = tmp_path / "cal.json"
    code, text, _ = run(["calibrate", grid_dir / "set1.csv", "--one-cell", "A,B,C,D", "--out", out], capsys)
    assert code == 0
    _, parabolas = records.read_calibration(out)
    assert len(parabolas) == 4
    for p in parabolas:
        # set 1 is pure translation, so the cells follow C0 (1 + u/h0)^2 exactly (to 6 printed digits)
        assert p.h0 == pytest.approx(55.0, rel=1e-4)
        assert p.C0 == pytest.approx(920.816, rel=1e-5)
    assert "h0 =" in text


def test_calibrate_unknown_cell(grid_dir, capsys):
    assert run(["calibrate", grid_dir / "set1.csv", "--one-cell", "Q"], capsys)[0] == 2


def test_evaluate_matrix(replica_dir, tmp_path, capsys):
    run(["calibrate", *sets(replica_dir), "--out", tmp_path / "cal.json"], capsys)
    code, text, _ = run(["evaluate", "--calibration", tmp_path / "cal.json", *sets(replica_dir),
                         "--out", tmp_path / "dev.csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "dev.csv")))
    assert list(rows[0]) == records.DEVIATION_HEADER
    assert len(rows) == 2 * 9
    assert sum(r["self_evaluation"] == "1" for r in rows) == 6
    assert "*" in text
    reports = records.read_deviations(tmp_path / "dev.csv")
    cross = [r.rms_mm for r in reports if not r.is_self_evaluation]
    assert 0.1 <= sum(cross) / len(cross) <= 0.3


def test_evaluate_noiseless_self_zero(grid_dir, tmp_path, capsys):
    run(["calibrate", *sets(grid_dir), "--out", tmp_path / "cal.json"], capsys)
    run(["evaluate", "--calibration", tmp_path / "cal.json", *sets(grid_dir), "--out", tmp_path / "dev.csv"], capsys)
    for r in records.read_deviations(tmp_path / "dev.csv"):
        if r.is_self_evaluation:
            assert r.max_mm < 1e-4
        if r.calibration_set_id == "1" and r.evaluation_set_id == "3":
            assert r.max_mm < 1e-4


def test_reconstruct(replica_dir, tmp_path, capsys):
    run(["calibrate", *sets(replica_dir), "--out", tmp_path / "cal.json"], capsys)
    code, text, _ = run(["reconstruct", "--calibration", tmp_path / "cal.json", "--samples",
                         replica_dir / "set1.csv", "--sigma", "0.2", "--out", tmp_path / "p.jsonl"], capsys)
    assert code == 0 and "49 pose estimates" in text
    lines = (tmp_path / "p.jsonl").read_text().splitlines()
    doc = json.loads(lines[0])
    assert set(doc) == {"t_s", "s1", "s2", "tip", "tip_sigma_mm"}
    assert doc["tip_sigma_mm"] == pytest.approx(0.447, abs=1e-3)


def test_gain(tmp_path, capsys):
    run(["simulate", "--protocol", "sine", "--out", tmp_path / "s"], capsys)
    files = sorted((tmp_path / "s").glob("sine_*.csv"))
    assert len(files) == 4
    code, text, _ = run(["gain", *files, "--out", tmp_path / "g.csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "g.csv")))
    assert [float(r["freq_hz"]) for r in rows] == [0.001, 0.01, 0.1, 1.0]
    assert all(abs(float(r["gain_db"])) < 0.05 for r in rows)


def test_propagate(capsys):
    code, text, _ = run(["propagate", "--sigma", "0.2", "--max-dev", "1.02"], capsys)
    assert code == 0
    assert "0.447" in text and "3.060" in text
    _, text, _ = run(["propagate", "--sigma", "0.2", "--lp", "400"], capsys)
    assert "0.721" in text
    _, text, _ = run(["propagate", "--sigma", "0"], capsys)
    assert "end-effector sigma: 0.000" in text
    assert run(["propagate"], capsys)[0] == 2


def test_design_sweep(tmp_path, capsys):
    code, _, _ = run(["design-sweep", "--ri", "15,20,30", "--prestretch", "3,4", "--out", tmp_path / "s.csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "s.csv")))
    assert list(rows[0]) == SWEEP_HEADER
    assert len(rows) == 6


def test_missing_file_is_io_error(tmp_path, capsys):
    assert run(["calibrate", tmp_path / "nope.csv"], capsys)[0] == 4
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert run(["calibrate", bad], capsys)[0] == 4


def test_degenerate_samples_numeric_error(grid_dir, tmp_path, capsys):
    rows = (grid_dir / "set1.csv").read_text().splitlines()
    short = tmp_path / "short.csv"
    short.write_text("\n".join(rows[:3]) + "\n")
    assert run(["calibrate", short], capsys)[0] == 3


def pipeline(root, capsys):
    d = root / "data"
    run(["simulate", "--scenario", "replica", "--seed", "7", "--out", d], capsys)
    run(["calibrate", *sets(d), "--one-cell", "A", "--out", root / "cal.json"], capsys)
    run(["evaluate", "--calibration", root / "cal.json", *sets(d), "--out", root / "dev.csv"], capsys)
    run(["reconstruct", "--calibration", root / "cal.json", "--samples", d / "set2.csv", "--out", root / "p.jsonl"],
        capsys)
    _, text, _ = run(["propagate", "--deviations", root / "dev.csv"], capsys)
    (root / "propagate.txt").write_text(text)
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_pipeline_byte_identical(tmp_path, capsys):
    a = pipeline(tmp_path / "a", capsys)
    b = pipeline(tmp_path / "b", capsys)
    assert len(a) == 7
    assert a == b


def test_calibration_json_schema(grid_dir, tmp_path, capsys):
    out = tmp_path / "cal.json"
    run(["calibrate", *sets(grid_dir), "--one-cell", "A", "--out", out], capsys)
    doc = json.loads(out.read_text())
    assert set(doc) == {"planes", "parabolas"}
    assert len(doc["planes"]) == 2 * 4
    assert set(doc["planes"][0]) == {"pair", "set", "alpha_pF_per_mm", "beta_pF_per_mm", "gamma_pF", "fit_rms_pF",
                                     "condition", "stderr", "n_points"}
    assert {"cell", "set", "C0_pF", "h0_mm", "fit_rms_pF"} <= set(doc["parabolas"][0])
