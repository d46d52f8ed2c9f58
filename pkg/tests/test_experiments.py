import csv
import json
import math
import subprocess
import sys

import pytest

from semigrouplab import cli, experiments as ex
from semigrouplab.errors import InvalidParameter, InvariantViolation
from semigrouplab.random_model import sample_semigroup

SEED = 4242


def test_nearest_rank():
    xs = list(range(1, 11))
    assert ex.nearest_rank(xs, 0.1) == 1
    assert ex.nearest_rank(xs, 0.5) == 5
    assert ex.nearest_rank(xs, 0.9) == 9
    assert ex.nearest_rank([7], 0.1) == 7
    assert ex.nearest_rank(list(range(1, 6)), 0.5) == 3


@pytest.mark.parametrize("grid, trials", [((), 3), ((0.1, 0.2), 3), ((0.1, 0.1), 3), ((0.1,), 0), ((1.5,), 2)])
def test_scaling_config_rejects(grid, trials):
    with pytest.raises(InvalidParameter):
        ex.ScalingConfig(grid, trials, SEED)


def test_scaling_rows():
    res = ex.run_scaling(ex.ScalingConfig((0.2, 0.05, 0.01), 10, SEED))
    assert [r.p for r in res.rows] == [0.2, 0.05, 0.01]
    text = res.render()
    lines = text.splitlines()
    assert len(lines) == 4
    assert lines[0] == ("p,trials,capped,mean_F,median_F,q10_F,q90_F,mean_g,mean_e,"
                        "ratio_F_ln,ratio_e_ln,ratio_gF,frac_under_envelope_log2")
    assert text.endswith("\r\n")
    row = res.rows[2]
    Fs = sorted(sample_semigroup(0.01, t, SEED).invariants.frobenius for t in range(10))
    assert row.mean_F == sum(Fs) / 10
    assert row.median_F == Fs[4]
    assert row.q10_F == Fs[0]
    assert row.q90_F == Fs[8]
    assert row.ratio_F_ln == pytest.approx(row.mean_F * 0.01 / math.log(100) ** 2, rel=1e-15)
    assert res.manifest["draws_audited"] == 30


def test_scaling_row_invariants_enforced():
    row = ex.ScalingRow(0.1, 1, 0, 10.0, 10.0, 10.0, 10.0, 2.0, 1.0, 1.0, 1.0, 0.2, 1.0)
    with pytest.raises(InvariantViolation):
        row.check()


def test_audit_flags_broken_record():
    from dataclasses import replace
    from semigrouplab.core import InvariantsRecord
    o = sample_semigroup(0.3, 0, SEED)
    bad = replace(o, invariants=InvariantsRecord(10, 2, 3, 4))
    with pytest.raises(InvariantViolation):
        ex.audit(bad)


def test_capped_trials_are_counted():
    outcomes = [sample_semigroup(0.1, t, SEED) for t in range(4)] + [None, None]
    row = ex.aggregate_scaling(0.1, outcomes)
    assert (row.trials, row.capped) == (4, 2)


def test_thread_count_independence(tmp_path):
    cfg = dict(p_grid=(0.05, 0.01, 0.002), trials=24, master_seed=SEED)
    outs = []
    for threads in (1, 4, 8):
        path = tmp_path / f"s{threads}.csv"
        ex.write_study(ex.run_scaling(ex.ScalingConfig(threads=threads, **cfg)), path)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_transition_rows():
    res = ex.run_transition(0.01, [0.05, 0.5, 2.0, 10.0], 40, SEED)
    probs = [r.prob_dense for r in res.rows]
    assert probs == sorted(probs)
    assert all(0 <= r.mean_density <= 1 for r in res.rows)
    assert res.rows[-1].N == math.floor(10.0 / 0.01 * math.log(100) ** 2)
    assert res.render().splitlines()[0] == "p,C,N,trials,prob_dense,mean_density"


def test_transition_density_matches_prefix():
    from semigrouplab import core
    p, C = 0.02, 1.0
    res = ex.run_transition(p, [C], 15, SEED)
    N = res.rows[0].N
    total = 0
    for t in range(15):
        o = sample_semigroup(p, t, SEED)
        total += core.semigroup_prefix(list(o.elements), N).count(positive_only=True)
    assert res.rows[0].mean_density == pytest.approx(total / 15 / N, rel=1e-12)


def test_transition_rejects_bad_grid():
    with pytest.raises(InvalidParameter):
        ex.run_transition(0.01, [1.0, 0.5], 3, SEED)


def test_tail_rows():
    res = ex.run_tail(0.3, [2, 20, 100], 50, SEED)
    means = [r.mean_F_shifted for r in res.rows]
    assert means == sorted(means)
    assert [r.reference for r in res.rows] == [0.3**-4 + u * u for u in (2, 20, 100)]
    assert res.render().splitlines()[0] == "p,u,trials,mean_F_shifted,reference"
    with pytest.raises(InvalidParameter):
        ex.run_tail(0.3, [3], 5, SEED)


def test_lemma_suite_default_budget():
    report = ex.run_lemma_suite()
    assert report["passed"]
    assert len(report["checks"]) == len(ex.LEMMA_CHECKS)
    assert {c["name"] for c in report["checks"]} == set(ex.LEMMA_CHECKS)


def test_lemma_suite_zero_budget():
    report = ex.run_lemma_suite(0)
    assert not report["passed"]
    assert len(report["checks"]) == len(ex.LEMMA_CHECKS)
    first = report["checks"][0]
    assert first["error"] == "BudgetExceeded"
    assert first["detail"]["check"] == "partition_enumeration"


def test_manifest_replay(tmp_path):
    out = tmp_path / "tail.csv"
    manifest_path = ex.write_study(ex.run_tail(0.3, [2, 50], 30, SEED, threads=2), out)
    original = out.read_bytes()
    manifest = json.loads(manifest_path.read_text())
    assert manifest["study"] == "tail"
    assert manifest["master_seed"] == SEED
    assert manifest["row_counts"] == {"tail": 2}
    replay_dir = tmp_path / "again"
    replay_dir.mkdir()
    written = ex.replay(manifest_path, replay_dir)
    assert [p.read_bytes() for p in written] == [original]


# --- CLI


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "semigrouplab", *args], capture_output=True, text=True)


@pytest.mark.parametrize("gens, expected", [(["6", "9", "20"], "F=43 g=22 e=3 q=6"), (["1"], "F=-1 g=0 e=1 q=1")])
def test_cli_invariants(gens, expected, capsys):
    assert cli.main(["invariants", *gens]) == 0
    assert capsys.readouterr().out.strip() == expected


def test_cli_invariants_not_cofinite(capsys):
    assert cli.main(["invariants", "4", "6"]) == 2
    assert "NotCofinite" in capsys.readouterr().err


def test_cli_bad_arguments():
    proc = run_cli("scaling", "--p-grid", "0.1", "--trials", "3")
    assert proc.returncode == 2
    proc = run_cli("scaling", "--p-grid", "0.1,0.2", "--trials", "3", "--seed", "1")
    assert proc.returncode == 2


def test_cli_sample(capsys):
    assert cli.main(["sample", "--p", "0.3", "--trials", "3", "--seed", "7", "--threads", "1"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["trial_id", "p", "M", "F", "g", "e", "q", "count_elements"]
    assert len(rows) == 4
    assert rows[1] == sample_semigroup(0.3, 0, 7).csv_row().split(",")


def test_cli_scaling_to_file(tmp_path):
    out = tmp_path / "scaling.csv"
    args = ["scaling", "--p-grid", "0.1,0.05,0.02", "--trials", "10", "--seed", "11", "--out", str(out)]
    assert cli.main(args + ["--threads", "1"]) == 0
    rows = list(csv.DictReader(out.open(newline="")))
    assert len(rows) == 3
    assert (tmp_path / "scaling.csv.manifest.json").exists()
    first = out.read_bytes()
    assert cli.main(args + ["--threads", "3"]) == 0
    assert out.read_bytes() == first


def test_cli_transition_and_tail_json(tmp_path, capsys):
    assert cli.main(["transition", "--p", "0.05", "--c-grid", "0.1,1,5", "--trials", "10",
                     "--seed", "2", "--format", "json", "--threads", "1"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["C"] for r in rows] == [0.1, 1.0, 5.0]
    assert cli.main(["tail", "--p", "0.3", "--u-grid", "2,10", "--trials", "10", "--seed", "2",
                     "--out", str(tmp_path / "t.csv")]) == 0
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 3


def test_cli_lemmas(tmp_path):
    out = tmp_path / "lemmas.json"
    assert cli.main(["lemmas", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] and len(report["checks"]) == 5
    assert cli.main(["lemmas", "--budget", "0", "--out", str(out)]) == 3
    assert json.loads(out.read_text())["checks"][0]["error"] == "BudgetExceeded"


def test_cli_io_error(tmp_path):
    missing = tmp_path / "no" / "such" / "dir" / "x.csv"
    assert cli.main(["tail", "--p", "0.3", "--u-grid", "2", "--trials", "2", "--seed", "1",
                     "--out", str(missing)]) == 4


def test_cli_replay(tmp_path):
    out = tmp_path / "tr.csv"
    assert cli.main(["transition", "--p", "0.05", "--c-grid", "0.5,2", "--trials", "8", "--seed", "5",
                     "--out", str(out)]) == 0
    before = out.read_bytes()
    out.unlink()
    assert cli.main(["replay", str(tmp_path / "tr.csv.manifest.json")]) == 0
    assert out.read_bytes() == before
