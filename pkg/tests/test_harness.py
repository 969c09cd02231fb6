import subprocess
import sys

import numpy as np
import pytest

from wjl.generators import SparseSpec
from wjl.harness import (
    ExperimentConfig,
    read_csv,
    records_to_csv,
    render_histogram,
    run_fig1,
    run_fig2,
    run_sketch_eval,
    run_verify,
)


def _small_cfg(experiment, tmp_path, **overrides):
    base = dict(
        trials=30,
        k_list=(16, 64),
        spec=SparseSpec(d=200, l_x=10, l_w=10, l_overlap=8),
        out_dir=tmp_path,
        master_seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(experiment=experiment, **base)


def test_fig1_record_shape(tmp_path):
    cfg = _small_cfg("fig1", tmp_path)
    records, path = run_fig1(cfg)
    assert len(records) == 60
    truths = {r.true_value for r in records}
    assert len(truths) == 1
    assert path.exists()
    meta, rows = read_csv(path.read_text())
    assert meta["experiment"] == "fig1"
    assert "true_value" in meta and "library_version" in meta
    assert len(rows) == 60


def test_fig1_reproducible_and_thread_invariant(tmp_path):
    a = run_fig1(_small_cfg("fig1", tmp_path / "a"))[1].read_text()
    b = run_fig1(_small_cfg("fig1", tmp_path / "b"))[1].read_text()
    c = run_fig1(_small_cfg("fig1", tmp_path / "c", threads=8))[1].read_text()
    assert a == b == c


def test_fig2_shares_matrix_seed_and_centers(tmp_path):
    cfg = _small_cfg("fig2", tmp_path, trials=60, k_list=(256,))
    records, path = run_fig2(cfg)
    meta, _ = read_csv(path.read_text())
    assert "matrix_seed" in meta
    ratios = np.array([r.ratio for r in records if r.ratio is not None])
    se = ratios.std() / np.sqrt(len(ratios))
    assert abs(ratios.mean() - 1.0) <= 4 * se


def test_sketch_eval_direction(tmp_path):
    cfg = _small_cfg("sketch-eval", tmp_path, spec=SparseSpec(d=200, l_x=2, l_w=2, l_overlap=2))
    rows, path = run_sketch_eval(cfg, n_seeds=60)
    by_arm = {r["arm"]: r for r in rows}
    assert by_arm["planned"]["success_rate"] >= by_arm["undersized"]["success_rate"]
    assert path.exists()


def test_run_verify_all_pass():
    results = run_verify(seed=0)
    assert results and all(ok for _, ok in results)


def test_render_histogram_deterministic(tmp_path):
    cfg = _small_cfg("fig1", tmp_path)
    _, path = run_fig1(cfg)
    svg1 = render_histogram(path, "estimate", 20, tmp_path / "h1.svg")
    svg2 = render_histogram(path, "estimate", 20, tmp_path / "h2.svg")
    assert svg1.read_text() == svg2.read_text()
    assert svg1.read_text().startswith("<svg")


def test_render_histogram_identical_values(tmp_path):
    csv = tmp_path / "flat.csv"
    csv.write_text("x\n" + "\n".join(["3.5"] * 250) + "\n")
    out = render_histogram(csv, "x", 10, tmp_path / "flat.svg")
    text = out.read_text()
    assert text.count("<rect") == 2  # background + the single full-height bar


def test_render_histogram_errors(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("a,b\n1,zzz\n")
    with pytest.raises(ValueError):
        render_histogram(csv, "missing", 5, tmp_path / "o.svg")
    with pytest.raises(ValueError):
        render_histogram(csv, "b", 5, tmp_path / "o.svg")


def test_records_to_csv_sorted_and_commented():
    from wjl.harness import TrialRecord

    recs = [
        TrialRecord(1, 4, 1.0, 2.0, 1.5, 0.1),
        TrialRecord(0, 4, 1.5, 2.0, 1.5, 0.1),
    ]
    text = records_to_csv(recs, {"experiment": "t"})
    lines = text.splitlines()
    assert lines[0].startswith("# {")
    assert lines[1].startswith("trial_index,")
    assert lines[2].startswith("0,") and lines[3].startswith("1,")


def _cli(*args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "wjl.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def test_cli_gen_reduce_estimate(tmp_path):
    out = tmp_path / "out"
    res = _cli("gen", "--d", "200", "--l", "5", "--l-overlap", "4", "--seed", "3", "--out", str(out), cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    assert (out / "x.csv").exists() and (out / "w.csv").exists()

    res = _cli(
        "reduce", str(out / "x.csv"), "--d", "200", "--k-dim", "64", "--seed", "5",
        "--output", str(out / "x.wjlr"), cwd=tmp_path,
    )
    assert res.returncode == 0, res.stderr
    res = _cli(
        "reduce", str(out / "w.csv"), "--d", "200", "--k-dim", "64", "--seed", "5",
        "--output", str(out / "w.wjlr"), cwd=tmp_path,
    )
    assert res.returncode == 0, res.stderr

    res = _cli("estimate", str(out / "x.wjlr"), str(out / "w.wjlr"), cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    float(res.stdout.strip())  # parses as a number


def test_cli_sketch_stream(tmp_path):
    stream = tmp_path / "s.csv"
    stream.write_text("t,value\n1,2.0\n2,-1.0\n")
    res = _cli(
        "sketch", str(stream), "--r", "3", "--m", "2", "--seed", "1",
        "--output", str(tmp_path / "s.wjls"), cwd=tmp_path,
    )
    assert res.returncode == 0, res.stderr
    from wjl.sketch import StreamSketch

    sk = StreamSketch.from_bytes((tmp_path / "s.wjls").read_bytes())
    assert sk.items_seen == 2


def test_cli_verify_exit_code(tmp_path):
    res = _cli("verify", cwd=tmp_path)
    assert res.returncode == 0
    assert "PASS" in res.stdout


def test_cli_fig1_and_plot_determinism(tmp_path):
    args = ["fig1", "--d", "200", "--trials", "20", "--k", "16", "--k", "64", "--seed", "11", "--threads", "8"]
    res1 = _cli(*args, "--out", str(tmp_path / "r1"), cwd=tmp_path)
    assert res1.returncode == 0, res1.stderr
    res2 = _cli(*args, "--out", str(tmp_path / "r2"), cwd=tmp_path)
    assert res2.returncode == 0, res2.stderr
    assert (tmp_path / "r1/fig1.csv").read_bytes() == (tmp_path / "r2/fig1.csv").read_bytes()
    assert (tmp_path / "r1/fig1.svg").read_bytes() == (tmp_path / "r2/fig1.svg").read_bytes()


def test_cli_bad_input_exit_code(tmp_path):
    res = _cli("plot", str(tmp_path / "nope.csv"), "--output", str(tmp_path / "o.svg"), cwd=tmp_path)
    assert res.returncode == 2
