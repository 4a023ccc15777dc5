import numpy as np
import pytest

from sumlife.errors import TrainingDivergence
from sumlife.lifelong import (
    LifelongReport,
    acc,
    bwt,
    evaluate_network,
    forgetting,
    fwt,
    omega,
    prepare_tasks,
    run_sequence,
    time_warp,
)
from sumlife.nets import Hyper
from sumlife.reporting import read_matrix_csv, write_matrix_csv
from synth import drift_sequence, ring_snapshot, predicate_pool, distinct_recipes

R3 = np.array([[0.9, 0.4, 0.3], [0.8, 0.85, 0.5], [0.7, 0.6, 0.8]])


def test_measure_fixtures_3x3():
    assert acc(R3) == pytest.approx(0.7, abs=1e-9)
    assert bwt(R3) == pytest.approx(-0.225, abs=1e-9)
    assert fwt(R3) == pytest.approx(-0.375, abs=1e-9)
    ob, on, oa = omega(R3)
    assert ob == pytest.approx(0.75 / 0.9, abs=1e-9)
    assert on == pytest.approx(0.825, abs=1e-9)
    assert oa == pytest.approx((0.71666666666666667 + 0.7) / 2 / 0.9, abs=1e-9)
    assert forgetting(R3, 3) == pytest.approx(0.225, abs=1e-9)
    assert forgetting(R3, 2) == pytest.approx(0.9 - 0.8, abs=1e-9)


def test_measures_constant_matrix():
    c = np.full((5, 5), 0.37)
    assert acc(c) == 0.37
    assert bwt(c) == 0.0
    assert fwt(c) == 0.0
    assert omega(c) == (1.0, pytest.approx(0.37), 1.0)
    for k in range(2, 6):
        assert forgetting(c, k) == 0.0


def test_measures_sign_properties():
    improving = np.array([[0.5, 0.2], [0.8, 0.9]])
    assert bwt(improving) > 0
    declining_cols = np.array([[0.9, 0.1], [0.5, 0.95]])
    assert forgetting(declining_cols, 2) == pytest.approx(0.4)


def test_small_matrix_errors():
    one = np.array([[0.5]])
    assert acc(one) == 0.5
    with pytest.raises(ValueError):
        bwt(one)
    with pytest.raises(ValueError):
        fwt(one)
    with pytest.raises(ValueError):
        omega(one)
    with pytest.raises(ValueError):
        omega(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        forgetting(R3, 4)


def test_report_from_matrix_and_t1():
    rep = LifelongReport.from_matrix(R3)
    assert rep.bwt == pytest.approx(-0.225, abs=1e-9)
    assert rep.forgetting[3] == pytest.approx(0.225, abs=1e-9)
    rep1 = LifelongReport.from_matrix(np.array([[0.8]]))
    assert rep1.acc == 0.8
    assert rep1.bwt is None and rep1.fwt is None


def test_matrix_csv_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    r = rng.random((4, 4))
    path = tmp_path / "R.csv"
    write_matrix_csv(path, r, [f"t{i}" for i in range(4)])
    r2, labels = read_matrix_csv(path)
    assert labels == ["t0", "t1", "t2", "t3"]
    assert np.array_equal(r, r2)
    rep1 = LifelongReport.from_matrix(r)
    rep2 = LifelongReport.from_matrix(r2)
    assert rep1.to_dict() == rep2.to_dict()


def quick_seq(n_tasks=2, members=20):
    snaps = drift_sequence(n_tasks, 2, 3, members)
    return prepare_tasks(snaps, "ac1", seed=5)


def test_prepare_rejects_unsorted_timestamps():
    snaps = drift_sequence(2, 1, 2, 10)
    with pytest.raises(ValueError):
        prepare_tasks(list(reversed(snaps)), "ac1", seed=1)


def test_vocab_widths_monotone_and_match_tasks():
    seq = quick_seq(3)
    widths = [t.class_width for t in seq.tasks]
    assert widths == sorted(widths)
    assert seq.class_vocab.width == widths[-1]
    pred_widths = [t.pred_width for t in seq.tasks]
    assert pred_widths == sorted(pred_widths)


def test_single_task_matrix():
    seq = quick_seq(1)
    _, r, _ = run_sequence(seq, "mlp", Hyper(), "warm", seed=3, iterations=15)
    assert r.shape == (1, 1)
    assert 0.0 <= r[0, 0] <= 1.0


def test_run_deterministic():
    seq = quick_seq(2)
    _, r1, _ = run_sequence(seq, "mlp", Hyper(), "warm", seed=11, iterations=10)
    _, r2, _ = run_sequence(seq, "mlp", Hyper(), "warm", seed=11, iterations=10)
    assert np.array_equal(r1, r2)


def test_threads_do_not_change_results():
    seq = quick_seq(2)
    _, r1, _ = run_sequence(seq, "mlp", Hyper(), "warm", seed=11, iterations=8, threads=1)
    _, r2, _ = run_sequence(seq, "mlp", Hyper(), "warm", seed=11, iterations=8, threads=3)
    assert np.array_equal(r1, r2)


def test_warm_cold_share_first_task_row():
    seq = quick_seq(2)
    _, rw, _ = run_sequence(seq, "mlp", Hyper(), "warm", seed=11, iterations=10)
    _, rc, _ = run_sequence(seq, "mlp", Hyper(), "cold", seed=11, iterations=10)
    assert np.array_equal(rw[0], rc[0])


def test_identical_snapshots_equal_rows():
    pool = predicate_pool(3)
    recipes = distinct_recipes(pool, 4)
    snaps = [
        (f"2012-05-{6 + i:02d}", ring_snapshot("s", recipes, 25)) for i in range(3)
    ]
    seq = prepare_tasks(snaps, "ac1", seed=2)
    _, r, _ = run_sequence(seq, "mlp", Hyper(), "warm", seed=2, iterations=25)
    for i in range(3):
        assert np.ptp(r[i]) <= 0.02


def test_checkpoint_widths_track_cumulative_classes():
    seq = quick_seq(3)
    ckpts, _, diag = run_sequence(seq, "mlp", Hyper(), "warm", seed=1, iterations=5)
    for net, task in zip(ckpts, seq.tasks):
        assert net.n_classes == task.class_width
        assert net.n_in == task.pred_width
    assert [d["class_width"] for d in diag] == [t.class_width for t in seq.tasks]


def test_unseen_classes_count_as_errors():
    seq = quick_seq(2)
    ckpts, r, diag = run_sequence(seq, "mlp", Hyper(), "warm", seed=7, iterations=20)
    # first checkpoint evaluated on task 2: its unique classes are unseen
    acc01, unseen01 = evaluate_network(ckpts[0], seq.tasks[1], seq.pred_vocab)
    assert unseen01 > 0.0
    assert acc01 <= 1.0 - unseen01 + 1e-9
    assert diag[0]["unseen_fraction"][1] == unseen01


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_reported_with_task_and_step():
    seq = quick_seq(1)
    with pytest.raises(TrainingDivergence) as exc_info:
        # absurd learning rate forces overflow into inf/nan quickly
        run_sequence(seq, "mlp", Hyper(learning_rate=1e300), "warm", seed=1, iterations=5)
    assert exc_info.value.task_index == 0


def test_val_accuracy_curve_exposed():
    seq = quick_seq(1)
    _, _, diag = run_sequence(seq, "mlp", Hyper(), "warm", seed=1, iterations=6, track_val=True)
    assert len(diag[0]["val_accuracy"]) == 6


@pytest.mark.parametrize("arch", ["graph-mlp", "gcn", "gcn-edges"])
def test_other_architectures_end_to_end(arch):
    snaps = drift_sequence(2, 2, 3, 12)
    seq = prepare_tasks(snaps, "ac2", seed=4)
    hyper = Hyper(hidden=[8] if arch != "gcn-edges" else [8, 8])
    ckpts, r, _ = run_sequence(
        seq, arch, hyper, "warm", seed=4, iterations=8, batch_cap=200
    )
    assert np.isfinite(r).all()
    assert (r >= 0).all() and (r <= 1).all()
    _, r2, _ = run_sequence(
        seq, arch, hyper, "warm", seed=4, iterations=8, batch_cap=200
    )
    assert np.array_equal(r, r2)


def test_gcn_learns_separable_task():
    pool = predicate_pool(3)
    recipes = distinct_recipes(pool, 4)
    snaps = [("t0", ring_snapshot("t0", recipes, 25))]
    seq = prepare_tasks(snaps, "ac2", seed=6)
    ckpts, r, _ = run_sequence(
        seq, "gcn", Hyper(hidden=[16]), "warm", seed=6, iterations=40, batch_cap=500
    )
    assert r[0, 0] >= 0.5


def test_time_warp_protocol():
    snaps = drift_sequence(2, 0, 4, 20)  # no shared classes: disjoint tasks
    old_seq = prepare_tasks(snaps[:1], "ac1", seed=3)
    ckpts, _, _ = run_sequence(old_seq, "mlp", Hyper(), "warm", seed=3, iterations=25)
    result = time_warp(
        ckpts[-1], old_seq.pred_vocab, old_seq.class_vocab, snaps[1],
        "ac1", "mlp", Hyper(), seed=3, iterations=25,
    )
    assert result["frozen_accuracy"] < 0.05
    assert result["frozen_unseen_fraction"] > 0.9
    assert abs(result["retrained_accuracy"] - result["cold_accuracy"]) <= 0.05
    assert result["retrained_accuracy"] > 0.9
