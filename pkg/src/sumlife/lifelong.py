"""Incremental training over a snapshot sequence and the transfer measures.

Tasks run strictly in order.  Warm restarts grow the previous checkpoint to
the new vocabulary widths; cold restarts reinitialize at those widths.  After
each task the frozen checkpoint is evaluated on every task's test split,
including future ones, filling one row of the T x T result matrix that all
measures are computed from.  Test vertices whose class the network has never
seen count as errors, and their fraction is reported separately.

Per-task randomness derives from (run seed, task index), so extending a
sequence never perturbs earlier tasks' batches.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, TrainingDivergence
from .features import (
    TEST,
    VAL,
    ClassVocabulary,
    PredicateVocabulary,
    encode_features,
    extend_vocabularies,
    split_vertices,
)
from .ingest import SnapshotGraph
from .nets import Hyper, Network
from .sampling import edge_as_vertex_transform, full_graph_batch, sample_batch
from .summarize import vertex_hashes


@dataclass
class Task:
    index: int
    timestamp: str
    graph: SnapshotGraph
    labels: np.ndarray  # global class index per vertex position
    split: np.ndarray
    pred_width: int  # vocabulary widths once this task is reached
    class_width: int
    features: np.ndarray  # encoded at the final vocabulary width


@dataclass
class TaskSequence:
    tasks: list[Task]
    pred_vocab: PredicateVocabulary
    class_vocab: ClassVocabulary
    model: str

    def __len__(self) -> int:
        return len(self.tasks)


def prepare_tasks(
    snapshots: list[tuple[str, SnapshotGraph]],
    model: str,
    seed: int,
    pred_vocab: PredicateVocabulary | None = None,
    class_vocab: ClassVocabulary | None = None,
    include_rdf_types: bool = False,
) -> TaskSequence:
    """Summarize each snapshot, grow the vocabularies, attach splits/features."""
    timestamps = [t for t, _ in snapshots]
    if timestamps != sorted(timestamps) or len(set(timestamps)) != len(timestamps):
        raise ValueError("snapshot timestamps must be strictly increasing")
    pv = pred_vocab if pred_vocab is not None else PredicateVocabulary()
    cv = class_vocab if class_vocab is not None else ClassVocabulary()
    staged = []
    for index, (timestamp, g) in enumerate(snapshots):
        hashes = vertex_hashes(g, model, include_rdf_types)
        extend_vocabularies(g, hashes, pv, cv, include_rdf_types)
        staged.append((index, timestamp, g, hashes, pv.width, cv.width))
    tasks = []
    for index, timestamp, g, hashes, pw, cw in staged:
        labels = np.array([cv.index(int(h)) for h in hashes], dtype=np.int64)
        tasks.append(
            Task(
                index=index,
                timestamp=timestamp,
                graph=g,
                labels=labels,
                split=split_vertices(g, seed),
                pred_width=pw,
                class_width=cw,
                features=encode_features(g, pv, include_rdf_types),
            )
        )
    return TaskSequence(tasks=tasks, pred_vocab=pv, class_vocab=cv, model=model)


def _task_rng(seed: int, task_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(task_index,)))


def _hops(model: str) -> int:
    return 1 if model == "ac1" else 2


def evaluate_network(
    net: Network,
    task: Task,
    pred_vocab: PredicateVocabulary,
    which: int = TEST,
) -> tuple[float, float]:
    """(accuracy, unseen-class fraction) on one split of a task.

    Unseen classes (index at or above the network's output width) cannot be
    predicted and count as errors.
    """
    rows = np.flatnonzero(task.split == which)
    if len(rows) == 0:
        return 0.0, 0.0
    labels = task.labels[rows]
    unseen = labels >= net.n_classes
    if net.arch in ("mlp", "graph-mlp"):
        logits = net.feature_logits(task.features[rows])
        pred = np.argmax(logits, axis=1)
    else:
        # k is batch metadata here; 2 keeps the edge-as-vertex path legal
        batch = full_graph_batch(task.graph, task.labels, task.features, 2)
        if net.arch == "gcn-edges":
            batch = edge_as_vertex_transform(batch, pred_vocab)
        logits = net.batch_logits(batch)
        pred = np.argmax(logits[rows], axis=1)
    correct = (pred == labels) & ~unseen
    return float(correct.mean()), float(unseen.mean())


def _train_on_task(
    net: Network,
    task: Task,
    seq: TaskSequence,
    iterations: int,
    batch_cap: int,
    rng: np.random.Generator,
    track_val: bool = True,
) -> list[float]:
    """Run the per-task iterations; returns validation accuracy per iteration."""
    adam = net.new_adam()
    k = _hops(seq.model)
    val_curve = []
    for step in range(iterations):
        batch = sample_batch(
            task.graph, task.labels, task.split, k, task.features, cap=batch_cap, rng=rng
        )
        if net.arch == "gcn-edges":
            batch = edge_as_vertex_transform(batch, seq.pred_vocab)
        try:
            net.train_step(batch, adam, rng)
        except NumericalError as exc:
            raise TrainingDivergence(task.index, step, str(exc)) from exc
        if track_val:
            val_acc, _ = evaluate_network(net, task, seq.pred_vocab, which=VAL)
            val_curve.append(val_acc)
    return val_curve


def run_sequence(
    seq: TaskSequence,
    arch: str,
    hyper: Hyper,
    restart: str = "warm",
    seed: int = 42,
    iterations: int = 100,
    batch_cap: int = 1000,
    zero_init_growth: bool = False,
    track_val: bool = False,
    threads: int = 1,
) -> tuple[list[Network], np.ndarray, list[dict]]:
    """Train through the sequence; returns (checkpoints, R, per-task diagnostics).

    Tasks are strictly sequential; the per-row evaluations run on up to
    ``threads`` workers over frozen checkpoints, so results do not depend on
    the worker count.
    """
    if restart not in ("warm", "cold"):
        raise ValueError(f"restart must be 'warm' or 'cold', got {restart!r}")
    t_count = len(seq)
    r = np.zeros((t_count, t_count), dtype=np.float64)
    checkpoints: list[Network] = []
    diagnostics: list[dict] = []
    net: Network | None = None
    for task in seq.tasks:
        rng = _task_rng(seed, task.index)
        if net is None or restart == "cold":
            net = Network.create(arch, task.pred_width, task.class_width, hyper, rng)
        else:
            net.grow(task.pred_width, task.class_width, rng, zero_init_growth)
        val_curve = _train_on_task(net, task, seq, iterations, batch_cap, rng, track_val)
        checkpoints.append(net.clone())
        frozen = checkpoints[-1]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(
                    pool.map(lambda o: evaluate_network(frozen, o, seq.pred_vocab), seq.tasks)
                )
        else:
            results = [evaluate_network(frozen, o, seq.pred_vocab) for o in seq.tasks]
        unseen_row = []
        for other, (acc_ij, unseen) in zip(seq.tasks, results):
            r[task.index, other.index] = acc_ij
            unseen_row.append(unseen)
        diagnostics.append(
            {
                "task": task.index,
                "timestamp": task.timestamp,
                "input_width": task.pred_width,
                "class_width": task.class_width,
                "unseen_fraction": unseen_row,
                "val_accuracy": val_curve,
            }
        )
    return checkpoints, r, diagnostics


# -- measures over the result matrix ------------------------------------------


def _check_full(r: np.ndarray) -> int:
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("result matrix must be square")
    return r.shape[0]


def acc(r: np.ndarray) -> float:
    """Mean accuracy over all tasks after training on the last one."""
    t = _check_full(r)
    return float(np.sum(r[t - 1, :]) / t)


def bwt(r: np.ndarray) -> float:
    """Backward transfer: retained performance on earlier tasks."""
    t = _check_full(r)
    if t < 2:
        raise ValueError("backward transfer needs at least 2 tasks")
    return float(sum(r[t - 1, i] - r[i, i] for i in range(t - 1)) / (t - 1))


def fwt(r: np.ndarray) -> float:
    """Forward transfer: next-task performance before training on it,
    relative to the diagonal."""
    t = _check_full(r)
    if t < 2:
        raise ValueError("forward transfer needs at least 2 tasks")
    return float(sum(r[i - 1, i] - r[i, i] for i in range(1, t)) / (t - 1))


def omega(r: np.ndarray) -> tuple[float, float, float]:
    """(omega_base, omega_new, omega_all) normalized by the best diagonal accuracy."""
    t = _check_full(r)
    if t < 2:
        raise ValueError("omega measures need at least 2 tasks")
    alpha_ideal = max(float(r[i, i]) for i in range(t))
    if alpha_ideal == 0.0:
        raise ValueError("all diagonal accuracies are zero")
    base = sum(r[i, 0] / alpha_ideal for i in range(1, t)) / (t - 1)
    new = sum(r[i, i] for i in range(1, t)) / (t - 1)
    all_ = sum((np.sum(r[i, :]) / t) / alpha_ideal for i in range(1, t)) / (t - 1)
    return float(base), float(new), float(all_)


def forgetting(r: np.ndarray, k: int) -> float:
    """Mean drop from each past task's best accuracy after training task k (1-based)."""
    t = _check_full(r)
    if not 2 <= k <= t:
        raise ValueError(f"k must be in [2, {t}]")
    drops = [max(r[m, j] for m in range(k - 1)) - r[k - 1, j] for j in range(k - 1)]
    return float(sum(drops) / (k - 1))


@dataclass
class LifelongReport:
    """Everything recomputable from the result matrix, plus diagnostics."""

    acc: float
    bwt: float | None
    fwt: float | None
    omega_base: float | None
    omega_new: float | None
    omega_all: float | None
    alpha_ideal: float
    forgetting: dict[int, float] = field(default_factory=dict)
    diagnostics: list[dict] = field(default_factory=list)

    @classmethod
    def from_matrix(cls, r: np.ndarray, diagnostics: list[dict] | None = None) -> "LifelongReport":
        t = _check_full(r)
        alpha_ideal = max(float(r[i, i]) for i in range(t))
        if t >= 2:
            ob, on, oa = omega(r)
            report = cls(
                acc=acc(r), bwt=bwt(r), fwt=fwt(r),
                omega_base=ob, omega_new=on, omega_all=oa,
                alpha_ideal=alpha_ideal,
                forgetting={k: forgetting(r, k) for k in range(2, t + 1)},
            )
        else:
            report = cls(
                acc=acc(r), bwt=None, fwt=None,
                omega_base=None, omega_new=None, omega_all=None,
                alpha_ideal=alpha_ideal,
            )
        if diagnostics:
            report.diagnostics = diagnostics
        return report

    def to_dict(self) -> dict:
        return {
            "acc": self.acc,
            "bwt": self.bwt,
            "fwt": self.fwt,
            "omega_base": self.omega_base,
            "omega_new": self.omega_new,
            "omega_all": self.omega_all,
            "alpha_ideal": self.alpha_ideal,
            "forgetting": {str(k): v for k, v in self.forgetting.items()},
            "diagnostics": self.diagnostics,
        }


def time_warp(
    old_net: Network,
    old_pred_vocab: PredicateVocabulary,
    old_class_vocab: ClassVocabulary,
    new_snapshot: tuple[str, SnapshotGraph],
    model: str,
    arch: str,
    hyper: Hyper,
    seed: int = 42,
    iterations: int = 100,
    batch_cap: int = 1000,
    include_rdf_types: bool = False,
) -> dict:
    """Frozen / retrained / from-scratch comparison on a distant new task."""
    seq = prepare_tasks(
        [new_snapshot], model, seed,
        pred_vocab=old_pred_vocab, class_vocab=old_class_vocab,
        include_rdf_types=include_rdf_types,
    )
    task = seq.tasks[0]

    frozen_acc, frozen_unseen = evaluate_network(old_net, task, seq.pred_vocab)

    warm = old_net.clone()
    rng = _task_rng(seed, 0)
    warm.grow(task.pred_width, task.class_width, rng)
    _train_on_task(warm, task, seq, iterations, batch_cap, rng, track_val=False)
    warm_acc, _ = evaluate_network(warm, task, seq.pred_vocab)

    rng = _task_rng(seed, 0)
    cold = Network.create(arch, task.pred_width, task.class_width, hyper, rng)
    _train_on_task(cold, task, seq, iterations, batch_cap, rng, track_val=False)
    cold_acc, _ = evaluate_network(cold, task, seq.pred_vocab)

    return {
        "frozen_accuracy": frozen_acc,
        "frozen_unseen_fraction": frozen_unseen,
        "retrained_accuracy": warm_acc,
        "cold_accuracy": cold_acc,
    }
