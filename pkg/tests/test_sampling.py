import numpy as np
import pytest
from scipy import stats as scipy_stats

from sumlife.features import PredicateVocabulary, encode_features, split_vertices
from sumlife.ingest import build_snapshot
from sumlife.sampling import (
    class_weights,
    edge_as_vertex_transform,
    full_graph_batch,
    sample_batch,
)
from synth import ring_snapshot, predicate_pool, distinct_recipes


def test_class_weights_inverse_frequency():
    w = class_weights(np.array([0, 0, 0, 1]))
    assert w[0] == pytest.approx(0.25)
    assert w[1] == pytest.approx(0.75)


def test_class_weights_uniform_and_single():
    w = class_weights(np.array([0, 1, 2]))
    assert all(v == pytest.approx(1 / 3) for v in w.values())
    assert class_weights(np.array([4, 4]))[4] == pytest.approx(1.0)


def test_class_weights_empty_errors():
    with pytest.raises(ValueError):
        class_weights(np.array([], dtype=np.int64))


def setup_task(n_classes=4, members=25):
    pool = predicate_pool(4)
    recipes = distinct_recipes(pool, n_classes)
    g = ring_snapshot("t", recipes, members)
    pv = PredicateVocabulary()
    pv.extend_from_graph(g)
    x = encode_features(g, pv)
    from sumlife.summarize import vertex_hashes

    hashes = vertex_hashes(g, "ac1")
    classes = {h: i for i, h in enumerate(sorted(set(int(v) for v in hashes)))}
    labels = np.array([classes[int(h)] for h in hashes])
    split = split_vertices(g, 3)
    return g, labels, split, x, pv


def test_batch_within_cap_small_graph():
    g, labels, split, x, _ = setup_task()
    b = sample_batch(g, labels, split, 1, x, cap=1000, rng=np.random.default_rng(0))
    assert b.num_vertices <= min(1000, g.num_vertices)
    assert b.n_targets >= 1
    assert len(b.target_idx) == len(b.labels)


def test_batch_respects_cap():
    g, labels, split, x, _ = setup_task(members=40)
    b = sample_batch(g, labels, split, 2, x, cap=10, rng=np.random.default_rng(0))
    assert b.num_vertices <= 10 or b.n_targets == 1


def test_oversize_single_target_rule():
    # one long chain: the first target's 2-hop closure can exceed a tiny cap
    triples = [(f"http://c{i}", "http://p", f"http://c{i+1}") for i in range(6)]
    g = build_snapshot("t", triples)
    labels = np.zeros(g.num_vertices, dtype=np.int64)
    split = np.zeros(g.num_vertices, dtype=np.int8)  # everything train
    pv = PredicateVocabulary()
    pv.extend_from_graph(g)
    x = encode_features(g, pv)
    b = sample_batch(g, labels, split, 2, x, cap=1, rng=np.random.default_rng(1))
    assert b.n_targets == 1
    # its full closure is present even though it exceeds the cap
    t = int(b.vertices[0])
    expected = {t}
    for _ in range(2):
        nxt = set()
        for v in expected:
            lo, hi = int(g.indptr[v]), int(g.indptr[v + 1])
            nxt |= {int(g.edge_obj[e]) for e in range(lo, hi)}
        expected |= nxt
    assert set(int(v) for v in b.vertices) == expected


def test_batch_deterministic_with_seed():
    g, labels, split, x, _ = setup_task()
    b1 = sample_batch(g, labels, split, 1, x, cap=50, rng=np.random.default_rng(9))
    b2 = sample_batch(g, labels, split, 1, x, cap=50, rng=np.random.default_rng(9))
    assert (b1.vertices == b2.vertices).all()
    assert (b1.target_idx == b2.target_idx).all()
    assert (b1.features == b2.features).all()


def test_batch_empty_train_errors():
    g, labels, _, x, _ = setup_task()
    split = np.full(g.num_vertices, 2, dtype=np.int8)
    with pytest.raises(ValueError):
        sample_batch(g, labels, split, 1, x, rng=np.random.default_rng(0))


def test_target_closure_present():
    g, labels, split, x, _ = setup_task()
    b = sample_batch(g, labels, split, 2, x, cap=200, rng=np.random.default_rng(2))
    members = set(int(v) for v in b.vertices)
    for t_local in b.target_idx:
        v = int(b.vertices[t_local])
        lo, hi = int(g.indptr[v]), int(g.indptr[v + 1])
        for e in range(lo, hi):
            assert int(g.edge_obj[e]) in members


def test_expected_class_frequency_uniform():
    g, labels, split, x, _ = setup_task(n_classes=4, members=30)
    # skew the training pool so inverse weighting has something to correct:
    # the ring construction already yields equal classes, so drop most of one
    rng = np.random.default_rng(12)
    counts = np.zeros(4, dtype=np.int64)
    draws = 0
    while draws < 10_000:
        b = sample_batch(g, labels, split, 1, x, cap=1000, rng=rng, max_targets=500)
        for c in b.labels:
            counts[int(c)] += 1
        draws += len(b.labels)
    result = scipy_stats.chisquare(counts)
    assert result.pvalue > 0.001


def test_edge_as_vertex_requires_two_hops():
    g, labels, split, x, pv = setup_task()
    b = sample_batch(g, labels, split, 1, x, cap=50, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        edge_as_vertex_transform(b, pv)


def test_edge_as_vertex_shape_and_features():
    g, labels, split, x, pv = setup_task()
    b = sample_batch(g, labels, split, 2, x, cap=60, rng=np.random.default_rng(4))
    v, e = b.num_vertices, b.num_edges
    tb = edge_as_vertex_transform(b, pv)
    assert tb.num_vertices == v + e
    assert tb.num_edges == 2 * e
    assert tb.edge_as_vertex
    # each edge vertex row is a one-hot at its predicate's column
    for i in range(e):
        row = tb.features[v + i]
        assert row.sum() == 1.0
        col = int(np.argmax(row))
        assert pv.entries[col] == b.graph.terms.lexical(int(b.edge_pred[i]))
    assert (tb.target_idx == b.target_idx).all()
    assert (tb.labels == b.labels).all()


def test_edge_as_vertex_no_edges_identity():
    g = build_snapshot("t", [("http://a", "http://p", "http://b")])
    labels = np.zeros(2, dtype=np.int64)
    pv = PredicateVocabulary()
    pv.extend_from_graph(g)
    x = encode_features(g, pv)
    b = full_graph_batch(g, labels, x, 2)
    # restrict to the sink vertex only: no induced edges
    sink = g.position_of("http://b")
    from dataclasses import replace

    empty = replace(
        b,
        vertices=np.array([sink]),
        n_targets=1,
        target_idx=np.array([0]),
        labels=np.array([0]),
        edge_src=np.array([], dtype=np.int64),
        edge_dst=np.array([], dtype=np.int64),
        edge_pred=np.array([], dtype=np.int64),
        features=x[[sink]],
    )
    tb = edge_as_vertex_transform(empty, pv)
    assert tb.num_vertices == 1 and tb.num_edges == 0 and tb.edge_as_vertex
