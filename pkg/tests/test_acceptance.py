"""Acceptance suite: one test per release criterion, in order.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
pass lines. The learning-signal criteria train real toy models and take
around ten minutes combined; everything else finishes in well under two.
"""

import math
import time

import numpy as np
import pytest

from circlerank.corpus import build_vocab, tokenize
from circlerank.fixtures import FixtureConfig, generate_fixture, synthetic_document_text
from circlerank.model import ModelConfig, grad_check, init_params, listwise_loss
from circlerank.partition import EDGE_LEVEL, NODE_LEVEL, partition
from circlerank.patterns import PatternConfig, normalize_f, solve_mu, static_distance_matrix
from circlerank.pipeline import PipelineConfig, combined_probability
from circlerank.ranking import build_groups, mrr_at_k, ndcg_at_k, rank_candidates
from circlerank.sampling import graph_sparsity, sample_adjacency
from circlerank.training import EncodedStore, TrainConfig, score_candidates, train

from test_ranking import oracle_mrr, oracle_ndcg


def report(criterion, detail):
    print(f"\n[acceptance] criterion {criterion}: PASS - {detail}")


# -- 1 ----------------------------------------------------------------------


def test_criterion_1_formula_exactness():
    start = time.time()
    m = static_distance_matrix(101, 50.0)
    assert abs(m[7, 7] - 1.0) <= 1e-12
    assert abs(m[0, 50] - 0.25) <= 1e-12
    assert abs(m[0, 100] - 1.0 / 9.0) <= 1e-12
    nf = normalize_f(np.outer([1.0, 4.0], [1.0, 4.0]))
    expected = np.array([[0.0, 1.0 / 3.0], [1.0 / 3.0, 1.0]])
    assert np.abs(nf - expected).max() <= 1e-12
    elapsed = time.time() - start
    assert elapsed < 1.0
    report(1, f"distance decay and normalization exact to 1e-12 ({elapsed:.2f}s)")


# -- 2 ----------------------------------------------------------------------


def test_criterion_2_sparsity_calibration():
    target = 0.93
    length = 256
    text = synthetic_document_text(length, ["alpha", "beta", "gamma"], seed=11)
    doc = tokenize(text, doc_id="calib-doc")
    query = tokenize("alpha beta gamma", doc_id="calib-q")
    vocab = build_vocab([doc])
    mats = combined_probability(doc, query, vocab, PatternConfig(sparsity=target))
    result = solve_mu(mats["combined"], target)
    assert not result.budget_unreachable

    num_pairs = length * (length - 1) // 2
    iu = np.triu_indices(length, k=1)
    probs = result.scaled[iu]
    # Binomial scale of one sampled graph's sparsity, from the actual cells.
    sigma_draw = math.sqrt(float((probs * (1 - probs)).sum())) / num_pairs
    expected_sparsity = 1.0 - float(probs.sum()) / num_pairs

    seeds = 200
    mean_sparsity = float(
        np.mean([
            graph_sparsity(sample_adjacency(result.scaled, seed=s)) for s in range(seeds)
        ])
    )
    assert abs(mean_sparsity - target) <= 3 * sigma_draw
    # And the sharper check against the exact expectation implied by the
    # scaled matrix, at the tolerance of the 200-seed mean estimator.
    assert abs(mean_sparsity - expected_sparsity) <= 3 * sigma_draw / math.sqrt(seeds)
    report(
        2,
        f"mean sampled sparsity {mean_sparsity:.5f} vs target {target} "
        f"(3 sigma = {3 * sigma_draw:.5f}, {seeds} seeds)",
    )


# -- 3 ----------------------------------------------------------------------


def test_criterion_3_partition_invariants():
    start = time.time()
    rng = np.random.default_rng(42)
    checked = 0
    for trial in range(1000):
        n = int(rng.integers(16, 257))
        density = float(rng.uniform(0.01, 0.25))
        raw = rng.uniform(0, 1, size=(n, n)) * density
        scaled = (raw + raw.T) / 2
        np.fill_diagonal(scaled, 0.0)
        graph = sample_adjacency(scaled, seed=trial)

        node_part = partition(graph, NODE_LEVEL, k=16, cap=128, scaled=scaled)
        edge_part = partition(graph, EDGE_LEVEL, k=16, cap=128, scaled=scaled)

        seen_nodes = set()
        for sg in node_part.subgraphs:
            members = set(sg.members)
            assert not seen_nodes & members
            seen_nodes |= members

        consumed_so_far = set()
        for sg in edge_part.subgraphs:
            members = set(sg.members)
            induced = {
                (i, j) for (i, j) in graph.edges if i in members and j in members
            }
            fresh = induced - consumed_so_far
            assert fresh, "a circle must consume at least one new edge"
            consumed_so_far |= induced

        for part in (node_part, edge_part):
            for sg in part.subgraphs:
                for member in sg.members[1:]:
                    edge = (min(sg.central_node, member), max(sg.central_node, member))
                    assert edge in graph.edges

        assert partition(graph, NODE_LEVEL, k=16, cap=128, scaled=scaled) == node_part
        assert partition(graph, EDGE_LEVEL, k=16, cap=128, scaled=scaled) == edge_part
        checked += 1
    elapsed = time.time() - start
    assert elapsed < 60.0
    report(3, f"{checked} random graphs: disjointness, edge provenance, determinism ({elapsed:.0f}s)")


# -- 4 ----------------------------------------------------------------------


def test_criterion_4_sparsity_vs_circle_size_trend():
    start = time.time()
    length = 2000
    levels = [0.99, 0.97, 0.95, 0.93]
    num_seeds = 20
    k, cap = 16, 128

    text = synthetic_document_text(length, ["alpha", "beta", "gamma"], seed=7)
    doc = tokenize(text, doc_id="trend-doc")
    query = tokenize("alpha beta gamma", doc_id="trend-q")
    vocab = build_vocab([doc])
    mats = combined_probability(doc, query, vocab, PatternConfig())

    totals = {NODE_LEVEL: [], EDGE_LEVEL: []}
    for level in levels:
        result = solve_mu(mats["combined"], level)
        assert not result.budget_unreachable
        per_mode = {NODE_LEVEL: [], EDGE_LEVEL: []}
        for seed in range(num_seeds):
            graph = sample_adjacency(result.scaled, seed=seed)
            for mode in (NODE_LEVEL, EDGE_LEVEL):
                part = partition(graph, mode, k=k, cap=cap, scaled=result.scaled)
                per_mode[mode].append(sum(len(sg.members) for sg in part.subgraphs))
        for mode in (NODE_LEVEL, EDGE_LEVEL):
            totals[mode].append(float(np.mean(per_mode[mode])))

    # Sparsity decreases along `levels`, so node totals must not decrease.
    for mode in (NODE_LEVEL, EDGE_LEVEL):
        series = totals[mode]
        assert all(a <= b + 1e-9 for a, b in zip(series, series[1:])), (mode, series)
    # At 0.93 the edge-level top-16 saturates the member cap.
    assert totals[EDGE_LEVEL][-1] == pytest.approx(k * cap)
    elapsed = time.time() - start
    assert elapsed < 300.0
    report(
        4,
        f"node totals (sparsity 0.99 -> 0.93): node_level={totals[NODE_LEVEL]}, "
        f"edge_level={totals[EDGE_LEVEL]} ({elapsed:.0f}s)",
    )


# -- 5 ----------------------------------------------------------------------


def test_criterion_5_gradient_correctness():
    start = time.time()
    worst = []
    for seed in (0, 1, 2):
        rep = grad_check(seed=seed)
        assert rep["max_rel_error"] < 1e-4, rep
        worst.append(rep["max_rel_error"])
    elapsed = time.time() - start
    assert elapsed < 120.0
    report(5, f"max relative errors {['%.2e' % w for w in worst]} over 3 seeds ({elapsed:.0f}s)")


# -- 6 ----------------------------------------------------------------------


def test_criterion_6_uniform_loss_value():
    loss = listwise_loss(np.full(8, 3.7), positive_index=2)
    assert abs(loss - math.log(8)) <= 1e-12
    report(6, f"uniform 8-way group loss = ln 8 (|err| = {abs(loss - math.log(8)):.1e})")


# -- 7 and 9: shared toy-training runs ---------------------------------------

FULL_LAMBDAS = (0.25, 0.25, 0.25, 0.25)
STATIC_LAMBDAS = (0.5, 0.5, 0.0, 0.0)
RANDOM_MRR10_20DOCS = sum(1.0 / r for r in range(1, 11)) / 20.0
SEEDS = (0, 1, 2)


@pytest.fixture(scope="module")
def fixture_corpus():
    corpus, queries, qrels_lines, cand_pairs = generate_fixture(FixtureConfig(), seed=0)
    docs = {r["doc_id"]: tokenize(r["text"], doc_id=r["doc_id"]) for r in corpus}
    qs = {qid: tokenize(text, doc_id=qid) for qid, text in queries}
    qrels = {}
    for line in qrels_lines:
        qid, _, doc_id, grade = line.split()
        qrels.setdefault(qid, {})[doc_id] = int(grade)
    candidates = {}
    for qid, doc_id in cand_pairs:
        candidates.setdefault(qid, []).append(doc_id)
    vocab = build_vocab(list(docs.values()))
    return docs, qs, qrels, candidates, vocab


@pytest.fixture(scope="module")
def trained_runs(fixture_corpus):
    """MRR@10 before/after one toy epoch, per seed, full and static-only."""
    docs, qs, qrels, candidates, vocab = fixture_corpus
    results = {}
    for seed in SEEDS:
        for tag, lambdas in (("full", FULL_LAMBDAS), ("static", STATIC_LAMBDAS)):
            config = PipelineConfig(
                pattern=PatternConfig(lambdas=lambdas),
                model=ModelConfig(init_seed=seed),
            )
            store = EncodedStore(docs, qs, vocab, config, base_seed=seed)
            params = init_params(config.model)
            groups = build_groups(qrels, candidates, neg_ratio=7, seed=seed)

            def mrr(p):
                runs = {
                    qid: rank_candidates(score_candidates(qid, candidates[qid], store, p))
                    for qid in sorted(candidates)
                }
                return mrr_at_k(runs, qrels, 10)

            untrained = mrr(params)
            train(groups, store, params,
                  TrainConfig(learning_rate=1e-3, shuffle_seed=seed))
            results[(seed, tag)] = {"untrained": untrained, "trained": mrr(params)}
    return results


def test_criterion_7_learning_signal(trained_runs):
    lines = []
    for seed in SEEDS:
        run = trained_runs[(seed, "full")]
        assert run["trained"] >= 0.5, (seed, run)
        assert run["trained"] > run["untrained"], (seed, run)
        assert run["trained"] > RANDOM_MRR10_20DOCS, (seed, run)
        lines.append(f"seed {seed}: {run['untrained']:.3f} -> {run['trained']:.3f}")
    report(7, "; ".join(lines) + f" (random baseline {RANDOM_MRR10_20DOCS:.3f})")


# -- 8 ----------------------------------------------------------------------


def test_criterion_8_metric_oracles():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        docs = [f"d{i}" for i in range(5)]
        scores = {d: float(rng.normal()) for d in docs}
        qrels = {"q": {d: int(rng.integers(0, 4)) for d in docs}}
        runs = {"q": rank_candidates(scores)}
        for k in (1, 2, 3, 5, 10):
            mrr_err = abs(mrr_at_k(runs, qrels, k) - oracle_mrr(runs, qrels, k))
            ndcg_err = abs(ndcg_at_k(runs, qrels, k) - oracle_ndcg(runs, qrels, k))
            assert mrr_err <= 1e-12 and ndcg_err <= 1e-12
            worst = max(worst, mrr_err, ndcg_err)
    report(8, f"100 randomized 5-doc fixtures, worst deviation {worst:.1e}")


# -- 9 ----------------------------------------------------------------------


def test_criterion_9_ablation_direction(trained_runs):
    lines = []
    for seed in SEEDS:
        full = trained_runs[(seed, "full")]["trained"]
        static = trained_runs[(seed, "static")]["trained"]
        assert static <= full + 1e-12, (seed, static, full)
        lines.append(f"seed {seed}: static {static:.3f} <= full {full:.3f}")
    report(9, "; ".join(lines))
