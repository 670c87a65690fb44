"""Command-line interface: one subcommand per pipeline stage.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io as artifact_io
from . import patterns
from .config import RunConfig, load_run_config
from .corpus import (
    build_vocab,
    load_candidates,
    load_corpus,
    load_qrels,
    load_queries,
    tokenize,
)
from .errors import CircleRankError, ConfigError
from .fixtures import FixtureConfig, synthetic_document_text, write_fixture
from .model import (
    grad_check,
    init_params,
    load_checkpoint,
    read_checkpoint_header,
    save_checkpoint,
)
from .partition import EDGE_LEVEL, NODE_LEVEL, partition, partition_stats
from .pipeline import combined_probability, pair_seed
from .ranking import build_groups, mrr_at_k, ndcg_at_k, rank_candidates, read_run_file, write_run_file
from .sampling import graph_stats, sample_adjacency
from .training import EncodedStore, TrainConfig, score_candidates, train


class UsageError(CircleRankError):
    pass


def _load_config(args) -> RunConfig:
    if args.config:
        return load_run_config(args.config)
    return RunConfig()


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _load_data(config: RunConfig, need=("corpus", "queries")):
    out = {}
    paths = {
        "corpus": config.corpus_path,
        "queries": config.queries_path,
        "qrels": config.qrels_path,
        "candidates": config.candidates_path,
    }
    loaders = {
        "corpus": lambda p: load_corpus(p, max_doc_len=config.max_doc_len),
        "queries": load_queries,
        "qrels": load_qrels,
        "candidates": load_candidates,
    }
    for key in need:
        path = paths[key]
        if not path:
            raise UsageError(f"config is missing {key}_path")
        if not os.path.exists(path):
            raise UsageError(f"{key} file not found: {path}")
        out[key] = loaders[key](path)
    return out


def cmd_build_graph(args) -> int:
    config = _load_config(args)
    data = _load_data(config)
    docs = {d.doc_id: d for d in data["corpus"]}
    queries = {q.doc_id: q for q in data["queries"]}
    if args.doc_id not in docs:
        raise UsageError(f"doc {args.doc_id!r} not in corpus")
    if args.query_id not in queries:
        raise UsageError(f"query {args.query_id!r} not in queries")
    doc, query = docs[args.doc_id], queries[args.query_id]
    vocab = build_vocab(data["corpus"])

    out = _ensure_out(args)
    mats = combined_probability(doc, query, vocab, config.pattern_config())
    result = patterns.solve_mu(mats["combined"], config.sparsity)
    mats["scaled"] = result.scaled
    for name, matrix in mats.items():
        artifact_io.write_matrix_csv(os.path.join(out, f"{name}.csv"), matrix, seed=args.seed)
        artifact_io.write_matrix_pgm(os.path.join(out, f"{name}.pgm"), matrix, seed=args.seed)
    seed = pair_seed(args.seed, query.doc_id, doc.doc_id)
    graph = sample_adjacency(result.scaled, seed)
    artifact_io.write_edge_list(os.path.join(out, "edges.txt"), graph)
    artifact_io.write_adjacency_pgm(os.path.join(out, "adjacency.pgm"), graph)
    stats = graph_stats(graph)
    artifact_io.write_csv_rows(
        os.path.join(out, "graph_stats.csv"),
        "seed,sparsity,num_edges,max_degree,mean_degree",
        [[stats["seed"], f"{stats['sparsity']:.6f}", stats["num_edges"],
          stats["max_degree"], f"{stats['mean_degree']:.6f}"]],
        seed=args.seed,
    )
    if result.budget_unreachable:
        print("warning: sparsity budget unreachable; graph saturates below target")
    print(f"wrote {len(mats)} matrices, edge list, and stats to {out}")
    return 0


def cmd_partition(args) -> int:
    config = _load_config(args)
    if args.k is not None and args.k < 1:
        raise UsageError("k must be at least 1")
    graph = artifact_io.read_edge_list(args.graph)
    scaled = artifact_io.read_matrix_csv(args.probs) if args.probs else None
    mode = args.mode or config.partition_mode
    k = args.k if args.k is not None else config.partition_k
    part = partition(graph, mode, k=k, cap=config.partition_cap, scaled=scaled)
    out = _ensure_out(args)
    artifact_io.write_partition_jsonl(os.path.join(out, "partition.jsonl"), part)
    nodes_per, covered_nodes, covered_edges = partition_stats(part, graph)
    rows = [
        [f"{config.sparsity}", mode, sg.rank, len(sg.members)]
        for sg in part.subgraphs
    ]
    artifact_io.write_csv_rows(
        os.path.join(out, "partition_stats.csv"),
        "sparsity,mode,rank,num_nodes", rows, seed=args.seed,
    )
    print(
        f"{len(part.subgraphs)} circles, {covered_nodes} covered nodes, "
        f"{covered_edges} covered edges -> {out}"
    )
    return 0


def cmd_sweep_sparsity(args) -> int:
    config = _load_config(args)
    levels = [float(v) for v in args.levels.split(",") if v]
    if not levels:
        raise UsageError("need at least one sparsity level")
    if args.doc_len < 2:
        raise UsageError("doc-len must be at least 2")
    text = synthetic_document_text(args.doc_len, ["alpha", "beta", "gamma"], seed=args.seed)
    doc = tokenize(text, max_doc_len=config.max_doc_len, doc_id="sweep-doc")
    query = tokenize("alpha beta gamma", doc_id="sweep-query")
    vocab = build_vocab([doc])
    mats = combined_probability(doc, query, vocab, config.pattern_config())

    rows = []
    for level in levels:
        result = patterns.solve_mu(mats["combined"], level)
        for mode in (NODE_LEVEL, EDGE_LEVEL):
            totals = np.zeros(config.partition_k, dtype=np.float64)
            for s in range(args.num_seeds):
                graph = sample_adjacency(result.scaled, args.seed + s)
                part = partition(
                    graph, mode, k=config.partition_k, cap=config.partition_cap,
                    scaled=result.scaled,
                )
                for sg in part.subgraphs:
                    totals[sg.rank - 1] += len(sg.members)
            totals /= args.num_seeds
            rows.extend(
                [f"{level}", mode, rank + 1, f"{totals[rank]:.2f}"]
                for rank in range(config.partition_k)
            )
    out = _ensure_out(args)
    path = os.path.join(out, "sparsity_sweep.csv")
    artifact_io.write_csv_rows(path, "sparsity,mode,rank,num_nodes", rows, seed=args.seed)
    print(f"wrote {len(rows)} rows ({len(levels)} levels x 2 modes) to {path}")
    return 0


def _build_store(config: RunConfig, data, seed: int) -> tuple[EncodedStore, dict, dict]:
    docs = {d.doc_id: d for d in data["corpus"]}
    queries = {q.doc_id: q for q in data["queries"]}
    vocab = build_vocab(data["corpus"])
    store = EncodedStore(docs, queries, vocab, config.pipeline_config(), base_seed=seed)
    return store, docs, queries


def cmd_train(args) -> int:
    config = _load_config(args)
    data = _load_data(config, need=("corpus", "queries", "qrels", "candidates"))
    store, _, _ = _build_store(config, data, args.seed)
    groups = build_groups(
        data["qrels"], data["candidates"], neg_ratio=config.neg_ratio, seed=args.seed
    )
    if not groups:
        raise UsageError("no training groups could be built")
    params = init_params(config.model_config())
    train_config = TrainConfig(
        learning_rate=config.learning_rate,
        epochs=config.epochs,
        batch_groups=config.batch_groups,
        weight_decay=config.weight_decay,
        shuffle_seed=args.seed,
    )
    history = train(groups, store, params, train_config)
    out = _ensure_out(args)
    checkpoint = os.path.join(out, "model.bin")
    save_checkpoint(checkpoint, params)
    artifact_io.write_csv_rows(
        os.path.join(out, "loss.csv"), "step,loss",
        [[step, f"{loss:.6f}"] for step, loss in history], seed=args.seed,
    )
    print(f"trained {len(history)} steps; checkpoint -> {checkpoint}")
    return 0


def cmd_rerank(args) -> int:
    config = _load_config(args)
    data = _load_data(config, need=("corpus", "queries", "candidates"))
    store, _, queries = _build_store(config, data, args.seed)
    params = load_checkpoint(args.checkpoint) if args.checkpoint else init_params(config.model_config())
    runs = {}
    for qid in sorted(data["candidates"]):
        if qid not in queries:
            raise UsageError(f"candidates reference unknown query {qid!r}")
        scores = score_candidates(qid, data["candidates"][qid], store, params)
        runs[qid] = rank_candidates(scores, qid=qid)
    out = _ensure_out(args)
    path = os.path.join(out, "run.txt")
    write_run_file(path, runs, tag=args.tag, seed=args.seed)
    print(f"reranked {len(runs)} queries -> {path}")
    return 0


def cmd_eval(args) -> int:
    runs = read_run_file(args.run)
    qrels = load_qrels(args.qrels)
    ks = [int(v) for v in args.k.split(",") if v]
    if not ks:
        raise UsageError("need at least one cutoff k")
    rows = []
    for k in ks:
        rows.append(["mrr", k, f"{mrr_at_k(runs, qrels, k):.6f}"])
        rows.append(["ndcg", k, f"{ndcg_at_k(runs, qrels, k):.6f}"])
    out = _ensure_out(args)
    path = os.path.join(out, "metrics.csv")
    artifact_io.write_csv_rows(path, "metric,k,value", rows, seed=args.seed)
    for metric, k, value in rows:
        print(f"{metric}@{k} = {value}")
    return 0


def cmd_grad_check(args) -> int:
    out = _ensure_out(args)
    rows = []
    worst = 0.0
    for offset in range(args.num_seeds):
        report = grad_check(seed=args.seed + offset)
        rows.append(
            [report["seed"], f"{report['max_rel_error']:.3e}", report["worst_tensor"],
             "pass" if report["passed"] else "FAIL"]
        )
        worst = max(worst, report["max_rel_error"])
        print(
            f"seed {report['seed']}: max relative error {report['max_rel_error']:.3e} "
            f"({report['worst_tensor']}) -> {'pass' if report['passed'] else 'FAIL'}"
        )
    artifact_io.write_csv_rows(
        os.path.join(out, "grad_check.csv"), "seed,max_rel_error,worst_tensor,status",
        rows, seed=args.seed,
    )
    return 0 if worst < 1e-4 else 1


def cmd_gen_fixtures(args) -> int:
    config = _load_config(args)
    fixture = FixtureConfig(
        num_queries=config.fixture_queries, num_candidates=config.fixture_candidates
    )
    paths = write_fixture(_ensure_out(args), fixture, seed=args.seed)
    print("wrote " + ", ".join(sorted(paths.values())))
    return 0


def cmd_describe(args) -> int:
    config = read_checkpoint_header(args.checkpoint)
    print(f"checkpoint: {args.checkpoint}")
    for name in (
        "embed_dim", "num_heads", "num_blocks", "window_size",
        "max_subgraphs", "vocab_hash_size", "init_seed",
    ):
        print(f"  {name} = {getattr(config, name)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circlerank",
        description="Probabilistic sparse-attention graphs, friend-circle "
        "partitioning, and two-stage transmission for document ranking.",
    )
    parser.add_argument("--config", default="", help="key=value run config file")
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument("--out", default="out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="pattern matrices, scaled matrix, sampled edges")
    p.add_argument("--doc-id", required=True)
    p.add_argument("--query-id", required=True)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("partition", help="friend-circle partition of an edge list")
    p.add_argument("--graph", required=True, help="edge list file")
    p.add_argument("--probs", default="", help="scaled probability CSV for cap ties")
    p.add_argument("--mode", choices=[NODE_LEVEL, EDGE_LEVEL], default="")
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("sweep-sparsity", help="circle sizes across sparsity levels")
    p.add_argument("--levels", default="0.99,0.97,0.95,0.93")
    p.add_argument("--doc-len", type=int, default=2000)
    p.add_argument("--num-seeds", type=int, default=1)
    p.set_defaults(func=cmd_sweep_sparsity)

    p = sub.add_parser("train", help="train the transmission model")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rerank", help="score candidates and write a run file")
    p.add_argument("--checkpoint", default="", help="model checkpoint (default: fresh init)")
    p.add_argument("--tag", default="circlerank")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="MRR/nDCG of a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--k", default="10,100")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grad-check", help="analytic vs finite-difference gradients")
    p.add_argument("--num-seeds", type=int, default=3)
    p.set_defaults(func=cmd_grad_check)

    p = sub.add_parser("gen-fixtures", help="seeded synthetic corpus with planted relevance")
    p.set_defaults(func=cmd_gen_fixtures)

    p = sub.add_parser("describe", help="print a checkpoint header")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_describe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CircleRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
