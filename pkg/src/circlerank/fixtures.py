"""Seeded synthetic corpus with planted lexical relevance.

Each query gets one positive document that embeds every query term several
times at spread-out positions, plus negatives assembled from the same
filler vocabulary (optionally salted with other queries' terms as
distractors). Deterministic for a given seed, so evaluation numbers are
reproducible byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class FixtureConfig:
    num_queries: int = 100
    num_candidates: int = 20
    query_len: int = 3
    doc_len_min: int = 200
    doc_len_max: int = 280
    occurrences_per_term: int = 8
    filler_vocab: int = 400
    query_vocab: int = 150
    distractor_terms: int = 2


def _word(rng: np.random.Generator, length: int) -> str:
    return "".join(LETTERS[i] for i in rng.integers(0, len(LETTERS), size=length))


def _vocab(rng: np.random.Generator, count: int, length: int) -> list[str]:
    words: list[str] = []
    seen = set()
    while len(words) < count:
        w = _word(rng, length)
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def generate_fixture(config: FixtureConfig | None = None, seed: int = 0):
    """Returns (corpus_records, query_records, qrels_lines, candidate_pairs).

    corpus_records are {"doc_id", "text"} dicts; query_records are
    (qid, text) pairs; qrels lines follow `qid 0 docid grade`; candidate
    pairs are (qid, docid) in ranked-candidate order.
    """
    config = config or FixtureConfig()
    rng = np.random.Generator(np.random.Philox(key=seed))
    filler = _vocab(rng, config.filler_vocab, 6)
    query_pool = _vocab(rng, config.query_vocab, 7)

    corpus = []
    queries = []
    qrels = []
    candidates = []
    for qi in range(config.num_queries):
        qid = f"Q{qi:03d}"
        term_idx = rng.choice(len(query_pool), size=config.query_len, replace=False)
        terms = [query_pool[i] for i in term_idx]
        queries.append((qid, " ".join(terms)))

        for ci in range(config.num_candidates):
            doc_id = f"{qid}-D{ci:02d}"
            length = int(rng.integers(config.doc_len_min, config.doc_len_max + 1))
            words = [filler[i] for i in rng.integers(0, len(filler), size=length)]
            if ci == 0:
                # The positive: every query term planted at spread positions.
                for term in terms:
                    slots = rng.choice(length, size=config.occurrences_per_term, replace=False)
                    for s in slots:
                        words[int(s)] = term
                qrels.append(f"{qid} 0 {doc_id} 1")
            elif config.distractor_terms > 0:
                # Negatives carry random other-query terms so term presence
                # alone is not enough; the terms must match *this* query.
                other = [t for t in query_pool if t not in terms]
                picks = rng.choice(len(other), size=config.distractor_terms, replace=False)
                for pi in picks:
                    slot = int(rng.integers(0, length))
                    words[slot] = other[int(pi)]
            corpus.append({"doc_id": doc_id, "text": " ".join(words)})
            candidates.append((qid, doc_id))
    return corpus, queries, qrels, candidates


def write_fixture(out_dir, config: FixtureConfig | None = None, seed: int = 0):
    """Write corpus.jsonl, queries.tsv, qrels.txt, candidates.tsv."""
    import os

    corpus, queries, qrels, candidates = generate_fixture(config, seed)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "corpus": os.path.join(out_dir, "corpus.jsonl"),
        "queries": os.path.join(out_dir, "queries.tsv"),
        "qrels": os.path.join(out_dir, "qrels.txt"),
        "candidates": os.path.join(out_dir, "candidates.tsv"),
    }
    with open(paths["corpus"], "w", encoding="utf-8") as fh:
        for record in corpus:
            fh.write(json.dumps(record) + "\n")
    with open(paths["queries"], "w", encoding="utf-8") as fh:
        for qid, text in queries:
            fh.write(f"{qid}\t{text}\n")
    with open(paths["qrels"], "w", encoding="utf-8") as fh:
        fh.write(f"# seed={seed}\n")
        for line in qrels:
            fh.write(line + "\n")
    with open(paths["candidates"], "w", encoding="utf-8") as fh:
        fh.write(f"# seed={seed}\n")
        for qid, doc_id in candidates:
            fh.write(f"{qid}\t{doc_id}\n")
    return paths


def synthetic_document_text(length: int, query_terms: list[str], seed: int = 0,
                            occurrences_per_term: int = 12) -> str:
    """A single long document with the query terms planted, for graph demos."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    filler = _vocab(rng, 200, 6)
    words = [filler[i] for i in rng.integers(0, len(filler), size=length)]
    for term in query_terms:
        slots = rng.choice(length, size=min(occurrences_per_term, length), replace=False)
        for s in slots:
            words[int(s)] = term
    return " ".join(words)
