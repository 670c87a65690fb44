"""Training groups, run files, and rank metrics.

Groups pair one judged-positive document with seeded random negatives.
Run files use the TREC interchange line format; MRR and nDCG follow the
usual definitions with doc-id-ascending tie breaks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParseError

DEFAULT_NEGATIVE_RATIO = 7


@dataclass(frozen=True)
class TrainingGroup:
    qid: str
    positive: str
    negatives: tuple[str, ...]

    @property
    def doc_ids(self) -> tuple[str, ...]:
        return (self.positive, *self.negatives)


@dataclass(frozen=True)
class RunRow:
    qid: str
    doc_id: str
    rank: int
    score: float


def build_groups(
    qrels: dict[str, dict[str, int]],
    candidates: dict[str, list[str]],
    neg_ratio: int = DEFAULT_NEGATIVE_RATIO,
    seed: int = 0,
) -> list[TrainingGroup]:
    """One group per judged-positive candidate, with seeded negatives.

    Negatives are drawn without replacement from the query's candidates,
    excluding every judged-positive document; short candidate lists yield
    smaller groups. Queries with no positive candidate are skipped with a
    warning.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    groups = []
    for qid in sorted(candidates):
        cands = candidates[qid]
        judged = qrels.get(qid, {})
        positives = [d for d in cands if judged.get(d, 0) >= 1]
        if not positives:
            warnings.warn(f"query {qid} has no judged-positive candidate; skipped")
            continue
        pool = [d for d in cands if judged.get(d, 0) < 1]
        for positive in positives:
            take = min(neg_ratio, len(pool))
            if take < len(pool):
                chosen = rng.choice(len(pool), size=take, replace=False)
                negatives = tuple(pool[i] for i in sorted(chosen.tolist()))
            else:
                negatives = tuple(pool)
            groups.append(TrainingGroup(qid=qid, positive=positive, negatives=negatives))
    return groups


def rank_candidates(scores: dict[str, float], qid: str = "") -> list[RunRow]:
    """Score-descending, doc-id-ascending rows with contiguous ranks from 1."""
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return [
        RunRow(qid=qid, doc_id=doc_id, rank=rank, score=score)
        for rank, (doc_id, score) in enumerate(ordered, start=1)
    ]


def write_run_file(path, rows_by_qid: dict[str, list[RunRow]], tag: str = "circlerank",
                   seed=0) -> None:
    """TREC run lines: qid Q0 docid rank score tag, score at 6 decimals."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# seed={seed}\n")
        for qid in sorted(rows_by_qid):
            for row in rows_by_qid[qid]:
                fh.write(f"{qid} Q0 {row.doc_id} {row.rank} {row.score:.6f} {tag}\n")


def read_run_file(path) -> dict[str, list[RunRow]]:
    runs: dict[str, list[RunRow]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ParseError(path, line_no, "expected: qid Q0 docid rank score tag")
            qid, _, doc_id, rank, score, _ = parts
            try:
                runs.setdefault(qid, []).append(
                    RunRow(qid=qid, doc_id=doc_id, rank=int(rank), score=float(score))
                )
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from exc
    for rows in runs.values():
        rows.sort(key=lambda r: r.rank)
    return runs


def mrr_at_k(runs: dict[str, list[RunRow]], qrels: dict[str, dict[str, int]], k: int) -> float:
    """Mean reciprocal rank of the first grade >= 1 document within top k."""
    if not runs:
        return 0.0
    total = 0.0
    for qid, rows in runs.items():
        judged = qrels.get(qid, {})
        for row in rows[:k]:
            if judged.get(row.doc_id, 0) >= 1:
                total += 1.0 / row.rank
                break
    return total / len(runs)


def _dcg(grades, k: int) -> float:
    return sum(
        (2.0**g - 1.0) / math.log2(rank + 1)
        for rank, g in enumerate(grades[:k], start=1)
    )


def ndcg_at_k(runs: dict[str, list[RunRow]], qrels: dict[str, dict[str, int]], k: int) -> float:
    """Gain 2^grade - 1 with log2 discount, normalized by the ideal ranking.

    Queries whose ideal DCG is zero (no judged-relevant documents) are left
    out of the mean.
    """
    values = []
    for qid, rows in runs.items():
        judged = qrels.get(qid, {})
        grades = [judged.get(row.doc_id, 0) for row in rows]
        ideal = sorted(judged.values(), reverse=True)
        ideal_dcg = _dcg(ideal, k)
        if ideal_dcg <= 0.0:
            continue
        values.append(_dcg(grades, k) / ideal_dcg)
    if not values:
        return 0.0
    return sum(values) / len(values)
