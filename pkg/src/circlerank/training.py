"""Listwise training of the transmission model over encoded groups."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteLoss
from .model import (
    ModelParams,
    backward_circles,
    forward_circles,
    listwise_loss,
    listwise_loss_grad,
)
from .pipeline import EncodedDocument, PipelineConfig, encode_pair
from .ranking import TrainingGroup


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 1
    batch_groups: int = 1
    weight_decay: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    shuffle_seed: int = 0


class AdamW:
    """Decoupled weight decay variant of Adam over a named parameter tree."""

    def __init__(self, params: ModelParams, config: TrainConfig):
        self.config = config
        self.m = params.zeros_like_tree()
        self.v = params.zeros_like_tree()
        self.t = 0

    def step(self, params: ModelParams, grads: dict[str, np.ndarray]) -> None:
        cfg = self.config
        self.t += 1
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        for name, tensor in params.tree().items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = (m / bias1) / (np.sqrt(v / bias2) + cfg.adam_eps)
            tensor -= cfg.learning_rate * (update + cfg.weight_decay * tensor)


class EncodedStore:
    """Caches the graph pipeline per (query, doc) pair for reuse across
    training and evaluation passes (the encoding depends on the data and
    seeds, never on the model parameters)."""

    def __init__(self, corpus_by_id, queries_by_id, vocab, config: PipelineConfig,
                 base_seed: int = 0):
        self.corpus_by_id = corpus_by_id
        self.queries_by_id = queries_by_id
        self.vocab = vocab
        self.config = config
        self.base_seed = base_seed
        self._cache: dict[tuple[str, str], EncodedDocument] = {}

    def get(self, qid: str, doc_id: str) -> EncodedDocument:
        key = (qid, doc_id)
        if key not in self._cache:
            self._cache[key] = encode_pair(
                self.corpus_by_id[doc_id],
                self.queries_by_id[qid],
                self.vocab,
                self.config,
                base_seed=self.base_seed,
            )
        return self._cache[key]


def group_loss_and_grads(
    group: TrainingGroup,
    store: EncodedStore,
    params: ModelParams,
    grads: dict[str, np.ndarray] | None = None,
):
    """Listwise loss for one group; accumulates gradients when asked."""
    encoded = [store.get(group.qid, doc_id) for doc_id in group.doc_ids]
    caches = []
    scores = np.empty(len(encoded))
    for i, enc in enumerate(encoded):
        _, score, cache = forward_circles(enc.circles, params)
        scores[i] = score
        caches.append(cache)
    loss = listwise_loss(scores, positive_index=0)
    if grads is not None:
        dscores = listwise_loss_grad(scores, positive_index=0)
        for ds, cache in zip(dscores, caches):
            backward_circles(float(ds), cache, params, grads)
    return loss, scores


def train(
    groups: list[TrainingGroup],
    store: EncodedStore,
    params: ModelParams,
    config: TrainConfig | None = None,
) -> list[tuple[int, float]]:
    """Minimize the mean listwise loss; returns the (step, loss) history.

    Group order is shuffled once per epoch under the shuffle seed. Aborts
    with NonFiniteLoss diagnostics if a loss degenerates.
    """
    config = config or TrainConfig()
    optimizer = AdamW(params, config)
    rng = np.random.Generator(np.random.Philox(key=config.shuffle_seed))
    history: list[tuple[int, float]] = []
    step = 0
    for _ in range(config.epochs):
        order = rng.permutation(len(groups))
        for start in range(0, len(order), config.batch_groups):
            batch = [groups[i] for i in order[start : start + config.batch_groups]]
            grads = params.zeros_like_tree()
            total = 0.0
            for group in batch:
                loss, scores = group_loss_and_grads(group, store, params, grads)
                if not math.isfinite(loss):
                    raise NonFiniteLoss(
                        f"non-finite loss at step {step} for query {group.qid}: "
                        f"scores={scores.tolist()}"
                    )
                total += loss
            if len(batch) > 1:
                for g in grads.values():
                    g /= len(batch)
            optimizer.step(params, grads)
            step += 1
            history.append((step, total / len(batch)))
    return history


def score_candidates(
    qid: str,
    doc_ids: list[str],
    store: EncodedStore,
    params: ModelParams,
) -> dict[str, float]:
    """Full-pipeline score per candidate document."""
    out = {}
    for doc_id in doc_ids:
        enc = store.get(qid, doc_id)
        _, score, _ = forward_circles(enc.circles, params)
        out[doc_id] = score
    return out
