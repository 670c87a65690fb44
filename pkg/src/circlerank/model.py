"""Two-stage information transmission over circles.

Each document becomes a set of circles: the partitioned friend-circle
subgraphs plus fixed-size passages with a synthetic CLS head node. Every
block runs a full-attention transformer encoder inside each circle, then a
second encoder across the circles' central vectors; central vectors are
fused back in between blocks. Max pooling over the final central vectors
gives the document embedding, and a linear layer gives the ranking score.

All math is float64 and every gradient is computed analytically; the
finite-difference check in ``grad_check`` is the independent referee.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .corpus import TokenizedDocument
from .errors import DimensionMismatch, EmptyCircle
from .partition import Partition

SUBGRAPH = "subgraph"
PASSAGE = "passage"

# Query tokens sit in their own positional band so their encodings can never
# collide with document positions (documents are capped well below this).
QUERY_POSITION_BASE = 65536

# Embedding-table row reserved for the synthetic CLS head of a passage;
# hashed tokens occupy rows 1 .. vocab_hash_size - 1.
CLS_ROW = 0

LAYER_NORM_EPS = 1e-6

CHECKPOINT_MAGIC = b"CRNK"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 32
    num_heads: int = 2
    num_blocks: int = 2
    window_size: int = 128
    max_subgraphs: int = 16
    vocab_hash_size: int = 65536
    init_seed: int = 0

    def __post_init__(self):
        if self.embed_dim % self.num_heads != 0:
            raise ValueError("embed_dim must be divisible by num_heads")
        if self.embed_dim % 2 != 0:
            raise ValueError("embed_dim must be even for sinusoidal encodings")
        if self.num_blocks < 1:
            raise ValueError("need at least one block")
        if self.window_size < 2:
            raise ValueError("window_size must be at least 2")
        if self.vocab_hash_size < 2:
            raise ValueError("vocab_hash_size must leave room for the CLS row")

    @property
    def ff_dim(self) -> int:
        # Feed-forward hidden width is tied to the embedding width.
        return 2 * self.embed_dim


@dataclass(frozen=True)
class CircleInput:
    """Tokens of one circle: embedding rows plus absolute positions.

    Row 0 is the central node (subgraph center, or the CLS head of a
    passage). Query rows ride along in every circle.
    """

    kind: str
    member_rows: np.ndarray
    member_positions: np.ndarray
    query_rows: np.ndarray
    query_positions: np.ndarray

    def __post_init__(self):
        if len(self.member_rows) == 0:
            raise EmptyCircle("a circle needs at least one member token")
        if len(self.member_rows) != len(self.member_positions):
            raise ValueError("member rows and positions must align")
        if len(self.query_rows) != len(self.query_positions):
            raise ValueError("query rows and positions must align")

    @property
    def num_members(self) -> int:
        return len(self.member_rows)


def token_rows(token_ids: np.ndarray, vocab_hash_size: int) -> np.ndarray:
    """Embedding-table rows for hashed token ids (row 0 is reserved for CLS)."""
    return 1 + np.asarray(token_ids, dtype=np.int64) % (vocab_hash_size - 1)


def sinusoidal_encoding(positions: np.ndarray, embed_dim: int) -> np.ndarray:
    """Classic sin/cos positional code, evaluated at arbitrary positions."""
    positions = np.asarray(positions, dtype=np.float64)
    half = embed_dim // 2
    frequencies = np.exp(np.arange(half, dtype=np.float64) * (-math.log(10000.0) / half))
    angles = positions[:, None] * frequencies[None, :]
    out = np.empty((len(positions), embed_dim), dtype=np.float64)
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass
class EncoderLayerParams:
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    bq: np.ndarray
    bk: np.ndarray
    bv: np.ndarray
    bo: np.ndarray
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    ln1_gamma: np.ndarray
    ln1_beta: np.ndarray
    ln2_gamma: np.ndarray
    ln2_beta: np.ndarray

    FIELDS = (
        "wq", "wk", "wv", "wo", "bq", "bk", "bv", "bo",
        "w1", "b1", "w2", "b2",
        "ln1_gamma", "ln1_beta", "ln2_gamma", "ln2_beta",
    )


def _init_layer(rng: np.random.Generator, embed_dim: int, ff_dim: int) -> EncoderLayerParams:
    def mat(rows, cols):
        return rng.normal(0.0, 1.0 / math.sqrt(rows), size=(rows, cols))

    e, f = embed_dim, ff_dim
    return EncoderLayerParams(
        wq=mat(e, e), wk=mat(e, e), wv=mat(e, e), wo=mat(e, e),
        bq=np.zeros(e), bk=np.zeros(e), bv=np.zeros(e), bo=np.zeros(e),
        w1=mat(e, f), b1=np.zeros(f), w2=mat(f, e), b2=np.zeros(e),
        ln1_gamma=np.ones(e), ln1_beta=np.zeros(e),
        ln2_gamma=np.ones(e), ln2_beta=np.zeros(e),
    )


@dataclass
class ModelParams:
    config: ModelConfig
    token_embedding: np.ndarray
    intra: list[EncoderLayerParams]
    inter: list[EncoderLayerParams]
    fusion: np.ndarray
    score_vec: np.ndarray

    def tree(self) -> dict[str, np.ndarray]:
        """Flat name -> array view of every trainable tensor."""
        out = {"token_embedding": self.token_embedding}
        for stage, layers in (("intra", self.intra), ("inter", self.inter)):
            for b, layer in enumerate(layers):
                for name in EncoderLayerParams.FIELDS:
                    out[f"{stage}.{b}.{name}"] = getattr(layer, name)
        out["fusion"] = self.fusion
        out["score_vec"] = self.score_vec
        return out

    def zeros_like_tree(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.tree().items()}


def init_params(config: ModelConfig) -> ModelParams:
    """Deterministic random initialization from the config seed."""
    rng = np.random.Generator(np.random.Philox(key=config.init_seed))
    e = config.embed_dim
    token_embedding = rng.normal(0.0, 0.3, size=(config.vocab_hash_size, e))
    intra = [_init_layer(rng, e, config.ff_dim) for _ in range(config.num_blocks)]
    inter = [_init_layer(rng, e, config.ff_dim) for _ in range(config.num_blocks)]
    fusion = rng.normal(0.0, 1.0 / math.sqrt(2 * e), size=(2 * e, e))
    score_vec = rng.normal(0.0, 1.0 / math.sqrt(e), size=e)
    return ModelParams(
        config=config,
        token_embedding=token_embedding,
        intra=intra,
        inter=inter,
        fusion=fusion,
        score_vec=score_vec,
    )


# ---------------------------------------------------------------------------
# Circle construction
# ---------------------------------------------------------------------------


def build_circles(
    doc: TokenizedDocument,
    query: TokenizedDocument,
    part: Partition,
    config: ModelConfig,
) -> list[CircleInput]:
    """Subgraph circles in rank order, then passage circles in document order."""
    doc_rows = token_rows(doc.tokens, config.vocab_hash_size)
    query_rows = token_rows(query.tokens, config.vocab_hash_size)
    query_positions = QUERY_POSITION_BASE + np.arange(query.length, dtype=np.int64)
    if doc.length > QUERY_POSITION_BASE:
        raise ValueError("document runs into the query positional band")

    circles = []
    for sg in part.subgraphs[: config.max_subgraphs]:
        members = np.array(sg.members, dtype=np.int64)
        circles.append(
            CircleInput(
                kind=SUBGRAPH,
                member_rows=doc_rows[members],
                member_positions=members.copy(),
                query_rows=query_rows,
                query_positions=query_positions,
            )
        )
    for start in range(0, doc.length, config.window_size):
        stop = min(start + config.window_size, doc.length)
        rows = np.concatenate(([CLS_ROW], doc_rows[start:stop]))
        positions = np.concatenate(
            ([start], np.arange(start, stop, dtype=np.int64))
        )
        circles.append(
            CircleInput(
                kind=PASSAGE,
                member_rows=rows,
                member_positions=positions,
                query_rows=query_rows,
                query_positions=query_positions,
            )
        )
    return circles


def embed(circle: CircleInput, params: ModelParams) -> np.ndarray:
    """Token embedding plus positional code for members then query tokens."""
    rows = np.concatenate((circle.member_rows, circle.query_rows)).astype(np.int64)
    positions = np.concatenate((circle.member_positions, circle.query_positions))
    return params.token_embedding[rows] + sinusoidal_encoding(
        positions, params.config.embed_dim
    )


# ---------------------------------------------------------------------------
# Encoder layer forward/backward
# ---------------------------------------------------------------------------


def _layer_norm(x, gamma, beta):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    xhat = (x - mu) * inv
    return gamma * xhat + beta, (xhat, inv, gamma)


def _layer_norm_backward(dy, cache):
    xhat, inv, gamma = cache
    dgamma = (dy * xhat).sum(axis=0)
    dbeta = dy.sum(axis=0)
    dxhat = dy * gamma
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dgamma, dbeta


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


_GELU_C = math.sqrt(2.0 / math.pi)


def _gelu(x):
    # tanh form: smooth, so finite differences stay honest at the kink-free
    # activation (ReLU would poison the gradient check near zero).
    return 0.5 * x * (1.0 + np.tanh(_GELU_C * (x + 0.044715 * x**3)))


def _gelu_grad(x):
    inner = _GELU_C * (x + 0.044715 * x**3)
    t = np.tanh(inner)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t**2) * _GELU_C * (1.0 + 3 * 0.044715 * x**2)


def encoder_forward(x: np.ndarray, layer: EncoderLayerParams, num_heads: int):
    """Full-attention transformer encoder layer on one (seq, embed) array."""
    s, e = x.shape
    dh = e // num_heads
    q = (x @ layer.wq + layer.bq).reshape(s, num_heads, dh).transpose(1, 0, 2)
    k = (x @ layer.wk + layer.bk).reshape(s, num_heads, dh).transpose(1, 0, 2)
    v = (x @ layer.wv + layer.bv).reshape(s, num_heads, dh).transpose(1, 0, 2)
    scores = q @ k.transpose(0, 2, 1) / math.sqrt(dh)
    att = _softmax(scores)
    ctx = (att @ v).transpose(1, 0, 2).reshape(s, e)
    o = ctx @ layer.wo + layer.bo
    y1, ln1 = _layer_norm(x + o, layer.ln1_gamma, layer.ln1_beta)
    hpre = y1 @ layer.w1 + layer.b1
    h = _gelu(hpre)
    f = h @ layer.w2 + layer.b2
    y2, ln2 = _layer_norm(y1 + f, layer.ln2_gamma, layer.ln2_beta)
    cache = {
        "x": x, "q": q, "k": k, "v": v, "att": att, "ctx": ctx,
        "ln1": ln1, "y1": y1, "hpre": hpre, "h": h, "ln2": ln2,
    }
    return y2, cache


def encoder_backward(dy2: np.ndarray, cache: dict, layer: EncoderLayerParams,
                     grads: dict[str, np.ndarray], prefix: str, num_heads: int):
    """Gradient of one encoder layer; accumulates into ``grads[prefix + name]``."""
    x = cache["x"]
    s, e = x.shape
    dh = e // num_heads

    dr2, dg2, db2 = _layer_norm_backward(dy2, cache["ln2"])
    grads[prefix + "ln2_gamma"] += dg2
    grads[prefix + "ln2_beta"] += db2

    df = dr2
    grads[prefix + "w2"] += cache["h"].T @ df
    grads[prefix + "b2"] += df.sum(axis=0)
    dhidden = df @ layer.w2.T
    dhpre = dhidden * _gelu_grad(cache["hpre"])
    grads[prefix + "w1"] += cache["y1"].T @ dhpre
    grads[prefix + "b1"] += dhpre.sum(axis=0)
    dy1 = dr2 + dhpre @ layer.w1.T

    dr1, dg1, db1 = _layer_norm_backward(dy1, cache["ln1"])
    grads[prefix + "ln1_gamma"] += dg1
    grads[prefix + "ln1_beta"] += db1

    do = dr1
    grads[prefix + "wo"] += cache["ctx"].T @ do
    grads[prefix + "bo"] += do.sum(axis=0)
    dctx = (do @ layer.wo.T).reshape(s, num_heads, dh).transpose(1, 0, 2)

    att, q, k, v = cache["att"], cache["q"], cache["k"], cache["v"]
    datt = dctx @ v.transpose(0, 2, 1)
    dv = att.transpose(0, 2, 1) @ dctx
    dscores = att * (datt - (datt * att).sum(axis=-1, keepdims=True))
    dscores /= math.sqrt(dh)
    dq = dscores @ k
    dk = dscores.transpose(0, 2, 1) @ q

    dq2d = dq.transpose(1, 0, 2).reshape(s, e)
    dk2d = dk.transpose(1, 0, 2).reshape(s, e)
    dv2d = dv.transpose(1, 0, 2).reshape(s, e)
    grads[prefix + "wq"] += x.T @ dq2d
    grads[prefix + "bq"] += dq2d.sum(axis=0)
    grads[prefix + "wk"] += x.T @ dk2d
    grads[prefix + "bk"] += dk2d.sum(axis=0)
    grads[prefix + "wv"] += x.T @ dv2d
    grads[prefix + "bv"] += dv2d.sum(axis=0)

    dx = dr1 + dq2d @ layer.wq.T + dk2d @ layer.wk.T + dv2d @ layer.wv.T
    return dx


# ---------------------------------------------------------------------------
# Specced single-circle entry points
# ---------------------------------------------------------------------------


def intra_circle_forward(circle: CircleInput, params: ModelParams, block_index: int):
    """One intra-circle encoder pass over a freshly embedded circle.

    Returns (per-token outputs, central output). The full document forward
    chains blocks on evolving hidden states; this entry point exists for
    inspection and testing of a single stage.
    """
    x = embed(circle, params)
    y, _ = encoder_forward(x, params.intra[block_index], params.config.num_heads)
    return y, y[0]


def inter_circle_forward(central_vectors: np.ndarray, params: ModelParams, block_index: int):
    """Encoder pass across central vectors (one row per circle)."""
    central_vectors = np.asarray(central_vectors, dtype=np.float64)
    if central_vectors.ndim != 2 or central_vectors.shape[0] < 1:
        raise DimensionMismatch("expected a (num_circles, embed_dim) array")
    y, _ = encoder_forward(
        central_vectors, params.inter[block_index], params.config.num_heads
    )
    return y


def fuse_central(central_low: np.ndarray, central_high: np.ndarray, fusion: np.ndarray):
    """Project the concatenated low/high central vectors back to embed_dim."""
    central_low = np.asarray(central_low, dtype=np.float64)
    central_high = np.asarray(central_high, dtype=np.float64)
    if central_low.shape != central_high.shape or fusion.shape != (
        2 * central_low.shape[-1],
        central_low.shape[-1],
    ):
        raise DimensionMismatch("fusion shapes do not line up")
    return np.concatenate((central_low, central_high), axis=-1) @ fusion


# ---------------------------------------------------------------------------
# Full document forward/backward
# ---------------------------------------------------------------------------


def forward_circles(circles: list[CircleInput], params: ModelParams):
    """Forward over embedded circles; returns (embedding, score, cache)."""
    if not circles:
        raise EmptyCircle("need at least one circle")
    cfg = params.config
    inputs = [embed(c, params) for c in circles]
    rows_cache = [
        np.concatenate((c.member_rows, c.query_rows)).astype(np.int64) for c in circles
    ]
    blocks = []
    x_list = inputs
    central_high = None
    for b in range(cfg.num_blocks):
        intra_caches = []
        outs = []
        for x in x_list:
            y, cache = encoder_forward(x, params.intra[b], cfg.num_heads)
            intra_caches.append(cache)
            outs.append(y)
        central_low = np.stack([y[0] for y in outs])
        central_high, inter_cache = encoder_forward(
            central_low, params.inter[b], cfg.num_heads
        )
        block = {
            "intra_caches": intra_caches,
            "outs": outs,
            "central_low": central_low,
            "inter_cache": inter_cache,
            "central_high": central_high,
        }
        if b < cfg.num_blocks - 1:
            concat = np.concatenate((central_low, central_high), axis=1)
            fused = concat @ params.fusion
            block["concat"] = concat
            next_inputs = []
            for i, y in enumerate(outs):
                nxt = y.copy()
                nxt[0] = fused[i]
                next_inputs.append(nxt)
            x_list = next_inputs
        blocks.append(block)

    pooled_arg = np.argmax(central_high, axis=0)
    doc_embedding = central_high[pooled_arg, np.arange(cfg.embed_dim)]
    score = float(params.score_vec @ doc_embedding)
    cache = {
        "circles": circles,
        "rows": rows_cache,
        "blocks": blocks,
        "pooled_arg": pooled_arg,
        "doc_embedding": doc_embedding,
    }
    return doc_embedding, score, cache


def backward_circles(dscore: float, cache: dict, params: ModelParams,
                     grads: dict[str, np.ndarray]) -> None:
    """Accumulate parameter gradients for one document forward."""
    cfg = params.config
    blocks = cache["blocks"]
    n_circles = len(cache["circles"])
    e = cfg.embed_dim

    grads["score_vec"] += dscore * cache["doc_embedding"]
    ddoc = dscore * params.score_vec

    # Max pooling routes each coordinate's gradient to its argmax circle.
    dcentral_high = np.zeros((n_circles, e))
    dcentral_high[cache["pooled_arg"], np.arange(e)] = ddoc

    dnext = None  # list of per-circle gradients w.r.t. the next block's inputs
    for b in range(cfg.num_blocks - 1, -1, -1):
        block = blocks[b]
        douts = [np.zeros_like(y) for y in block["outs"]]
        if b < cfg.num_blocks - 1:
            dfused = np.stack([d[0] for d in dnext])
            grads["fusion"] += block["concat"].T @ dfused
            dconcat = dfused @ params.fusion.T
            dcentral_low_fusion = dconcat[:, :e]
            dcentral_high = dconcat[:, e:]
            for i, dnx in enumerate(dnext):
                douts[i][1:] = dnx[1:]
        dcentral_low = encoder_backward(
            dcentral_high, block["inter_cache"], params.inter[b],
            grads, f"inter.{b}.", cfg.num_heads,
        )
        if b < cfg.num_blocks - 1:
            dcentral_low = dcentral_low + dcentral_low_fusion
        for i in range(n_circles):
            douts[i][0] += dcentral_low[i]
        dnext = [
            encoder_backward(
                douts[i], block["intra_caches"][i], params.intra[b],
                grads, f"intra.{b}.", cfg.num_heads,
            )
            for i in range(n_circles)
        ]

    demb = grads["token_embedding"]
    for rows, dx in zip(cache["rows"], dnext):
        np.add.at(demb, rows, dx)


def forward_document(doc, query, part: Partition, params: ModelParams):
    """Document embedding and relevance score for a partitioned document."""
    circles = build_circles(doc, query, part, params.config)
    doc_embedding, score, _ = forward_circles(circles, params)
    return doc_embedding, score


# ---------------------------------------------------------------------------
# Listwise loss
# ---------------------------------------------------------------------------


def listwise_loss(scores: np.ndarray, positive_index: int) -> float:
    """Cross entropy of the positive document under a softmax over the group."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("score group is empty")
    if not 0 <= positive_index < scores.size:
        raise ValueError("positive index out of range")
    m = scores.max()
    logsumexp = m + math.log(np.exp(scores - m).sum())
    return float(logsumexp - scores[positive_index])


def listwise_loss_grad(scores: np.ndarray, positive_index: int) -> np.ndarray:
    """d loss / d scores: softmax minus the positive indicator."""
    scores = np.asarray(scores, dtype=np.float64)
    probs = _softmax(scores[None, :])[0]
    grad = probs.copy()
    grad[positive_index] -= 1.0
    return grad


# ---------------------------------------------------------------------------
# Gradient check
# ---------------------------------------------------------------------------

GRAD_CHECK_STEP = 1e-4
GRAD_CHECK_TOLERANCE = 1e-4


def _random_circle(rng, kind, n_members, n_query, cfg):
    rows = rng.integers(1, cfg.vocab_hash_size, size=n_members)
    if kind == PASSAGE:
        rows[0] = CLS_ROW
    positions = np.sort(rng.choice(512, size=n_members, replace=False))
    return CircleInput(
        kind=kind,
        member_rows=rows.astype(np.int64),
        member_positions=positions.astype(np.int64),
        query_rows=rng.integers(1, cfg.vocab_hash_size, size=n_query).astype(np.int64),
        query_positions=QUERY_POSITION_BASE + np.arange(n_query, dtype=np.int64),
    )


def grad_check(config: ModelConfig | None = None, seed: int = 0,
               circles_per_doc: tuple[int, int] = (3, 3)) -> dict:
    """Analytic gradients vs central finite differences on a random instance.

    Builds a two-document group, takes the listwise loss, and compares the
    full backward pass against (f(p + h) - f(p - h)) / 2h at every tensor.
    The per-tensor relative error is the worst coordinate deviation divided
    by the tensor's gradient magnitude. Returns a report dict with the
    worst error and its tensor name.
    """
    if config is None:
        config = ModelConfig(
            embed_dim=16, num_heads=2, num_blocks=2,
            window_size=8, max_subgraphs=4, vocab_hash_size=32, init_seed=seed,
        )
    params = init_params(config)
    rng = np.random.Generator(np.random.Philox(key=seed + 101))

    docs = []
    for n_circles in circles_per_doc:
        circle_list = []
        for c in range(n_circles):
            kind = SUBGRAPH if c % 2 == 0 else PASSAGE
            n_members = int(rng.integers(2, 6))
            circle_list.append(_random_circle(rng, kind, n_members, 2, config))
        docs.append(circle_list)

    def group_loss():
        scores = np.array([forward_circles(cs, params)[1] for cs in docs])
        return listwise_loss(scores, positive_index=0), scores

    loss, scores = group_loss()
    dscores = listwise_loss_grad(scores, positive_index=0)
    grads = params.zeros_like_tree()
    for circle_list, ds in zip(docs, dscores):
        _, _, cache = forward_circles(circle_list, params)
        backward_circles(float(ds), cache, params, grads)

    tree = params.tree()
    worst = 0.0
    worst_name = ""
    per_tensor = {}
    for name, tensor in tree.items():
        analytic = grads[name]
        numeric = np.zeros_like(tensor)
        flat = tensor.reshape(-1)
        num_flat = numeric.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + GRAD_CHECK_STEP
            up, _ = group_loss()
            flat[idx] = orig - GRAD_CHECK_STEP
            down, _ = group_loss()
            flat[idx] = orig
            num_flat[idx] = (up - down) / (2.0 * GRAD_CHECK_STEP)
        # The floor absorbs finite-difference roundoff (~eps * |loss| / step)
        # on tensors whose true gradient is exactly zero, e.g. the key bias,
        # which softmax cancels identically.
        scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-6)
        err = float(np.abs(analytic - numeric).max() / scale)
        per_tensor[name] = err
        if err > worst:
            worst = err
            worst_name = name
    return {
        "seed": seed,
        "loss": loss,
        "max_rel_error": worst,
        "worst_tensor": worst_name,
        "per_tensor": per_tensor,
        "passed": worst < GRAD_CHECK_TOLERANCE,
    }


# ---------------------------------------------------------------------------
# Checkpoint io
# ---------------------------------------------------------------------------

_HEADER_STRUCT = struct.Struct("<4sIiiiiiiq")


def save_checkpoint(path, params: ModelParams) -> None:
    """Versioned header followed by every tensor, little-endian float64."""
    cfg = params.config
    header = _HEADER_STRUCT.pack(
        CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
        cfg.embed_dim, cfg.num_heads, cfg.num_blocks, cfg.window_size,
        cfg.max_subgraphs, cfg.vocab_hash_size, cfg.init_seed,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for _, tensor in sorted(params.tree().items()):
            fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def read_checkpoint_header(path) -> ModelConfig:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER_STRUCT.size)
    if len(raw) < _HEADER_STRUCT.size:
        raise ValueError(f"{path}: truncated checkpoint header")
    magic, version, e, heads, blocks, window, max_sg, vocab, seed = _HEADER_STRUCT.unpack(raw)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a model checkpoint (bad magic)")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    return ModelConfig(
        embed_dim=e, num_heads=heads, num_blocks=blocks, window_size=window,
        max_subgraphs=max_sg, vocab_hash_size=vocab, init_seed=seed,
    )


def load_checkpoint(path) -> ModelParams:
    config = read_checkpoint_header(path)
    params = init_params(config)
    with open(path, "rb") as fh:
        fh.seek(_HEADER_STRUCT.size)
        for _, tensor in sorted(params.tree().items()):
            raw = fh.read(tensor.size * 8)
            if len(raw) != tensor.size * 8:
                raise ValueError(f"{path}: truncated checkpoint body")
            tensor[...] = np.frombuffer(raw, dtype="<f8").reshape(tensor.shape)
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after parameters")
    return params
