"""Corpus ingestion, tokenization, and per-term weighting.

Produces the static (TF-IDF) and dynamic (query-match distance, query
relevance) term weights that drive the attention patterns.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyCorpus, EmptyDocument, ParseError, UnknownTerm

DEFAULT_MAX_DOC_LEN = 2048

IDF_EPSILON = 1e-6

# Weight kinds, named after what each one measures.
STATIC_CENTRALITY = "static_centrality"
DYNAMIC_DISTANCE = "dynamic_distance"
DYNAMIC_CENTRALITY = "dynamic_centrality"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash, masked to 63 bits so it fits a signed int64.

    Used for stable, platform-independent token ids (Python's builtin
    ``hash`` is salted per process).
    """
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h & 0x7FFFFFFFFFFFFFFF


@dataclass(frozen=True)
class TokenizedDocument:
    """A tokenized text: aligned token ids and lowercase surface forms."""

    doc_id: str
    tokens: np.ndarray
    surface_forms: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise EmptyDocument(f"document {self.doc_id!r} has no tokens")
        if len(self.tokens) != len(self.surface_forms):
            raise ValueError("tokens and surface_forms must align")

    @property
    def length(self) -> int:
        return len(self.tokens)


@dataclass
class Vocabulary:
    """Term ids and per-term document frequencies over a corpus."""

    term_to_id: dict[str, int]
    df: dict[str, int]
    n_docs: int

    def __contains__(self, term: str) -> bool:
        return term in self.df


@dataclass(frozen=True)
class TermWeights:
    """Non-negative per-token weights aligned with a document."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("term weights must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise ValueError("term weights must be finite")
        if np.any(values < 0):
            raise ValueError("term weights must be non-negative")
        object.__setattr__(self, "values", values)


_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _split_words(text: str) -> list[str]:
    # Underscore counts as punctuation, so re-tokenizing a space-joined
    # token list is a no-op.
    return _WORD_RE.findall(text.lower())


def tokenize(text: str, max_doc_len: int = DEFAULT_MAX_DOC_LEN, doc_id: str = "") -> TokenizedDocument:
    """Lowercase, split on whitespace/punctuation, truncate to ``max_doc_len``.

    Raises EmptyDocument if nothing remains after normalization.
    """
    words = _split_words(text)
    if not words:
        raise EmptyDocument(f"document {doc_id!r} is empty after normalization")
    words = words[:max_doc_len]
    token_ids = np.array([fnv1a64(w) for w in words], dtype=np.int64)
    return TokenizedDocument(doc_id=doc_id, tokens=token_ids, surface_forms=tuple(words))


def build_vocab(corpus: Sequence[TokenizedDocument]) -> Vocabulary:
    """Document frequencies over a corpus; each term counted once per document."""
    if len(corpus) == 0:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    df: Counter[str] = Counter()
    for doc in corpus:
        df.update(set(doc.surface_forms))
    term_to_id = {term: i for i, term in enumerate(sorted(df))}
    return Vocabulary(term_to_id=term_to_id, df=dict(df), n_docs=len(corpus))


def tfidf_weights(doc: TokenizedDocument, vocab: Vocabulary) -> TermWeights:
    """Length-normalized TF times smoothed IDF, floored at IDF_EPSILON.

    weight_i = count(term_i) / length * ln((1 + n_docs) / (1 + df(term_i)))
               + IDF_EPSILON

    The epsilon keeps every weight strictly positive so downstream min-max
    normalization always has a spread to work with.
    """
    counts = Counter(doc.surface_forms)
    length = doc.length
    values = np.empty(length, dtype=np.float64)
    for i, term in enumerate(doc.surface_forms):
        if term not in vocab.df:
            raise UnknownTerm(f"term {term!r} not in vocabulary")
        idf = np.log((1.0 + vocab.n_docs) / (1.0 + vocab.df[term]))
        values[i] = counts[term] / length * idf + IDF_EPSILON
    return TermWeights(values=values, kind=STATIC_CENTRALITY)


def match_positions(doc: TokenizedDocument, query: TokenizedDocument) -> np.ndarray:
    """Sorted positions of document tokens that exactly match any query term."""
    query_terms = set(query.surface_forms)
    positions = [i for i, term in enumerate(doc.surface_forms) if term in query_terms]
    return np.array(positions, dtype=np.int64)


def _char_trigrams(word: str) -> frozenset[str]:
    if len(word) < 3:
        return frozenset()
    return frozenset(word[i : i + 3] for i in range(len(word) - 2))


def trigram_jaccard(a: str, b: str) -> float:
    """Jaccard similarity of character trigram sets; 0 when either set is empty."""
    ta, tb = _char_trigrams(a), _char_trigrams(b)
    union = len(ta | tb)
    if union == 0:
        return 0.0
    return len(ta & tb) / union


# A refiner receives the document, query, stage-1 weights, and the positions of
# the candidate tokens (highest stage-1 weight first) and returns replacement
# weights in [0, 1]. The default keeps the stage-1 weights as-is; a learned
# scorer can be plugged in without touching the pattern code.
TermWeightRefiner = Callable[
    [TokenizedDocument, TokenizedDocument, np.ndarray, np.ndarray], np.ndarray
]

STAGE1_CANDIDATE_LIMIT = 512


def identity_refiner(doc, query, weights, candidate_positions):
    return weights


def stage1_relevance(
    doc: TokenizedDocument,
    query: TokenizedDocument,
    refiner: TermWeightRefiner | None = None,
) -> TermWeights:
    """Per-token relevance to the query, in [0, 1].

    Exact query-term matches get 1.0; every other token gets its best
    character-trigram Jaccard similarity against the query terms. The top
    min(512, length) tokens by weight are offered to ``refiner`` for a second
    pass (identity by default).
    """
    query_terms = set(query.surface_forms)
    unique_query = sorted(query_terms)
    values = np.zeros(doc.length, dtype=np.float64)
    sim_cache: dict[str, float] = {}
    for i, term in enumerate(doc.surface_forms):
        if term in query_terms:
            values[i] = 1.0
            continue
        if term not in sim_cache:
            sim_cache[term] = max(
                (trigram_jaccard(term, q) for q in unique_query), default=0.0
            )
        values[i] = sim_cache[term]

    limit = min(STAGE1_CANDIDATE_LIMIT, doc.length)
    # Stable order: weight descending, position ascending on ties.
    order = np.lexsort((np.arange(doc.length), -values))
    candidates = order[:limit]
    refine = refiner if refiner is not None else identity_refiner
    refined = np.asarray(refine(doc, query, values, candidates), dtype=np.float64)
    if refined.shape != values.shape:
        raise ValueError("refiner must preserve the weight vector length")
    return TermWeights(values=refined, kind=DYNAMIC_CENTRALITY)


def load_corpus(path, max_doc_len: int = DEFAULT_MAX_DOC_LEN) -> list[TokenizedDocument]:
    """Read a JSONL corpus: one object per line with doc_id and text fields."""
    docs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                doc_id = record["doc_id"]
                text = record["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(path, line_no, f"bad corpus record: {exc}") from exc
            try:
                docs.append(tokenize(text, max_doc_len=max_doc_len, doc_id=doc_id))
            except EmptyDocument as exc:
                raise ParseError(path, line_no, str(exc)) from exc
    return docs


def load_queries(path, max_doc_len: int = DEFAULT_MAX_DOC_LEN) -> list[TokenizedDocument]:
    """Read a TSV query file: qid<TAB>text per line."""
    queries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, line_no, "expected qid<TAB>text")
            qid, text = parts
            try:
                queries.append(tokenize(text, max_doc_len=max_doc_len, doc_id=qid))
            except EmptyDocument as exc:
                raise ParseError(path, line_no, str(exc)) from exc
    return queries


def load_qrels(path) -> dict[str, dict[str, int]]:
    """Read whitespace-separated relevance judgments: qid 0 docid grade."""
    qrels: dict[str, dict[str, int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(path, line_no, "expected: qid 0 docid grade")
            qid, _, doc_id, grade = parts
            try:
                grade_val = int(grade)
            except ValueError as exc:
                raise ParseError(path, line_no, f"bad grade {grade!r}") from exc
            qrels.setdefault(qid, {})[doc_id] = grade_val
    return qrels


def load_candidates(path) -> dict[str, list[str]]:
    """Read candidate lists: qid<TAB>docid per line, in first-seen order."""
    candidates: dict[str, list[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, line_no, "expected qid<TAB>docid")
            qid, doc_id = parts
            candidates.setdefault(qid, []).append(doc_id)
    return candidates
