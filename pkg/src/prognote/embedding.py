"""Skip-gram negative-sampling word embeddings over normalized note corpora.

Training is single-threaded and deterministic for a fixed seed; trained
models are immutable and safe to share across threads for lookup and pooling.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .text import TokenizedNote
from .validation import as_float_vector, check_positive


@dataclass(frozen=True)
class NoteVector:
    """Fixed-length vector for one note plus in-vocabulary token coverage."""

    values: np.ndarray
    coverage: float


def _as_tokens(note) -> Sequence[str]:
    return note.tokens if isinstance(note, TokenizedNote) else note


def build_vocab(corpus: Iterable[Sequence[str]], min_count: int = 1) -> dict[str, int]:
    """Vocabulary of tokens with corpus frequency >= min_count.

    Indices are assigned by (descending frequency, lexicographic) order so the
    result is deterministic. An empty corpus yields an empty vocabulary.
    """
    check_positive(min_count, "min_count")
    counts = Counter()
    for note in corpus:
        counts.update(_as_tokens(note))
    kept = sorted(
        ((token, c) for token, c in counts.items() if c >= min_count),
        key=lambda item: (-item[1], item[0]),
    )
    return {token: idx for idx, (token, _) in enumerate(kept)}


def cosine(u, v) -> float:
    """Cosine similarity; 0 when either vector has zero norm."""
    a = as_float_vector(u, "u")
    b = as_float_vector(v, "v")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


class SkipGramEmbedding(BaseEstimator, TransformerMixin):
    """Skip-gram with negative sampling, trained by plain SGD.

    Parameters
    ----------
    dim : embedding dimensionality.
    window : context window; pairs are all (center, context) with
        |offset| <= window inside one note. Windows never cross notes.
    negatives : negative samples per (center, context) pair.
    min_count : minimum corpus frequency for a token to enter the vocabulary.
    epochs : passes over the corpus.
    lr, min_lr : learning rate, decayed linearly from lr to min_lr.
    ns_exponent : exponent applied to unigram counts for the negative-sampling
        distribution (0.75 standard; 0 gives uniform over the vocabulary).
    seed : RNG seed; fixed seed gives bit-identical training runs.
    """

    def __init__(self, dim: int = 100, window: int = 5, negatives: int = 5,
                 min_count: int = 5, epochs: int = 5, lr: float = 0.025,
                 min_lr: float = 1e-4, ns_exponent: float = 0.75, seed: int = 0):
        self.dim = dim
        self.window = window
        self.negatives = negatives
        self.min_count = min_count
        self.epochs = epochs
        self.lr = lr
        self.min_lr = min_lr
        self.ns_exponent = ns_exponent
        self.seed = seed

    def _check_params(self):
        check_positive(self.dim, "dim")
        check_positive(self.window, "window")
        check_positive(self.negatives, "negatives")
        check_positive(self.min_count, "min_count")
        check_positive(self.epochs, "epochs")
        check_positive(self.lr, "lr")

    def fit(self, corpus: Sequence[Sequence[str] | TokenizedNote], y=None):
        """Train input/output vector tables on a corpus of token sequences."""
        self._check_params()
        notes = [tuple(_as_tokens(note)) for note in corpus]
        vocab = build_vocab(notes, self.min_count)
        if not vocab:
            raise ValueError("no trainable vocabulary")
        counts = Counter()
        for note in notes:
            counts.update(note)
        freq = np.array([counts[t] for t in vocab], dtype=np.float64)

        rng = np.random.default_rng(self.seed)
        v_size = len(vocab)
        in_vectors = (rng.random((v_size, self.dim)) - 0.5) / self.dim
        out_vectors = np.zeros((v_size, self.dim))

        # cumulative table for negative draws, counts raised to ns_exponent
        weights = freq ** self.ns_exponent
        cum_table = np.cumsum(weights / weights.sum())
        cum_table[-1] = 1.0

        indexed = [np.array([vocab.get(t, -1) for t in note], dtype=np.int64)
                   for note in notes if note]
        positions_per_epoch = sum(int((idx >= 0).sum()) for idx in indexed)
        total_steps = max(1, positions_per_epoch * self.epochs)
        step = 0
        w = self.window
        k = self.negatives
        for _ in range(self.epochs):
            for idx in indexed:
                n = idx.size
                for pos in range(n):
                    center = idx[pos]
                    if center < 0:
                        continue
                    alpha = self.lr - (self.lr - self.min_lr) * (step / total_steps)
                    step += 1
                    ctx = np.concatenate([idx[max(0, pos - w):pos], idx[pos + 1:pos + w + 1]])
                    ctx = ctx[ctx >= 0]
                    if ctx.size == 0:
                        continue
                    self._update_center(in_vectors, out_vectors, cum_table,
                                        center, ctx, k, alpha, rng)
            if not (np.isfinite(in_vectors).all() and np.isfinite(out_vectors).all()):
                raise FloatingPointError("non-finite embedding values after epoch")

        self.vocab_ = vocab
        self.in_vectors_ = in_vectors
        self.out_vectors_ = out_vectors
        return self

    @staticmethod
    def _update_center(in_vectors, out_vectors, cum_table, center, ctx, k, alpha, rng):
        """One SGD update for all context pairs of a single center token."""
        m = ctx.size
        negs = np.searchsorted(cum_table, rng.random((m, k)))
        collide = negs == ctx[:, None]
        if collide.any():
            negs[collide] = np.searchsorted(cum_table, rng.random(int(collide.sum())))
        v = in_vectors[center].copy()
        u_ctx = out_vectors[ctx]
        u_neg = out_vectors[negs.ravel()]
        g_ctx = alpha * (1.0 - _sigmoid(u_ctx @ v))
        g_neg = -alpha * _sigmoid(u_neg @ v)
        dv = g_ctx @ u_ctx + g_neg @ u_neg
        np.add.at(out_vectors, ctx, g_ctx[:, None] * v)
        np.add.at(out_vectors, negs.ravel(), g_neg[:, None] * v)
        in_vectors[center] += dv

    def _check_fitted(self):
        if not hasattr(self, "in_vectors_"):
            raise NotFittedError("SkipGramEmbedding is not fitted")

    def embed_note(self, note: Sequence[str] | TokenizedNote) -> NoteVector:
        """Mean of input vectors over in-vocabulary tokens.

        Out-of-vocabulary tokens are skipped; an empty or all-OOV note yields
        the zero vector with coverage 0. Coverage is the in-vocabulary token
        fraction.
        """
        self._check_fitted()
        tokens = _as_tokens(note)
        rows = [self.vocab_[t] for t in tokens if t in self.vocab_]
        if not tokens or not rows:
            return NoteVector(values=np.zeros(self.dim), coverage=0.0)
        values = self.in_vectors_[rows].mean(axis=0)
        return NoteVector(values=values, coverage=len(rows) / len(tokens))

    def transform(self, corpus: Sequence[Sequence[str] | TokenizedNote]) -> np.ndarray:
        """Vectorize a corpus into an (n_notes, dim) array of mean-pooled vectors."""
        self._check_fitted()
        return np.stack([self.embed_note(note).values for note in corpus]) \
            if len(corpus) else np.zeros((0, self.dim))

    def token_vector(self, token: str) -> np.ndarray:
        self._check_fitted()
        if token not in self.vocab_:
            raise KeyError(f"token {token!r} not in vocabulary")
        return self.in_vectors_[self.vocab_[token]]

    @property
    def vocab_size_(self) -> int:
        self._check_fitted()
        return len(self.vocab_)
