"""LDA topic controls fitted by collapsed Gibbs sampling.

Randomness comes from a numpy ``Generator`` that supplies one uniform draw
per token per sweep, so results are bitwise reproducible for a seed.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InvalidInput

logger = logging.getLogger(__name__)


@dataclass
class Corpus:
    """Documents as arrays of word ids over a filtered vocabulary."""

    documents: list
    vocabulary: list
    doc_freq: dict
    empty: list = field(default_factory=list)

    @property
    def word_index(self):
        return {w: i for i, w in enumerate(self.vocabulary)}

    @property
    def n_tokens(self):
        return int(sum(len(d) for d in self.documents))

    def encode(self, tokens):
        index = self.word_index
        return np.array([index[t] for t in tokens if t in index], dtype=np.int64)


def preprocess(documents, lexicon=(), min_doc_freq=0.001):
    """Drop emotion words, then tokens found in fewer than ``min_doc_freq`` of documents.

    ``documents`` are token lists. Empty documents are retained and their
    positions listed in ``Corpus.empty``.
    """
    emotion_words = set(lexicon.words if hasattr(lexicon, "words") else lexicon)
    docs = [[t for t in doc if t not in emotion_words] for doc in documents]
    n_docs = len(docs)
    if n_docs == 0:
        raise InvalidInput("no documents")
    df = {}
    for doc in docs:
        for t in set(doc):
            df[t] = df.get(t, 0) + 1
    keep = sorted(t for t, c in df.items() if c / n_docs >= min_doc_freq)
    if not keep:
        raise InvalidInput("vocabulary is empty after filtering")
    index = {w: i for i, w in enumerate(keep)}
    encoded = [np.array([index[t] for t in doc if t in index], dtype=np.int64) for doc in docs]
    empty = [i for i, d in enumerate(encoded) if d.size == 0]
    return Corpus(encoded, keep, {w: df[w] for w in keep}, empty)


@numba.njit(cache=True)
def _gibbs_sweep(words, docs, z, ndk, nkw, nk, alpha, beta, vbeta, u):
    K = nk.shape[0]
    p = np.empty(K)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(K):
            total += (ndk[d, t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            p[t] = total
        r = u[i] * total
        k = 0
        while k < K - 1 and p[k] <= r:
            k += 1
        z[i] = k
        ndk[d, k] += 1
        nkw[k, w] += 1
        nk[k] += 1


@numba.njit(cache=True)
def _foldin_sweep(words, docs, z, ndk, phi, alpha, u):
    K = phi.shape[0]
    p = np.empty(K)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        k = z[i]
        ndk[d, k] -= 1
        total = 0.0
        for t in range(K):
            total += (ndk[d, t] + alpha) * phi[t, w]
            p[t] = total
        r = u[i] * total
        k = 0
        while k < K - 1 and p[k] <= r:
            k += 1
        z[i] = k
        ndk[d, k] += 1


def _flatten(documents):
    lengths = np.array([len(d) for d in documents], dtype=np.int64)
    words = np.concatenate([np.asarray(d, dtype=np.int64) for d in documents]) \
        if len(documents) else np.empty(0, dtype=np.int64)
    docs = np.repeat(np.arange(len(documents), dtype=np.int64), lengths)
    return words, docs


@dataclass
class TopicModel:
    K: int
    phi: np.ndarray
    vocabulary: list
    alpha: float
    beta: float
    seed: int = 0
    assignments: np.ndarray = None
    doc_topic_counts: np.ndarray = None
    iterations: int = 0

    @property
    def word_index(self):
        return {w: i for i, w in enumerate(self.vocabulary)}

    @classmethod
    def uniform(cls, vocabulary, K=1, alpha=None):
        V = len(vocabulary)
        return cls(K, np.full((K, V), 1.0 / V), list(vocabulary),
                   alpha if alpha is not None else 50.0 / K, 0.01)

    def save(self, directory):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "vocabulary.txt").write_text("\n".join(self.vocabulary) + "\n", encoding="utf-8")
        np.save(d / "phi.npy", self.phi)
        meta = {"K": self.K, "alpha": self.alpha, "beta": self.beta, "seed": self.seed,
                "iterations": self.iterations}
        (d / "model.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory):
        d = Path(directory)
        meta = json.loads((d / "model.json").read_text())
        vocab = (d / "vocabulary.txt").read_text(encoding="utf-8").split("\n")[:-1]
        return cls(meta["K"], np.load(d / "phi.npy"), vocab, meta["alpha"], meta["beta"],
                   meta["seed"], iterations=meta["iterations"])


def fit_lda(corpus, K, iterations=800, seed=0, alpha_prior=None, beta_prior=0.01):
    """Collapsed Gibbs LDA; ``phi`` comes from the smoothed counts of the final sweep."""
    if K < 1 or iterations < 1:
        raise InvalidInput("K and iterations must be >= 1")
    n_tokens = corpus.n_tokens
    if K > n_tokens:
        raise InvalidInput(f"K={K} exceeds the token count {n_tokens}")
    alpha = 50.0 / K if alpha_prior is None else float(alpha_prior)
    beta = float(beta_prior)
    V = len(corpus.vocabulary)
    words, docs = _flatten(corpus.documents)
    rng = np.random.default_rng(seed)
    z = rng.integers(0, K, size=n_tokens).astype(np.int64)
    ndk = np.zeros((len(corpus.documents), K), dtype=np.int64)
    nkw = np.zeros((K, V), dtype=np.int64)
    np.add.at(ndk, (docs, z), 1)
    np.add.at(nkw, (z, words), 1)
    nk = nkw.sum(axis=1)
    for _ in range(iterations):
        _gibbs_sweep(words, docs, z, ndk, nkw, nk, alpha, beta, V * beta, rng.random(n_tokens))
    phi = (nkw + beta) / (nk[:, None] + V * beta)
    phi /= phi.sum(axis=1, keepdims=True)
    return TopicModel(K, phi, list(corpus.vocabulary), alpha, beta, seed, z, ndk, iterations)


def _fold_in(model, documents, iterations, seed):
    """Gibbs fold-in with ``phi`` held fixed; returns per-document topic counts."""
    words, docs = _flatten(documents)
    ndk = np.zeros((len(documents), model.K), dtype=np.int64)
    if words.size == 0:
        return ndk
    rng = np.random.default_rng(seed)
    z = rng.integers(0, model.K, size=words.size).astype(np.int64)
    np.add.at(ndk, (docs, z), 1)
    phi = np.ascontiguousarray(model.phi)
    for _ in range(iterations):
        _foldin_sweep(words, docs, z, ndk, phi, model.alpha, rng.random(words.size))
    return ndk


def doc_topics(model, documents, iterations=50, seed=0):
    """Topic proportions for token-list documents (OOV tokens skipped).

    A document with no in-vocabulary token gets the prior mean, uniform 1/K.
    Returns an array of shape (n_documents, K).
    """
    index = model.word_index
    encoded = [np.array([index[t] for t in doc if t in index], dtype=np.int64) for doc in documents]
    ndk = _fold_in(model, encoded, iterations, seed)
    theta = (ndk + model.alpha) / (ndk.sum(axis=1, keepdims=True) + model.K * model.alpha)
    return theta / theta.sum(axis=1, keepdims=True)


def perplexity(model, heldout, iterations=50, seed=0):
    """Document-completion perplexity, ``exp(-log-likelihood per word)``.

    Each held-out document is split by token position: even positions are
    folded in to estimate its topic mix, odd positions are scored.
    ``heldout`` is a :class:`Corpus` sharing the model's vocabulary, or a
    list of token lists.
    """
    if isinstance(heldout, Corpus):
        if heldout.vocabulary != model.vocabulary:
            index = model.word_index
            docs = [np.array([index[heldout.vocabulary[w]] for w in d
                              if heldout.vocabulary[w] in index], dtype=np.int64)
                    for d in heldout.documents]
        else:
            docs = heldout.documents
    else:
        index = model.word_index
        docs = [np.array([index[t] for t in d if t in index], dtype=np.int64) for d in heldout]
    fold = [d[0::2] for d in docs]
    evaluate = [d[1::2] for d in docs]
    n_eval = sum(len(d) for d in evaluate)
    if n_eval == 0:
        raise InvalidInput("held-out corpus has no evaluable tokens")
    ndk = _fold_in(model, fold, iterations, seed)
    theta = (ndk + model.alpha) / (ndk.sum(axis=1, keepdims=True) + model.K * model.alpha)
    loglik = 0.0
    for d, toks in enumerate(evaluate):
        if len(toks):
            loglik += float(np.log(theta[d] @ model.phi[:, toks]).sum())
    return math.exp(-loglik / n_eval)


def split_corpus(corpus, validation_fraction=0.2, seed=0):
    rng = np.random.default_rng(seed)
    n = len(corpus.documents)
    perm = rng.permutation(n)
    n_val = max(1, int(round(validation_fraction * n)))
    val = np.sort(perm[:n_val])
    train = np.sort(perm[n_val:])
    pick = lambda idx: Corpus([corpus.documents[i] for i in idx], corpus.vocabulary,  # noqa: E731
                              corpus.doc_freq)
    return pick(train), pick(val)


def select_k(corpus, candidates, seed=0, iterations=800, validation_fraction=0.2, **lda_kwargs):
    """Fit each candidate K on a training split; pick the lowest validation perplexity.

    Ties go to the smaller K. Returns ``(best_k, {K: perplexity})``.
    """
    candidates = sorted(set(int(k) for k in candidates))
    if not candidates:
        raise InvalidInput("no candidate K")
    train, val = split_corpus(corpus, validation_fraction, seed)
    curve = {}
    seeds = np.random.SeedSequence(seed).spawn(len(candidates))
    for k, ss in zip(candidates, seeds):
        sub_seed = int(ss.generate_state(1)[0])
        model = fit_lda(train, k, iterations, sub_seed, **lda_kwargs)
        curve[k] = perplexity(model, val, seed=sub_seed)
        logger.info("K=%d perplexity=%.4f", k, curve[k])
    best = min(candidates, key=lambda k: (curve[k], k))
    return best, curve


class LDATopics(TransformerMixin, BaseEstimator):
    """Token-list documents in, K topic shares out.

    ``lexicon`` words are removed before fitting and ``n_topics`` may be a
    list, in which case K is chosen by validation perplexity.
    """

    def __init__(self, n_topics=30, lexicon=(), min_doc_freq=0.001, iterations=800,
                 alpha_prior=None, beta_prior=0.01, seed=0):
        self.n_topics = n_topics
        self.lexicon = lexicon
        self.min_doc_freq = min_doc_freq
        self.iterations = iterations
        self.alpha_prior = alpha_prior
        self.beta_prior = beta_prior
        self.seed = seed

    def fit(self, documents, y=None):
        corpus = preprocess(documents, self.lexicon, self.min_doc_freq)
        k = self.n_topics
        if isinstance(k, (list, tuple)):
            k, self.perplexity_curve_ = select_k(corpus, k, self.seed, self.iterations,
                                                 alpha_prior=self.alpha_prior,
                                                 beta_prior=self.beta_prior)
        self.model_ = fit_lda(corpus, k, self.iterations, self.seed, self.alpha_prior, self.beta_prior)
        self.corpus_ = corpus
        return self

    def transform(self, documents):
        check_is_fitted(self, "model_")
        return doc_topics(self.model_, documents, seed=self.seed)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "model_")
        return np.array([f"topic_{k + 1}" for k in range(self.model_.K)], dtype=object)
