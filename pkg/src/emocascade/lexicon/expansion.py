"""Iterative nearest-neighbour expansion of a seed emotion lexicon.

A candidate word ``w`` is classified by summing, over its ``n`` nearest
neighbours that are already in the lexicon, similarity times neighbour
intensity (one score per emotion). Scores below ``alpha`` are zeroed. For
each surviving emotion, the intensity of ``w`` is the mean positive
intensity among its ``m`` nearest lexicon neighbours.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..emotions import N_EMOTIONS
from ..exceptions import InvalidInput, MissingWord
from .entries import Lexicon, LexiconEntry

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExpansionParams:
    n_candidates: int = 100
    n: int = 12
    m: int = 10
    alpha: float = 1.2
    max_iterations: int = 50

    def __post_init__(self):
        for name in ("n_candidates", "n", "m", "max_iterations"):
            if int(getattr(self, name)) < 1:
                raise InvalidInput(f"{name} must be a positive integer")
        if self.m > self.n:
            raise InvalidInput(f"m ({self.m}) must not exceed n ({self.n})")
        if self.alpha < 0:
            raise InvalidInput("alpha must be >= 0")


def _lexicon_arrays(store, lexicon):
    """Dense (V, 8) intensity matrix aligned with ``store`` plus a membership mask."""
    table = np.zeros((len(store), N_EMOTIONS))
    member = np.zeros(len(store), dtype=bool)
    for entry in lexicon:
        i = store.index.get(entry.word)
        if i is not None:
            table[i] = entry.emotions
            member[i] = True
    return table, member


def _score(nbr_idx, nbr_sim, table, member, n, m, alpha):
    """Vectorised class scores and intensities for a block of candidates.

    ``nbr_idx``/``nbr_sim`` hold each candidate's neighbours sorted by
    descending similarity, at least ``max(n, m)`` columns wide.
    """
    idx_n = nbr_idx[:, :n]
    weights = np.where(member[idx_n], nbr_sim[:, :n], 0.0)
    sdi = np.einsum("pj,pjk->pk", weights, table[idx_n])
    sdi[sdi < alpha] = 0.0

    idx_m = nbr_idx[:, :m]
    vals = np.where(member[idx_m][..., None], table[idx_m], 0.0)
    positive = vals > 0
    count = positive.sum(axis=1)
    total = np.where(positive, vals, 0.0).sum(axis=1)
    intensity = np.where((sdi > 0) & (count > 0), total / np.maximum(count, 1), 0.0)
    return sdi, intensity


def _width(store, params):
    # neighbour lists cannot be longer than the rest of the vocabulary
    if len(store) < 2:
        raise InvalidInput("embedding store needs at least two words")
    return min(params.n, len(store) - 1)


def _check_word(store, word):
    if word not in store:
        raise MissingWord(f"word not in embedding store: {word!r}")


def eo_sd(store, lexicon, word, params=ExpansionParams()):
    """Thresholded similarity-weighted emotion scores of ``word`` (one per emotion)."""
    _check_word(store, word)
    if len(lexicon) == 0:
        raise InvalidInput("lexicon is empty")
    table, member = _lexicon_arrays(store, lexicon)
    idx, sim = store.kneighbors([store.index[word]], _width(store, params))
    sdi, _ = _score(idx, sim, table, member, params.n, params.m, params.alpha)
    return sdi[0]


def estimate_intensities(store, lexicon, word, params=ExpansionParams()):
    """Intensities of ``word`` for the emotions its ``eo_sd`` score retains."""
    _check_word(store, word)
    if len(lexicon) == 0:
        raise InvalidInput("lexicon is empty")
    table, member = _lexicon_arrays(store, lexicon)
    idx, sim = store.kneighbors([store.index[word]], _width(store, params))
    _, intensity = _score(idx, sim, table, member, params.n, params.m, params.alpha)
    return intensity[0]


def expand_lexicon(store, basic_lexicon, params=ExpansionParams()):
    """Grow ``basic_lexicon`` until a pass adds no word or ``max_iterations`` is hit.

    Returns the extended :class:`Lexicon` (basic entries first, untouched)
    and a per-iteration log of dicts.
    """
    if len(basic_lexicon) == 0:
        raise InvalidInput("basic lexicon is empty")
    missing = [e.word for e in basic_lexicon if e.word not in store]
    if missing:
        logger.info("%d lexicon words absent from the embedding store are kept but not used as seeds",
                    len(missing))

    lexicon = basic_lexicon.copy()
    table, member = _lexicon_arrays(store, lexicon)
    k_cand = min(params.n_candidates, len(store) - 1)
    k_score = _width(store, params)

    mined_from = np.zeros(len(store), dtype=bool)
    in_pool = np.zeros(len(store), dtype=bool)
    nbr_idx = np.empty((0, k_score), dtype=np.int64)
    nbr_sim = np.empty((0, k_score))
    pool = np.empty(0, dtype=np.int64)
    log = []

    for iteration in range(1, params.max_iterations + 1):
        seeds = np.flatnonzero(member & ~mined_from)
        if seeds.size:
            cand, _ = store.kneighbors(seeds, k_cand)
            mined_from[seeds] = True
            fresh = np.unique(cand.ravel())
            fresh = fresh[~in_pool[fresh] & ~member[fresh]]
            if fresh.size:
                in_pool[fresh] = True
                idx, sim = store.kneighbors(fresh, k_score)
                pool = np.concatenate([pool, fresh])
                nbr_idx = np.vstack([nbr_idx, idx])
                nbr_sim = np.vstack([nbr_sim, sim])

        open_rows = np.flatnonzero(~member[pool])
        sdi, intensity = _score(nbr_idx[open_rows], nbr_sim[open_rows], table, member,
                                params.n, params.m, params.alpha)
        accepted = np.flatnonzero((intensity > 0).any(axis=1))
        # all candidates were scored against the frozen lexicon; merge afterwards
        new_words = pool[open_rows[accepted]]
        order = np.argsort(store._lex_rank[new_words], kind="stable")
        for j in order:
            w = int(new_words[j])
            lexicon.add(LexiconEntry(store.words[w], tuple(intensity[accepted[j]]), iteration))
            table[w] = intensity[accepted[j]]
            member[w] = True
        log.append({
            "iteration": iteration,
            "seeds_mined": int(seeds.size),
            "candidates_scored": int(open_rows.size),
            "added": int(new_words.size),
            "lexicon_size": len(lexicon),
        })
        logger.debug("expansion pass %d: %s", iteration, log[-1])
        if new_words.size == 0:
            break
    return lexicon, log


def holdout_predictions(store, train, words, params):
    """Predicted intensities of ``words`` using only ``train`` as the lexicon."""
    table, member = _lexicon_arrays(store, train)
    idx, sim = store.kneighbors(store.indices(words), _width(store, params))
    _, intensity = _score(idx, sim, table, member, params.n, params.m, params.alpha)
    return intensity


def mean_absolute_error(truth, predicted):
    """Mean over words and the eight emotions of the absolute intensity error."""
    truth = np.asarray(truth, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if truth.shape != predicted.shape or truth.ndim != 2 or truth.shape[1] != N_EMOTIONS:
        raise InvalidInput("truth and predictions must both be (s, 8) arrays")
    if truth.shape[0] == 0:
        raise InvalidInput("empty evaluation set")
    return float(np.abs(truth - predicted).sum() / (N_EMOTIONS * truth.shape[0]))


def _default_holdout_size(n_words):
    return min(1000, int(np.ceil(0.1 * n_words)))


def split_lexicon(store, lexicon, holdout_fraction=None, seed=0, n_holdout=None):
    """Seeded split of the in-store lexicon words into (train Lexicon, holdout words)."""
    usable = [e.word for e in lexicon if e.word in store]
    if n_holdout is None:
        if holdout_fraction is None:
            n_holdout = _default_holdout_size(len(usable))
        else:
            if not 0 < holdout_fraction < 1:
                raise InvalidInput("holdout_fraction must lie in (0, 1)")
            n_holdout = int(round(holdout_fraction * len(usable)))
    if n_holdout < 1 or n_holdout >= len(usable):
        raise InvalidInput(f"holdout set would hold {n_holdout} of {len(usable)} usable words")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(usable))
    held = [usable[i] for i in np.sort(perm[:n_holdout])]
    held_set = set(held)
    train = Lexicon(e for e in lexicon if e.word not in held_set)
    return train, held


def validate_holdout(store, lexicon, holdout_fraction=None, seed=0, params=ExpansionParams()):
    """Hold-out MAE of the expansion rule: predict held-out words from the rest."""
    train, held = split_lexicon(store, lexicon, holdout_fraction, seed)
    predicted = holdout_predictions(store, train, held, params)
    truth = np.array([lexicon[w].emotions for w in held])
    return mean_absolute_error(truth, predicted)


def random_search(store, lexicon, n_trials=30, seed=0, n_range=(4, 30), alpha_range=(0.2, 2.5),
                  n_validation=None, n_test=None):
    """Random hyperparameter search for ``(n, m, alpha)`` on a validation split.

    The lexicon is split three ways (train / validation / test). Returns a
    dict with the best parameters, their validation MAE, the test MAE at those
    parameters and every trial.
    """
    rng = np.random.default_rng(seed)
    usable = [e.word for e in lexicon if e.word in store]
    size = _default_holdout_size(len(usable))
    n_validation = n_validation or size
    n_test = n_test or size
    if n_validation + n_test >= len(usable):
        raise InvalidInput("lexicon too small for a train/validation/test split")
    perm = rng.permutation(len(usable))
    val_words = [usable[i] for i in np.sort(perm[:n_validation])]
    test_words = [usable[i] for i in np.sort(perm[n_validation:n_validation + n_test])]
    held = set(val_words) | set(test_words)
    train = Lexicon(e for e in lexicon if e.word not in held)

    table, member = _lexicon_arrays(store, train)
    k = min(n_range[1], len(store) - 1)
    v_idx, v_sim = store.kneighbors(store.indices(val_words), k)
    t_idx, t_sim = store.kneighbors(store.indices(test_words), k)
    v_true = np.array([lexicon[w].emotions for w in val_words])
    t_true = np.array([lexicon[w].emotions for w in test_words])

    trials = []
    for _ in range(n_trials):
        n = int(rng.integers(n_range[0], k + 1))
        m = int(rng.integers(1, n + 1))
        alpha = float(rng.uniform(*alpha_range))
        _, pred = _score(v_idx, v_sim, table, member, n, m, alpha)
        trials.append({"n": n, "m": m, "alpha": alpha, "mae": mean_absolute_error(v_true, pred)})
    best = min(trials, key=lambda t: (t["mae"], t["n"], t["m"], t["alpha"]))
    _, pred = _score(t_idx, t_sim, table, member, best["n"], best["m"], best["alpha"])
    return {
        "best": {k_: best[k_] for k_ in ("n", "m", "alpha")},
        "validation_mae": best["mae"],
        "test_mae": mean_absolute_error(t_true, pred),
        "trials": trials,
    }


class LexiconExpander(BaseEstimator):
    """Estimator wrapper around :func:`expand_lexicon`.

    ``fit(store, basic_lexicon)`` learns ``lexicon_`` and ``log_``;
    ``predict(words)`` returns the (V, 8) intensities of the given words
    estimated from the fitted lexicon (zero rows for words that no emotion
    score retains).
    """

    def __init__(self, n_candidates=100, n=12, m=10, alpha=1.2, max_iterations=50):
        self.n_candidates = n_candidates
        self.n = n
        self.m = m
        self.alpha = alpha
        self.max_iterations = max_iterations

    def _params(self):
        return ExpansionParams(self.n_candidates, self.n, self.m, self.alpha, self.max_iterations)

    def fit(self, store, basic_lexicon):
        self.store_ = store
        self.lexicon_, self.log_ = expand_lexicon(store, basic_lexicon, self._params())
        self.n_iter_ = len(self.log_)
        return self

    def predict(self, words):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "lexicon_")
        words = list(words)
        out = np.zeros((len(words), N_EMOTIONS))
        known = [i for i, w in enumerate(words) if w in self.lexicon_]
        for i in known:
            out[i] = self.lexicon_[words[i]].emotions
        rest = [i for i, w in enumerate(words) if w not in self.lexicon_]
        if rest:
            out[rest] = holdout_predictions(self.store_, self.lexicon_, [words[i] for i in rest],
                                            self._params())
        return out

    def score(self, store, lexicon, holdout_fraction=None, seed=0):
        """Negative hold-out MAE, so larger is better as sklearn expects."""
        return -validate_holdout(store, lexicon, holdout_fraction, seed, self._params())

    def params_dict(self):
        return asdict(self._params())
