"""Document-level emotion intensities with negation and degree modifiers.

Each lexicon word occurrence contributes ``(-1)**m * deg * I_k(word)`` to
emotion ``k``, where ``m`` counts negation tokens among the ``window``
tokens immediately before it and ``deg`` is the mean degree value of the
degree tokens there (1.0 when there are none).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .emotions import EMOTIONS, N_EMOTIONS
from .exceptions import DegenerateColumn, InvalidInput

logger = logging.getLogger(__name__)


@dataclass
class Document:
    id: str
    publisher_id: str = ""
    tokens: list = field(default_factory=list)
    n_images: int = 0
    n_videos: int = 0
    posted_weekend: bool = False
    n_comments: int = 0
    original: bool = True
    char_length: int = 0
    extra: dict = field(default_factory=dict)

    _FIELDS = ("id", "publisher_id", "tokens", "n_images", "n_videos", "posted_weekend",
               "n_comments", "original", "char_length")

    def __post_init__(self):
        for name in ("n_images", "n_videos", "n_comments", "char_length"):
            if getattr(self, name) < 0:
                raise InvalidInput(f"document {self.id!r}: {name} must be >= 0")
        self.tokens = [str(t) for t in self.tokens]

    @classmethod
    def from_record(cls, rec):
        rec = dict(rec)
        kwargs = {k: rec.pop(k) for k in cls._FIELDS if k in rec}
        if "id" not in kwargs:
            raise InvalidInput("document record lacks an 'id'")
        kwargs["id"] = str(kwargs["id"])
        if "publisher_id" in kwargs:
            kwargs["publisher_id"] = str(kwargs["publisher_id"])
        if "char_length" not in kwargs:
            kwargs["char_length"] = sum(len(t) for t in kwargs.get("tokens", []))
        return cls(**kwargs, extra=rec)

    def to_record(self):
        rec = {k: getattr(self, k) for k in self._FIELDS}
        rec.update(self.extra)
        return rec


@dataclass
class ModifierDictionaries:
    negations: frozenset = frozenset()
    degrees: dict = field(default_factory=dict)

    def __post_init__(self):
        self.negations = frozenset(self.negations)
        self.degrees = {str(k): float(v) for k, v in self.degrees.items()}
        bad = [w for w, v in self.degrees.items() if not v > 0]
        if bad:
            raise InvalidInput(f"degree values must be positive: {bad[:5]}")
        both = self.negations & set(self.degrees)
        if both:
            raise InvalidInput(f"words listed as both negation and degree: {sorted(both)[:5]}")

    @classmethod
    def load(cls, negations_path=None, degrees_path=None):
        """Read ``word`` lines (negations) and ``word<TAB>value`` lines (degrees)."""
        negs, degs = set(), {}
        if negations_path:
            for line in _dict_lines(negations_path):
                negs.add(line.split("\t")[0])
        if degrees_path:
            for line in _dict_lines(degrees_path):
                parts = line.split("\t")
                if len(parts) < 2:
                    raise InvalidInput(f"{degrees_path}: degree line lacks a value: {line!r}")
                degs[parts[0]] = float(parts[1])
        return cls(negs, degs)

    def conflicts(self, lexicon_words):
        words = set(lexicon_words)
        return sorted((self.negations | set(self.degrees)) & words)


def _dict_lines(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    # tolerate a header row
    if lines and lines[0].split("\t")[0].lower() in ("word", "token"):
        lines = lines[1:]
    return lines


def _as_table(lexicon):
    if hasattr(lexicon, "as_dict"):
        return lexicon.as_dict()
    return {w: np.asarray(v, dtype=float) for w, v in lexicon.items()}


def score_tokens(tokens, table, modifiers, window=3):
    """Raw 8-vector for a token list; ``table`` maps word -> intensity array."""
    if window < 0:
        raise InvalidInput("window must be >= 0")
    out = np.zeros(N_EMOTIONS)
    negs = modifiers.negations
    degs = modifiers.degrees
    for i, tok in enumerate(tokens):
        vec = table.get(tok)
        if vec is None:
            continue
        n_neg = 0
        deg_total, n_deg = 0.0, 0
        for prev in tokens[max(0, i - window):i]:
            if prev in table:
                continue  # emotion words never act as modifiers
            if prev in negs:
                n_neg += 1
            elif prev in degs:
                deg_total += degs[prev]
                n_deg += 1
        deg = deg_total / n_deg if n_deg else 1.0
        out += (-1.0) ** n_neg * deg * vec
    return out


def score_document(doc, lexicon, modifiers, window=3):
    """Raw emotion vector of one document (zero vector when it holds no emotion word)."""
    tokens = doc.tokens if isinstance(doc, Document) else list(doc)
    return score_tokens(tokens, _as_table(lexicon), modifiers, window)


def score_documents(docs, lexicon, modifiers, window=3):
    table = _as_table(lexicon)
    conflicts = modifiers.conflicts(table)
    if conflicts:
        logger.warning("%d modifier words are also lexicon words and count as emotion words: %s",
                       len(conflicts), conflicts[:10])
    rows = [score_tokens(d.tokens if isinstance(d, Document) else d, table, modifiers, window)
            for d in docs]
    return np.array(rows).reshape(len(rows), N_EMOTIONS)


def _column_stats(col):
    # fsum keeps the reduction exact-rounded, independent of how rows are split
    n = len(col)
    mean = math.fsum(col) / n
    var = math.fsum((x - mean) ** 2 for x in col) / n
    return mean, math.sqrt(var)


def standardize(matrix, names=EMOTIONS, return_stats=False):
    """Column-wise population z-scores.

    Raises ``DegenerateColumn`` (naming the column) for a constant column.
    """
    X = np.asarray(matrix, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise InvalidInput("standardization needs at least two rows")
    means = np.empty(X.shape[1])
    sds = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        means[j], sds[j] = _column_stats(X[:, j].tolist())
        if sds[j] == 0.0:
            name = names[j] if j < len(names) else str(j)
            raise DegenerateColumn(f"column {name!r} has zero variance", column=name)
    Z = (X - means) / sds
    return (Z, means, sds) if return_stats else Z


def degree_of_emotion(matrix):
    """Z-scored row sums of raw intensities (overall emotionality)."""
    X = np.asarray(matrix, dtype=float)
    sums = np.array([math.fsum(r) for r in X.tolist()])
    return standardize(sums, names=("degree_of_emotion",))[:, 0]


def correlation_matrix(matrix, names=EMOTIONS):
    """Pearson correlation matrix, exactly symmetric with unit diagonal."""
    Z = standardize(matrix, names=names)
    n = Z.shape[0]
    C = Z.T @ Z / n
    C = (C + C.T) / 2
    np.fill_diagonal(C, 1.0)
    return np.clip(C, -1.0, 1.0)


class EmotionScorer(TransformerMixin, BaseEstimator):
    """Score documents and standardize against the fitted corpus.

    ``fit`` stores population means and SDs of the raw intensities;
    ``transform`` returns z-scores; ``score_raw`` returns raw intensities.
    """

    def __init__(self, lexicon=None, modifiers=None, window=3):
        self.lexicon = lexicon
        self.modifiers = modifiers
        self.window = window

    def _mods(self):
        return self.modifiers if self.modifiers is not None else ModifierDictionaries()

    def score_raw(self, docs):
        if self.lexicon is None:
            raise InvalidInput("EmotionScorer needs a lexicon")
        return score_documents(docs, self.lexicon, self._mods(), self.window)

    def fit(self, docs, y=None):
        raw = self.score_raw(docs)
        _, self.mean_, self.scale_ = standardize(raw, return_stats=True)
        self.conflicts_ = self._mods().conflicts(_as_table(self.lexicon))
        return self

    def transform(self, docs):
        check_is_fitted(self, "mean_")
        return (self.score_raw(docs) - self.mean_) / self.scale_

    def get_feature_names_out(self, input_features=None):
        return np.array([f"{e}_z" for e in EMOTIONS], dtype=object)
