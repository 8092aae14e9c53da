"""Word-embedding store with exact cosine nearest-neighbour search."""

import logging
from pathlib import Path

import numpy as np

from ..exceptions import DegenerateVector, InvalidInput, MissingWord

logger = logging.getLogger(__name__)

# rows per similarity block; 256 x 50k float64 is ~100 MB
_BATCH = 256


def cosine_similarity(v1, v2):
    """Cosine of the angle between two vectors.

    Raises ``InvalidInput`` on a dimension mismatch and ``DegenerateVector``
    when either vector has zero norm.
    """
    a = np.asarray(v1, dtype=float).ravel()
    b = np.asarray(v2, dtype=float).ravel()
    if a.shape != b.shape:
        raise InvalidInput(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = np.sqrt(np.dot(a, a))
    nb = np.sqrt(np.dot(b, b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateVector("cosine similarity is undefined for a zero-norm vector")
    sim = float(np.dot(a, b) / (na * nb))
    return min(1.0, max(-1.0, sim))


class EmbeddingStore:
    """Immutable vocabulary of dense word vectors of a common dimension.

    Parameters
    ----------
    words : sequence of str
        Unique, non-empty tokens.
    vectors : array-like of shape (n_words, dim)
        One row per word. Zero rows are rejected because cosine similarity
        is undefined for them.
    """

    def __init__(self, words, vectors):
        words = [str(w) for w in words]
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise InvalidInput(
                f"need one vector row per word: {len(words)} words, array shape {vectors.shape}"
            )
        if vectors.shape[1] < 1:
            raise InvalidInput("embedding dimension must be positive")
        if any(not w or any(c.isspace() for c in w) for w in words):
            raise InvalidInput("words must be non-empty tokens without whitespace")
        index = {}
        for i, w in enumerate(words):
            if w in index:
                raise InvalidInput(f"duplicate word in store: {w!r}")
            index[w] = i
        norms = np.sqrt(np.einsum("ij,ij->i", vectors, vectors))
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DegenerateVector(f"zero-norm vector for word {words[zero[0]]!r}")
        if not np.all(np.isfinite(vectors)):
            raise InvalidInput("embedding vectors must be finite")

        self.words = tuple(words)
        self.index = index
        self.vectors = vectors
        self.vectors.setflags(write=False)
        self._unit = vectors / norms[:, None]
        order = np.argsort(np.array(words, dtype=object), kind="stable")
        rank = np.empty(len(words), dtype=np.int64)
        rank[order] = np.arange(len(words))
        self._lex_rank = rank

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __repr__(self):
        return f"EmbeddingStore(n_words={len(self)}, dim={self.dim})"

    def vector(self, word):
        try:
            return self.vectors[self.index[word]]
        except KeyError:
            raise MissingWord(f"word not in embedding store: {word!r}") from None

    def indices(self, words):
        try:
            return np.array([self.index[w] for w in words], dtype=np.int64)
        except KeyError as exc:
            raise MissingWord(f"word not in embedding store: {exc.args[0]!r}") from None

    def kneighbors(self, indices, k):
        """Top-``k`` neighbours for each row index, excluding the query itself.

        Returns ``(neighbour_indices, similarities)``, both of shape
        ``(len(indices), k)``, sorted by descending similarity with ties
        broken by lexicographic word order.
        """
        indices = np.asarray(indices, dtype=np.int64).ravel()
        n_words = len(self)
        if k < 1 or k > n_words - 1:
            raise InvalidInput(f"k must lie in [1, {n_words - 1}], got {k}")
        out_idx = np.empty((indices.size, k), dtype=np.int64)
        out_sim = np.empty((indices.size, k))
        for start in range(0, indices.size, _BATCH):
            rows = indices[start:start + _BATCH]
            sims = self._unit[rows] @ self._unit.T
            np.clip(sims, -1.0, 1.0, out=sims)
            sims[np.arange(rows.size), rows] = -np.inf
            idx, val = self._top_k(sims, k)
            out_idx[start:start + rows.size] = idx
            out_sim[start:start + rows.size] = val
        return out_idx, out_sim

    def _top_k(self, sims, k):
        n_rows, n_words = sims.shape
        if k + 1 >= n_words:
            cand = np.broadcast_to(np.arange(n_words), sims.shape)
        else:
            cand = np.argpartition(-sims, k, axis=1)[:, : k + 1]
        vals = np.take_along_axis(sims, cand, axis=1)
        order = np.lexsort((self._lex_rank[cand], -vals), axis=-1)
        cand = np.take_along_axis(cand, order, axis=1)
        vals = np.take_along_axis(vals, order, axis=1)
        idx = np.array(cand[:, :k])
        val = np.array(vals[:, :k])
        if cand.shape[1] > k:
            # a tie straddling the cut may involve words the partition left out
            for r in np.flatnonzero(vals[:, k - 1] == vals[:, k]):
                row = sims[r]
                pool = np.flatnonzero(row >= vals[r, k - 1])
                o = np.lexsort((self._lex_rank[pool], -row[pool]))[:k]
                idx[r] = pool[o]
                val[r] = row[pool[o]]
        return idx, val

    # -- persistence -------------------------------------------------------

    @classmethod
    def from_dict(cls, mapping):
        words = list(mapping)
        return cls(words, np.array([mapping[w] for w in words], dtype=float))

    @classmethod
    def load(cls, path):
        """Read the plain-text format: optional ``V D`` header, then ``token x1 ... xD`` lines."""
        words, rows = [], []
        with open(path, encoding="utf-8") as fh:
            first = True
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts:
                    continue
                if first:
                    first = False
                    if len(parts) == 2 and all(p.isdigit() for p in parts):
                        continue
                words.append(parts[0])
                try:
                    rows.append([float(x) for x in parts[1:]])
                except ValueError:
                    raise InvalidInput(f"{path}:{lineno}: non-numeric vector component") from None
        if not words:
            raise InvalidInput(f"{path}: no embeddings found")
        dims = {len(r) for r in rows}
        if len(dims) != 1:
            raise InvalidInput(f"{path}: vectors have inconsistent dimensions {sorted(dims)}")
        return cls(words, np.array(rows))

    def save(self, path, header=True):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            if header:
                fh.write(f"{len(self)} {self.dim}\n")
            for w, v in zip(self.words, self.vectors):
                fh.write(w + " " + " ".join(f"{x:.9g}" for x in v) + "\n")


def nearest_words(store, word, n):
    """The ``n`` words most cosine-similar to ``word``, as ``(token, similarity)`` pairs."""
    if word not in store:
        raise MissingWord(f"word not in embedding store: {word!r}")
    if n < 1 or n > len(store) - 1:
        raise InvalidInput(f"n must lie in [1, {len(store) - 1}], got {n}")
    idx, sims = store.kneighbors([store.index[word]], n)
    return [(store.words[i], float(s)) for i, s in zip(idx[0], sims[0])]
