"""Lexicon entries and the tab-separated lexicon file format."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..emotions import EMOTIONS, N_EMOTIONS
from ..exceptions import InvalidInput


@dataclass(frozen=True)
class LexiconEntry:
    """One emotion word. ``iteration`` is 0 for basic entries, t >= 1 when mined at pass t."""

    word: str
    emotions: tuple
    iteration: int = 0

    def __post_init__(self):
        if not self.word:
            raise InvalidInput("lexicon word must be non-empty")
        if len(self.emotions) != N_EMOTIONS:
            raise InvalidInput(f"{self.word!r}: expected {N_EMOTIONS} intensities")
        object.__setattr__(self, "emotions", tuple(float(x) for x in self.emotions))
        if self.iteration < 0:
            raise InvalidInput("iteration must be >= 0")
        if self.iteration > 0 and not any(x > 0 for x in self.emotions):
            raise InvalidInput(f"mined entry {self.word!r} has no positive intensity")

    @property
    def provenance(self):
        return "basic" if self.iteration == 0 else f"mined:{self.iteration}"

    @property
    def vector(self):
        return np.array(self.emotions)


class Lexicon:
    """Insertion-ordered mapping from word to :class:`LexiconEntry`."""

    def __init__(self, entries=()):
        self._entries = {}
        for e in entries:
            self.add(e)

    @classmethod
    def from_dict(cls, mapping, iteration=0):
        return cls(LexiconEntry(w, tuple(v), iteration) for w, v in mapping.items())

    def add(self, entry):
        if entry.word in self._entries:
            raise InvalidInput(f"duplicate lexicon word: {entry.word!r}")
        self._entries[entry.word] = entry

    def __len__(self):
        return len(self._entries)

    def __contains__(self, word):
        return word in self._entries

    def __iter__(self):
        return iter(self._entries.values())

    def __getitem__(self, word):
        return self._entries[word]

    def __eq__(self, other):
        return isinstance(other, Lexicon) and list(self) == list(other)

    def __repr__(self):
        return f"Lexicon(n_words={len(self)})"

    @property
    def words(self):
        return list(self._entries)

    def intensities(self, word):
        return np.array(self._entries[word].emotions)

    def as_dict(self):
        return {e.word: np.array(e.emotions) for e in self}

    def copy(self):
        return Lexicon(self)

    def subset(self, words):
        return Lexicon(self._entries[w] for w in words)

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = ["\t".join(("word",) + EMOTIONS + ("provenance",))]
        for e in self:
            lines.append("\t".join([e.word, *(f"{x:.6g}" for x in e.emotions), e.provenance]))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        """Read a lexicon file; the provenance column is optional (defaults to basic)."""
        lex = cls()
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if header[:1] != ["word"] or tuple(header[1:1 + N_EMOTIONS]) != EMOTIONS:
                raise InvalidInput(f"{path}: header must be word + {', '.join(EMOTIONS)}")
            has_prov = len(header) > 1 + N_EMOTIONS
            for lineno, line in enumerate(fh, 2):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                try:
                    values = tuple(float(x) for x in parts[1:1 + N_EMOTIONS])
                except ValueError:
                    raise InvalidInput(f"{path}:{lineno}: non-numeric intensity") from None
                iteration = 0
                if has_prov and len(parts) > 1 + N_EMOTIONS:
                    iteration = _parse_provenance(parts[1 + N_EMOTIONS], path, lineno)
                lex.add(LexiconEntry(parts[0], values, iteration))
        return lex


def _parse_provenance(tag, path, lineno):
    tag = tag.strip().lower()
    if tag in ("", "basic"):
        return 0
    if tag.startswith("mined:"):
        try:
            it = int(tag.split(":", 1)[1])
        except ValueError:
            it = -1
        if it >= 1:
            return it
    raise InvalidInput(f"{path}:{lineno}: bad provenance tag {tag!r}")
