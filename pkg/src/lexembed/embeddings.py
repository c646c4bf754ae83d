"""Final embedding table keyed by word, with text import/export.

Text format: first line `<vocab_size> <dim>`, then one `word v1 ... vd`
line per word, values printed at 6 significant digits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError


@dataclass
class EmbeddingTable:
    words: tuple[str, ...]
    vectors: np.ndarray  # (V, d)
    index: dict[str, int] = field(default=None, repr=False)

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise ValueError("vectors must be a (len(words), dim) array")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding vectors must be finite")
        if self.index is None:
            self.index = {w: i for i, w in enumerate(self.words)}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def get(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]

    def save_text(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"{len(self.words)} {self.dim}\n")
            for w, vec in zip(self.words, self.vectors):
                f.write(w + " " + " ".join(f"{v:.6g}" for v in vec) + "\n")

    @classmethod
    def load_text(cls, path) -> "EmbeddingTable":
        with open(path, encoding="utf-8") as f:
            header = f.readline().split()
            if len(header) != 2:
                raise FormatError(f"{path}: expected `vocab_size dim` header line")
            try:
                n, d = int(header[0]), int(header[1])
            except ValueError:
                raise FormatError(f"{path}: non-integer header fields {header!r}")
            words = []
            vectors = np.empty((n, d))
            for k in range(n):
                fields = f.readline().split()
                if len(fields) != d + 1:
                    raise FormatError(
                        f"{path}: row {k + 1} has {len(fields)} fields, expected {d + 1}"
                    )
                words.append(fields[0])
                vectors[k] = [float(v) for v in fields[1:]]
        return cls(tuple(words), vectors)
