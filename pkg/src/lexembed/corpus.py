"""Corpus ingestion: vocabulary construction and sparse co-occurrence counting.

The corpus is plain UTF-8 text, one sentence per line. Context windows never
cross line boundaries. Co-occurrences at token distance l contribute 1/l to
the pair count; distance is measured in surface tokens, so out-of-vocabulary
tokens still occupy positions but generate no entries.
"""

from __future__ import annotations

import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import EmptyVocabularyError, FormatError, TruncatedRecordError

COOC_MAGIC = b"LXCO"
COOC_VERSION = 1
_COOC_HEADER = struct.Struct("<4sIQQ")
_COOC_RECORD_DTYPE = np.dtype([("i", "<u4"), ("j", "<u4"), ("x", "<f8")])

DEFAULT_MIN_COUNT = 20
DEFAULT_WINDOW = 10


def tokenize_line(line: str) -> list[str]:
    """Lowercase a line and split it on Unicode whitespace."""
    return line.lower().split()


@dataclass(frozen=True)
class Vocabulary:
    """Frozen word <-> dense id map with corpus frequencies.

    Ids are assigned in descending frequency order, ties broken
    lexicographically, so id 0 is the most frequent word.
    """

    words: tuple[str, ...]
    index: dict[str, int]
    counts: dict[str, int]
    min_count: int

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def id_of(self, word: str) -> int:
        return self.index[word]

    def word_of(self, idx: int) -> str:
        return self.words[idx]

    def save(self, path) -> None:
        """Write one `word<SPACE>count` line per word, in id order."""
        with open(path, "w", encoding="utf-8") as f:
            for w in self.words:
                f.write(f"{w} {self.counts[w]}\n")

    @classmethod
    def load(cls, path, min_count: int = 1) -> "Vocabulary":
        words = []
        counts = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    word, count = line.rsplit(" ", 1)
                    count = int(count)
                except ValueError:
                    raise FormatError(f"{path}: malformed vocabulary line {lineno}: {line!r}")
                words.append(word)
                counts[word] = count
        if not words:
            raise EmptyVocabularyError(f"{path}: empty vocabulary file")
        index = {w: i for i, w in enumerate(words)}
        return cls(tuple(words), index, counts, min_count)


def build_vocab(lines: Iterable[str], min_count: int = DEFAULT_MIN_COUNT) -> Vocabulary:
    """Count token frequencies and keep tokens with frequency >= min_count.

    Raises EmptyVocabularyError if nothing survives the threshold.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    freq = Counter()
    for line in lines:
        freq.update(tokenize_line(line))
    kept = sorted(
        (w for w, c in freq.items() if c >= min_count),
        key=lambda w: (-freq[w], w),
    )
    if not kept:
        raise EmptyVocabularyError(
            f"no token occurs at least {min_count} times; vocabulary is empty"
        )
    index = {w: i for i, w in enumerate(kept)}
    counts = {w: freq[w] for w in kept}
    return Vocabulary(tuple(kept), index, counts, min_count)


@dataclass
class CoocMatrix:
    """Sparse symmetric-in-value co-occurrence matrix.

    Entries are stored as parallel arrays sorted by (i, j); all stored
    counts are > 0 and each (i, j) key appears at most once.
    """

    row: np.ndarray  # u4, target ids
    col: np.ndarray  # u4, context ids
    val: np.ndarray  # f8, weighted counts
    vocab_size: int
    window: int

    @property
    def nnz(self) -> int:
        return len(self.val)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoocMatrix):
            return NotImplemented
        return (
            self.vocab_size == other.vocab_size
            and self.window == other.window
            and np.array_equal(self.row, other.row)
            and np.array_equal(self.col, other.col)
            and np.array_equal(self.val, other.val)
        )

    def entries(self) -> Iterator[tuple[int, int, float]]:
        for i, j, x in zip(self.row, self.col, self.val):
            yield int(i), int(j), float(x)

    def to_dict(self) -> dict[tuple[int, int], float]:
        return {(int(i), int(j)): float(x) for i, j, x in zip(self.row, self.col, self.val)}


def _encode_corpus(lines: Iterable[str], vocab: Vocabulary, window: int) -> np.ndarray:
    """Map the corpus to one id array, -1 for OOV tokens.

    Lines are separated by `window` sentinel (-1) positions so that no
    in-vocabulary pair within the window can straddle a line boundary.
    """
    index = vocab.index
    pad = [-1] * window
    ids: list[int] = []
    for line in lines:
        toks = tokenize_line(line)
        if not toks:
            continue
        ids.extend(index.get(t, -1) for t in toks)
        ids.extend(pad)
    return np.asarray(ids, dtype=np.int64)


def build_cooccurrence(
    lines: Iterable[str], vocab: Vocabulary, window: int = DEFAULT_WINDOW
) -> CoocMatrix:
    """Count distance-weighted co-occurrences within `window` tokens.

    Every ordered pair at distance l <= window adds 1/l to its entry, so the
    result is symmetric in value. Accumulation is exact: weights are summed
    as integer multiples of 1/lcm(1..window) and divided once at the end,
    making the result independent of accumulation order.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    ids = _encode_corpus(lines, vocab, window)
    V = len(vocab)
    unit = math.lcm(*range(1, window + 1))

    keys_parts: list[np.ndarray] = []
    w_parts: list[np.ndarray] = []
    for l in range(1, window + 1):
        if len(ids) <= l:
            break
        a = ids[:-l]
        b = ids[l:]
        mask = (a >= 0) & (b >= 0)
        if not mask.any():
            continue
        ai = a[mask]
        bj = b[mask]
        w = np.full(len(ai), float(unit // l))
        # both directions: (target, context) and (context, target)
        keys_parts.append(ai * V + bj)
        w_parts.append(w)
        keys_parts.append(bj * V + ai)
        w_parts.append(w)

    if not keys_parts:
        return CoocMatrix(
            np.empty(0, np.uint32), np.empty(0, np.uint32), np.empty(0, np.float64), V, window
        )

    keys = np.concatenate(keys_parts)
    weights = np.concatenate(w_parts)
    uniq, inverse = np.unique(keys, return_inverse=True)
    sums = np.bincount(inverse, weights=weights, minlength=len(uniq))
    row = (uniq // V).astype(np.uint32)
    col = (uniq % V).astype(np.uint32)
    val = sums / unit
    return CoocMatrix(row, col, val, V, window)


def save_cooc(matrix: CoocMatrix, path) -> None:
    """Write the binary co-occurrence format (little-endian, magic LXCO)."""
    records = np.empty(matrix.nnz, dtype=_COOC_RECORD_DTYPE)
    records["i"] = matrix.row
    records["j"] = matrix.col
    records["x"] = matrix.val
    with open(path, "wb") as f:
        f.write(_COOC_HEADER.pack(COOC_MAGIC, COOC_VERSION, matrix.vocab_size, matrix.nnz))
        f.write(struct.pack("<I", matrix.window))
        f.write(records.tobytes())


def load_cooc(path) -> CoocMatrix:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _COOC_HEADER.size + 4:
        raise TruncatedRecordError(f"{path}: file shorter than header")
    magic, version, vocab_size, nnz = _COOC_HEADER.unpack_from(data, 0)
    if magic != COOC_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {COOC_MAGIC!r}")
    if version != COOC_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    (window,) = struct.unpack_from("<I", data, _COOC_HEADER.size)
    body = data[_COOC_HEADER.size + 4 :]
    expected = nnz * _COOC_RECORD_DTYPE.itemsize
    if len(body) != expected:
        raise TruncatedRecordError(
            f"{path}: expected {expected} record bytes for nnz={nnz}, found {len(body)}"
        )
    records = np.frombuffer(body, dtype=_COOC_RECORD_DTYPE)
    return CoocMatrix(
        records["i"].copy(),
        records["j"].copy(),
        records["x"].copy(),
        int(vocab_size),
        int(window),
    )


def read_lines(path) -> Iterator[str]:
    """Stream lines of a UTF-8 corpus file without trailing newlines."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            yield line.rstrip("\n")
