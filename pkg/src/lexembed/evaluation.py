"""Intrinsic evaluation: similarity benchmarks (Spearman + Fisher z) and
proportional analogies solved by vector offset with cosine scoring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .embeddings import EmbeddingTable
from .errors import InsufficientCoverageError, LexembedError, ParseError, ZeroVectorError


@dataclass(frozen=True)
class SimilarityDataset:
    name: str
    pairs: tuple[tuple[str, str, float], ...]  # (word1, word2, gold rating)


@dataclass(frozen=True)
class AnalogyDataset:
    name: str
    sections: tuple[tuple[str, tuple[tuple[str, str, str, str], ...]], ...]

    @property
    def n_questions(self) -> int:
        return sum(len(qs) for _, qs in self.sections)


@dataclass
class EvalReport:
    dataset: str
    metric: str  # "spearman" or "accuracy"
    value: float
    n_scored: int
    n_total: int
    z: Optional[float] = None
    p: Optional[float] = None
    sections: Optional[dict[str, tuple[float, int, int]]] = None

    @property
    def coverage(self) -> float:
        return self.n_scored / self.n_total if self.n_total else 0.0

    def tsv_row(self) -> str:
        z = "" if self.z is None else f"{self.z:.6g}"
        p = "" if self.p is None else f"{self.p:.6g}"
        return (
            f"{self.dataset}\t{self.metric}\t{self.value:.6g}\t"
            f"{self.n_scored}\t{self.n_total}\t{z}\t{p}"
        )


def load_similarity_dataset(path, name: Optional[str] = None) -> SimilarityDataset:
    """Read `word1<TAB>word2<TAB>score` lines; `#` lines are comments."""
    pairs = []
    seen = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    f"{path}: line {lineno}: expected 3 tab-separated fields", lineno
                )
            w1, w2, score = fields[0].lower(), fields[1].lower(), fields[2]
            try:
                gold = float(score)
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: bad score {score!r}", lineno)
            if not math.isfinite(gold):
                raise ParseError(f"{path}: line {lineno}: non-finite score", lineno)
            if (w1, w2) in seen:
                raise ParseError(f"{path}: line {lineno}: duplicate pair {w1!r}/{w2!r}", lineno)
            seen.add((w1, w2))
            pairs.append((w1, w2, gold))
    return SimilarityDataset(name or str(path), tuple(pairs))


def load_analogy_dataset(path, name: Optional[str] = None) -> AnalogyDataset:
    """Read the Google analogy format: `: section` headers, then 4 words per line."""
    sections: list[tuple[str, list]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(":"):
                label = line[1:].strip()
                if any(lbl == label for lbl, _ in sections):
                    raise ParseError(f"{path}: line {lineno}: duplicate section {label!r}", lineno)
                sections.append((label, []))
                continue
            words = line.lower().split()
            if len(words) != 4:
                raise ParseError(
                    f"{path}: line {lineno}: expected 4 words, got {len(words)}", lineno
                )
            if not sections:
                sections.append(("default", []))
            sections[-1][1].append(tuple(words))
    return AnalogyDataset(
        name or str(path), tuple((lbl, tuple(qs)) for lbl, qs in sections)
    )


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two equal-length vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine similarity is undefined for a zero vector")
    return float(u @ v / (nu * nv))


def spearman(gold: Sequence[float], pred: Sequence[float]) -> float:
    """Pearson correlation of average-ranked data (ties get averaged ranks)."""
    if len(gold) != len(pred):
        raise ValueError("gold and pred must have equal length")
    if len(gold) < 2:
        raise ValueError("need at least 2 observations")
    rg = rankdata(gold)
    rp = rankdata(pred)
    rg = rg - rg.mean()
    rp = rp - rp.mean()
    denom = math.sqrt(float(rg @ rg) * float(rp @ rp))
    if denom == 0.0:
        raise LexembedError("degenerate ranking: zero rank variance")
    return float(rg @ rp) / denom


def fisher_significance(rho: float, n: int) -> tuple[float, float]:
    """Fisher z statistic atanh(rho)*sqrt(n-3) and its two-sided normal p-value."""
    if abs(rho) >= 1:
        raise ValueError(f"|rho| must be < 1, got {rho}")
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    z = math.atanh(rho) * math.sqrt(n - 3)
    p = math.erfc(abs(z) / math.sqrt(2))
    return z, p


def eval_similarity(emb: EmbeddingTable, ds: SimilarityDataset) -> EvalReport:
    """Spearman correlation between gold ratings and cosine similarities,
    over the pairs with both words in the vocabulary."""
    if not ds.pairs:
        raise ValueError(f"dataset {ds.name} is empty")
    gold = []
    pred = []
    for w1, w2, rating in ds.pairs:
        if w1 in emb and w2 in emb:
            gold.append(rating)
            pred.append(cosine(emb.get(w1), emb.get(w2)))
    if len(gold) < 2:
        raise InsufficientCoverageError(
            f"{ds.name}: only {len(gold)} of {len(ds.pairs)} pairs are in vocabulary"
        )
    rho = spearman(gold, pred)
    if abs(rho) < 1 and len(gold) >= 4:
        z, p = fisher_significance(rho, len(gold))
    else:
        z, p = None, None
    return EvalReport(ds.name, "spearman", rho, len(gold), len(ds.pairs), z, p)


def _normalized_rows(emb: EmbeddingTable) -> np.ndarray:
    norms = np.linalg.norm(emb.vectors, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return emb.vectors / safe


def solve_analogy(
    emb: EmbeddingTable,
    a: str,
    b: str,
    c: str,
    normalized: Optional[np.ndarray] = None,
) -> str:
    """Predict the word completing a:b :: c:?, scanning the whole vocabulary.

    Candidates are ranked by cosine with (v_b - v_a + v_c); the three query
    words are excluded. Ties break toward the lowest word id.
    """
    for w in (a, b, c):
        if w not in emb:
            raise KeyError(f"query word {w!r} not in vocabulary")
    if normalized is None:
        normalized = _normalized_rows(emb)
    target = emb.get(b) - emb.get(a) + emb.get(c)
    norm = np.linalg.norm(target)
    if norm == 0.0:
        raise ZeroVectorError("offset vector b - a + c is zero")
    scores = normalized @ (target / norm)
    for w in (a, b, c):
        scores[emb.index[w]] = -np.inf
    return emb.words[int(np.argmax(scores))]


def eval_analogy(emb: EmbeddingTable, ds: AnalogyDataset) -> EvalReport:
    """Accuracy of analogy predictions per section and overall; questions with
    any out-of-vocabulary word are skipped and counted in coverage."""
    if not ds.sections or ds.n_questions == 0:
        raise ValueError(f"dataset {ds.name} is empty")
    normalized = _normalized_rows(emb)
    sections: dict[str, tuple[float, int, int]] = {}
    correct_total = 0
    scored_total = 0
    for label, questions in ds.sections:
        correct = 0
        scored = 0
        for a, b, c, d in questions:
            if any(w not in emb for w in (a, b, c, d)):
                continue
            scored += 1
            if solve_analogy(emb, a, b, c, normalized=normalized) == d:
                correct += 1
        acc = correct / scored if scored else float("nan")
        sections[label] = (acc, scored, len(questions))
        correct_total += correct
        scored_total += scored
    if scored_total == 0:
        raise InsufficientCoverageError(f"{ds.name}: no question fully in vocabulary")
    return EvalReport(
        ds.name,
        "accuracy",
        correct_total / scored_total,
        scored_total,
        ds.n_questions,
        sections=sections,
    )
