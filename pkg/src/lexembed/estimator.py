"""Scikit-learn style estimator wrapping the full pipeline.

`JointWordEmbedding.fit` takes an iterable of raw text lines (one sentence
per line), builds the vocabulary and co-occurrence matrix, and trains the
joint model. `transform` maps words to their composed embedding vectors.
"""

from __future__ import annotations

from typing import Iterable, Optional, Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import build_cooccurrence, build_vocab
from .lexicon import RelationSet, load_relations, symmetrize
from .trainer import Hyperparams, compose_embeddings, train


class JointWordEmbedding(BaseEstimator, TransformerMixin):
    """Learn word vectors from a corpus with optional lexicon regularization.

    Parameters mirror the training hyperparameters; `relations` may be a
    path to a TSV relation-pair file (requires `relation` to name the label
    to keep) or an already-built RelationSet.
    """

    def __init__(
        self,
        dim: int = 300,
        window: int = 10,
        min_count: int = 20,
        alpha: float = 0.75,
        t_max: float = 100.0,
        learning_rate: float = 0.01,
        epochs: int = 20,
        reg_weight: float = 10000.0,
        relations: Optional[Union[str, RelationSet]] = None,
        relation: Optional[str] = None,
        symmetric: bool = False,
        reg_schedule: str = "union",
        threads: int = 1,
        seed: int = 1,
        adagrad_eps: float = 1e-8,
    ):
        self.dim = dim
        self.window = window
        self.min_count = min_count
        self.alpha = alpha
        self.t_max = t_max
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.reg_weight = reg_weight
        self.relations = relations
        self.relation = relation
        self.symmetric = symmetric
        self.reg_schedule = reg_schedule
        self.threads = threads
        self.seed = seed
        self.adagrad_eps = adagrad_eps

    def _hyperparams(self) -> Hyperparams:
        return Hyperparams(
            dim=self.dim,
            reg_weight=self.reg_weight,
            alpha=self.alpha,
            t_max=self.t_max,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            seed=self.seed,
            adagrad_eps=self.adagrad_eps,
        )

    def fit(self, X: Iterable[str], y=None):
        """Build vocabulary and co-occurrence counts from lines of text, then train."""
        lines = list(X)
        self.vocabulary_ = build_vocab(lines, min_count=self.min_count)
        self.cooc_ = build_cooccurrence(lines, self.vocabulary_, window=self.window)
        rel = self.relations
        if isinstance(rel, (str, bytes)) or hasattr(rel, "__fspath__"):
            if self.relation is None:
                raise ValueError("`relation` must name the label to load from a relation file")
            rel = load_relations(rel, self.relation, self.vocabulary_)
        if rel is not None and self.symmetric:
            rel = symmetrize(rel)
        self.relation_set_ = rel
        self.model_ = train(
            self.cooc_,
            rel,
            self._hyperparams(),
            reg_schedule=self.reg_schedule,
            threads=self.threads,
        )
        self.embeddings_ = compose_embeddings(self.model_, self.vocabulary_)
        self.n_features_out_ = self.dim
        return self

    def transform(self, X: Iterable[str]) -> np.ndarray:
        """Map an iterable of words to their embedding vectors, (n, dim)."""
        check_is_fitted(self, "embeddings_")
        words = list(X)
        missing = [w for w in words if w.lower() not in self.embeddings_]
        if missing:
            raise ValueError(f"words not in vocabulary: {missing[:5]!r}")
        return np.stack([self.embeddings_.get(w.lower()) for w in words])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "embeddings_")
        return np.asarray([f"dim_{k}" for k in range(self.dim)], dtype=object)
