"""lexembed: joint word embedding training from a corpus and a semantic lexicon."""

__version__ = "0.1.0"

from .corpus import (
    CoocMatrix,
    Vocabulary,
    build_cooccurrence,
    build_vocab,
    load_cooc,
    save_cooc,
    tokenize_line,
)
from .embeddings import EmbeddingTable
from .estimator import JointWordEmbedding
from .evaluation import (
    AnalogyDataset,
    EvalReport,
    SimilarityDataset,
    cosine,
    eval_analogy,
    eval_similarity,
    fisher_significance,
    solve_analogy,
    spearman,
)
from .lexicon import RelationSet, load_relations, relation_indicator, symmetrize
from .trainer import (
    Hyperparams,
    Model,
    adagrad_step,
    compose_embeddings,
    compute_gradients,
    load_model,
    objective_total,
    pair_residual,
    save_model,
    train,
    weight_f,
)

__all__ = [
    "AnalogyDataset",
    "CoocMatrix",
    "EmbeddingTable",
    "EvalReport",
    "Hyperparams",
    "JointWordEmbedding",
    "Model",
    "RelationSet",
    "SimilarityDataset",
    "Vocabulary",
    "adagrad_step",
    "build_cooccurrence",
    "build_vocab",
    "compose_embeddings",
    "compute_gradients",
    "cosine",
    "eval_analogy",
    "eval_similarity",
    "fisher_significance",
    "load_cooc",
    "load_model",
    "load_relations",
    "objective_total",
    "pair_residual",
    "relation_indicator",
    "save_cooc",
    "save_model",
    "solve_analogy",
    "spearman",
    "symmetrize",
    "tokenize_line",
    "train",
    "weight_f",
]
