"""Joint embedding training: weighted least-squares co-occurrence fit plus a
lexicon pull term, minimized by AdaGrad-scheduled SGD.

The loss is J = J_C + lambda * J_S where J_C is the weighted squared error
between vector inner products (plus biases) and log co-occurrence counts,
and J_S is half the summed squared distance between target and context
vectors of lexicon-related word pairs.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, TextIO

import numpy as np

from . import _kernels
from .corpus import CoocMatrix, Vocabulary
from .embeddings import EmbeddingTable
from .errors import FormatError, TrainingDivergedError, TruncatedRecordError
from .lexicon import RelationSet

MODEL_MAGIC = b"LXMD"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<4sIQQI")  # magic, version, vocab_size, dim, flags
_FLAG_HAS_OPTIMIZER_STATE = 1


@dataclass
class Hyperparams:
    """Training hyperparameters with their standard defaults."""

    dim: int = 300
    reg_weight: float = 10000.0  # lambda; 0 disables the lexicon term
    alpha: float = 0.75
    t_max: float = 100.0
    learning_rate: float = 0.01
    epochs: int = 20
    seed: int = 1
    adagrad_eps: float = 1e-8

    def validate(self) -> None:
        if self.dim <= 0:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.reg_weight < 0:
            raise ValueError(f"reg_weight must be >= 0, got {self.reg_weight}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.t_max <= 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.adagrad_eps <= 0:
            raise ValueError(f"adagrad_eps must be positive, got {self.adagrad_eps}")


@dataclass
class Model:
    """Trained parameters: target/context vectors, biases, AdaGrad accumulators."""

    w_target: np.ndarray  # (V, d)
    w_context: np.ndarray  # (V, d)
    b_target: np.ndarray  # (V,)
    b_context: np.ndarray  # (V,)
    g_w_target: np.ndarray
    g_w_context: np.ndarray
    g_b_target: np.ndarray
    g_b_context: np.ndarray

    @property
    def vocab_size(self) -> int:
        return self.w_target.shape[0]

    @property
    def dim(self) -> int:
        return self.w_target.shape[1]

    def check_finite(self) -> None:
        for arr in (self.w_target, self.w_context, self.b_target, self.b_context):
            if not np.all(np.isfinite(arr)):
                raise TrainingDivergedError("non-finite value in model parameters")


def init_model(vocab_size: int, hp: Hyperparams) -> Model:
    """Vectors uniform in [-1, +1] from the seeded RNG; biases and accumulators zero."""
    rng = np.random.default_rng(hp.seed)
    shape = (vocab_size, hp.dim)
    return Model(
        w_target=rng.uniform(-1.0, 1.0, shape),
        w_context=rng.uniform(-1.0, 1.0, shape),
        b_target=np.zeros(vocab_size),
        b_context=np.zeros(vocab_size),
        g_w_target=np.zeros(shape),
        g_w_context=np.zeros(shape),
        g_b_target=np.zeros(vocab_size),
        g_b_context=np.zeros(vocab_size),
    )


def weight_f(t: float, alpha: float = 0.75, t_max: float = 100.0) -> float:
    """Discounting weight for a co-occurrence count: (t/t_max)^alpha below t_max, else 1."""
    if t < 0:
        raise ValueError(f"count must be >= 0, got {t}")
    if t < t_max:
        return (t / t_max) ** alpha
    return 1.0


def pair_residual(model: Model, i: int, j: int, x: float) -> float:
    """Inner product plus biases minus log count for one stored entry."""
    return float(
        model.w_target[i] @ model.w_context[j]
        + model.b_target[i]
        + model.b_context[j]
        - math.log(x)
    )


def objective_total(
    model: Model, cooc: CoocMatrix, rel: Optional[RelationSet], hp: Hyperparams
) -> tuple[float, float, float]:
    """Return (J, J_C, J_S) over all stored entries and all relation pairs."""
    ii = cooc.row.astype(np.intp)
    jj = cooc.col.astype(np.intp)
    x = cooc.val
    resid = (
        np.einsum("ij,ij->i", model.w_target[ii], model.w_context[jj])
        + model.b_target[ii]
        + model.b_context[jj]
        - np.log(x)
    )
    fx = np.where(x < hp.t_max, (x / hp.t_max) ** hp.alpha, 1.0)
    j_c = 0.5 * float(fx @ resid**2)
    j_s = 0.0
    if rel is not None and len(rel) > 0:
        ri = np.fromiter((p[0] for p in sorted(rel.pairs)), dtype=np.intp, count=len(rel))
        rj = np.fromiter((p[1] for p in sorted(rel.pairs)), dtype=np.intp, count=len(rel))
        diff = model.w_target[ri] - model.w_context[rj]
        j_s = 0.5 * float(np.sum(diff * diff))
    j = j_c + hp.reg_weight * j_s
    if not (math.isfinite(j) and math.isfinite(j_c) and math.isfinite(j_s)):
        raise TrainingDivergedError(f"non-finite objective: J={j}, J_C={j_c}, J_S={j_s}")
    return j, j_c, j_s


def compute_gradients(
    model: Model,
    i: int,
    j: int,
    x: Optional[float],
    rel: Optional[RelationSet],
    hp: Hyperparams,
) -> tuple[np.ndarray, float, np.ndarray, float]:
    """Per-entry gradient contributions (target vector, target bias,
    context vector, context bias).

    x is None for a relation-only visit, which carries no residual term.
    All four gradients use pre-update parameter values.
    """
    wi = model.w_target[i]
    wj = model.w_context[j]
    if x is not None:
        r = pair_residual(model, i, j, x)
        c = weight_f(x, hp.alpha, hp.t_max) * r
    else:
        c = 0.0
    g_wi = c * wj
    g_wj = c * wi
    if rel is not None and hp.reg_weight != 0.0 and rel.indicator(i, j):
        diff = wi - wj
        g_wi = g_wi + hp.reg_weight * diff
        g_wj = g_wj - hp.reg_weight * diff
    return g_wi, c, g_wj, c


def adagrad_step(
    param: np.ndarray, accum: np.ndarray, grad: np.ndarray, lr0: float, eps: float
) -> tuple[np.ndarray, np.ndarray]:
    """In-place AdaGrad update; returns the mutated (param, accum)."""
    accum += grad * grad
    param -= lr0 * grad / (np.sqrt(accum) + eps)
    return param, accum


def _build_visit_arrays(
    cooc: CoocMatrix, rel: Optional[RelationSet], hp: Hyperparams, reg_schedule: str
):
    """Flatten the visit list: stored entries first, then relation-only edges."""
    n_cooc = cooc.nnz
    stored = set(zip(cooc.row.tolist(), cooc.col.tolist()))
    rel_only: list[tuple[int, int]] = []
    rel_pairs: set[tuple[int, int]] = set()
    if rel is not None and hp.reg_weight != 0.0:
        rel_pairs = {(int(i), int(j)) for i, j in rel.pairs}
        if reg_schedule == "union":
            rel_only = sorted(p for p in rel_pairs if p not in stored)
    n = n_cooc + len(rel_only)
    ii = np.empty(n, np.int64)
    jj = np.empty(n, np.int64)
    fx = np.zeros(n)
    logx = np.zeros(n)
    has_cooc = np.zeros(n, np.bool_)
    has_rel = np.zeros(n, np.bool_)
    ii[:n_cooc] = cooc.row
    jj[:n_cooc] = cooc.col
    x = cooc.val
    fx[:n_cooc] = np.where(x < hp.t_max, (x / hp.t_max) ** hp.alpha, 1.0)
    logx[:n_cooc] = np.log(x)
    has_cooc[:n_cooc] = True
    if rel_pairs:
        has_rel[:n_cooc] = [
            (int(i), int(j)) in rel_pairs for i, j in zip(cooc.row, cooc.col)
        ]
    for t, (i, j) in enumerate(rel_only):
        ii[n_cooc + t] = i
        jj[n_cooc + t] = j
        has_rel[n_cooc + t] = True
    return ii, jj, fx, logx, has_cooc, has_rel


def train(
    cooc: CoocMatrix,
    rel: Optional[RelationSet],
    hp: Hyperparams,
    reg_schedule: str = "union",
    threads: int = 1,
    diagnostics: Optional[TextIO] = None,
    epoch_callback: Optional[Callable[[int, Model], None]] = None,
) -> Model:
    """Run T epochs of AdaGrad SGD over the shuffled visit list.

    With threads == 1 the run is bit-reproducible for a fixed seed. With
    threads > 1 updates are applied hogwild-style to shared parameters.
    Per-epoch (J, J_C, J_S) lines go to `diagnostics` as TSV when given.
    """
    hp.validate()
    if cooc.nnz == 0:
        raise ValueError("co-occurrence matrix is empty")
    if reg_schedule not in ("union", "cooc-only"):
        raise ValueError(f"unknown reg_schedule {reg_schedule!r}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")

    model = init_model(cooc.vocab_size, hp)
    ii, jj, fx, logx, has_cooc, has_rel = _build_visit_arrays(cooc, rel, hp, reg_schedule)
    use_joint = bool(has_rel.any())
    rng = np.random.default_rng(hp.seed + 1)  # separate stream from initialization

    args = (
        model.w_target,
        model.w_context,
        model.b_target,
        model.b_context,
        model.g_w_target,
        model.g_w_context,
        model.g_b_target,
        model.g_b_context,
        ii,
        jj,
        fx,
        logx,
    )
    def run_slice(order_slice: np.ndarray) -> None:
        if use_joint:
            _kernels.sgd_epoch_joint(
                *args,
                has_cooc,
                has_rel,
                order_slice,
                hp.reg_weight,
                hp.learning_rate,
                hp.adagrad_eps,
            )
        else:
            _kernels.sgd_epoch_plain(*args, order_slice, hp.learning_rate, hp.adagrad_eps)

    for epoch in range(1, hp.epochs + 1):
        order = rng.permutation(len(ii)).astype(np.int64)
        if threads == 1:
            run_slice(order)
        else:
            # hogwild: workers update shared arrays without locking (the
            # kernels release the GIL); benign races are part of the contract
            import threading

            workers = [
                threading.Thread(target=run_slice, args=(chunk,))
                for chunk in np.array_split(order, threads)
            ]
            for w in workers:
                w.start()
            for w in workers:
                w.join()
        model.check_finite()
        j, j_c, j_s = objective_total(model, cooc, rel, hp)
        if diagnostics is not None:
            diagnostics.write(f"{epoch}\t{j:.10g}\t{j_c:.10g}\t{j_s:.10g}\n")
        if epoch_callback is not None:
            epoch_callback(epoch, model)
    return model


def compose_embeddings(model: Model, vocab: Vocabulary) -> EmbeddingTable:
    """Final representation of each word: target vector plus context vector."""
    return EmbeddingTable(tuple(vocab.words), model.w_target + model.w_context)


def save_model(model: Model, path, include_optimizer_state: bool = True) -> None:
    """Binary checkpoint: header LXMD then the four parameter arrays as f64,
    optionally followed by the four AdaGrad accumulators."""
    flags = _FLAG_HAS_OPTIMIZER_STATE if include_optimizer_state else 0
    with open(path, "wb") as f:
        f.write(
            _MODEL_HEADER.pack(MODEL_MAGIC, MODEL_VERSION, model.vocab_size, model.dim, flags)
        )
        for arr in (model.w_target, model.w_context, model.b_target, model.b_context):
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        if include_optimizer_state:
            for arr in (
                model.g_w_target,
                model.g_w_context,
                model.g_b_target,
                model.g_b_context,
            ):
                f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> Model:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _MODEL_HEADER.size:
        raise TruncatedRecordError(f"{path}: file shorter than header")
    magic, version, vocab_size, dim, flags = _MODEL_HEADER.unpack_from(data, 0)
    if magic != MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MODEL_MAGIC!r}")
    if version != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    V, d = int(vocab_size), int(dim)
    sizes = [V * d, V * d, V, V]
    if flags & _FLAG_HAS_OPTIMIZER_STATE:
        sizes = sizes * 2
    expected = _MODEL_HEADER.size + 8 * sum(sizes)
    if len(data) != expected:
        raise TruncatedRecordError(f"{path}: expected {expected} bytes, found {len(data)}")
    offset = _MODEL_HEADER.size
    arrays = []
    for size in sizes:
        arrays.append(np.frombuffer(data, dtype="<f8", count=size, offset=offset).copy())
        offset += 8 * size
    w, wt, b, bt = arrays[:4]
    if flags & _FLAG_HAS_OPTIMIZER_STATE:
        gw, gwt, gb, gbt = arrays[4:]
    else:
        gw, gwt = np.zeros(V * d), np.zeros(V * d)
        gb, gbt = np.zeros(V), np.zeros(V)
    return Model(
        w.reshape(V, d),
        wt.reshape(V, d),
        b,
        bt,
        gw.reshape(V, d),
        gwt.reshape(V, d),
        gb,
        gbt,
    )
