"""Shared fixtures and independent oracles used across the test suite."""

from fractions import Fraction

import numpy as np
import pytest

from lexembed.corpus import tokenize_line


def brute_force_cooc(lines, vocab, window):
    """Position-pair double loop, exact rational accumulation.

    Independent of the production counting path: iterates every ordered
    position pair per line and sums Fractions, converting to float once.
    """
    acc = {}
    for line in lines:
        toks = tokenize_line(line)
        for p in range(len(toks)):
            for q in range(len(toks)):
                l = abs(p - q)
                if p == q or l > window:
                    continue
                if toks[p] in vocab and toks[q] in vocab:
                    key = (vocab.id_of(toks[p]), vocab.id_of(toks[q]))
                    acc[key] = acc.get(key, Fraction(0)) + Fraction(1, l)
    return {k: float(v) for k, v in acc.items()}


def random_corpus(rng, n_tokens, vocab_size=12, max_line_len=15):
    """Random lines over a small alphabet, roughly n_tokens tokens total."""
    words = [f"w{k}" for k in range(vocab_size)]
    lines = []
    total = 0
    while total < n_tokens:
        n = int(rng.integers(1, max_line_len + 1))
        lines.append(" ".join(rng.choice(words, size=n)))
        total += n
    return lines


def zipf_corpus(rng, n_tokens, vocab_size=500, line_len=20, exponent=1.2):
    """Synthetic corpus with a Zipf-like unigram distribution."""
    ranks = np.arange(1, vocab_size + 1)
    probs = 1.0 / ranks**exponent
    probs /= probs.sum()
    words = np.array([f"w{k}" for k in range(vocab_size)])
    n_lines = max(1, n_tokens // line_len)
    idx = rng.choice(vocab_size, size=(n_lines, line_len), p=probs)
    return [" ".join(row) for row in words[idx]]


def summed_gradients(model, cooc, rel, hp, schedule="union"):
    """Total analytic gradient of the joint objective, built by summing the
    per-entry contributions over stored entries plus relation-only edges."""
    from lexembed.trainer import compute_gradients

    gW = np.zeros_like(model.w_target)
    gWt = np.zeros_like(model.w_context)
    gb = np.zeros_like(model.b_target)
    gbt = np.zeros_like(model.b_context)
    stored = set()
    for i, j, x in cooc.entries():
        stored.add((i, j))
        g_wi, g_bi, g_wj, g_bj = compute_gradients(model, i, j, x, rel, hp)
        gW[i] += g_wi
        gb[i] += g_bi
        gWt[j] += g_wj
        gbt[j] += g_bj
    if schedule == "union" and rel is not None and hp.reg_weight != 0.0:
        for i, j in sorted(rel.pairs):
            if (i, j) in stored:
                continue
            g_wi, g_bi, g_wj, g_bj = compute_gradients(model, i, j, None, rel, hp)
            gW[i] += g_wi
            gb[i] += g_bi
            gWt[j] += g_wj
            gbt[j] += g_bj
    return gW, gb, gWt, gbt


def finite_difference_gradients(model, cooc, rel, hp, h=1e-6):
    """Central differences of the total objective w.r.t. every parameter."""
    from lexembed.trainer import objective_total

    def total():
        return objective_total(model, cooc, rel, hp)[0]

    grads = []
    for arr in (model.w_target, model.b_target, model.w_context, model.b_context):
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            jp = total()
            flat[k] = orig - h
            jm = total()
            flat[k] = orig
            gflat[k] = (jp - jm) / (2 * h)
        grads.append(g)
    return grads[0], grads[1], grads[2], grads[3]


def max_relative_error(analytic, numeric):
    errs = []
    for a, f in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1.0)
        errs.append(float(np.max(np.abs(a - f) / denom)))
    return max(errs)


def random_instance(rng, vocab_size=10, dim=5, max_nnz=20, max_rel=5, reg_weight=1.0):
    """Small random model + cooc matrix + relation set for gradient checks."""
    from lexembed.corpus import CoocMatrix
    from lexembed.lexicon import RelationSet
    from lexembed.trainer import Hyperparams, Model

    hp = Hyperparams(dim=dim, reg_weight=reg_weight, epochs=1, seed=int(rng.integers(1 << 30)))
    nnz = int(rng.integers(1, min(max_nnz, vocab_size * vocab_size) + 1))
    seen = set()
    while len(seen) < nnz:
        seen.add((int(rng.integers(vocab_size)), int(rng.integers(vocab_size))))
    ii = np.array([p[0] for p in sorted(seen)], np.uint32)
    jj = np.array([p[1] for p in sorted(seen)], np.uint32)
    xx = rng.uniform(0.2, 150.0, size=len(seen))
    cooc = CoocMatrix(ii, jj, xx, vocab_size, 10)
    n_rel = int(rng.integers(0, max_rel + 1))
    pairs = frozenset(
        (int(rng.integers(vocab_size)), int(rng.integers(vocab_size))) for _ in range(n_rel)
    )
    rel = RelationSet("r", pairs, vocab_size)
    model = Model(
        w_target=rng.uniform(-1, 1, (vocab_size, dim)),
        w_context=rng.uniform(-1, 1, (vocab_size, dim)),
        b_target=rng.uniform(-0.5, 0.5, vocab_size),
        b_context=rng.uniform(-0.5, 0.5, vocab_size),
        g_w_target=np.zeros((vocab_size, dim)),
        g_w_context=np.zeros((vocab_size, dim)),
        g_b_target=np.zeros(vocab_size),
        g_b_context=np.zeros(vocab_size),
    )
    return model, cooc, rel, hp


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
