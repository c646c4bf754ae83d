import io
import math

import numpy as np
import pytest

from lexembed.corpus import build_cooccurrence, build_vocab
from lexembed.errors import FormatError, TrainingDivergedError, TruncatedRecordError
from lexembed.lexicon import RelationSet, empty_relation_set
from lexembed.trainer import (
    Hyperparams,
    adagrad_step,
    compose_embeddings,
    compute_gradients,
    init_model,
    load_model,
    objective_total,
    pair_residual,
    save_model,
    train,
    weight_f,
    _build_visit_arrays,
)

from conftest import (
    finite_difference_gradients,
    max_relative_error,
    random_corpus,
    random_instance,
    summed_gradients,
)


class TestWeightF:
    def test_at_cap(self):
        assert weight_f(100.0, 0.75, 100.0) == 1.0

    def test_above_cap(self):
        assert weight_f(250.0, 0.75, 100.0) == 1.0

    def test_zero(self):
        assert weight_f(0.0) == 0.0

    def test_half_cap(self):
        assert weight_f(50.0, 0.75, 100.0) == pytest.approx(0.5**0.75, abs=1e-12)

    def test_monotone(self, rng):
        ts = np.sort(rng.uniform(0, 200, 100))
        vals = [weight_f(t) for t in ts]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            weight_f(-1.0)


class TestPairResidual:
    def test_zero_vectors_unit_count(self, rng):
        model, cooc, rel, hp = random_instance(rng)
        model.w_target[:] = 0
        model.w_context[:] = 0
        model.b_target[:] = 0
        model.b_context[:] = 0
        assert pair_residual(model, 0, 1, 1.0) == 0.0

    def test_zero_vectors_count_e(self, rng):
        model, _, _, _ = random_instance(rng)
        model.w_target[:] = 0
        model.w_context[:] = 0
        model.b_target[:] = 0
        model.b_context[:] = 0
        assert pair_residual(model, 0, 1, math.e) == pytest.approx(-1.0, abs=1e-12)

    def test_exact_fit(self, rng):
        model, _, _, _ = random_instance(rng)
        x = 3.7
        model.b_target[0] = 0.0
        model.b_context[1] = math.log(x) - float(model.w_target[0] @ model.w_context[1])
        assert pair_residual(model, 0, 1, x) == pytest.approx(0.0, abs=1e-12)


class TestObjective:
    def test_lambda_zero_means_corpus_only(self, rng):
        model, cooc, rel, hp = random_instance(rng, reg_weight=0.0)
        j, j_c, j_s = objective_total(model, cooc, rel, hp)
        assert j == j_c

    def test_empty_relations_zero_penalty(self, rng):
        model, cooc, _, hp = random_instance(rng)
        _, _, j_s = objective_total(model, cooc, empty_relation_set("r", 10), hp)
        assert j_s == 0.0

    def test_matched_vectors_zero_penalty(self, rng):
        model, cooc, _, hp = random_instance(rng)
        rel = RelationSet("r", frozenset({(2, 3)}), 10)
        model.w_target[2] = model.w_context[3]
        _, _, j_s = objective_total(model, cooc, rel, hp)
        assert j_s == pytest.approx(0.0, abs=1e-15)

    def test_non_finite_raises(self, rng):
        model, cooc, rel, hp = random_instance(rng)
        i, _, _ = next(cooc.entries())
        model.b_target[i] = np.nan
        with pytest.raises(TrainingDivergedError):
            objective_total(model, cooc, rel, hp)


class TestGradients:
    def test_stationary_without_relation(self, rng):
        model, _, _, hp = random_instance(rng)
        x = 2.0
        model.b_context[1] = math.log(x) - float(
            model.w_target[0] @ model.w_context[1] + model.b_target[0]
        )
        rel = empty_relation_set("r", 10)
        g_wi, g_bi, g_wj, g_bj = compute_gradients(model, 0, 1, x, rel, hp)
        assert np.allclose(g_wi, 0, atol=1e-12) and np.allclose(g_wj, 0, atol=1e-12)
        assert abs(g_bi) < 1e-12 and abs(g_bj) < 1e-12

    def test_stationary_with_relation_at_minimum(self, rng):
        model, _, _, hp = random_instance(rng)
        rel = RelationSet("r", frozenset({(0, 1)}), 10)
        model.w_target[0] = model.w_context[1]
        x = 2.0
        model.b_context[1] = math.log(x) - float(
            model.w_target[0] @ model.w_context[1] + model.b_target[0]
        )
        g_wi, g_bi, g_wj, g_bj = compute_gradients(model, 0, 1, x, rel, hp)
        assert np.allclose(g_wi, 0, atol=1e-10) and np.allclose(g_wj, 0, atol=1e-10)

    @pytest.mark.parametrize("reg_weight", [0.0, 1.0, 1e4])
    def test_matches_finite_differences(self, rng, reg_weight):
        for _ in range(3):
            model, cooc, rel, hp = random_instance(rng, reg_weight=reg_weight)
            analytic = summed_gradients(model, cooc, rel, hp)
            numeric = finite_difference_gradients(model, cooc, rel, hp)
            assert max_relative_error(analytic, numeric) < 1e-5


class TestAdagrad:
    def test_zero_grad_is_noop(self):
        p = np.array([1.0, -2.0])
        a = np.array([0.5, 0.0])
        p2, a2 = adagrad_step(p, a, np.zeros(2), lr0=0.1, eps=1e-8)
        assert np.array_equal(p2, [1.0, -2.0])
        assert np.array_equal(a2, [0.5, 0.0])

    def test_first_step_magnitude_is_lr(self):
        p = np.array([0.0])
        a = np.array([0.0])
        adagrad_step(p, a, np.array([3.0]), lr0=0.05, eps=1e-12)
        assert p[0] == pytest.approx(-0.05, rel=1e-9)

    def test_second_identical_step_shrinks_by_sqrt2(self):
        p = np.array([0.0])
        a = np.array([0.0])
        adagrad_step(p, a, np.array([3.0]), lr0=0.05, eps=1e-12)
        first = p[0]
        adagrad_step(p, a, np.array([3.0]), lr0=0.05, eps=1e-12)
        assert (p[0] - first) == pytest.approx(-0.05 / math.sqrt(2), rel=1e-9)

    def test_accumulator_monotone(self, rng):
        p = rng.normal(size=8)
        a = np.zeros(8)
        prev = a.copy()
        for _ in range(10):
            adagrad_step(p, a, rng.normal(size=8), lr0=0.01, eps=1e-8)
            assert np.all(a >= prev)
            prev = a.copy()


def toy_setup(rng, n_tokens=2000, min_count=1, window=5):
    lines = random_corpus(rng, n_tokens=n_tokens)
    vocab = build_vocab(lines, min_count=min_count)
    cooc = build_cooccurrence(lines, vocab, window=window)
    return lines, vocab, cooc


class TestTrain:
    def test_deterministic_given_seed(self, rng):
        _, vocab, cooc = toy_setup(rng)
        hp = Hyperparams(dim=8, epochs=3, reg_weight=0.0, seed=11)
        m1 = train(cooc, None, hp)
        m2 = train(cooc, None, hp)
        assert np.array_equal(m1.w_target, m2.w_target)
        assert np.array_equal(m1.w_context, m2.w_context)
        assert np.array_equal(m1.b_target, m2.b_target)
        assert np.array_equal(m1.g_w_target, m2.g_w_target)

    def test_lambda_zero_matches_no_relations_bitwise(self, rng):
        _, vocab, cooc = toy_setup(rng)
        rel = RelationSet("r", frozenset({(0, 1), (2, 0)}), len(vocab))
        hp = Hyperparams(dim=8, epochs=3, reg_weight=0.0, seed=11)
        with_rel = train(cooc, rel, hp)
        without = train(cooc, None, hp)
        assert np.array_equal(with_rel.w_target, without.w_target)
        assert np.array_equal(with_rel.w_context, without.w_context)

    def test_visit_count_includes_relation_only_edges(self):
        lines = ["a b"] * 5
        vocab = build_vocab(lines, min_count=1)
        cooc = build_cooccurrence(lines, vocab, window=5)
        assert (0, 0) not in cooc.to_dict()
        rel = RelationSet("r", frozenset({(0, 0)}), len(vocab))
        hp = Hyperparams(dim=4, epochs=1, reg_weight=1.0, seed=1)
        ii, *_ = _build_visit_arrays(cooc, rel, hp, "union")
        assert len(ii) == cooc.nnz + 1
        ii, *_ = _build_visit_arrays(cooc, rel, hp, "cooc-only")
        assert len(ii) == cooc.nnz

    def test_objective_decreases(self, rng):
        _, vocab, cooc = toy_setup(rng, n_tokens=5000)
        hp = Hyperparams(dim=10, epochs=10, reg_weight=0.0, seed=3)
        diag = io.StringIO()
        train(cooc, None, hp, diagnostics=diag)
        rows = [line.split("\t") for line in diag.getvalue().splitlines()]
        assert len(rows) == 10
        j_first, j_last = float(rows[0][1]), float(rows[-1][1])
        assert j_last < j_first

    def test_regularizer_pull_single_step(self, rng):
        # one visited entry with an exact residual fit: the lexicon term must
        # strictly shrink the target/context gap
        model, cooc, _, hp = random_instance(rng, reg_weight=2.0)
        i, j, x = next(cooc.entries())
        rel = RelationSet("r", frozenset({(i, j)}), 10)
        model.b_context[j] = math.log(x) - float(
            model.w_target[i] @ model.w_context[j] + model.b_target[i]
        )
        before = float(np.linalg.norm(model.w_target[i] - model.w_context[j]))
        assert before > 0
        g_wi, g_bi, g_wj, g_bj = compute_gradients(model, i, j, x, rel, hp)
        adagrad_step(model.w_target[i], model.g_w_target[i], g_wi, 0.01, 1e-8)
        adagrad_step(model.w_context[j], model.g_w_context[j], g_wj, 0.01, 1e-8)
        after = float(np.linalg.norm(model.w_target[i] - model.w_context[j]))
        assert after < before

    def test_relation_pull_increases_similarity(self, rng):
        # a and b never co-occur but both co-occur with c
        lines = ["a c", "c a", "b c", "c b"] * 40
        vocab = build_vocab(lines, min_count=1)
        cooc = build_cooccurrence(lines, vocab, window=5)
        a, b = vocab.id_of("a"), vocab.id_of("b")
        rel = RelationSet("synonym", frozenset({(a, b), (b, a)}), len(vocab))
        base_hp = Hyperparams(dim=16, epochs=20, reg_weight=0.0, seed=5)
        reg_hp = Hyperparams(dim=16, epochs=20, reg_weight=1e4, seed=5)

        def pair_cosine(model):
            emb = compose_embeddings(model, vocab)
            u, v = emb.get("a"), emb.get("b")
            return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))

        cos_base = pair_cosine(train(cooc, rel, base_hp))
        cos_reg = pair_cosine(train(cooc, rel, reg_hp))
        assert cos_reg > cos_base

    def test_empty_matrix_rejected(self, rng):
        from lexembed.corpus import CoocMatrix

        empty = CoocMatrix(
            np.empty(0, np.uint32), np.empty(0, np.uint32), np.empty(0, np.float64), 3, 10
        )
        with pytest.raises(ValueError):
            train(empty, None, Hyperparams(dim=4, epochs=1))

    def test_invalid_hyperparams_rejected(self, rng):
        _, _, cooc = toy_setup(rng, n_tokens=200)
        with pytest.raises(ValueError):
            train(cooc, None, Hyperparams(dim=0))
        with pytest.raises(ValueError):
            train(cooc, None, Hyperparams(dim=4, epochs=0))
        with pytest.raises(ValueError):
            train(cooc, None, Hyperparams(dim=4), reg_schedule="sometimes")

    def test_parallel_mode_close_to_serial(self, rng):
        _, vocab, cooc = toy_setup(rng, n_tokens=5000)
        rel = RelationSet("r", frozenset({(0, 1)}), len(vocab))
        hp = Hyperparams(dim=10, epochs=5, reg_weight=10.0, seed=3)
        serial = train(cooc, rel, hp, threads=1)
        parallel = train(cooc, rel, hp, threads=4)
        j1 = objective_total(serial, cooc, rel, hp)[0]
        j4 = objective_total(parallel, cooc, rel, hp)[0]
        assert abs(j4 - j1) / j1 < 0.02


class TestInitModel:
    def test_vectors_in_range_biases_zero(self):
        hp = Hyperparams(dim=7, seed=2)
        m = init_model(20, hp)
        assert np.all(m.w_target >= -1) and np.all(m.w_target <= 1)
        assert np.all(m.w_context >= -1) and np.all(m.w_context <= 1)
        assert np.all(m.b_target == 0) and np.all(m.b_context == 0)
        assert np.all(m.g_w_target == 0)

    def test_seed_controls_init(self):
        hp1 = Hyperparams(dim=4, seed=2)
        hp2 = Hyperparams(dim=4, seed=3)
        assert not np.array_equal(init_model(5, hp1).w_target, init_model(5, hp2).w_target)
        assert np.array_equal(init_model(5, hp1).w_target, init_model(5, hp1).w_target)


class TestComposeEmbeddings:
    def test_vector_addition(self, rng):
        lines = ["a b"] * 3
        vocab = build_vocab(lines, min_count=1)
        model, _, _, _ = random_instance(rng, vocab_size=2, dim=2)
        model.w_target[0] = [1.0, 2.0]
        model.w_context[0] = [3.0, 4.0]
        emb = compose_embeddings(model, vocab)
        assert np.array_equal(emb.get(vocab.words[0]), [4.0, 6.0])

    def test_zero_context_gives_target_rows(self, rng):
        lines = ["a b"] * 3
        vocab = build_vocab(lines, min_count=1)
        model, _, _, _ = random_instance(rng, vocab_size=2, dim=3)
        model.w_context[:] = 0
        emb = compose_embeddings(model, vocab)
        assert np.array_equal(emb.vectors, model.w_target)

    def test_output_dimension(self, rng):
        _, vocab, cooc = toy_setup(rng, n_tokens=300)
        hp = Hyperparams(dim=6, epochs=1, reg_weight=0.0)
        emb = compose_embeddings(train(cooc, None, hp), vocab)
        assert emb.dim == 6
        assert len(emb) == len(vocab)


class TestCheckpoint:
    def test_roundtrip_with_optimizer_state(self, rng, tmp_path):
        _, vocab, cooc = toy_setup(rng, n_tokens=500)
        model = train(cooc, None, Hyperparams(dim=5, epochs=2, reg_weight=0.0, seed=4))
        path = tmp_path / "model.bin"
        save_model(model, path)
        loaded = load_model(path)
        for name in (
            "w_target",
            "w_context",
            "b_target",
            "b_context",
            "g_w_target",
            "g_w_context",
            "g_b_target",
            "g_b_context",
        ):
            assert np.array_equal(getattr(loaded, name), getattr(model, name)), name

    def test_roundtrip_without_optimizer_state(self, rng, tmp_path):
        _, vocab, cooc = toy_setup(rng, n_tokens=500)
        model = train(cooc, None, Hyperparams(dim=5, epochs=2, reg_weight=0.0, seed=4))
        path = tmp_path / "model.bin"
        save_model(model, path, include_optimizer_state=False)
        loaded = load_model(path)
        assert np.array_equal(loaded.w_target, model.w_target)
        assert np.all(loaded.g_w_target == 0)

    def test_truncated(self, rng, tmp_path):
        _, vocab, cooc = toy_setup(rng, n_tokens=500)
        model = train(cooc, None, Hyperparams(dim=5, epochs=1, reg_weight=0.0))
        path = tmp_path / "model.bin"
        save_model(model, path)
        (tmp_path / "t.bin").write_bytes(path.read_bytes()[:-16])
        with pytest.raises(TruncatedRecordError):
            load_model(tmp_path / "t.bin")

    def test_bad_magic(self, tmp_path):
        (tmp_path / "bad.bin").write_bytes(b"XXXX" + b"\x00" * 60)
        with pytest.raises(FormatError):
            load_model(tmp_path / "bad.bin")
