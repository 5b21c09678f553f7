import numpy as np
import pytest

from tabkit.data import TaskType
from tabkit.encode_cat import (
    CategoricalEncoder,
    Vocabulary,
    encode_binarycode,
    encode_catboost_ordered,
    encode_hash,
    encode_leave_one_out,
    encode_onehot,
    encode_ordinal,
    encode_target,
    fit_catboost_encoding,
    fit_categorical_encoder,
    fit_target_encoding,
    fnv1a64,
)
from tabkit.errors import FitError, ShapeError


class TestVocabulary:
    def test_first_appearance_order(self):
        vocab = Vocabulary.fit(["b", "a", "b", "c", "a"])
        assert vocab.tokens == ("b", "a", "c")

    def test_ordinal_examples(self):
        vocab = Vocabulary(("a", "b", "c"))
        assert encode_ordinal(vocab, "b") == 1
        assert encode_ordinal(vocab, "z") == 3
        assert encode_ordinal(Vocabulary(("a",)), "a") == 0

    def test_onehot_examples(self):
        vocab = Vocabulary(("a", "b", "c"))
        np.testing.assert_array_equal(encode_onehot(vocab, "b"), [0, 1, 0, 0])
        np.testing.assert_array_equal(encode_onehot(vocab, "zzz"), [0, 0, 0, 1])
        assert len(encode_onehot(Vocabulary(("a",)), "a")) == 2

    def test_onehot_always_sums_to_one(self):
        rng = np.random.default_rng(0)
        vocab = Vocabulary.fit([f"t{i}" for i in rng.integers(0, 9, size=60)])
        for token in ["t0", "t5", "never-seen"]:
            assert encode_onehot(vocab, token).sum() == 1.0

    def test_binary_examples(self):
        five = Vocabulary(tuple("abcde"))
        np.testing.assert_array_equal(encode_binarycode(five, "e"), [1, 0, 0])
        np.testing.assert_array_equal(encode_binarycode(five, "unseen"), [1, 0, 1])
        one = Vocabulary(("a",))
        np.testing.assert_array_equal(encode_binarycode(one, "a"), [0])

    def test_binary_round_trips_every_index(self):
        for size in (1, 2, 5, 8, 17):
            vocab = Vocabulary.fit([f"t{i}" for i in range(size)])
            for index, token in enumerate([*vocab.tokens, "unseen"]):
                bits = encode_binarycode(vocab, token)
                width = len(bits)
                decoded = int(sum(int(b) << (width - 1 - k) for k, b in enumerate(bits)))
                assert decoded == index


class TestHash:
    def test_reference_hash_golden_values(self):
        # FNV-1a 64-bit, frozen from an independent reference computation
        assert fnv1a64("abc") == 0xE71FA2190541574B
        assert fnv1a64("") == 0xCBF29CE484222325
        assert fnv1a64("abc") % 8 == 3
        np.testing.assert_array_equal(
            encode_hash("abc", 8), [0, 0, 0, 1, 0, 0, 0, 0]
        )

    def test_deterministic_and_one_hot(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            token = "".join(chr(rng.integers(97, 123)) for _ in range(6))
            first = encode_hash(token)
            np.testing.assert_array_equal(first, encode_hash(token))
            assert first.sum() == 1.0

    def test_rejects_tiny_bucket_count(self):
        with pytest.raises(ValueError):
            encode_hash("a", 1)


class TestTargetEncoding:
    def test_smoothing_formula(self):
        # category "a": count 2, mean 1.0; global mean P = 0.5, m = 10
        stats = fit_target_encoding(["a", "a", "b", "b"], [1.0, 1.0, 0.0, 0.0], m=10.0)
        assert encode_target(stats, "a") == pytest.approx(7.0 / 12.0)

    def test_zero_smoothing_gives_raw_mean(self):
        stats = fit_target_encoding(["a", "a", "b"], [1.0, 0.0, 1.0], m=0.0)
        assert encode_target(stats, "a") == 0.5

    def test_unseen_gets_prior(self):
        stats = fit_target_encoding(["a", "b"], [1.0, 0.0])
        assert encode_target(stats, "zzz") == 0.5

    def test_empty_column_raises(self):
        with pytest.raises(FitError):
            fit_target_encoding([], [])


class TestLeaveOneOut:
    def test_training_row_excludes_itself(self):
        stats = fit_target_encoding(["a", "a", "a"], [1.0, 0.0, 1.0])
        assert encode_leave_one_out(stats, "a", own_target=1.0) == 0.5

    def test_singleton_gets_prior(self):
        stats = fit_target_encoding(["a", "b", "b"], [1.0, 0.0, 0.0])
        assert encode_leave_one_out(stats, "a", own_target=1.0) == stats.prior

    def test_inference_uses_plain_mean(self):
        stats = fit_target_encoding(["a", "a", "a"], [1.0, 1.0, 0.0])
        assert encode_leave_one_out(stats, "a") == pytest.approx(2.0 / 3.0)
        assert encode_leave_one_out(stats, "zzz") == stats.prior

    def test_exactness_identity(self):
        rng = np.random.default_rng(2)
        tokens = [f"t{i}" for i in rng.integers(0, 4, size=50)]
        y = rng.random(50)
        stats = fit_target_encoding(tokens, y)
        for token, own in zip(tokens, y):
            count = stats.counts[token]
            if count == 1:
                continue
            enc = encode_leave_one_out(stats, token, own_target=own)
            assert stats.sums[token] - own == pytest.approx((count - 1) * enc)


class TestCatboostOrdered:
    def test_three_row_example(self):
        stats = fit_catboost_encoding(["a", "a", "a"], [1.0, 0.0, 1.0], seed=0)
        # read rows in permutation order: prefix stats only
        perm_y = stats.perm_targets
        expected = [
            (0.0 + stats.prior) / 1.0,
            (perm_y[0] + stats.prior) / 2.0,
            (perm_y[0] + perm_y[1] + stats.prior) / 3.0,
        ]
        got = [encode_catboost_ordered(stats, i, "a") for i in range(3)]
        np.testing.assert_allclose(got, expected)
        assert got[0] == pytest.approx(2.0 / 3.0)

    def test_first_seen_row_gets_prior(self):
        rng = np.random.default_rng(3)
        tokens = [f"t{i}" for i in rng.integers(0, 3, size=15)]
        y = rng.random(15)
        stats = fit_catboost_encoding(tokens, y, seed=5)
        seen = set()
        for position, token in enumerate(stats.perm_tokens):
            if token not in seen:
                enc = encode_catboost_ordered(stats, position, token)
                assert enc == pytest.approx(stats.prior)
                seen.add(token)

    def test_inference_is_full_statistic(self):
        stats = fit_catboost_encoding(["a", "a", "b"], [1.0, 0.0, 1.0], seed=1)
        assert encode_catboost_ordered(stats, None, "a") == pytest.approx(
            (1.0 + stats.prior) / 3.0
        )
        assert encode_catboost_ordered(stats, None, "zzz") == stats.prior

    def test_inference_permutation_independent(self):
        tokens = ["a", "b", "a", "c", "b", "a"]
        y = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0]
        values = {
            seed: [
                encode_catboost_ordered(fit_catboost_encoding(tokens, y, seed), None, t)
                for t in "abc"
            ]
            for seed in range(4)
        }
        for seed in range(1, 4):
            np.testing.assert_array_equal(values[0], values[seed])


class TestColumnEncoder:
    def test_bulk_catboost_matches_prefix_oracle(self):
        rng = np.random.default_rng(4)
        for trial in range(5):
            n = 20
            cat = rng.choice(["x", "y", "z"], size=(n, 1)).astype(object)
            y = rng.integers(0, 2, size=n).astype(np.int64)
            encoder, train = fit_categorical_encoder(
                cat, "catboost", y, TaskType.BINCLASS, seed=trial
            )
            stats = encoder.stats[0][0]
            perm = stats.permutation
            prior = y.astype(float).mean()
            # O(N^2) oracle: walk the permutation, accumulate same-category prefixes
            expected = np.empty(n)
            for pos, row in enumerate(perm):
                prefix = [
                    y[perm[k]] for k in range(pos) if cat[perm[k], 0] == cat[row, 0]
                ]
                expected[row] = (sum(prefix) + prior) / (len(prefix) + 1.0)
            np.testing.assert_allclose(train[:, 0], expected)

    def test_loo_bulk_matches_per_row_calls(self):
        rng = np.random.default_rng(5)
        cat = rng.choice(["p", "q", "r", "s"], size=(40, 1)).astype(object)
        y = rng.random(40)
        encoder, train = fit_categorical_encoder(
            cat, "loo", y, TaskType.REGRESSION
        )
        stats = encoder.stats[0][0]
        expected = [
            encode_leave_one_out(stats, cat[i, 0], own_target=y[i]) for i in range(40)
        ]
        np.testing.assert_allclose(train[:, 0], expected)

    def test_target_train_equals_inference(self):
        rng = np.random.default_rng(6)
        cat = rng.choice(["a", "b"], size=(30, 2)).astype(object)
        y = rng.integers(0, 2, size=30)
        encoder, train = fit_categorical_encoder(cat, "target", y, TaskType.BINCLASS)
        np.testing.assert_allclose(train, encoder.transform(cat))

    def test_multiclass_expands_one_column_per_class(self):
        rng = np.random.default_rng(7)
        cat = rng.choice(["a", "b", "c"], size=(60, 2)).astype(object)
        y = rng.integers(0, 4, size=60)
        for policy in ("target", "loo", "catboost"):
            encoder, train = fit_categorical_encoder(
                cat, policy, y, TaskType.MULTICLASS, class_count=4
            )
            assert train.shape == (60, 8)
            assert encoder.width == 8
            assert encoder.transform(cat[:5]).shape == (5, 8)

    def test_val_targets_never_consulted(self):
        rng = np.random.default_rng(8)
        cat_train = rng.choice(["a", "b", "c"], size=(50, 1)).astype(object)
        y_train = rng.random(50)
        cat_val = rng.choice(["a", "b", "c", "d"], size=(20, 1)).astype(object)
        for policy in ("target", "loo", "catboost"):
            encoder, _ = fit_categorical_encoder(
                cat_train, policy, y_train, TaskType.REGRESSION, seed=0
            )
            encoder2, _ = fit_categorical_encoder(
                cat_train, policy, y_train, TaskType.REGRESSION, seed=0
            )
            np.testing.assert_array_equal(
                encoder.transform(cat_val), encoder2.transform(cat_val)
            )

    def test_widths_by_policy(self):
        cat = np.array([["a", "x"], ["b", "x"], ["c", "y"]], dtype=object)
        y = np.array([0, 1, 0])
        widths = {
            "ordinal": 2,          # one index column each
            "onehot": 4 + 3,       # (K+1) per feature: 3+1 and 2+1
            "binary": 2 + 2,       # ceil(log2(K+1)) with unseen slot
            "hash": 16,            # 8 buckets each
            "target": 2,
            "loo": 2,
            "catboost": 2,
        }
        for policy, width in widths.items():
            encoder, train = fit_categorical_encoder(
                cat, policy, y, TaskType.BINCLASS
            )
            assert encoder.width == width, policy
            assert train.shape == (3, width), policy

    def test_unseen_tokens_at_inference(self):
        cat = np.array([["a"], ["b"], ["a"]], dtype=object)
        y = np.array([1.0, 0.0, 1.0])
        probe = np.array([["zzz"]], dtype=object)
        encoder, _ = fit_categorical_encoder(cat, "ordinal", y, TaskType.REGRESSION)
        assert encoder.transform(probe)[0, 0] == 2.0
        encoder, _ = fit_categorical_encoder(cat, "onehot", y, TaskType.REGRESSION)
        np.testing.assert_array_equal(encoder.transform(probe)[0], [0, 0, 1])
        encoder, _ = fit_categorical_encoder(cat, "target", y, TaskType.REGRESSION)
        assert encoder.transform(probe)[0, 0] == pytest.approx(2.0 / 3.0)

    def test_transform_shape_mismatch(self):
        cat = np.array([["a", "x"]], dtype=object)
        encoder, _ = fit_categorical_encoder(cat, "ordinal")
        with pytest.raises(ShapeError):
            encoder.transform(np.array([["a"]], dtype=object))

    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError):
            fit_categorical_encoder(np.empty((2, 1), dtype=object), "embedding")

    def test_target_policy_needs_labels(self):
        with pytest.raises(ValueError):
            fit_categorical_encoder(np.array([["a"]], dtype=object), "target")

    def test_zero_columns_pass_through(self):
        cat = np.empty((4, 0), dtype=object)
        encoder, train = fit_categorical_encoder(cat, "onehot")
        assert train.shape == (4, 0)
        assert encoder.transform(cat).shape == (4, 0)
