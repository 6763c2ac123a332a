import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resmaster.attention import attend, make_attention_weights, softmax_rows
from resmaster.conditioning import ConditionBundle, ImageEmbedding, TextEmbedding


def _bundle(rng, text_tokens=3, image_tokens=2, dim=8, lam=0.8):
    text = TextEmbedding(_unit_rows(rng.normal(size=(text_tokens, dim))))
    image = ImageEmbedding(rng.normal(size=(image_tokens, dim)))
    return ConditionBundle(text, image, lam)


def _unit_rows(m):
    return m / np.linalg.norm(m, axis=1, keepdims=True)


class TestAttend:
    def test_zero_lambda_equals_text_only(self, rng):
        w = make_attention_weights(8, 8, 8, 8, seed=0)
        x = rng.normal(size=(4, 8))
        bundle = _bundle(rng, lam=0.0)
        out = attend(x, bundle, w)
        q = x @ w.w_query
        scores = softmax_rows((q @ (bundle.text.data @ w.w_key_text).T) / np.sqrt(8))
        text_only = scores @ (bundle.text.data @ w.w_value_text)
        np.testing.assert_allclose(out, text_only, rtol=0, atol=1e-12)

    def test_single_tokens_degenerate_softmax(self, rng):
        w = make_attention_weights(8, 8, 8, 8, seed=1)
        x = rng.normal(size=(5, 8))
        bundle = _bundle(rng, text_tokens=1, image_tokens=1, lam=0.8)
        out = attend(x, bundle, w)
        v_t = (bundle.text.data @ w.w_value_text)[0]
        v_i = (bundle.image.data @ w.w_value_image)[0]
        for row in range(5):
            np.testing.assert_allclose(out[row], v_t + 0.8 * v_i, rtol=0, atol=1e-12)

    def test_matches_double_loop_oracle(self, rng):
        from oracles import attention_direct

        w = make_attention_weights(8, 8, 8, 8, seed=2)
        x = rng.normal(size=(4, 8))
        bundle = _bundle(rng, lam=0.8)
        expected = attention_direct(x, bundle.text.data, bundle.image.data, 0.8, w)
        np.testing.assert_allclose(attend(x, bundle, w), expected, rtol=0, atol=1e-10)

    def test_lambda_linearity(self, rng):
        w = make_attention_weights(8, 8, 8, 8, seed=3)
        x = rng.normal(size=(6, 8))
        text = TextEmbedding(_unit_rows(rng.normal(size=(3, 8))))
        image = ImageEmbedding(rng.normal(size=(2, 8)))
        outs = {
            lam: attend(x, ConditionBundle(text, image, lam), w) for lam in (0.0, 1.0, 2.0)
        }
        image_branch = outs[1.0] - outs[0.0]
        np.testing.assert_allclose(outs[2.0] - outs[0.0], 2.0 * image_branch, rtol=0, atol=1e-10)

    def test_rejects_dim_mismatches(self, rng):
        w = make_attention_weights(8, 8, 8, 8, seed=4)
        bundle = _bundle(rng)
        with pytest.raises(ValueError):
            attend(rng.normal(size=(4, 5)), bundle, w)
        short = ConditionBundle(
            TextEmbedding(_unit_rows(rng.normal(size=(3, 4)))),
            bundle.image,
            0.8,
        )
        with pytest.raises(ValueError):
            attend(rng.normal(size=(4, 8)), short, w)


class TestSoftmax:
    @given(seed=st.integers(0, 2**31), rows=st.integers(1, 6), cols=st.integers(1, 6))
    @settings(max_examples=30, deadline=None)
    def test_rows_sum_to_one(self, seed, rows, cols):
        gen = np.random.default_rng(seed)
        scores = 10.0 * gen.normal(size=(rows, cols))
        out = softmax_rows(scores)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, rtol=0, atol=1e-12)

    def test_large_logits_stay_finite(self):
        out = softmax_rows(np.array([[1e4, 1e4 - 5.0], [-1e4, -1e4 + 2.0]]))
        assert np.isfinite(out).all()

    def test_shift_invariance_per_query(self, rng):
        w = make_attention_weights(4, 4, 4, 4, seed=5)
        x = rng.normal(size=(3, 4))
        text = TextEmbedding(_unit_rows(rng.normal(size=(3, 4))))
        image = ImageEmbedding(rng.normal(size=(2, 4)))
        bundle = ConditionBundle(text, image, 0.5)
        base = attend(x, bundle, w)
        # Shifting all logits of one query is equivalent to shifting that
        # query along a direction orthogonal to nothing observable: emulate by
        # directly checking the softmax layer instead.
        scores = (x @ w.w_query) @ (text.data @ w.w_key_text).T
        shifted = scores.copy()
        shifted[1, :] += 123.456
        np.testing.assert_allclose(softmax_rows(shifted)[1], softmax_rows(scores)[1],
                                   rtol=0, atol=1e-10)
        assert base.shape == (3, 4)


class TestWeights:
    def test_seeded_initialization_is_deterministic(self):
        a = make_attention_weights(6, 4, 5, 3, seed=7)
        b = make_attention_weights(6, 4, 5, 3, seed=7)
        np.testing.assert_array_equal(a.w_query, b.w_query)
        np.testing.assert_array_equal(a.w_value_image, b.w_value_image)

    def test_shape_consistency_enforced(self, rng):
        from resmaster.attention import AttentionWeights

        with pytest.raises(ValueError):
            AttentionWeights(
                w_query=rng.normal(size=(6, 4)),
                w_key_text=rng.normal(size=(5, 3)),  # wrong head width
                w_value_text=rng.normal(size=(5, 4)),
                w_key_image=rng.normal(size=(3, 4)),
                w_value_image=rng.normal(size=(3, 4)),
            )

    def test_rejects_nonpositive_dims(self):
        with pytest.raises(ValueError):
            make_attention_weights(0, 4, 4, 4)
