"""Decoupled cross-attention: text and image conditions attended separately,
summed with the image branch scaled by the bundle's weighting factor.

Single-head only. The scaling denominator uses the head width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conditioning import ConditionBundle


@dataclass(frozen=True)
class AttentionWeights:
    """Fixed projections for queries and for the text/image key-value branches."""

    w_query: np.ndarray       # (d_model, d_head)
    w_key_text: np.ndarray    # (text_dim, d_head)
    w_value_text: np.ndarray  # (text_dim, d_head)
    w_key_image: np.ndarray   # (image_dim, d_head)
    w_value_image: np.ndarray # (image_dim, d_head)

    def __post_init__(self):
        mats = {
            "w_query": self.w_query,
            "w_key_text": self.w_key_text,
            "w_value_text": self.w_value_text,
            "w_key_image": self.w_key_image,
            "w_value_image": self.w_value_image,
        }
        frozen = {}
        for name, m in mats.items():
            arr = np.asarray(m, dtype=np.float64)
            if arr.ndim != 2:
                raise ValueError(f"{name} must be a matrix, got shape {arr.shape}")
            arr = arr.copy()
            arr.flags.writeable = False
            frozen[name] = arr
        d_head = frozen["w_query"].shape[1]
        for name in ("w_key_text", "w_value_text", "w_key_image", "w_value_image"):
            if frozen[name].shape[1] != d_head:
                raise ValueError(f"{name} maps to width {frozen[name].shape[1]}, expected d_head {d_head}")
        if frozen["w_key_text"].shape[0] != frozen["w_value_text"].shape[0]:
            raise ValueError("text key/value projections disagree on the condition dim")
        if frozen["w_key_image"].shape[0] != frozen["w_value_image"].shape[0]:
            raise ValueError("image key/value projections disagree on the condition dim")
        for name, arr in frozen.items():
            object.__setattr__(self, name, arr)

    @property
    def d_model(self) -> int:
        return self.w_query.shape[0]

    @property
    def d_head(self) -> int:
        return self.w_query.shape[1]

    @property
    def text_dim(self) -> int:
        return self.w_key_text.shape[0]

    @property
    def image_dim(self) -> int:
        return self.w_key_image.shape[0]


def make_attention_weights(
    d_model: int,
    d_head: int,
    text_dim: int,
    image_dim: int,
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> AttentionWeights:
    """Seeded Gaussian initialization, scaled by 1/sqrt(fan_in)."""
    if min(d_model, d_head, text_dim, image_dim) < 1:
        raise ValueError("all attention dims must be >= 1")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 0xA77))))
    draw = lambda rows, cols: rng.normal(size=(rows, cols)) / math.sqrt(rows)
    return AttentionWeights(
        w_query=draw(d_model, d_head),
        w_key_text=draw(text_dim, d_head),
        w_value_text=draw(text_dim, d_head),
        w_key_image=draw(image_dim, d_head),
        w_value_image=draw(image_dim, d_head),
    )


def softmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction for stability."""
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def attend(x: np.ndarray, bundle: ConditionBundle, w: AttentionWeights) -> np.ndarray:
    """Queries from ``x`` attend over the text tokens and, weighted by
    ``bundle.lam``, over the image tokens; the two results are summed."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"x must be (n, d_model), got shape {x.shape}")
    if x.shape[1] != w.d_model:
        raise ValueError(f"x has width {x.shape[1]}, weights expect d_model {w.d_model}")
    if bundle.text.dim != w.text_dim:
        raise ValueError(f"text embedding dim {bundle.text.dim} != weights text_dim {w.text_dim}")
    if bundle.image.dim != w.image_dim:
        raise ValueError(f"image embedding dim {bundle.image.dim} != weights image_dim {w.image_dim}")

    q = x @ w.w_query
    scale = 1.0 / math.sqrt(w.d_head)
    text_scores = softmax_rows((q @ (bundle.text.data @ w.w_key_text).T) * scale)
    image_scores = softmax_rows((q @ (bundle.image.data @ w.w_key_image).T) * scale)
    text_term = text_scores @ (bundle.text.data @ w.w_value_text)
    image_term = image_scores @ (bundle.image.data @ w.w_value_image)
    return text_term + bundle.lam * image_term
