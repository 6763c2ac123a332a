"""Pluggable noise predictors: a closed-form analytic denoiser for Gaussian
data (the ground-truth engine for end-to-end tests) and a small conditioned
network that exercises the decoupled cross-attention path.

A denoiser is anything with
``predict(z_t, t, cond, s) -> grid of z_t's shape``; predictions must be
deterministic functions of the arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .attention import AttentionWeights, attend, make_attention_weights
from .conditioning import ConditionBundle
from .schedule import NoiseSchedule
from .util import as_grid


@runtime_checkable
class Denoiser(Protocol):
    def predict(
        self, z_t: np.ndarray, t: int, cond: ConditionBundle | None, s: NoiseSchedule
    ) -> np.ndarray: ...


@dataclass(frozen=True)
class GaussianDataModel:
    """Clean data distributed N(mean, std^2 I), i.i.d. per cell.

    ``mean`` may be a scalar or one value per channel.
    """

    mean: np.ndarray
    std: float

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        if mean.ndim != 1 or not np.isfinite(mean).all():
            raise ValueError(f"mean must be a finite scalar or per-channel vector, got {self.mean!r}")
        if not (np.isfinite(self.std) and self.std >= 0.0):
            raise ValueError(f"std must be finite and >= 0, got {self.std}")
        mean.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", float(self.std))


class _AnalyticGaussianDenoiser:
    """Exact conditional-mean noise prediction for Gaussian data.

    With z_t = sqrt(abar) z0 + sqrt(1-abar) eps and z0 ~ N(m, s^2), the
    posterior mean of z0 given z_t is
    ``m + sqrt(abar) s^2 / (abar s^2 + 1 - abar) * (z_t - sqrt(abar) m)``
    and the implied noise estimate is
    ``(z_t - sqrt(abar) E[z0|z_t]) / sqrt(1 - abar)``.
    """

    def __init__(self, model: GaussianDataModel):
        self.model = model

    def posterior_mean(self, z_t: np.ndarray, t: int, s: NoiseSchedule) -> np.ndarray:
        z_t = as_grid(z_t, "z_t")
        mean = self._broadcast_mean(z_t)
        abar = s.alpha_bar_at(t)
        var = self.model.std ** 2
        gain = math.sqrt(abar) * var / (abar * var + 1.0 - abar)
        return mean + gain * (z_t - math.sqrt(abar) * mean)

    def predict(self, z_t, t, cond, s):
        z_t = as_grid(z_t, "z_t")
        abar = s.alpha_bar_at(t)
        if abar >= 1.0:
            return np.zeros_like(z_t)  # noiseless limit
        return (z_t - math.sqrt(abar) * self.posterior_mean(z_t, t, s)) / math.sqrt(1.0 - abar)

    def _broadcast_mean(self, z_t: np.ndarray) -> np.ndarray:
        mean = self.model.mean
        if mean.size == 1:
            return np.full((1, 1, 1), mean[0])
        if mean.size != z_t.shape[2]:
            raise ValueError(
                f"per-channel mean has {mean.size} entries, grid has {z_t.shape[2]} channels"
            )
        return mean.reshape(1, 1, -1)


def analytic_gaussian_denoiser(model: GaussianDataModel) -> _AnalyticGaussianDenoiser:
    return _AnalyticGaussianDenoiser(model)


class _ToyConditionedDenoiser:
    """Tiny fixed-weight network: per-cell features attend over the condition
    bundle once, and the head projection maps back to channel space.

    Purely a conditioning-path exerciser; it makes no claim of denoising
    quality. Output is tanh-bounded so ancestral sampling stays stable.
    """

    def __init__(self, seed: int, channels: int, text_dim: int, image_dim: int,
                 d_model: int = 16, d_head: int = 16):
        if min(channels, text_dim, image_dim, d_model, d_head) < 1:
            raise ValueError("all toy-denoiser dims must be >= 1")
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed), 0x70F))))
        self.channels = channels
        self.w_in = rng.normal(size=(channels, d_model)) / math.sqrt(channels)
        self.attn: AttentionWeights = make_attention_weights(
            d_model, d_head, text_dim, image_dim, rng=rng
        )
        self.w_out = rng.normal(size=(d_head, channels)) / math.sqrt(d_head)

    def predict(self, z_t, t, cond, s):
        z_t = as_grid(z_t, "z_t")
        if cond is None:
            raise ValueError("toy conditioned denoiser requires a condition bundle")
        if z_t.shape[2] != self.channels:
            raise ValueError(f"grid has {z_t.shape[2]} channels, denoiser expects {self.channels}")
        s.check_t(t)
        cells = z_t.reshape(-1, self.channels) @ self.w_in
        attended = attend(cells, cond, self.attn)
        return np.tanh(attended @ self.w_out).reshape(z_t.shape)


def toy_conditioned_denoiser(
    seed: int, channels: int, text_dim: int, image_dim: int,
    d_model: int = 16, d_head: int = 16,
) -> _ToyConditionedDenoiser:
    return _ToyConditionedDenoiser(seed, channels, text_dim, image_dim, d_model, d_head)
