"""Diffusion-time bookkeeping: noise schedule, forward noising, clean-latent
estimate, and the posterior sampling step.

Timesteps are 1-based: t ranges over 1..T, and the cumulative product
``alpha_bar`` at t=0 is defined as 1 so the final (t=1) step is well formed.
All operations are pure; noise is always supplied by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .util import as_grid, require_same_shape


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step variances beta_t with the derived alpha_t and alpha_bar_t arrays."""

    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray

    def __post_init__(self):
        beta = np.array(self.beta, dtype=np.float64)
        alpha = np.array(self.alpha, dtype=np.float64)
        alpha_bar = np.array(self.alpha_bar, dtype=np.float64)
        if beta.ndim != 1 or beta.size < 1:
            raise ValueError("beta must be a 1-D array of length >= 1")
        if not (beta.shape == alpha.shape == alpha_bar.shape):
            raise ValueError("beta, alpha, alpha_bar must share a common length")
        if not ((beta > 0.0).all() and (beta < 1.0).all()):
            raise ValueError("every beta_t must lie in (0, 1)")
        if not np.array_equal(alpha, 1.0 - beta):
            raise ValueError("alpha must equal 1 - beta exactly")
        if not ((alpha_bar > 0.0).all() and (alpha_bar < 1.0).all()):
            raise ValueError("alpha_bar must lie in (0, 1)")
        if alpha_bar.size > 1 and not (np.diff(alpha_bar) < 0.0).all():
            raise ValueError("alpha_bar must be strictly decreasing")
        for arr in (beta, alpha, alpha_bar):
            arr.flags.writeable = False
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "alpha_bar", alpha_bar)

    @property
    def steps(self) -> int:
        return int(self.beta.size)

    def check_t(self, t: int) -> None:
        if not isinstance(t, (int, np.integer)) or not 1 <= t <= self.steps:
            raise ValueError(f"timestep t={t!r} out of range [1, {self.steps}]")

    def beta_at(self, t: int) -> float:
        self.check_t(t)
        return float(self.beta[t - 1])

    def alpha_at(self, t: int) -> float:
        self.check_t(t)
        return float(self.alpha[t - 1])

    def alpha_bar_at(self, t: int) -> float:
        self.check_t(t)
        return float(self.alpha_bar[t - 1])

    def alpha_bar_before(self, t: int) -> float:
        """alpha_bar at t-1, with the t=1 boundary value of 1."""
        self.check_t(t)
        return 1.0 if t == 1 else float(self.alpha_bar[t - 2])


def make_linear_schedule(T: int, beta_start: float = 1e-4, beta_end: float = 0.02) -> NoiseSchedule:
    """Linearly spaced beta_t over T steps, with alpha and alpha_bar derived exactly.

    Defaults follow the common 1000-step convention (1e-4 .. 0.02) when T=1000;
    shorter schedules reuse the same endpoints.
    """
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ValueError(
            f"betas must satisfy 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
        )
    beta = np.linspace(beta_start, beta_end, int(T), dtype=np.float64)
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    return NoiseSchedule(beta=beta, alpha=alpha, alpha_bar=alpha_bar)


def make_geometric_schedule(
    T: int,
    noise_floor: float = 1e-4,
    knee: float = 0.06,
    terminal: float = 1.0 - 4e-5,
) -> NoiseSchedule:
    """Short-run schedule: the cumulative noise variance (1 - alpha_bar) is
    log-spaced from ``noise_floor`` up to ``knee``, then accelerates to
    ``terminal`` over the last ~10% of steps.

    A linear beta schedule compressed to a few dozen steps places its rungs
    too coarsely around small noise variances, so ancestral sampling visibly
    under-disperses fine-scale data; log spacing below the knee fixes that
    while the short tail still reaches (near) pure noise. Use this for step
    counts well below the 1000-step linear convention.
    """
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    if not 0.0 < noise_floor < knee < terminal < 1.0:
        raise ValueError(
            "ladder must satisfy 0 < noise_floor < knee < terminal < 1, got "
            f"({noise_floor}, {knee}, {terminal})"
        )
    T = int(T)
    if T == 1:
        om = np.array([terminal])
    else:
        tail = max(1, round(0.1 * T))
        body = T - tail
        if body < 1:
            body, tail = 1, T - 1
        om = np.concatenate(
            [np.geomspace(noise_floor, knee, body),
             np.geomspace(knee, terminal, tail + 1)[1:]]
        )
    alpha_bar = 1.0 - om
    beta = 1.0 - alpha_bar / np.concatenate([[1.0], alpha_bar[:-1]])
    alpha = 1.0 - beta
    return NoiseSchedule(beta=beta, alpha=alpha, alpha_bar=np.cumprod(alpha))


def forward_diffuse(z0: np.ndarray, t: int, eps: np.ndarray, s: NoiseSchedule) -> np.ndarray:
    """Noise a clean grid to timestep t: sqrt(abar_t) * z0 + sqrt(1 - abar_t) * eps."""
    z0 = as_grid(z0, "z0")
    eps = as_grid(eps, "eps")
    require_same_shape(z0, eps, "z0", "eps")
    abar = s.alpha_bar_at(t)
    return math.sqrt(abar) * z0 + math.sqrt(1.0 - abar) * eps


def predict_x0(z_t: np.ndarray, eps_hat: np.ndarray, t: int, s: NoiseSchedule) -> np.ndarray:
    """Clean-latent estimate implied by a noisy grid and a noise prediction."""
    z_t = as_grid(z_t, "z_t")
    eps_hat = as_grid(eps_hat, "eps_hat")
    require_same_shape(z_t, eps_hat, "z_t", "eps_hat")
    abar = s.alpha_bar_at(t)
    return (z_t - math.sqrt(1.0 - abar) * eps_hat) / math.sqrt(abar)


def posterior_step(
    z_t: np.ndarray, z0_prime: np.ndarray, t: int, noise: np.ndarray, s: NoiseSchedule
) -> np.ndarray:
    """One ancestral step: sample the Gaussian posterior of z_{t-1} given z_t and
    a clean estimate.

    Mean is the usual convex combination
    ``sqrt(abar_{t-1}) * beta_t / (1 - abar_t) * z0' +
    sqrt(alpha_t) * (1 - abar_{t-1}) / (1 - abar_t) * z_t``
    with variance ``(1 - abar_{t-1}) / (1 - abar_t) * beta_t``. The caller
    provides the standard-normal draw so the step stays deterministic.
    """
    z_t = as_grid(z_t, "z_t")
    z0_prime = as_grid(z0_prime, "z0_prime")
    noise = as_grid(noise, "noise")
    require_same_shape(z_t, z0_prime, "z_t", "z0_prime")
    require_same_shape(z_t, noise, "z_t", "noise")
    s.check_t(t)
    if t == 1:
        # The boundary value abar_0 = 1 collapses the step: the z0' coefficient
        # is exactly 1 and the variance is exactly 0. Evaluating the closed form
        # in floats would round the coefficient off 1, so return the estimate
        # directly.
        return z0_prime.copy()
    abar_t = s.alpha_bar_at(t)
    abar_prev = s.alpha_bar_before(t)
    beta_t = s.beta_at(t)
    alpha_t = s.alpha_at(t)
    coef_z0 = math.sqrt(abar_prev) * beta_t / (1.0 - abar_t)
    coef_zt = math.sqrt(alpha_t) * (1.0 - abar_prev) / (1.0 - abar_t)
    var = (1.0 - abar_prev) / (1.0 - abar_t) * beta_t
    return coef_z0 * z0_prime + coef_zt * z_t + math.sqrt(var) * noise
