"""Dual-stream diffusion data math.

A linear-beta schedule drives forward noising of the image latent and the
insertion-mask map with independently sampled timesteps and noises; the loss
targets for a training sample are those two noises. Sampling runs the DDPM
ancestral chain jointly on both streams with a pluggable denoiser and
optional classifier-free guidance (combined sampler-side as
eps_u + s * (eps_c - eps_u)).

Timesteps are integer indices 0..T-1; the continuous uniform draw in the
formulation maps to a uniform draw over those indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import DenoiserFailure, InvalidRange, NonFiniteValue, ShapeMismatch

DEFAULT_T = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 2e-2


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Linear variance schedule with cached cumulative products."""

    beta: np.ndarray
    alpha_bar: np.ndarray

    def __post_init__(self):
        for name in ("beta", "alpha_bar"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def T(self) -> int:
        return len(self.beta)

    def alpha(self, t: int) -> float:
        """sqrt(alpha_bar[t]): signal coefficient at step t."""
        return float(np.sqrt(self.alpha_bar[t]))

    def sigma(self, t: int) -> float:
        """sqrt(1 - alpha_bar[t]): noise coefficient at step t."""
        return float(np.sqrt(1.0 - self.alpha_bar[t]))

    def posterior_variance(self, t: int) -> float:
        """beta_tilde: variance of the ancestral reverse step (0 at t=0)."""
        if t == 0:
            return 0.0
        return float((1.0 - self.alpha_bar[t - 1]) / (1.0 - self.alpha_bar[t]) * self.beta[t])


def build_schedule(
    T: int = DEFAULT_T,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    if T < 1:
        raise InvalidRange("T must be >= 1")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise InvalidRange(f"need 0 < beta_start <= beta_end < 1, got [{beta_start}, {beta_end}]")
    beta = np.linspace(beta_start, beta_end, T, dtype=np.float64)
    alpha_bar = np.cumprod(1.0 - beta)
    return NoiseSchedule(beta=beta, alpha_bar=alpha_bar)


def scaled_linear_schedule(T: int = DEFAULT_T) -> NoiseSchedule:
    """SD-family preset: betas linear in sqrt space over [0.00085, 0.012]."""
    sqrt_beta = np.linspace(0.00085**0.5, 0.012**0.5, T, dtype=np.float64)
    beta = sqrt_beta**2
    return NoiseSchedule(beta=beta, alpha_bar=np.cumprod(1.0 - beta))


def forward_noise(x0: np.ndarray, t: int, eps: np.ndarray, sched: NoiseSchedule) -> np.ndarray:
    """x_t = alpha(t) * x0 + sigma(t) * eps."""
    if x0.shape != eps.shape:
        raise ShapeMismatch(f"x0 {x0.shape} vs eps {eps.shape}")
    if not (0 <= t < sched.T):
        raise InvalidRange(f"t={t} outside [0, {sched.T})")
    return sched.alpha(t) * x0 + sched.sigma(t) * eps


def invert_forward(x_t: np.ndarray, t: int, eps: np.ndarray, sched: NoiseSchedule) -> np.ndarray:
    """Algebraic inverse of forward_noise given the true noise."""
    return (x_t - sched.sigma(t) * eps) / sched.alpha(t)


def mask_to_signal(mask_values: np.ndarray) -> np.ndarray:
    """Affine map of a [0, 1] mask map onto the [-1, 1] diffusion range."""
    return 2.0 * np.asarray(mask_values, dtype=np.float64) - 1.0


def signal_to_mask(signal: np.ndarray) -> np.ndarray:
    return np.clip((np.asarray(signal) + 1.0) / 2.0, 0.0, 1.0)


@dataclass(frozen=True)
class DualSample:
    """A jointly noised training sample with its loss targets.

    z_t and m_t carry independent timesteps and noises; the loss targets are
    (eps_z, eps_m). dropped marks the sample as unconditional for
    classifier-free guidance training.
    """

    z_t: np.ndarray
    m_t: np.ndarray
    t_z: int
    t_m: int
    eps_z: np.ndarray
    eps_m: np.ndarray
    dropped: bool


def make_dual_sample(
    z0: np.ndarray,
    m0: np.ndarray,
    rng: np.random.Generator,
    sched: NoiseSchedule,
    drop_prob: float = 0.1,
) -> DualSample:
    """Draw timesteps, noises, and the condition-drop flag for one sample.

    m0 must already be rescaled to [-1, 1] (see mask_to_signal). Draw order is
    fixed: t_z, t_m, eps_z, eps_m, drop.
    """
    if not (0.0 <= drop_prob <= 1.0):
        raise InvalidRange(f"drop_prob {drop_prob} outside [0, 1]")
    t_z = int(rng.integers(sched.T))
    t_m = int(rng.integers(sched.T))
    eps_z = rng.standard_normal(z0.shape)
    eps_m = rng.standard_normal(m0.shape)
    dropped = bool(rng.random() < drop_prob)
    return DualSample(
        z_t=forward_noise(z0, t_z, eps_z, sched),
        m_t=forward_noise(m0, t_m, eps_m, sched),
        t_z=t_z,
        t_m=t_m,
        eps_z=eps_z,
        eps_m=eps_m,
        dropped=dropped,
    )


def reverse_step(
    x_t: np.ndarray,
    eps_hat: np.ndarray,
    t: int,
    rng: np.random.Generator,
    sched: NoiseSchedule,
) -> np.ndarray:
    """One DDPM ancestral update; deterministic at t=0."""
    if x_t.shape != eps_hat.shape:
        raise ShapeMismatch(f"x_t {x_t.shape} vs eps_hat {eps_hat.shape}")
    if not (0 <= t < sched.T):
        raise InvalidRange(f"t={t} outside [0, {sched.T})")
    beta_t = float(sched.beta[t])
    mean = (x_t - beta_t / sched.sigma(t) * eps_hat) / np.sqrt(1.0 - beta_t)
    if t == 0:
        return mean
    return mean + np.sqrt(sched.posterior_variance(t)) * rng.standard_normal(x_t.shape)


# denoiser(z_t, m_t, t, conditions) -> (eps_z_hat, eps_m_hat); conditions=None
# requests the unconditional prediction.
Denoiser = Callable[[np.ndarray, np.ndarray, int, Any], tuple[np.ndarray, np.ndarray]]


def sample_with_denoiser(
    denoiser: Denoiser,
    conditions: Any,
    sched: NoiseSchedule,
    rng: np.random.Generator,
    z_shape: tuple[int, ...],
    m_shape: tuple[int, ...],
    guidance_scale: float = 3.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the full reverse chain jointly on both streams from pure noise.

    With guidance_scale != 1 the denoiser is also queried with conditions=None
    and the two predictions are combined as eps_u + s * (eps_c - eps_u). Draw
    order is fixed: initial z noise, initial m noise, then per step the z and
    m ancestral noises.
    """
    x_z = rng.standard_normal(z_shape)
    x_m = rng.standard_normal(m_shape)
    for t in range(sched.T - 1, -1, -1):
        try:
            eps_z, eps_m = denoiser(x_z, x_m, t, conditions)
            if guidance_scale != 1.0 and conditions is not None:
                eps_z_u, eps_m_u = denoiser(x_z, x_m, t, None)
                eps_z = eps_z_u + guidance_scale * (eps_z - eps_z_u)
                eps_m = eps_m_u + guidance_scale * (eps_m - eps_m_u)
        except Exception as exc:  # noqa: BLE001 - external callable boundary
            raise DenoiserFailure(f"denoiser raised at t={t}: {exc!r}") from exc
        x_z = reverse_step(x_z, np.asarray(eps_z, dtype=np.float64), t, rng, sched)
        x_m = reverse_step(x_m, np.asarray(eps_m, dtype=np.float64), t, rng, sched)
        if not (np.isfinite(x_z).all() and np.isfinite(x_m).all()):
            raise NonFiniteValue(f"non-finite state at t={t}")
    return x_z, x_m
