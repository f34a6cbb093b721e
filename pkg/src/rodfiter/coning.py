"""Coning motion: analytic truth and synthetic gyro measurements."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attitude import AttitudeTrack, TrackSource, conj, quat_compose, quat_from_rodrigues
from .chebyshev import ChebSeries3, coeffs_by_cosine_sampling
from .errors import SingularRodrigues
from .fitting import GyroBatch, SampleKind


@dataclass(frozen=True)
class ConingParams:
    """Half-cone angle ``alpha`` (rad) and coning frequency ``Omega`` (rad/s)."""

    alpha: float = np.deg2rad(10.0)
    Omega: float = 0.74 * np.pi

    def __post_init__(self):
        if not 0.0 <= self.alpha < np.pi / 2:
            raise ValueError("alpha must lie in [0, pi/2)")
        if not self.Omega > 0:
            raise ValueError("Omega must be positive")


@dataclass(frozen=True)
class ErrorModel:
    bias: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        b = np.asarray(self.bias, dtype=float).reshape(3)
        if not np.all(np.isfinite(b)):
            raise ValueError("bias must be finite")
        object.__setattr__(self, "bias", b)


def omega_true(p: ConingParams, t) -> np.ndarray:
    """Body angular velocity (rad/s); ``(3,)`` or ``(K, 3)``."""
    t = np.asarray(t, dtype=float)
    a, W = p.alpha, p.Omega
    x = np.full(t.shape, -2.0 * np.sin(a / 2) ** 2)
    return W * np.stack([x, -np.sin(a) * np.sin(W * t), np.sin(a) * np.cos(W * t)], axis=-1)


def rodrigues_true(p: ConingParams, t) -> np.ndarray:
    """Absolute Rodrigues vector; constant magnitude ``2 tan(alpha/2)``."""
    t = np.asarray(t, dtype=float)
    k = 2.0 * np.tan(p.alpha / 2)
    return k * np.stack([np.zeros(t.shape), np.cos(p.Omega * t), np.sin(p.Omega * t)], axis=-1)


def quat_true(p: ConingParams, t) -> np.ndarray:
    return quat_from_rodrigues(rodrigues_true(p, t))


def truth_track(p: ConingParams, t) -> AttitudeTrack:
    return AttitudeTrack(t, quat_true(p, t), TrackSource.TRUTH)


def _delta_from_start(p: ConingParams, t: np.ndarray) -> np.ndarray:
    th = np.tan(p.alpha / 2)
    wt = p.Omega * t
    scale = 2.0 * th / (1.0 + np.cos(wt) * th * th)
    return scale[..., None] * np.stack([-np.sin(wt) * th, np.cos(wt) - 1.0, np.sin(wt)], axis=-1)


def delta_rodrigues_true(p: ConingParams, t, t_start: float = 0.0) -> np.ndarray:
    """Incremental Rodrigues vector of the rotation from ``t_start`` to ``t``.

    Uses the closed form when ``t_start == 0`` and quaternion composition
    ``conj(q(t_start)) o q(t)`` otherwise.
    """
    t = np.asarray(t, dtype=float)
    if t_start == 0.0:
        return _delta_from_start(p, t)
    dq = quat_compose(conj(quat_true(p, t_start)), quat_true(p, t))
    if np.any(np.abs(dq[..., 0]) < 1e-15):
        raise SingularRodrigues("incremental rotation angle reached pi")
    return 2.0 * dq[..., 1:] / dq[..., :1]


def true_increment(p: ConingParams, t_a, t_b) -> np.ndarray:
    """Exact ``int_{t_a}^{t_b} omega dt`` (rad)."""
    t_a = np.asarray(t_a, dtype=float)
    t_b = np.asarray(t_b, dtype=float)
    a, W = p.alpha, p.Omega
    sa = np.sin(a)
    return np.stack(
        [
            -2.0 * W * np.sin(a / 2) ** 2 * (t_b - t_a),
            sa * (np.cos(W * t_b) - np.cos(W * t_a)),
            sa * (np.sin(W * t_b) - np.sin(W * t_a)),
        ],
        axis=-1,
    )


def synthesize_batch(
    p: ConingParams,
    e: ErrorModel,
    t_start: float,
    t_N: float,
    N: int,
    kind: SampleKind = SampleKind.INCREMENT,
) -> GyroBatch:
    """Noise-free gyro samples for ``[t_start, t_start + t_N]`` plus constant bias."""
    if N < 1:
        raise ValueError("N must be >= 1")
    t = t_start + np.arange(N + 1) * t_N / N
    if kind is SampleKind.RATE:
        samples = omega_true(p, t[1:]) + e.bias
    else:
        samples = true_increment(p, t[:-1], t[1:]) + e.bias * (t_N / N)
    return GyroBatch(kind, samples, t_N)


def synthesize_increments(
    p: ConingParams, e: ErrorModel, duration: float, rate_hz: float
) -> tuple[np.ndarray, np.ndarray]:
    """Angular increments over ``[0, duration]``: ``(t_end, dtheta)``."""
    count = int(round(duration * rate_hz))
    t = np.arange(count + 1) / rate_hz
    return t[1:], true_increment(p, t[:-1], t[1:]) + e.bias / rate_hz


def true_coeff_oracle(
    p: ConingParams, t_start: float, t_N: float, M: int = 40, P: int = 2048
) -> ChebSeries3:
    """Chebyshev coefficients of the true incremental Rodrigues vector on one interval."""

    def f(tau):
        return delta_rodrigues_true(p, t_start + 0.5 * t_N * (1.0 + tau), t_start)

    return coeffs_by_cosine_sampling(f, M, P)
