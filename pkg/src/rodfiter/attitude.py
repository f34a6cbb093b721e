"""Quaternion utilities and chaining of per-interval Rodrigues vectors.

Quaternions are plain ``ndarray`` of shape ``(..., 4)``, Hamilton convention,
scalar first. Increments are body-frame: ``q_global = q_prev o q_inc``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chebyshev import ChebSeries3

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


class TrackSource(enum.Enum):
    RECONSTRUCTED = "reconstructed"
    TRUTH = "truth"
    BASELINE = "baseline"


@dataclass(frozen=True)
class AttitudeTrack:
    timestamps: np.ndarray
    quaternions: np.ndarray
    source: TrackSource = TrackSource.RECONSTRUCTED

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        q = np.asarray(self.quaternions, dtype=float).reshape(-1, 4)
        if t.shape[0] != q.shape[0]:
            raise ValueError("one quaternion per timestamp required")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "quaternions", q)

    def __len__(self) -> int:
        return self.timestamps.shape[0]


def normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def conj(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_from_rodrigues(g) -> np.ndarray:
    """``(2, g) / sqrt(4 + |g|^2)``; accepts ``(3,)`` or ``(K, 3)``."""
    g = np.asarray(g, dtype=float)
    q = np.concatenate([np.full(g.shape[:-1] + (1,), 2.0), g], axis=-1)
    return normalize(q)


def rodrigues_from_quat(q) -> np.ndarray:
    """``2 vec(q) / scalar(q)``; undefined for 180 degree rotations."""
    q = np.asarray(q, dtype=float)
    return 2.0 * q[..., 1:] / q[..., :1]


def quat_compose(a, b) -> np.ndarray:
    """Hamilton product ``a o b``, renormalized. Broadcasts over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, av = a[..., :1], a[..., 1:]
    bw, bv = b[..., :1], b[..., 1:]
    w = aw * bw - np.sum(av * bv, axis=-1, keepdims=True)
    v = aw * bv + bw * av + np.cross(av, bv)
    return normalize(np.concatenate([w, v], axis=-1))


def attitude_error(q_true, q_est) -> np.ndarray | float:
    """``2 |vec(conj(q_true) o q_est)|`` in rad, with the error quaternion
    taken on the nonnegative-scalar hemisphere."""
    dq = quat_compose(conj(q_true), q_est)
    dq = np.where(dq[..., :1] < 0, -dq, dq)
    err = 2.0 * np.linalg.norm(dq[..., 1:], axis=-1)
    return float(err) if np.ndim(err) == 0 else err


def chain_intervals(
    per_interval: Sequence[ChebSeries3],
    t_N: float,
    q_0,
    output_rate_multiplier: int = 10,
    n_samples: int = 8,
    t_0: float = 0.0,
) -> AttitudeTrack:
    """Chain per-interval incremental Rodrigues vectors into a global track.

    Each interval emits ``n_samples * output_rate_multiplier`` uniformly spaced
    attitudes, ending at the interval end; the first sample of the track is
    ``q_0`` at ``t_0``. The interval-end attitude seeds the next interval.
    """
    per = n_samples * output_rate_multiplier
    j = np.arange(1, per + 1)
    tau = 2.0 * j / per - 1.0
    tau[-1] = 1.0
    q_start = normalize(q_0)
    times = [np.array([t_0])]
    quats = [q_start[None, :]]
    for m, g in enumerate(per_interval):
        q_inc = quat_from_rodrigues(g(tau))
        q = quat_compose(q_start, q_inc)
        times.append(t_0 + t_N * (m * per + j) / per)
        quats.append(q)
        q_start = q[-1]
    return AttitudeTrack(np.concatenate(times), np.concatenate(quats), TrackSource.RECONSTRUCTED)
