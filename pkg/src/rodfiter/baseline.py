"""Classical two-sample strapdown attitude update.

Rotation vector per update ``phi = d1 + d2 + (2/3) d1 x d2`` (the standard
two-sample coning correction), applied as a body-frame quaternion increment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attitude import AttitudeTrack, TrackSource, normalize, quat_compose


@dataclass(frozen=True)
class TwoSampleState:
    q: np.ndarray
    update_interval: float  # 2h: two sampling periods

    def __post_init__(self):
        object.__setattr__(self, "q", normalize(self.q))


def quat_from_rotation_vector(phi) -> np.ndarray:
    """Exact exponential map ``(cos(|phi|/2), sin(|phi|/2) phi/|phi|)``."""
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi)
    if theta < 1e-8:
        # sin(x/2)/x = 1/2 - x^2/48 + ...
        s = 0.5 - theta * theta / 48.0
        w = 1.0 - theta * theta / 8.0
    else:
        s = np.sin(theta / 2) / theta
        w = np.cos(theta / 2)
    return normalize(np.concatenate([[w], s * phi]))


def two_sample_rotation_vector(d1, d2) -> np.ndarray:
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    return d1 + d2 + (2.0 / 3.0) * np.cross(d1, d2)


def two_sample_update(state: TwoSampleState, d1, d2) -> TwoSampleState:
    phi = two_sample_rotation_vector(d1, d2)
    return TwoSampleState(quat_compose(state.q, quat_from_rotation_vector(phi)), state.update_interval)


def run_two_sample(increments: np.ndarray, dt: float, q_0, t_0: float = 0.0) -> AttitudeTrack:
    """Propagate pairs of increments; one attitude per update (every ``2 dt``).

    An odd trailing increment is ignored.
    """
    inc = np.asarray(increments, dtype=float).reshape(-1, 3)
    state = TwoSampleState(np.asarray(q_0, dtype=float), 2.0 * dt)
    quats = [state.q]
    for k in range(inc.shape[0] // 2):
        state = two_sample_update(state, inc[2 * k], inc[2 * k + 1])
        quats.append(state.q)
    times = t_0 + state.update_interval * np.arange(len(quats))
    return AttitudeTrack(times, np.array(quats), TrackSource.BASELINE)
