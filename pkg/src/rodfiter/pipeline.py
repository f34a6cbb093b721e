"""Multi-interval attitude reconstruction from a stream of angular increments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attitude import AttitudeTrack, chain_intervals
from .baseline import run_two_sample
from .chebyshev import ChebSeries3
from .errors import ConvergenceConditionViolated
from .fitting import FitConfig, GyroBatch, SampleKind, fit_angular_velocity
from .iteration import IterConfig, Mode, ReconstructionResult, reconstruct


@dataclass
class IntervalRun:
    omega: ChebSeries3
    result: ReconstructionResult


@dataclass
class TrackRun:
    track: AttitudeTrack
    intervals: list[IntervalRun]
    t_N: float


def split_batches(increments: np.ndarray, dt: float, N: int) -> list[GyroBatch]:
    inc = np.asarray(increments, dtype=float).reshape(-1, 3)
    if inc.shape[0] % N:
        raise ValueError(f"{inc.shape[0]} increments is not a multiple of N={N}")
    return [GyroBatch(SampleKind.INCREMENT, blk, N * dt) for blk in inc.reshape(-1, N, 3)]


def run_rodfiter(
    increments: np.ndarray,
    dt: float,
    q_0,
    N: int = 8,
    n: int | None = None,
    mode: Mode = Mode.TRUNCATED,
    n_T: int | None = None,
    iters: int = 7,
    multiplier: int = 10,
    stop_tol: float | None = None,
) -> TrackRun:
    """Fit, iterate and chain every ``N``-sample interval of ``increments``.

    Defaults: ``n = N - 1`` and ``n_T = n + 1``. Convergence violations are
    re-raised with the offending interval index.
    """
    n = N - 1 if n is None else n
    if mode is Mode.TRUNCATED and n_T is None:
        n_T = n + 1
    t_N = N * dt
    cfg = IterConfig(t_N=t_N, mode=mode, n_T=n_T if mode is Mode.TRUNCATED else None,
                     max_iters=iters, stop_tol=stop_tol)
    fit_cfg = FitConfig(n)
    runs = []
    for m, batch in enumerate(split_batches(increments, dt, N)):
        omega = fit_angular_velocity(batch, fit_cfg)
        try:
            res = reconstruct(omega, cfg)
        except ConvergenceConditionViolated as exc:
            raise ConvergenceConditionViolated(exc.margin, interval=m) from None
        runs.append(IntervalRun(omega, res))
    track = chain_intervals([r.result.final for r in runs], t_N, q_0, multiplier, N)
    return TrackRun(track, runs, t_N)


def run_baseline(increments: np.ndarray, dt: float, q_0) -> AttitudeTrack:
    return run_two_sample(increments, dt, q_0)
