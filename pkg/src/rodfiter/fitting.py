"""Chebyshev fit of the angular velocity over one update interval.

Samples are taken at uniform instants ``t_k = k * t_N / N`` (``k = 1..N``),
mapped to ``tau_k = 2 t_k / t_N - 1``. Rate samples are interpolated at
``tau_k``; angular increments are matched segment by segment on
``[tau_{k-1}, tau_k]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .chebyshev import ChebSeries3, eval_basis, integrate_basis_segment
from .errors import SingularSystem


class SampleKind(enum.Enum):
    RATE = "rate"
    INCREMENT = "increment"


@dataclass(frozen=True)
class GyroBatch:
    """``N`` gyro samples covering one update interval of length ``t_N``.

    ``samples`` are rad/s for :attr:`SampleKind.RATE` and rad for
    :attr:`SampleKind.INCREMENT`.
    """

    kind: SampleKind
    samples: np.ndarray
    t_N: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=float, copy=True).reshape(-1, 3)
        if s.shape[0] < 1:
            raise ValueError("a batch needs at least one sample")
        if not self.t_N > 0:
            raise ValueError("t_N must be positive")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    def times(self) -> np.ndarray:
        """Sample instants ``t_1..t_N`` relative to the interval start."""
        return np.arange(1, self.N + 1) * self.t_N / self.N


@dataclass(frozen=True)
class FitConfig:
    n: int

    def check(self, N: int) -> None:
        if not 0 <= self.n <= N - 1:
            raise ValueError(f"fit degree must satisfy 0 <= n <= N-1 = {N - 1}, got {self.n}")


def mapped_grid(N: int) -> np.ndarray:
    """``tau_0..tau_N`` for ``N`` uniform samples; ``tau_0 = -1``, ``tau_N = 1``."""
    tau = 2.0 * np.arange(N + 1) / N - 1.0
    tau[0], tau[-1] = -1.0, 1.0
    return tau


def build_rate_matrix(tau, n: int) -> np.ndarray:
    """``A[k, i] = F_i(tau_k)`` for the sample instants ``tau_1..tau_N``."""
    tau = np.asarray(tau, dtype=float)
    A = np.empty((tau.size, n + 1))
    for i in range(n + 1):
        A[:, i] = eval_basis(i, tau)
    return A


def build_increment_matrix(tau, n: int) -> np.ndarray:
    """``A[k, i] = int_{tau_{k-1}}^{tau_k} F_i`` for the grid ``tau_0..tau_N``.

    Has ``N = len(tau) - 1`` rows.
    """
    tau = np.asarray(tau, dtype=float)
    if tau.size < 2 or np.any(np.diff(tau) <= 0):
        raise ValueError("increment grid must be strictly increasing with >= 2 points")
    A = np.empty((tau.size - 1, n + 1))
    for i in range(n + 1):
        A[:, i] = integrate_basis_segment(i, tau[:-1], tau[1:])
    return A


class _Solver:
    """Factorisation of a fit matrix, reused across update intervals."""

    def __init__(self, A: np.ndarray):
        self.A = A
        N, p = A.shape
        if np.linalg.matrix_rank(A) < p:
            raise SingularSystem(f"fit matrix of shape {A.shape} is rank-deficient")
        self.square = N == p
        if self.square:
            self._lu = scipy.linalg.lu_factor(A)
        else:
            self._q, self._r = np.linalg.qr(A)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.square:
            return scipy.linalg.lu_solve(self._lu, rhs)
        return scipy.linalg.solve_triangular(self._r, self._q.T @ rhs)


@lru_cache(maxsize=32)
def _cached_solver(kind: SampleKind, N: int, n: int) -> _Solver:
    tau = mapped_grid(N)
    if kind is SampleKind.RATE:
        A = build_rate_matrix(tau[1:], n)
    else:
        A = build_increment_matrix(tau, n)
    A.flags.writeable = False
    return _Solver(A)


def fit_matrix(kind: SampleKind, N: int, n: int) -> np.ndarray:
    """The (cached, read-only) fit matrix for the uniform grid."""
    return _cached_solver(kind, N, n).A


def fit_angular_velocity(batch: GyroBatch, cfg: FitConfig) -> ChebSeries3:
    """Fit ``omega_hat(tau) = sum_{i<=n} c_i F_i(tau)`` to the batch.

    Square systems (``n = N - 1``) are solved exactly by LU; otherwise the
    least-squares solution is returned. Coefficients are in rad/s.
    """
    cfg.check(batch.N)
    solver = _cached_solver(batch.kind, batch.N, cfg.n)
    rhs = batch.samples
    if batch.kind is SampleKind.INCREMENT:
        rhs = rhs * (2.0 / batch.t_N)
    return ChebSeries3(solver.solve(rhs))


def fit_samples(kind: SampleKind, tau, samples, n: int, t_N: float = 2.0) -> ChebSeries3:
    """Fit on an arbitrary grid (``tau_1..tau_N`` for rates, ``tau_0..tau_N`` for increments).

    Raises :class:`SingularSystem` when sample instants coincide.
    """
    tau = np.asarray(tau, dtype=float)
    samples = np.asarray(samples, dtype=float).reshape(-1, 3)
    if kind is SampleKind.RATE:
        A = build_rate_matrix(tau, n)
        rhs = samples
    else:
        if np.any(np.diff(tau) == 0):
            raise SingularSystem("duplicate sample instants")
        A = build_increment_matrix(tau, n)
        rhs = samples * (2.0 / t_N)
    return ChebSeries3(_Solver(A).solve(rhs))
