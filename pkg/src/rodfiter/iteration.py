"""Picard iteration of the Rodrigues vector in Chebyshev coefficient space.

One step maps the current iterate ``g(tau) = sum_i b_i F_i`` and the fitted
angular velocity ``omega(tau) = sum_k c_k F_k`` to

    (t_N / 2) * int_{-1}^{tau} (I + g x / 2 + g g^T / 4) omega dtau

expanded entirely through the product identity and the basis antiderivatives.
In exact mode the degree grows as ``m -> 2 m + n + 1``; truncated mode keeps
only degrees ``0..n_T`` after every step.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .chebyshev import ChebSeries3, basis_integral_table
from .errors import ConvergenceConditionViolated, NonFinite

SUP_GRID_POINTS = 128


class Mode(enum.Enum):
    EXACT = "exact"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class IterConfig:
    """Iteration settings for one update interval.

    ``n_T`` is the retained degree in truncated mode. Convergence of the
    truncated iteration is guaranteed for ``n_T >= n + 1``; smaller values are
    accepted for truncation sweeps.
    """

    t_N: float
    mode: Mode = Mode.TRUNCATED
    n_T: int | None = None
    max_iters: int = 7
    stop_tol: float | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.t_N > 0:
            raise ValueError("t_N must be positive")
        if self.mode is Mode.TRUNCATED and (self.n_T is None or self.n_T < 0):
            raise ValueError("truncated mode needs a truncation degree n_T >= 0")

    @classmethod
    def exact(cls, t_N: float, **kw) -> "IterConfig":
        return cls(t_N=t_N, mode=Mode.EXACT, **kw)

    @classmethod
    def truncated(cls, t_N: float, n_T: int, **kw) -> "IterConfig":
        return cls(t_N=t_N, mode=Mode.TRUNCATED, n_T=n_T, **kw)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    degree: int
    neglected: float  # |b_{l, n_T+1}|, zero when nothing was dropped
    max_delta: float  # max |coefficient change| vs the previous iterate
    terms: int


@dataclass
class ReconstructionResult:
    final: ChebSeries3
    config: IterConfig
    per_iteration: list[IterationRecord]
    history: list[ChebSeries3]
    term_count: int
    convergence_margin: float  # t_N * sup|omega_hat| / 2
    elapsed: float = 0.0
    converged: bool = field(default=False)

    @property
    def last_neglected(self) -> float:
        return self.per_iteration[-1].neglected


@dataclass(frozen=True)
class _Plan:
    """Index bookkeeping for one (m, n) step; depends only on the degrees."""

    cross_idx: np.ndarray
    iu: np.ndarray
    ju: np.ndarray
    diag_scale: np.ndarray
    pk_idx: np.ndarray
    qk_idx: np.ndarray
    p_out: np.ndarray
    q_out: np.ndarray


def _flat3(idx: np.ndarray) -> np.ndarray:
    return (idx.reshape(-1, 1) * 3 + np.arange(3)).ravel()


@lru_cache(maxsize=64)
def _plan(m: int, n: int) -> _Plan:
    i = np.arange(m + 1)[:, None]
    j = np.arange(n + 1)[None, :]
    cross_idx = np.concatenate([_flat3(i + j), _flat3(np.abs(i - j))])

    # unordered pairs (i <= j) of iterate degrees; F_i F_j F_k depends only on
    # i + j, |i - j| and k
    iu, ju = np.triu_indices(m + 1)
    k = np.arange(n + 1)
    p = (iu + ju)[:, None]
    q = (ju - iu)[:, None]
    pk_idx = _flat3(p * (n + 1) + k)
    qk_idx = _flat3(q * (n + 1) + k)

    pg = np.arange(2 * m + 1)[:, None]
    qg = np.arange(m + 1)[:, None]
    p_out = np.concatenate([_flat3(pg + k), _flat3(np.abs(pg - k))])
    q_out = np.concatenate([_flat3(qg + k), _flat3(np.abs(qg - k))])
    diag_scale = np.where(iu == ju, 0.5, 1.0)[:, None, None]
    return _Plan(cross_idx, iu, ju, diag_scale, pk_idx, qk_idx, p_out, q_out)


def _accumulate(idx: np.ndarray, values: np.ndarray, rows: int, reps: int = 1) -> np.ndarray:
    w = values.ravel()
    if reps > 1:
        w = np.concatenate((w,) * reps)
    return np.bincount(idx, weights=w, minlength=rows * 3).reshape(rows, 3)


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ax, ay, az = a[..., 0], a[..., 1], a[..., 2]
    bx, by, bz = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx], axis=-1)


@lru_cache(maxsize=64)
def _dense_kernel(m: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Step weights for small degrees, already integrated.

    Returns ``(L, X, T)`` with output degree as the last axis such that the
    step is ``L c + sum_ij X_ij (b_i x c_j) + sum_ijk T_ijk b_i (b_j . c_k)``
    before the ``t_N / 2`` factor.
    """
    D = 2 * m + n
    G = basis_integral_table(D).integrate(np.eye(D + 1)).T  # (D+1, D+2)
    i, j = np.meshgrid(np.arange(m + 1), np.arange(n + 1), indexing="ij")
    X = np.zeros((m + 1, n + 1, D + 1))
    np.add.at(X, (i, j, i + j), 0.25)
    np.add.at(X, (i, j, np.abs(i - j)), 0.25)
    i, j, k = np.meshgrid(np.arange(m + 1), np.arange(m + 1), np.arange(n + 1), indexing="ij")
    p, q = i + j, np.abs(i - j)
    T = np.zeros((m + 1, m + 1, n + 1, D + 1))
    for deg in (p + k, np.abs(p - k), q + k, np.abs(q - k)):
        np.add.at(T, (i, j, k, deg), 1.0 / 16.0)
    return G[: n + 1], X @ G, T @ G


DENSE_KERNEL_LIMIT = 150_000


def step_term_count(m: int, n: int) -> int:
    """Weighted terms evaluated by one step from a degree-``m`` iterate."""
    return (n + 1) * (1 + (m + 1) + (m + 1) ** 2)


def _step_dense(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    L, X, T = _dense_kernel(b.shape[0] - 1, c.shape[0] - 1)
    out = L.T @ c
    cr = _cross(b[:, None, :], c[None, :, :])
    out += np.tensordot(X, cr, axes=([0, 1], [0, 1]))
    s = b @ c.T
    out += np.tensordot(T, s, axes=([1, 2], [0, 1])).T @ b
    return out


def _step_scatter(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    m, n = b.shape[0] - 1, c.shape[0] - 1
    D = 2 * m + n  # highest integrand degree
    plan = _plan(m, n)

    w = np.zeros((D + 1, 3))
    w[: n + 1] += c

    # 1/2 from the kinematics, 1/2 from the product identity
    cr = _cross(b[:, None, :], c[None, :, :])
    w += 0.25 * _accumulate(plan.cross_idx, cr, D + 1, reps=2)

    # b_i b_j^T c_k contracted as b_i (b_j . c_k), symmetrized over (i, j)
    s = b @ c.T
    bi, bj = b[plan.iu], b[plan.ju]
    v = bi[:, None, :] * s[plan.ju][:, :, None] + bj[:, None, :] * s[plan.iu][:, :, None]
    v *= plan.diag_scale
    wp = _accumulate(plan.pk_idx, v, (2 * m + 1) * (n + 1))
    wq = _accumulate(plan.qk_idx, v, (m + 1) * (n + 1))
    outer = _accumulate(plan.p_out, wp, D + 1, reps=2)
    outer += _accumulate(plan.q_out, wq, D + 1, reps=2)
    w += outer / 16.0
    return basis_integral_table(D).integrate(w)


def picard_step(
    g: ChebSeries3,
    omega: ChebSeries3,
    t_N: float,
    truncate_to: int | None = None,
    method: str = "auto",
) -> ChebSeries3:
    """One Picard iterate of the Rodrigues vector, in Chebyshev coefficients.

    Returns the full degree ``2 m + n + 1`` series, or its head up to
    ``truncate_to`` when given. ``method`` selects the accumulation route:
    ``"dense"`` contracts precomputed weight tensors (small degrees),
    ``"scatter"`` accumulates term by term into the output degrees; ``"auto"``
    picks by kernel size.
    """
    b = g.coeffs
    c = omega.coeffs
    m, n = b.shape[0] - 1, c.shape[0] - 1
    if method == "auto":
        size = (m + 1) ** 2 * (n + 1) * (2 * m + n + 2)
        method = "dense" if size <= DENSE_KERNEL_LIMIT else "scatter"
    if method == "dense":
        raw = _step_dense(b, c)
    elif method == "scatter":
        raw = _step_scatter(b, c)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = ChebSeries3((0.5 * t_N) * raw)
    if truncate_to is not None and truncate_to < out.degree:
        return out.truncated(truncate_to)
    return out


def sup_norm(s: ChebSeries3, points: int = SUP_GRID_POINTS) -> float:
    """``max |s(tau)|`` over a uniform grid on [-1, 1]."""
    tau = np.linspace(-1.0, 1.0, points)
    return float(np.max(np.linalg.norm(s(tau), axis=1)))


def convergence_margin(omega: ChebSeries3, t_N: float) -> float:
    """``t_N * sup|omega| / 2``; the iteration contracts when this is below 1."""
    return 0.5 * t_N * sup_norm(omega)


def _max_delta(a: np.ndarray, b: np.ndarray) -> float:
    size = max(a.shape[0], b.shape[0])
    d = np.zeros((size, 3))
    d[: a.shape[0]] += a
    d[: b.shape[0]] -= b
    return float(np.max(np.abs(d)))


def reconstruct(omega: ChebSeries3, cfg: IterConfig) -> ReconstructionResult:
    """Iterate from ``g_0 = 0`` and return the incremental Rodrigues vector series.

    Raises :class:`ConvergenceConditionViolated` if ``t_N sup|omega| >= 2`` and
    :class:`NonFinite` if any coefficient blows up.
    """
    start = time.perf_counter()
    margin = convergence_margin(omega, cfg.t_N)
    if not np.isfinite(margin):
        raise NonFinite("angular velocity coefficients are not finite")
    if margin >= 1.0:
        raise ConvergenceConditionViolated(2.0 * margin)

    n = omega.degree
    truncate = cfg.n_T if cfg.mode is Mode.TRUNCATED else None
    g = ChebSeries3.zeros(0)
    records: list[IterationRecord] = []
    history: list[ChebSeries3] = [g]
    terms = 0
    for it in range(1, cfg.max_iters + 1):
        step_terms = step_term_count(g.degree, n)
        full = picard_step(g, omega, cfg.t_N)
        neglected = 0.0
        nxt = full
        if truncate is not None and full.degree > truncate:
            neglected = float(np.linalg.norm(full.coeffs[truncate + 1]))
            nxt = full.truncated(truncate)
        if not np.all(np.isfinite(nxt.coeffs)):
            raise NonFinite(f"non-finite coefficient at iteration {it}")
        delta = _max_delta(nxt.coeffs, g.coeffs)
        terms += step_terms
        records.append(IterationRecord(it, nxt.degree, neglected, delta, step_terms))
        history.append(nxt)
        g = nxt
        if cfg.stop_tol is not None and delta < cfg.stop_tol:
            break
    return ReconstructionResult(
        final=g,
        config=cfg,
        per_iteration=records,
        history=history,
        term_count=terms,
        convergence_margin=margin,
        elapsed=time.perf_counter() - start,
        converged=margin < 1.0,
    )


@dataclass(frozen=True)
class ErrorBound:
    """Rodrigues-vector error estimate for a converged run.

    ``tight`` keeps the ``1 / (1 - t sup|omega| / 2)`` amplification of the
    velocity term; ``approx`` drops it.
    """

    velocity_term: float
    velocity_term_tight: float
    truncation_term: float

    @property
    def tight(self) -> float:
        return self.velocity_term_tight + self.truncation_term

    @property
    def approx(self) -> float:
        return self.velocity_term + self.truncation_term


def truncation_bound(
    result: ReconstructionResult,
    delta_omega_sup: float,
    omega: ChebSeries3 | None = None,
) -> ErrorBound:
    """Error bound from angular-velocity error and the last dropped coefficient.

    ``delta_omega_sup`` is the a-priori bound on ``|delta omega|`` (rad/s), e.g.
    the norm of a known gyro bias. ``omega`` overrides the stored margin.
    """
    t_N = result.config.t_N
    margin = result.convergence_margin if omega is None else convergence_margin(omega, t_N)
    vel = t_N * delta_omega_sup
    return ErrorBound(
        velocity_term=vel,
        velocity_term_tight=vel / (1.0 - margin),
        truncation_term=result.last_neglected,
    )


def iterate_degree(n: int, mode: Mode, iteration: int, n_T: int | None = None) -> int:
    """Degree of the iterate after ``iteration`` steps starting from ``g_0 = 0``."""
    d = 0
    for _ in range(iteration):
        d = 2 * d + n + 1
        if mode is Mode.TRUNCATED:
            d = min(d, n_T)
    return d


def weighted_term_count(
    n: int,
    mode: Mode,
    iters: int,
    n_T: int | None = None,
    cumulative: bool = False,
) -> int:
    """Analytic ``n * d_l**2`` weighted-term count of iteration ``iters``.

    ``d_l`` is the iterate degree at that iteration: ``(2**l - 1)(n + 1)`` in
    exact mode, capped at ``n_T`` in truncated mode. With ``cumulative`` the
    counts of iterations ``1..iters`` are summed.
    """
    if mode is Mode.TRUNCATED and n_T is None:
        raise ValueError("truncated count needs n_T")
    levels = range(1, iters + 1) if cumulative else (iters,)
    return sum(n * iterate_degree(n, mode, l, n_T) ** 2 for l in levels)
